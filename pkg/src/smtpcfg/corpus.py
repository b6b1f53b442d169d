"""Corpus files, solver processes and the end-to-end per-question pipeline."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import shutil
import subprocess
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from . import evaluation as ev
from . import fusion
from .consistency import (
    AnswerLabel,
    Polarity,
    Verdict,
    map_verdict,
    majority_vote,
)
from .errors import (
    AllMissing,
    DuplicateQuestionId,
    MalformedLine,
    MissingTemperatures,
    SmtPcfgError,
    SolverNotFound,
    SpawnFailure,
)
from .grammar import smt_grammar
from .metrics import METRIC_COLUMNS, VERBOSE_COLUMNS, MetricVector, metric_vector
from .parser import extract_rule_applications, parse_program
from .pcfg import EstimationMethod, PiMode, count_rules
from .tokens import tokenize

RECORD_FIELDS = ("question_id", "dataset", "ground_truth", "samples")
SAMPLE_FIELDS = (
    "sample_id",
    "temperature",
    "smt_program",
    "text_answer",
    "solver_verdict",
    "token_logprobs",
    "token_topk",
)


@dataclass
class SampleRecord:
    sample_id: str
    smt_program: str
    temperature: Optional[float] = None
    text_answer: Optional[AnswerLabel] = None
    solver_verdict: Optional[Verdict] = None
    token_logprobs: Optional[list[float]] = None
    token_topk: Optional[list[list[float]]] = None
    extra: dict[str, Any] = field(default_factory=dict, repr=False)


@dataclass
class CorpusRecord:
    question_id: str
    dataset: str
    ground_truth: AnswerLabel
    samples: list[SampleRecord]
    extra: dict[str, Any] = field(default_factory=dict, repr=False)


# --- loading and dumping ----------------------------------------------------


def _num(v, what):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ValueError(f"{what} must be a finite number")
    return float(v)


def _parse_sample(obj: Any, k: int) -> SampleRecord:
    if not isinstance(obj, dict):
        raise ValueError(f"samples[{k}] is not an object")
    for key in ("sample_id", "smt_program"):
        if not isinstance(obj.get(key), str):
            raise ValueError(f"samples[{k}].{key} must be a string")
    temp = obj.get("temperature")
    if temp is not None:
        temp = _num(temp, f"samples[{k}].temperature")
        if temp < 0:
            raise ValueError(f"samples[{k}].temperature is negative")
    text = obj.get("text_answer")
    if text is not None:
        text = AnswerLabel.parse(text)
    verdict = obj.get("solver_verdict")
    if verdict is not None:
        try:
            verdict = Verdict(verdict)
        except ValueError:
            raise ValueError(f"samples[{k}].solver_verdict {verdict!r} is not a verdict") from None
    lps = obj.get("token_logprobs")
    if lps is not None:
        if not isinstance(lps, list):
            raise ValueError(f"samples[{k}].token_logprobs must be a list")
        lps = [_num(v, f"samples[{k}].token_logprobs") for v in lps]
        if any(v > 0 for v in lps):
            raise ValueError(f"samples[{k}].token_logprobs has a positive entry")
    topk = obj.get("token_topk")
    if topk is not None:
        if not isinstance(topk, list) or not all(isinstance(d, list) for d in topk):
            raise ValueError(f"samples[{k}].token_topk must be a list of lists")
        topk = [[_num(v, f"samples[{k}].token_topk") for v in d] for d in topk]
        for d in topk:
            if any(v < 0 for v in d) or sum(d) > 1 + 1e-6:
                raise ValueError(f"samples[{k}].token_topk entry is not a sub-probability list")
    extra = {key: v for key, v in obj.items() if key not in SAMPLE_FIELDS}
    return SampleRecord(obj["sample_id"], obj["smt_program"], temp, text, verdict, lps, topk, extra)


def parse_record(obj: Any) -> CorpusRecord:
    if not isinstance(obj, dict):
        raise ValueError("record is not a JSON object")
    for key in ("question_id", "dataset"):
        if not isinstance(obj.get(key), str):
            raise ValueError(f"{key} must be a string")
    if "ground_truth" not in obj:
        raise ValueError("ground_truth is missing")
    truth = AnswerLabel.parse(obj["ground_truth"])
    samples = obj.get("samples")
    if not isinstance(samples, list) or not samples:
        raise ValueError("samples must be a nonempty list")
    parsed = [_parse_sample(s, k) for k, s in enumerate(samples)]
    extra = {key: v for key, v in obj.items() if key not in RECORD_FIELDS}
    return CorpusRecord(obj["question_id"], obj["dataset"], truth, parsed, extra)


def read_corpus(lines: Iterable[str]) -> list[CorpusRecord]:
    records, seen = [], {}
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            rec = parse_record(json.loads(line))
        except (ValueError, json.JSONDecodeError) as exc:
            raise MalformedLine(lineno, str(exc)) from None
        if rec.question_id in seen:
            raise DuplicateQuestionId(lineno, rec.question_id)
        seen[rec.question_id] = lineno
        records.append(rec)
    return records


def load_corpus(path: str | os.PathLike) -> list[CorpusRecord]:
    with open(path, encoding="utf-8") as fh:
        return read_corpus(fh)


def sample_to_json(s: SampleRecord) -> dict:
    d = dict(s.extra)
    d.update(
        sample_id=s.sample_id,
        temperature=s.temperature,
        smt_program=s.smt_program,
        text_answer=None if s.text_answer is None else s.text_answer.value,
        solver_verdict=None if s.solver_verdict is None else s.solver_verdict.value,
        token_logprobs=s.token_logprobs,
        token_topk=s.token_topk,
    )
    return d


def record_to_json(r: CorpusRecord) -> dict:
    d = dict(r.extra)
    d.update(
        question_id=r.question_id,
        dataset=r.dataset,
        ground_truth=r.ground_truth.value,
        samples=[sample_to_json(s) for s in r.samples],
    )
    return d


def dumps_record(r: CorpusRecord) -> str:
    """Canonical line: sorted keys, compact separators, every schema field present (null when absent)."""
    return json.dumps(record_to_json(r), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def dump_corpus(records: Sequence[CorpusRecord], path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for r in records:
            fh.write(dumps_record(r) + "\n")


# --- configuration ----------------------------------------------------------


@dataclass
class RunConfig:
    method: str = "lidstone:1"
    pi_mode: str = "empirical"
    polarity: str = "direct"
    ensemble_subset: tuple[str, ...] = fusion.DEFAULT_SUBSET
    folds: int = 5
    seed: int = 0
    validation_fraction: float = 0.3
    grid: tuple[float, ...] = ev.DEFAULT_GRID
    solver_command: Optional[tuple[str, ...]] = None
    solver_timeout: float = 10.0
    out: str = "out"
    jobs: int = 1

    def __post_init__(self):
        EstimationMethod.parse(self.method)
        PiMode(self.pi_mode)
        Polarity(self.polarity)
        self.ensemble_subset = tuple(self.ensemble_subset)
        self.grid = tuple(float(g) for g in self.grid)
        if isinstance(self.solver_command, str):
            self.solver_command = tuple(self.solver_command.split())
        elif self.solver_command is not None:
            self.solver_command = tuple(self.solver_command)
        if self.folds < 2 or self.jobs < 1 or self.solver_timeout <= 0:
            raise ValueError("folds >= 2, jobs >= 1 and a positive solver timeout are required")
        if not 0 < self.validation_fraction < 1:
            raise ValueError("validation_fraction must lie in (0, 1)")
        if any(not 0 <= g <= 0.5 for g in self.grid):
            raise ValueError("abstention fractions must lie in [0, 0.5]")

    @property
    def estimation(self) -> EstimationMethod:
        return EstimationMethod.parse(self.method)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


# --- solver -----------------------------------------------------------------


def run_solver(program: str, config: RunConfig) -> Verdict:
    """Feed ``program`` on stdin to the configured solver and read its first output line."""
    if not config.solver_command:
        raise SolverNotFound("no solver command configured")
    exe = shutil.which(config.solver_command[0])
    if exe is None:
        raise SolverNotFound(config.solver_command[0])
    if not program.strip():
        raise ValueError("empty program")
    try:
        proc = subprocess.run(
            [exe, *config.solver_command[1:]],
            input=program,
            capture_output=True,
            text=True,
            timeout=config.solver_timeout,
        )
    except subprocess.TimeoutExpired:
        return Verdict.TIMEOUT
    except OSError as exc:
        raise SpawnFailure(str(exc)) from exc
    if proc.returncode != 0:
        return Verdict.ERROR
    for line in proc.stdout.splitlines():
        if line.strip():
            word = line.strip()
            return Verdict(word) if word in ("sat", "unsat", "unknown") else Verdict.ERROR
    return Verdict.ERROR


def solve_corpus(records: Sequence[CorpusRecord], config: RunConfig, overwrite: bool = False) -> list[CorpusRecord]:
    """Copy of ``records`` with missing solver verdicts filled in."""
    todo = [(i, j) for i, r in enumerate(records) for j, s in enumerate(r.samples) if overwrite or s.solver_verdict is None]
    programs = [records[i].samples[j].smt_program for i, j in todo]

    def solve(p: str) -> Verdict:
        return run_solver(p, config) if p.strip() else Verdict.ERROR

    with ThreadPoolExecutor(max_workers=config.jobs) as pool:
        verdicts = list(pool.map(solve, programs))
    out = [replace(r, samples=list(r.samples)) for r in records]
    for (i, j), v in zip(todo, verdicts):
        out[i].samples[j] = replace(out[i].samples[j], solver_verdict=v)
    return out


# --- per-question analysis --------------------------------------------------


@dataclass
class ParseStats:
    parsed: int
    failed: int
    errors: list[str] = field(default_factory=list)


def parse_samples(samples: Sequence[SampleRecord]):
    """Rule applications of every sample that parses, plus failure diagnostics."""
    g = smt_grammar()
    apps, errors = [], []
    for s in samples:
        try:
            tree = parse_program(tokenize(s.smt_program), s.sample_id)
        except SmtPcfgError as exc:
            errors.append(f"{s.sample_id}: {exc}")
            continue
        apps.extend(extract_rule_applications(tree))
    n_ok = len(samples) - len(errors)
    return count_rules(apps, g, n_ok, len(errors)), ParseStats(n_ok, len(errors), errors)


def _agreement(answers) -> Optional[float]:
    try:
        return majority_vote(answers).agreement
    except AllMissing:
        return None


def _winner(answers) -> Optional[AnswerLabel]:
    try:
        return majority_vote(answers).winner
    except AllMissing:
        return None


def _error_ratio(answers, truth: AnswerLabel) -> float:
    """Share of samples whose answer is not the ground truth; missing answers count as wrong."""
    return sum(a != truth for a in answers) / len(answers)


@dataclass
class QuestionResult:
    question_id: str
    dataset: str
    parsed: int
    failed: int
    metrics: Optional[MetricVector] = None
    correct_ground_truth: Optional[bool] = None
    correct_consistency: Optional[bool] = None
    text_error_ratio: Optional[float] = None
    smt_error_ratio: Optional[float] = None
    excluded: Optional[str] = None


def analyze_question(record: CorpusRecord, config: RunConfig, samples: Optional[Sequence[SampleRecord]] = None) -> QuestionResult:
    samples = record.samples if samples is None else samples
    counts, stats = parse_samples(samples)
    res = QuestionResult(record.question_id, record.dataset, stats.parsed, stats.failed)
    polarity = Polarity(config.polarity)
    text = [s.text_answer for s in samples]
    smt = [map_verdict(s.solver_verdict, polarity) for s in samples]
    tokens = [(s.token_logprobs, s.token_topk) for s in samples]
    try:
        res.metrics = metric_vector(
            counts,
            config.estimation,
            PiMode(config.pi_mode),
            self_consistency_text=_agreement(text),
            self_consistency_smt=_agreement(smt),
            token_records=tokens,
        )
    except SmtPcfgError as exc:
        res.excluded = f"{type(exc).__name__}: {exc}"
        return res
    smt_major, text_major = _winner(smt), _winner(text)
    # an undefined SMT majority is a failed formalization: incorrect on both tasks
    res.correct_ground_truth = smt_major is not None and smt_major == record.ground_truth
    if smt_major is None:
        res.correct_consistency = False
    elif text_major is not None:
        res.correct_consistency = smt_major == text_major
    res.text_error_ratio = _error_ratio(text, record.ground_truth)
    res.smt_error_ratio = _error_ratio(smt, record.ground_truth)
    return res


def _analyze_one(args):
    record, config = args
    return analyze_question(record, config)


def analyze_questions(records: Sequence[CorpusRecord], config: RunConfig) -> list[QuestionResult]:
    """Per-question results sorted by question_id, parallel across ``config.jobs`` processes."""
    work = [(r, config) for r in records]
    if config.jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_analyze_one, work, chunksize=max(1, len(work) // (4 * config.jobs))))
    else:
        results = [_analyze_one(w) for w in work]
    return sorted(results, key=lambda r: r.question_id)


# --- reports ----------------------------------------------------------------

TASKS = ("ground_truth", "consistency")
ENSEMBLES = ("ensemble_simple", "ensemble_average", "ensemble_weighted", "ensemble_ml")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.12g}"


def metrics_csv(results: Sequence[QuestionResult], verbose: bool = False) -> str:
    cols = METRIC_COLUMNS + (VERBOSE_COLUMNS if verbose else ())
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("question_id", "dataset", "parsed", "failed") + cols)
    for r in results:
        if r.metrics is None:
            continue
        d = r.metrics.as_dict(verbose=True)
        w.writerow([r.question_id, r.dataset, r.parsed, r.failed] + [_fmt(d[c]) for c in cols])
    return buf.getvalue()


def labels_csv(results: Sequence[QuestionResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["question_id", "correct_ground_truth", "correct_consistency", "text_error_ratio", "smt_error_ratio"])
    for r in results:
        if r.excluded is None:
            w.writerow(
                [r.question_id]
                + [_fmt(v) for v in (r.correct_ground_truth, r.correct_consistency, r.text_error_ratio, r.smt_error_ratio)]
            )
    return buf.getvalue()


def exclusions_csv(results: Sequence[QuestionResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["question_id", "parsed", "failed", "reason"])
    for r in results:
        if r.excluded is not None:
            w.writerow([r.question_id, r.parsed, r.failed, r.excluded])
    return buf.getvalue()


def evaluate_task(
    task: str, results: Sequence[QuestionResult], config: RunConfig
) -> tuple[ev.EvaluationReport, Optional[fusion.OutOfFold], Optional[fusion.FeatureMatrix]]:
    """Evaluate every metric column and the four ensembles against one label set."""
    attr = "correct_ground_truth" if task == "ground_truth" else "correct_consistency"
    rows = [r for r in results if r.metrics is not None and getattr(r, attr) is not None]
    report = ev.EvaluationReport(task)
    report.notes.append("confidence = 1 - minmax(oriented uncertainty); ensemble_ml scored out-of-fold")
    if len(rows) < 2:
        report.notes.append(f"skipped: {len(rows)} labelled questions")
        return report, None, None
    correct = np.array([getattr(r, attr) for r in rows], dtype=bool)
    if correct.all() or not correct.any():
        report.notes.append("skipped: labels hold a single class")
        return report, None, None
    dicts = [r.metrics.as_dict() for r in rows]
    orient = fusion.default_orientation(METRIC_COLUMNS)

    def add(name, scores, c):
        try:
            report.rows.append(ev.evaluate_signal(name, scores, c, grid=config.grid))
        except SmtPcfgError as exc:
            report.notes.append(f"{name}: {type(exc).__name__}: {exc}")

    for col in METRIC_COLUMNS:
        vals = np.array([np.nan if d[col] is None else float(d[col]) for d in dicts])
        keep = ~np.isnan(vals)
        if keep.sum() < 2:
            report.notes.append(f"{col}: no values")
            continue
        sign = -1.0 if orient[col] is fusion.Orientation.LOWER_MORE_UNCERTAIN else 1.0
        add(col, sign * vals[keep], correct[keep])

    matrix = fusion.build_feature_matrix(dicts, METRIC_COLUMNS, row_ids=[r.question_id for r in rows])
    subset = [c for c in config.ensemble_subset if c in matrix.columns]
    if subset:
        add("ensemble_simple", fusion.ensemble_simple(matrix, subset), correct)
    add("ensemble_average", fusion.ensemble_average(matrix), correct)
    try:
        val = fusion.validation_split(correct, config.validation_fraction, config.seed)
        add("ensemble_weighted", fusion.ensemble_weighted(matrix, correct, val)[0], correct)
    except SmtPcfgError as exc:
        report.notes.append(f"ensemble_weighted: {type(exc).__name__}: {exc}")
    oof = None
    try:
        oof = fusion.ensemble_ml(matrix, correct, config.folds, config.seed)
        add("ensemble_ml", oof.scores, correct)
    except SmtPcfgError as exc:
        report.notes.append(f"ensemble_ml: {type(exc).__name__}: {exc}")
    return report, oof, matrix


@dataclass
class Analysis:
    results: list[QuestionResult]
    reports: dict[str, ev.EvaluationReport]
    folds: dict[str, str]

    def files(self) -> dict[str, str]:
        """Relative path -> content for everything ``write`` emits."""
        out = {
            "metrics.csv": metrics_csv(self.results),
            "labels.csv": labels_csv(self.results),
            "exclusions.csv": exclusions_csv(self.results),
        }
        for task, rep in self.reports.items():
            out[f"report_{task}.csv"] = rep.to_csv()
            out[f"report_{task}.json"] = rep.to_json()
            for row in rep.rows:
                out[f"reliability/{task}/{row.signal}.csv"] = rep.reliability_csv(row.signal)
        for task, text in self.folds.items():
            out[f"folds_{task}.csv"] = text
        return out

    def write(self, out_dir: str | os.PathLike) -> list[Path]:
        root = Path(out_dir)
        written = []
        for rel, text in sorted(self.files().items()):
            p = root / rel
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_text(text, encoding="utf-8", newline="\n")
            written.append(p)
        return written


def analyze(records: Sequence[CorpusRecord], config: RunConfig) -> Analysis:
    results = analyze_questions(records, config)
    reports, folds = {}, {}
    for task in TASKS:
        rep, oof, matrix = evaluate_task(task, results, config)
        reports[task] = rep
        if oof is not None:
            folds[task] = oof.folds_csv(matrix.row_ids)
    return Analysis(results, reports, folds)


# --- temperature sweep ------------------------------------------------------


def group_by_temperature(records: Sequence[CorpusRecord], config: RunConfig) -> str:
    """Metric-vs-temperature CSV with one row per (question, exact temperature)."""
    if not any(s.temperature is not None for r in records for s in r.samples):
        raise MissingTemperatures("no sample carries a temperature")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("question_id", "temperature", "samples", "parsed", "failed") + METRIC_COLUMNS)
    for r in sorted(records, key=lambda r: r.question_id):
        groups: dict[float, list[SampleRecord]] = {}
        for s in r.samples:
            if s.temperature is None:
                raise MissingTemperatures(f"{r.question_id}/{s.sample_id} has no temperature")
            groups.setdefault(s.temperature, []).append(s)
        for t in sorted(groups):
            res = analyze_question(r, config, groups[t])
            if res.metrics is None:
                continue
            d = res.metrics.as_dict()
            w.writerow([r.question_id, _fmt(t), len(groups[t]), res.parsed, res.failed] + [_fmt(d[c]) for c in METRIC_COLUMNS])
    return buf.getvalue()


def parse_report(records: Sequence[CorpusRecord]) -> tuple[str, int, int]:
    """Per-question parse failure CSV plus total parsed / failed counts."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["question_id", "samples", "parsed", "failed", "first_error"])
    tot_ok = tot_bad = 0
    for r in sorted(records, key=lambda r: r.question_id):
        _, st = parse_samples(r.samples)
        tot_ok += st.parsed
        tot_bad += st.failed
        w.writerow([r.question_id, len(r.samples), st.parsed, st.failed, st.errors[0] if st.errors else ""])
    return buf.getvalue(), tot_ok, tot_bad



def bundled_corpus_path() -> Path:
    """Path of the synthetic corpus shipped with the package."""
    from importlib.resources import files

    return Path(str(files("smtpcfg") / "data" / "synthetic.jsonl"))
