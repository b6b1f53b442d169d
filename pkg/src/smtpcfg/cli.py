"""Command-line entry point: ``smtpcfg <command> ...``."""

from __future__ import annotations

import argparse
import csv
import io
import sys
from collections import defaultdict
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import corpus as cp
from . import coverage as cov
from . import evaluation as ev
from . import fusion
from .consistency import AnswerLabel, Polarity, majority_vote, map_verdict
from .errors import AllMissing, CorpusError, SmtPcfgError
from .metrics import METRIC_COLUMNS

EXIT_OK, EXIT_USAGE, EXIT_CORPUS, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--jobs", type=int)


def _config(args) -> cp.RunConfig:
    cfg = cp.RunConfig.load(args.config) if args.config else cp.RunConfig()
    overrides = {k: getattr(args, k) for k in ("seed", "out", "jobs") if getattr(args, k, None) is not None}
    return replace(cfg, **overrides)


def _emit(text: str, out: Optional[str], name: str) -> None:
    if out:
        path = Path(out) / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8", newline="\n")
        print(f"wrote {path}")
    else:
        sys.stdout.write(text)


# --- commands ---------------------------------------------------------------


def cmd_parse(args) -> int:
    records = cp.load_corpus(args.corpus)
    table, ok, bad = cp.parse_report(records)
    total = ok + bad
    _emit(table, args.out, "parse_report.csv")
    rate = bad / total if total else 0.0
    print(f"programs {total}  parsed {ok}  failed {bad}  failure_rate {rate:.4f}", file=sys.stderr)
    return EXIT_OK


def cmd_metrics(args) -> int:
    cfg = _config(args)
    results = cp.analyze_questions(cp.load_corpus(args.corpus), cfg)
    _emit(cp.metrics_csv(results, verbose=args.verbose), args.out, "metrics.csv")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    cfg = _config(args)
    analysis = cp.analyze(cp.load_corpus(args.corpus), cfg)
    out = args.out
    for task, rep in analysis.reports.items():
        if out:
            _emit(rep.to_csv(), out, f"report_{task}.csv")
            _emit(rep.to_json(), out, f"report_{task}.json")
            for row in rep.rows:
                _emit(rep.reliability_csv(row.signal), out, f"reliability/{task}/{row.signal}.csv")
        else:
            print(f"# task: {task}")
            sys.stdout.write(rep.to_csv())
    return EXIT_OK


def cmd_analyze(args) -> int:
    cfg = _config(args)
    analysis = cp.analyze(cp.load_corpus(args.corpus), cfg)
    for p in analysis.write(cfg.out):
        print(f"wrote {p}")
    return EXIT_OK


def cmd_fuse(args) -> int:
    cfg = _config(args)
    results = cp.analyze_questions(cp.load_corpus(args.corpus), cfg)
    attr = "correct_ground_truth" if args.task == "ground_truth" else "correct_consistency"
    rows = [r for r in results if r.metrics is not None and getattr(r, attr) is not None]
    if not rows:
        raise SmtPcfgError("no labelled questions to train on")
    correct = np.array([getattr(r, attr) for r in rows], dtype=bool)
    matrix = fusion.build_feature_matrix([r.metrics.as_dict() for r in rows], METRIC_COLUMNS, row_ids=[r.question_id for r in rows])
    model = fusion.train_logistic(matrix.zscored(), correct)
    oof = fusion.ensemble_ml(matrix, correct, cfg.folds, cfg.seed)
    auc = ev.auroc(oof.scores, correct)
    scaler = io.StringIO()
    w = csv.writer(scaler, lineterminator="\n")
    w.writerow(["feature", "orientation", "median", "mean", "std"])
    for c in matrix.columns:
        s = matrix.stats[c]
        w.writerow([c, s.orientation.value, f"{s.median:.17g}", f"{s.mean:.17g}", f"{s.std:.17g}"])
    _emit(model.export(), cfg.out, "model.txt")
    _emit(scaler.getvalue(), cfg.out, "scaler.csv")
    _emit(oof.folds_csv(matrix.row_ids), cfg.out, "folds.csv")
    print(f"iterations {model.iterations}  out-of-fold auroc {auc:.6f}", file=sys.stderr)
    return EXIT_OK


def cmd_solve(args) -> int:
    cfg = _config(args)
    if args.solver:
        cfg = replace(cfg, solver_command=tuple(args.solver.split()))
    if args.timeout:
        cfg = replace(cfg, solver_timeout=args.timeout)
    records = cp.load_corpus(args.corpus)
    solved = cp.solve_corpus(records, cfg, overwrite=args.overwrite)
    cp.dump_corpus(solved, args.output)
    print(f"wrote {args.output}", file=sys.stderr)
    return EXIT_OK


def benchmark_table(records: Sequence[cp.CorpusRecord], polarity: Polarity = Polarity.DIRECT) -> str:
    """Confusion matrix of SMT majority answers against ground truth, per (dataset, model).

    True is the positive class. An Unknown or missing majority counts as a
    wrong answer: a false negative when the truth is True, else a false positive.
    """
    cells: dict[tuple[str, str], list[int]] = defaultdict(lambda: [0, 0, 0, 0])
    for r in records:
        if r.ground_truth is AnswerLabel.UNKNOWN:
            continue
        try:
            pred = majority_vote([map_verdict(s.solver_verdict, polarity) for s in r.samples]).winner
        except AllMissing:
            pred = None
        key = (r.dataset, str(r.extra.get("model", "")))
        truth = r.ground_truth is AnswerLabel.TRUE
        if pred is AnswerLabel.TRUE:
            cells[key][0 if truth else 2] += 1
        elif pred is AnswerLabel.FALSE:
            cells[key][3 if truth else 1] += 1
        else:
            cells[key][3 if truth else 2] += 1
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["dataset", "model", "accuracy", "precision", "recall", "f1", "tp", "tn", "fp", "fn"])
    for (ds, model), (tp, tn, fp, fn) in sorted(cells.items()):
        st = ev.confusion_stats(ev.ConfusionMatrix(tp, tn, fp, fn))
        w.writerow([ds, model] + [f"{v:.4f}" for v in (st.accuracy, st.precision, st.recall, st.f1)] + [tp, tn, fp, fn])
    return buf.getvalue()


def cmd_benchmark(args) -> int:
    cfg = _config(args)
    table = benchmark_table(cp.load_corpus(args.corpus), Polarity(cfg.polarity))
    _emit(table, args.out, "benchmark.csv")
    return EXIT_OK


def coverage_table(ns: Sequence[int], hs: Sequence[float]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["N", "H", "epsilon_exact", "epsilon_asymptotic", "bound_at_epsilon"])
    for n in ns:
        for h in hs:
            ce = cov.critical_epsilon(n, h)
            bound = cov.miss_probability_bound(cov.CoverageQuery(n, h, ce.exact))
            asym = "" if ce.asymptotic is None else f"{ce.asymptotic:.10g}"
            w.writerow([n, f"{h:g}", f"{ce.exact:.10g}", asym, f"{bound:.10g}"])
    return buf.getvalue()


def cmd_coverage(args) -> int:
    _emit(coverage_table(args.N, args.H), args.out, "coverage.csv")
    return EXIT_OK


def cmd_schedule(args) -> int:
    if args.kind == "gaussian":
        s = cov.gaussian_schedule(args.n, args.tau_min, args.tau_max, args.sigma)
    elif args.kind == "exponential":
        if args.lam is None:
            raise UsageError("--lam is required for the exponential schedule")
        s = cov.exponential_schedule(args.n, args.lam, args.tau_min, args.tau_max)
    else:
        s = cov.uniform_schedule(args.n, args.tau_min, args.tau_max)
    _emit(s.to_csv(), args.out, f"schedule_{args.kind}.csv")
    return EXIT_OK


def cmd_temperature(args) -> int:
    cfg = _config(args)
    _emit(cp.group_by_temperature(cp.load_corpus(args.corpus), cfg), args.out, "temperature.csv")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="smtpcfg", description="PCFG uncertainty metrics for ensembles of SMT-LIB programs")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def corpus_cmd(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("corpus", help="JSONL corpus file")
        _common(sp)
        sp.set_defaults(fn=fn)
        return sp

    corpus_cmd("parse", cmd_parse, "syntax-check every program and report failures")
    corpus_cmd("metrics", cmd_metrics, "per-question metric CSV").add_argument("--verbose", action="store_true")
    corpus_cmd("evaluate", cmd_evaluate, "evaluation reports for both prediction tasks")
    corpus_cmd("analyze", cmd_analyze, "full pipeline, all reports written to --out")
    fu = corpus_cmd("fuse", cmd_fuse, "train and export the logistic meta-model")
    fu.add_argument("--task", choices=cp.TASKS, default="ground_truth")
    so = corpus_cmd("solve", cmd_solve, "fill solver verdicts into a new corpus file")
    so.add_argument("--output", required=True)
    so.add_argument("--solver", help="solver command line, e.g. 'z3 -in'")
    so.add_argument("--timeout", type=float)
    so.add_argument("--overwrite", action="store_true")
    corpus_cmd("benchmark", cmd_benchmark, "confusion-matrix table per dataset and model")
    corpus_cmd("temperature", cmd_temperature, "metrics per (question, temperature)")

    c = sub.add_parser("coverage", help="critical region mass table")
    c.add_argument("--N", type=int, nargs="+", default=[10, 100, 1000])
    c.add_argument("--H", type=float, nargs="+", default=[0.0, 1.0, 3.0])
    _common(c)
    c.set_defaults(fn=cmd_coverage)

    s = sub.add_parser("schedule", help="temperature schedule CSV")
    s.add_argument("--kind", choices=["gaussian", "exponential", "uniform"], default="gaussian")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--tau-min", type=float, default=0.1)
    s.add_argument("--tau-max", type=float, default=1.5)
    s.add_argument("--sigma", type=float)
    s.add_argument("--lam", type=float)
    _common(s)
    s.set_defaults(fn=cmd_schedule)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.fn(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CorpusError, FileNotFoundError) as exc:
        print(f"corpus error: {exc}", file=sys.stderr)
        return EXIT_CORPUS
    except (ValueError, TypeError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SmtPcfgError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
