"""Scoring uncertainty signals against binary correctness labels.

Scores are uncertainties: a good signal ranks incorrect instances higher.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyInput, EmptyMatrix, InsufficientData, SingleClass

DEFAULT_GRID = tuple(i / 20 for i in range(11))  # 0.00, 0.05, ..., 0.50
DEFAULT_BINS = 10


def _as_arrays(scores, correct) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=float)
    c = np.asarray(correct, dtype=bool)
    if s.shape != c.shape or s.ndim != 1:
        raise ValueError("scores and labels must be equal-length 1-d sequences")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores must be finite")
    return s, c


def average_ranks(x: np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing their mean rank."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    order = np.argsort(x, kind="mergesort")
    xs = x[order]
    boundary = np.r_[True, xs[1:] != xs[:-1]]
    starts = np.flatnonzero(boundary)
    ends = np.r_[starts[1:], n]
    group = np.cumsum(boundary) - 1
    ranks = np.empty(n)
    ranks[order] = ((starts + ends + 1) / 2.0)[group]
    return ranks


def auroc(scores, correct) -> float:
    """Mann-Whitney estimate of P(score_incorrect > score_correct), ties count 1/2."""
    s, c = _as_arrays(scores, correct)
    pos = ~c
    n_pos, n_neg = int(pos.sum()), int(c.sum())
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("AUROC needs both correct and incorrect instances")
    r = average_ranks(s)
    return float((r[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


@dataclass(frozen=True)
class BinRow:
    lower: float
    upper: float
    count: int
    confidence: Optional[float]
    accuracy: Optional[float]


@dataclass
class Calibration:
    ece: float
    brier: float
    table: list[BinRow]


def bin_edges(bins: int = DEFAULT_BINS) -> list[float]:
    return [i / bins for i in range(bins + 1)]


def calibration(confidences, correct, bins: int = DEFAULT_BINS) -> Calibration:
    """Equal-width bins over [0, 1], left-closed, the last bin also closed on the right."""
    conf = np.asarray(confidences, dtype=float)
    c = np.asarray(correct, dtype=float)
    if conf.size == 0:
        raise EmptyInput("calibration needs at least one instance")
    if np.any((conf < 0) | (conf > 1)) or not np.all(np.isfinite(conf)):
        raise ValueError("confidences must lie in [0, 1]")
    edges = np.asarray(bin_edges(bins))
    idx = np.clip(np.searchsorted(edges, conf, side="right") - 1, 0, bins - 1)
    n = len(conf)
    ece = 0.0
    table = []
    for b in range(bins):
        mask = idx == b
        nb = int(mask.sum())
        if nb:
            cb, ab = float(conf[mask].mean()), float(c[mask].mean())
            ece += nb / n * abs(ab - cb)
            table.append(BinRow(edges[b], edges[b + 1], nb, cb, ab))
        else:
            table.append(BinRow(edges[b], edges[b + 1], 0, None, None))
    brier = float(np.mean((conf - c) ** 2))
    return Calibration(float(ece), brier, table)


def minmax(values) -> np.ndarray:
    """Scale to [0, 1]; a constant input maps to 0.5 everywhere."""
    v = np.asarray(values, dtype=float)
    lo, hi = v.min(), v.max()
    if hi - lo <= 0:
        return np.full_like(v, 0.5)
    return (v - lo) / (hi - lo)


def confidence_from_uncertainty(scores) -> np.ndarray:
    return 1.0 - minmax(scores)


@dataclass
class RiskCoverage:
    coverage: np.ndarray
    risk: np.ndarray
    aurc: float


def risk_coverage(scores, correct) -> RiskCoverage:
    """Risk after keeping the k most confident instances, k = 1..n (stable on ties)."""
    s, c = _as_arrays(scores, correct)
    n = len(s)
    if n < 1:
        raise EmptyInput("risk-coverage needs instances")
    order = np.argsort(s, kind="stable")
    errors = np.cumsum(~c[order])
    k = np.arange(1, n + 1)
    risk = errors / k
    return RiskCoverage(k / n, risk, float(risk.mean()))


@dataclass
class SelectiveResult:
    opt_t: float
    err_at_t: float
    rel_err_red: float
    curve: list[tuple[float, float]] = field(default_factory=list)


def selective_prediction(scores, correct, grid: Sequence[float] = DEFAULT_GRID) -> SelectiveResult:
    """Abstain on the ceil(f n) most uncertain instances for each grid fraction f.

    When the abstention boundary splits a group of tied scores, the retained
    part of that group is charged its average error rate, which is the
    expected error under a uniformly random tie order.
    """
    s, c = _as_arrays(scores, correct)
    n = len(s)
    if n < 2:
        raise InsufficientData("selective prediction needs n >= 2")
    order = np.argsort(s, kind="stable")
    ss, err = s[order], (~c[order]).astype(float)
    boundary = np.r_[True, ss[1:] != ss[:-1]]
    group = np.cumsum(boundary) - 1
    group_start = np.flatnonzero(boundary)
    group_size = np.diff(np.r_[group_start, n])
    group_err = np.bincount(group, weights=err)
    cum_err = np.r_[0.0, np.cumsum(group_err)]

    def retained_error(m: int) -> float:
        if m == n:
            return cum_err[-1] / n
        g = group[m]  # first group not fully retained
        taken = m - group_start[g]
        e = cum_err[g] + group_err[g] * taken / group_size[g]
        return e / m

    base = retained_error(n)
    curve = []
    for f in grid:
        k = math.ceil(Fraction(str(f)) * n)
        m = max(n - k, 1)
        curve.append((float(f), float(retained_error(m))))
    if base <= 0:
        return SelectiveResult(0.0, 0.0, 0.0, curve)
    best = (0.0, base, 0.0)
    for f, e in curve:
        red = (base - e) / base
        if red > best[2] + 1e-12:
            best = (f, e, red)
    return SelectiveResult(best[0], float(best[1]), float(best[2]), curve)


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


@dataclass(frozen=True)
class ConfusionStats:
    accuracy: float
    precision: float
    recall: float
    f1: float


def confusion_stats(m: ConfusionMatrix) -> ConfusionStats:
    if m.total <= 0:
        raise EmptyMatrix("confusion matrix is empty")
    acc = (m.tp + m.tn) / m.total
    prec = m.tp / (m.tp + m.fp) if m.tp + m.fp > 0 else 0.0
    rec = m.tp / (m.tp + m.fn) if m.tp + m.fn > 0 else 0.0
    f1 = 2 * prec * rec / (prec + rec) if prec + rec > 0 else 0.0
    return ConfusionStats(acc, prec, rec, f1)


@dataclass
class ErrorRatioAnalysis:
    pearson_r: Optional[float]
    text_histogram: list[int]
    smt_histogram: list[int]
    edges: list[float]


def error_ratio_analysis(pairs: Sequence[tuple[float, float]], bins: int = 10) -> ErrorRatioAnalysis:
    """Pearson correlation of per-question (text, smt) error ratios plus marginals."""
    if len(pairs) < 3:
        raise InsufficientData("error-ratio analysis needs at least 3 questions")
    arr = np.asarray(pairs, dtype=float)
    if np.any((arr < 0) | (arr > 1)):
        raise ValueError("error ratios must lie in [0, 1]")
    t, s = arr[:, 0], arr[:, 1]
    r = None
    if np.ptp(t) > 0 and np.ptp(s) > 0:
        r = float(np.corrcoef(t, s)[0, 1])
    edges = bin_edges(bins)
    hist = lambda v: np.histogram(v, bins=edges)[0].astype(int).tolist()  # noqa: E731
    return ErrorRatioAnalysis(r, hist(t), hist(s), edges)


# --- reports ----------------------------------------------------------------

REPORT_COLUMNS = ("signal", "auroc", "ece", "brier", "aurc", "opt_t", "err_at_t", "rel_err_red")


@dataclass
class SignalEvaluation:
    signal: str
    auroc: float
    ece: float
    brier: float
    aurc: float
    opt_t: float
    err_at_t: float
    rel_err_red: float
    n: int = 0
    reliability: list[BinRow] = field(default_factory=list, repr=False)


def evaluate_signal(
    name: str,
    scores,
    correct,
    confidences=None,
    grid: Sequence[float] = DEFAULT_GRID,
    bins: int = DEFAULT_BINS,
) -> SignalEvaluation:
    """All report metrics for one signal.

    ``confidences`` defaults to ``1 - minmax(scores)``.
    """
    s, c = _as_arrays(scores, correct)
    conf = confidence_from_uncertainty(s) if confidences is None else np.asarray(confidences, dtype=float)
    cal = calibration(conf, c, bins)
    rc = risk_coverage(s, c)
    sel = selective_prediction(s, c, grid)
    return SignalEvaluation(
        name, auroc(s, c), cal.ece, cal.brier, rc.aurc, sel.opt_t, sel.err_at_t, sel.rel_err_red, len(s), cal.table
    )


@dataclass
class EvaluationReport:
    task: str
    rows: list[SignalEvaluation] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for r in self.rows:
            w.writerow([r.signal] + [f"{getattr(r, k):.6f}" for k in REPORT_COLUMNS[1:]])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = []
        for r in self.rows:
            d = {k: (round(getattr(r, k), 6) if k != "signal" else r.signal) for k in REPORT_COLUMNS}
            d["n"] = r.n
            rows.append(d)
        return json.dumps({"task": self.task, "rows": rows, "notes": self.notes}, indent=2, sort_keys=True) + "\n"

    def reliability_csv(self, signal: str) -> str:
        row = next(r for r in self.rows if r.signal == signal)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin_lower", "bin_upper", "count", "mean_confidence", "accuracy"])
        for b in row.reliability:
            fmt = lambda v: "" if v is None else f"{v:.6f}"  # noqa: E731
            w.writerow([f"{b.lower:.2f}", f"{b.upper:.2f}", b.count, fmt(b.confidence), fmt(b.accuracy)])
        return buf.getvalue()

    def as_dicts(self) -> list[dict]:
        return [{k: v for k, v in asdict(r).items() if k != "reliability"} for r in self.rows]
