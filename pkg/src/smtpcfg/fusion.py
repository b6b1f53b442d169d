"""Combining per-question metric columns into ensemble uncertainty scores."""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import EmptyMatrix, FoldDegenerate, NonFiniteFeature, SingleClass, SingleClassValidation, UnknownColumn
from .evaluation import auroc


class Orientation(enum.Enum):
    HIGHER_MORE_UNCERTAIN = "higher"
    LOWER_MORE_UNCERTAIN = "lower"


CONFIDENCE_COLUMNS = frozenset({"self_consistency_text", "self_consistency_smt"})
DEFAULT_SUBSET = ("grammar_entropy", "perplexity", "spectral_radius", "self_consistency_smt")


def default_orientation(columns: Sequence[str]) -> dict[str, Orientation]:
    return {
        c: Orientation.LOWER_MORE_UNCERTAIN if c in CONFIDENCE_COLUMNS else Orientation.HIGHER_MORE_UNCERTAIN
        for c in columns
    }


@dataclass(frozen=True)
class ColumnStats:
    median: float
    lo: float
    hi: float
    mean: float
    std: float
    orientation: Orientation


@dataclass
class FeatureMatrix:
    """Oriented metric columns, imputed and normalized.

    ``raw`` keeps the oriented, median-imputed values so that callers (the
    cross-validated meta-model in particular) can refit a normalization on a
    subset of rows.
    """

    columns: tuple[str, ...]
    values: np.ndarray
    raw: np.ndarray
    stats: dict[str, ColumnStats]
    kind: str = "minmax"
    row_ids: tuple[str, ...] = ()

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    def column(self, name: str) -> np.ndarray:
        try:
            return self.values[:, self.columns.index(name)]
        except ValueError:
            raise UnknownColumn(name) from None

    def select(self, names: Sequence[str]) -> "FeatureMatrix":
        idx = []
        for n in names:
            if n not in self.columns:
                raise UnknownColumn(n)
            idx.append(self.columns.index(n))
        return FeatureMatrix(
            tuple(names),
            self.values[:, idx],
            self.raw[:, idx],
            {n: self.stats[n] for n in names},
            self.kind,
            self.row_ids,
        )

    def zscored(self) -> "FeatureMatrix":
        return FeatureMatrix(self.columns, _zscore(self.raw)[0], self.raw, self.stats, "zscore", self.row_ids)


def _minmax_columns(x: np.ndarray) -> np.ndarray:
    lo, hi = x.min(axis=0), x.max(axis=0)
    span = hi - lo
    out = np.full_like(x, 0.5)
    ok = span > 0
    out[:, ok] = (x[:, ok] - lo[ok]) / span[ok]
    return out


def _zscore(x: np.ndarray, mean=None, std=None):
    if mean is None:
        mean, std = x.mean(axis=0), x.std(axis=0)
    safe = np.where(std > 0, std, 1.0)
    return (x - mean) / safe, mean, std


def build_feature_matrix(
    rows: Sequence[Mapping[str, Optional[float]]],
    columns: Optional[Sequence[str]] = None,
    orientation: Optional[Mapping[str, Orientation]] = None,
    kind: str = "minmax",
    row_ids: Sequence[str] = (),
) -> FeatureMatrix:
    """Orient, impute missing values with the column median, then normalize.

    Columns that are missing in every row carry no information and are dropped.
    """
    if not rows:
        raise EmptyMatrix("no rows")
    if columns is None:
        columns = [k for k, v in rows[0].items() if isinstance(v, (int, float)) or v is None]
    orientation = dict(default_orientation(columns), **(orientation or {}))
    kept, cols = [], []
    for c in columns:
        vals = np.array([np.nan if r.get(c) is None else float(r[c]) for r in rows], dtype=float)
        if np.any(np.isinf(vals)):
            raise NonFiniteFeature(c)
        if np.all(np.isnan(vals)):
            continue
        kept.append(c)
        cols.append(vals)
    if not kept:
        raise EmptyMatrix("every column is missing")
    stats = {}
    raw = np.empty((len(rows), len(kept)))
    for j, (c, v) in enumerate(zip(kept, cols)):
        med = float(np.nanmedian(v))
        v = np.where(np.isnan(v), med, v)
        if orientation[c] is Orientation.LOWER_MORE_UNCERTAIN:
            v = -v
        raw[:, j] = v
        stats[c] = ColumnStats(med, float(v.min()), float(v.max()), float(v.mean()), float(v.std()), orientation[c])
    values = _minmax_columns(raw) if kind == "minmax" else _zscore(raw)[0]
    return FeatureMatrix(tuple(kept), values, raw, stats, kind, tuple(row_ids))


# --- unsupervised and validation-weighted ensembles -------------------------


def ensemble_simple(matrix: FeatureMatrix, subset: Sequence[str] = DEFAULT_SUBSET) -> np.ndarray:
    if not subset:
        raise ValueError("subset must be nonempty")
    return matrix.select(subset).values.mean(axis=1)


def ensemble_average(matrix: FeatureMatrix) -> np.ndarray:
    if matrix.values.shape[1] == 0:
        raise EmptyMatrix("no columns")
    return matrix.values.mean(axis=1)


def validation_split(correct, fraction: float = 0.3, seed: int = 0) -> np.ndarray:
    """Stratified random subset of row indices (sorted)."""
    c = np.asarray(correct, dtype=bool)
    rng = np.random.default_rng(seed)
    picked = []
    for cls in (False, True):
        idx = np.flatnonzero(c == cls)
        k = max(1, round(fraction * len(idx))) if len(idx) else 0
        picked.extend(rng.permutation(idx)[:k].tolist())
    return np.array(sorted(picked), dtype=int)


def ensemble_weighted(
    matrix: FeatureMatrix, correct, validation_rows: Optional[Sequence[int]] = None
) -> tuple[np.ndarray, np.ndarray]:
    """Weighted mean with weight ``max(AUROC - 0.5, 0)`` per column, AUROC taken on the validation rows.

    Scores are produced for every row. Returns ``(scores, weights)``.
    """
    c = np.asarray(correct, dtype=bool)
    rows = np.arange(len(c)) if validation_rows is None else np.asarray(validation_rows, dtype=int)
    vc = c[rows]
    if vc.all() or not vc.any():
        raise SingleClassValidation("validation rows hold a single class")
    w = np.array([max(auroc(matrix.values[rows, j], vc) - 0.5, 0.0) for j in range(len(matrix.columns))])
    w = w / w.sum() if w.sum() > 0 else np.full(len(w), 1.0 / len(w))
    return matrix.values @ w, w


# --- logistic meta-model ----------------------------------------------------

MAX_ITER = 10_000
GRAD_TOL = 1e-8


@dataclass
class LogisticModel:
    columns: tuple[str, ...]
    weights: np.ndarray
    bias: float
    iterations: int
    class_weights: dict[bool, float]
    loss_history: list[float] = field(default_factory=list, repr=False)

    def decision(self, x: np.ndarray) -> np.ndarray:
        return x @ self.weights + self.bias

    def predict_error_proba(self, x: np.ndarray) -> np.ndarray:
        z = self.decision(x)
        return np.exp(-np.logaddexp(0.0, -z))

    def export(self) -> str:
        lines = [f"{c} {w:.17g}" for c, w in zip(self.columns, self.weights)]
        lines.append(f"__bias__ {self.bias:.17g}")
        return "\n".join(lines) + "\n"


def _bce(z: np.ndarray, y: np.ndarray, sw: np.ndarray) -> float:
    return float(np.mean(sw * (np.logaddexp(0.0, z) - y * z)))


def train_logistic(
    x: np.ndarray | FeatureMatrix,
    correct,
    columns: Sequence[str] = (),
    max_iter: int = MAX_ITER,
    tol: float = GRAD_TOL,
) -> LogisticModel:
    """Class-balanced logistic regression predicting *errors* (target = not correct).

    Full-batch gradient descent from zero with step ``1/L``, where ``L`` bounds
    the curvature of the loss, so every step is a descent step.
    """
    if isinstance(x, FeatureMatrix):
        columns, x = x.columns, x.values
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise NonFiniteFeature("feature matrix has non-finite entries")
    c = np.asarray(correct, dtype=bool)
    n = len(c)
    if n < 2 or c.all() or not c.any():
        raise SingleClass("logistic training needs both classes")
    y = (~c).astype(float)
    n_err = y.sum()
    cw = {True: n / (2.0 * (n - n_err)), False: n / (2.0 * n_err)}  # keyed by "correct"
    sw = np.where(c, cw[True], cw[False])

    xa = np.hstack([x, np.ones((n, 1))])
    hess_bound = (xa * sw[:, None]).T @ xa / n
    lip = 0.25 * float(np.linalg.eigvalsh(hess_bound).max())
    step = 1.0 / lip if lip > 0 else 1.0

    theta = np.zeros(xa.shape[1])
    z = xa @ theta
    history = [_bce(z, y, sw)]
    it = 0
    while it < max_iter:
        p = np.exp(-np.logaddexp(0.0, -z))
        grad = xa.T @ (sw * (p - y)) / n
        if math.sqrt(float(grad @ grad)) <= tol:
            break
        theta -= step * grad
        z = xa @ theta
        history.append(_bce(z, y, sw))
        it += 1
    if not np.all(np.isfinite(theta)):
        raise NonFiniteFeature("training diverged")
    return LogisticModel(tuple(columns), theta[:-1].copy(), float(theta[-1]), it, cw, history)


def stratified_folds(correct, k: int = 5, seed: int = 0) -> np.ndarray:
    """Fold index per row; each class is shuffled and dealt round-robin."""
    c = np.asarray(correct, dtype=bool)
    rng = np.random.default_rng(seed)
    folds = np.empty(len(c), dtype=int)
    offset = 0
    for cls in (False, True):
        idx = rng.permutation(np.flatnonzero(c == cls))
        folds[idx] = (np.arange(len(idx)) + offset) % k
        offset = (offset + len(idx)) % k
    return folds


@dataclass
class OutOfFold:
    scores: np.ndarray
    folds: np.ndarray
    models: list[LogisticModel]

    def folds_csv(self, row_ids: Sequence[str] = ()) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["row", "question_id", "fold"])
        for i, f in enumerate(self.folds):
            w.writerow([i, row_ids[i] if i < len(row_ids) else "", int(f)])
        return buf.getvalue()


def ensemble_ml(matrix: FeatureMatrix, correct, folds: int = 5, seed: int = 0) -> OutOfFold:
    """Out-of-fold predicted error probabilities.

    Z-score statistics are fit on each fold's training rows only.
    """
    c = np.asarray(correct, dtype=bool)
    assign = stratified_folds(c, folds, seed)
    scores = np.full(len(c), np.nan)
    models = []
    for f in range(folds):
        test = assign == f
        train = ~test
        if not test.any():
            continue
        ct = c[train]
        if ct.all() or not ct.any():
            raise FoldDegenerate(f"fold {f} training split holds a single class")
        xtr, mean, std = _zscore(matrix.raw[train])
        model = train_logistic(xtr, ct, matrix.columns)
        xte = _zscore(matrix.raw[test], mean, std)[0]
        scores[test] = model.predict_error_proba(xte)
        models.append(model)
    return OutOfFold(scores, assign, models)
