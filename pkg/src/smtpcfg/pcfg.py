"""Rule counting, PCFG estimation, and mean-matrix analysis."""

from __future__ import annotations

import bisect
import enum
import io
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import (
    DivergentGrammar,
    EmptyCorpus,
    InvalidSmoothingParameter,
    NonConvergence,
    UnknownRuleId,
)
from .grammar import ConcreteGrammar

NORMALIZATION_TOL = 1e-9
PROPER_TOL = 1e-9


@dataclass
class RuleCounts:
    grammar: ConcreteGrammar
    counts: np.ndarray  # int64, one entry per rule id
    programs_parsed: int = 0
    programs_failed: int = 0

    def nonterminal_total(self, nt: str) -> int:
        return int(self.counts[list(self.grammar.rules_by_lhs[nt])].sum())

    @property
    def nonterminal_totals(self) -> dict[str, int]:
        return {nt: self.nonterminal_total(nt) for nt in self.grammar.nonterminals}

    def __add__(self, other: "RuleCounts") -> "RuleCounts":
        if other.grammar is not self.grammar:
            raise ValueError("cannot add counts over different grammars")
        return RuleCounts(
            self.grammar,
            self.counts + other.counts,
            self.programs_parsed + other.programs_parsed,
            self.programs_failed + other.programs_failed,
        )


def count_rules(applications: Iterable, grammar: ConcreteGrammar, programs_parsed: int = 0, programs_failed: int = 0) -> RuleCounts:
    """Exact multiset counts of rule ids.

    ``applications`` may hold ``RuleApplication`` objects or bare rule ids.
    """
    ids = [a if isinstance(a, (int, np.integer)) else a.rule_id for a in applications]
    arr = np.asarray(ids, dtype=np.int64)
    n_rules = grammar.num_rules
    if arr.size and (arr.min() < 0 or arr.max() >= n_rules):
        bad = int(arr[(arr < 0) | (arr >= n_rules)][0])
        raise UnknownRuleId(f"rule id {bad} not in grammar with {n_rules} rules")
    counts = np.bincount(arr, minlength=n_rules).astype(np.int64)
    return RuleCounts(grammar, counts, programs_parsed, programs_failed)


class Method(enum.Enum):
    MLE = "mle"
    LIDSTONE = "lidstone"
    DIRICHLET = "dirichlet"


@dataclass(frozen=True)
class EstimationMethod:
    kind: Method = Method.LIDSTONE
    param: float = 1.0

    @classmethod
    def mle(cls):
        return cls(Method.MLE, 0.0)

    @classmethod
    def lidstone(cls, beta: float = 1.0):
        return cls(Method.LIDSTONE, beta)

    @classmethod
    def dirichlet(cls, alpha: float):
        return cls(Method.DIRICHLET, alpha)

    @classmethod
    def parse(cls, text: str) -> "EstimationMethod":
        """Parse ``mle``, ``lidstone:<beta>`` or ``dirichlet:<alpha>``."""
        name, _, value = text.partition(":")
        kind = Method(name.strip().lower())
        if kind is Method.MLE:
            return cls.mle()
        return cls(kind, float(value) if value else 1.0)

    def __str__(self) -> str:
        return self.kind.value if self.kind is Method.MLE else f"{self.kind.value}:{self.param:g}"


@dataclass
class Pcfg:
    grammar: ConcreteGrammar
    prob: np.ndarray
    method: EstimationMethod
    observed_support: frozenset[int]
    # nonterminals over which probabilities are normalized; all by default,
    # the observed ones after ``restrict_to_observed``
    scope: tuple[str, ...] = ()
    counts: RuleCounts | None = field(default=None, repr=False)

    def __post_init__(self):
        if not self.scope:
            self.scope = self.grammar.nonterminals

    def rule_probs(self, nt: str) -> np.ndarray:
        return self.prob[list(self.grammar.rules_by_lhs[nt])]

    def observed_rules(self, nt: str) -> list[int]:
        return [r for r in self.grammar.rules_by_lhs[nt] if r in self.observed_support]

    @property
    def observed_nonterminals(self) -> tuple[str, ...]:
        return tuple(nt for nt in self.grammar.nonterminals if self.observed_rules(nt))

    def restrict_to_observed(self) -> "Pcfg":
        """Zero unobserved rules and renormalize within each observed nonterminal."""
        prob = np.zeros_like(self.prob)
        scope = []
        for nt in self.grammar.nonterminals:
            ids = self.observed_rules(nt)
            if not ids:
                continue
            p = self.prob[ids]
            prob[ids] = p / p.sum()
            scope.append(nt)
        return Pcfg(self.grammar, prob, self.method, self.observed_support, tuple(scope), self.counts)

    def check_normalized(self, tol: float = NORMALIZATION_TOL) -> None:
        for nt in self.scope:
            s = self.rule_probs(nt).sum()
            if abs(s - 1.0) > tol:
                raise AssertionError(f"rules of {nt} sum to {s!r}")

    def report(self) -> str:
        """One line per rule: ``rule_id  lhs ::= rhs  count  probability``."""
        counts = self.counts.counts if self.counts is not None else np.zeros(len(self.prob), dtype=np.int64)
        buf = io.StringIO()
        for r in self.grammar.rules:
            buf.write(f"{r.id}  {r}  {int(counts[r.id])}  {self.prob[r.id]:.6f}\n")
        return buf.getvalue()


def estimate(counts: RuleCounts, method: EstimationMethod | None = None) -> Pcfg:
    """Per-nonterminal relative frequencies, optionally additively smoothed.

    MLE assigns ``1/|R_A|`` when ``C(A) = 0``. Lidstone and Dirichlet both use
    ``(C(r) + c) / (C(A) + c |R_A|)`` over the full rule set of ``A``.
    """
    method = method or EstimationMethod()
    g = counts.grammar
    c = float(method.param)
    if method.kind is not Method.MLE and not c > 0:
        raise InvalidSmoothingParameter(f"{method.kind.value} parameter must be > 0, got {c!r}")
    prob = np.zeros(g.num_rules)
    for nt, ids in g.rules_by_lhs.items():
        idx = list(ids)
        cr = counts.counts[idx].astype(float)
        total = cr.sum()
        if method.kind is Method.MLE:
            prob[idx] = cr / total if total > 0 else 1.0 / len(idx)
        else:
            prob[idx] = (cr + c) / (total + c * len(idx))
    support = frozenset(int(i) for i in np.flatnonzero(counts.counts > 0))
    return Pcfg(g, prob, method, support, counts=counts)


@dataclass
class MeanMatrix:
    """``matrix[j, i]``: expected count of nonterminal j in a rhs chosen for i."""

    matrix: np.ndarray
    index: dict[str, int]

    def to_csv(self) -> str:
        names = sorted(self.index, key=self.index.get)
        rows = ["," + ",".join(names)]
        for j, name in enumerate(names):
            rows.append(name + "," + ",".join(f"{v:.10g}" for v in self.matrix[j]))
        return "\n".join(rows) + "\n"


def mean_matrix(pcfg: Pcfg) -> MeanMatrix:
    g = pcfg.grammar
    index = {nt: k for k, nt in enumerate(g.nonterminals)}
    B = np.zeros((len(index), len(index)))
    for r in g.rules:
        p = pcfg.prob[r.id]
        if p == 0.0:
            continue
        i = index[r.lhs]
        for sym in r.rhs:
            j = index.get(sym)
            if j is not None:
                B[j, i] += p
    return MeanMatrix(B, index)


def _strong_components(adj: np.ndarray) -> list[np.ndarray]:
    n = adj.shape[0]
    reach = adj.copy()
    for k in range(n):  # Warshall transitive closure; n is the nonterminal count
        reach |= reach[:, k : k + 1] & reach[k : k + 1, :]
    seen = np.zeros(n, dtype=bool)
    comps = []
    for i in range(n):
        if seen[i]:
            continue
        members = np.flatnonzero((reach[i] & reach[:, i]) | (np.arange(n) == i))
        seen[members] = True
        cyclic = bool(reach[i, i])
        if cyclic:
            comps.append(members)
    return comps


def _perron_root(block: np.ndarray, tol: float, max_iter: int, rng: np.random.Generator) -> float | None:
    """Largest eigenvalue of an irreducible nonnegative block, or None on stall.

    Iterates on ``block + I`` (primitive, same Perron vector) and stops once
    the Collatz-Wielandt bracket ``min(Cx/x) <= rho <= max(Cx/x)`` closes.
    """
    k = block.shape[0]
    C = block + np.eye(k)
    x = rng.random(k) + 0.5
    for _ in range(max_iter):
        y = C @ x
        ratios = y / x
        lo, hi = ratios.min(), ratios.max()
        if hi - lo <= tol * max(1.0, hi):
            return 0.5 * (lo + hi) - 1.0
        x = y / np.linalg.norm(y)
        if not np.all(x > 0):
            return None
    return None


def spectral_radius(matrix, tol: float = 1e-12, max_iter: int = 10_000, seed: int = 0) -> float:
    """Spectral radius of a square nonnegative matrix.

    The matrix is split into strongly connected components; rho is the
    largest Perron root over the cyclic ones (acyclic parts contribute 0).
    Each root comes from bracketed power iteration, with a dense eigenvalue
    fallback for blocks of size <= 32 that fail to converge.
    """
    B = np.asarray(matrix.matrix if isinstance(matrix, MeanMatrix) else matrix, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValueError("spectral_radius needs a square matrix")
    if not np.all(np.isfinite(B)) or np.any(B < 0):
        raise ValueError("spectral_radius needs a finite nonnegative matrix")
    if B.size == 0 or not B.any():
        return 0.0
    rng = np.random.default_rng(seed)
    rho = 0.0
    for comp in _strong_components(B > 0):
        block = B[np.ix_(comp, comp)]
        root = _perron_root(block, tol, max_iter, rng)
        if root is None:
            if len(comp) > 32:
                raise NonConvergence(f"power iteration stalled on a {len(comp)}-node component")
            root = float(np.max(np.abs(np.linalg.eigvals(block))))
        rho = max(rho, root)
    return float(max(rho, 0.0))


@dataclass(frozen=True)
class Consistency:
    proper: bool
    spectral_radius: float

    def __str__(self) -> str:
        return f"{'Proper' if self.proper else 'Improper'}({self.spectral_radius:g})"


def check_consistency(pcfg: Pcfg) -> Consistency:
    rho = spectral_radius(mean_matrix(pcfg))
    return Consistency(rho <= 1.0 + PROPER_TOL, rho)


class PiMode(enum.Enum):
    EMPIRICAL = "empirical"
    FIXED_POINT = "fixed_point"


def expected_nonterminal_frequencies(pcfg: Pcfg, counts: RuleCounts | None = None, mode: PiMode = PiMode.EMPIRICAL) -> dict[str, float]:
    """Normalized nonterminal weights, keyed by nonterminal (zero weights omitted).

    EMPIRICAL uses observed expansion counts ``C(A) / sum C``. FIXED_POINT
    solves ``nu = e_S + B nu`` (expected visits per derivation) and requires
    a subcritical grammar.
    """
    g = pcfg.grammar
    if mode is PiMode.EMPIRICAL:
        counts = counts if counts is not None else pcfg.counts
        if counts is None:
            raise EmptyCorpus("empirical weights need rule counts")
        totals = {nt: counts.nonterminal_total(nt) for nt in g.nonterminals}
        z = sum(totals.values())
        if z <= 0:
            raise EmptyCorpus("no rule applications observed")
        return {nt: c / z for nt, c in totals.items() if c > 0}
    mm = mean_matrix(pcfg)
    rho = spectral_radius(mm)
    if rho >= 1.0 - 1e-6:
        raise DivergentGrammar(f"fixed-point weights need rho < 1, got {rho:.6g}")
    n = len(mm.index)
    e = np.zeros(n)
    e[mm.index[g.start]] = 1.0
    nu = np.linalg.solve(np.eye(n) - mm.matrix, e)
    nu = np.clip(nu, 0.0, None)
    z = nu.sum()
    return {nt: nu[k] / z for nt, k in mm.index.items() if nu[k] > 1e-15}


class DerivationSampler:
    """Draws leftmost derivations from a Pcfg (used by the estimation oracles).

    Derivations deeper than ``max_depth`` are rejected and redrawn.
    """

    def __init__(self, pcfg: Pcfg, seed: int = 0, max_depth: int = 10_000, max_attempts: int = 1000):
        self.g = pcfg.grammar
        self.rng = np.random.default_rng(seed)
        self.max_depth = max_depth
        self.max_attempts = max_attempts
        self._choices = {}
        for nt, ids in self.g.rules_by_lhs.items():
            p = pcfg.prob[list(ids)]
            cum = np.cumsum(p)
            cum /= cum[-1]
            nts = [[s for s in self.g.rules[r].rhs if self.g.is_nonterminal(s)] for r in ids]
            self._choices[nt] = (list(ids), cum.tolist(), nts)
        self._buf: list[float] = []

    def _uniform(self) -> float:
        if not self._buf:
            self._buf = self.rng.random(8192).tolist()
        return self._buf.pop()

    def sample(self) -> list[tuple[int, int]]:
        """One derivation as a pre-order list of ``(rule_id, depth)``."""
        for _ in range(self.max_attempts):
            out = self._try()
            if out is not None:
                return out
        raise NonConvergence("every sampled derivation exceeded the depth cap")

    def _try(self):
        out = []
        stack = [(self.g.start, 0)]
        while stack:
            nt, depth = stack.pop()
            if depth > self.max_depth:
                return None
            ids, cum, nts = self._choices[nt]
            k = bisect.bisect_right(cum, self._uniform())
            k = min(k, len(ids) - 1)
            out.append((ids[k], depth))
            for child in reversed(nts[k]):
                stack.append((child, depth + 1))
        return out
