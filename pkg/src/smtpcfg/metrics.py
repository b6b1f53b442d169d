"""Per-question uncertainty metrics computed from an estimated PCFG.

Entropy-type quantities are in bits and are evaluated over the observed
support: for each nonterminal with at least one observed rule, the smoothed
probabilities of its observed rules are renormalized to sum to one.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import EmptyGrammar, MissingTokenData, NoParsedPrograms, UnknownNonterminal, WeightMismatch
from .pcfg import (
    EstimationMethod,
    Pcfg,
    PiMode,
    RuleCounts,
    estimate,
    expected_nonterminal_frequencies,
    mean_matrix,
    spectral_radius,
)

_LN2 = math.log(2.0)


# --- distributions ----------------------------------------------------------


def shannon(p) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(max(0.0, -(p * np.log2(p)).sum()))


def renyi(p, alpha: float) -> float:
    """Rényi entropy of order ``alpha`` (bits); 0, 1 and inf handled exactly."""
    if alpha < 0:
        raise ValueError("Rényi order must be >= 0")
    p = np.asarray(p, dtype=float)
    if alpha == 0:
        return math.log2(len(p)) if len(p) else 0.0
    p = p[p > 0]
    if alpha == 1:
        return shannon(p)
    if math.isinf(alpha):
        return float(max(0.0, -math.log2(p.max())))
    # sum p^a - 1 = sum p (exp((a-1) ln p) - 1); stays accurate as a -> 1
    s = float(np.sum(p * np.expm1((alpha - 1.0) * np.log(p))))
    return float(max(0.0, math.log1p(s) / _LN2 / (1.0 - alpha)))


def _observed_dist(pcfg: Pcfg, nt: str) -> np.ndarray:
    if nt not in pcfg.grammar.rules_by_lhs:
        raise UnknownNonterminal(nt)
    ids = pcfg.observed_rules(nt)
    if not ids:
        raise UnknownNonterminal(f"{nt} has no observed rules")
    p = pcfg.prob[ids]
    return p / p.sum()


def shannon_entropy_nt(pcfg: Pcfg, nt: str) -> float:
    return shannon(_observed_dist(pcfg, nt))


def renyi_entropy_nt(pcfg: Pcfg, nt: str, alpha: float) -> float:
    return renyi(_observed_dist(pcfg, nt), alpha)


# --- grammar-level ----------------------------------------------------------


@dataclass(frozen=True)
class GrammarEntropies:
    grammar_entropy: float
    perplexity: float
    max_entropy: float
    entropy_ratio: float
    kl_divergence_uniform: float


def _check_weights(pcfg: Pcfg, pi: Mapping[str, float]) -> None:
    support = {nt for nt, w in pi.items() if w > 0}
    observed = set(pcfg.observed_nonterminals)
    if support != observed:
        raise WeightMismatch(
            f"weights cover {sorted(support ^ observed)} inconsistently with the observed nonterminals"
        )
    if abs(sum(pi.values()) - 1.0) > 1e-9:
        raise WeightMismatch(f"weights sum to {sum(pi.values())!r}")


def grammar_level_entropies(pcfg: Pcfg, pi: Mapping[str, float]) -> GrammarEntropies:
    _check_weights(pcfg, pi)
    h = h_max = 0.0
    for nt, w in pi.items():
        if w <= 0:
            continue
        p = _observed_dist(pcfg, nt)
        h += w * shannon(p)
        h_max += w * math.log2(len(p))
    ratio = h / h_max if h_max > 0 else 0.0
    return GrammarEntropies(h, 2.0**h, h_max, min(1.0, ratio), max(0.0, h_max - h))


def grammar_renyi(pcfg: Pcfg, pi: Mapping[str, float], alpha: float) -> float:
    _check_weights(pcfg, pi)
    return sum(w * renyi(_observed_dist(pcfg, nt), alpha) for nt, w in pi.items() if w > 0)


def spectral_factor(rho: float) -> float:
    return rho / (1.0 + rho)


def nsui(entropy_ratio: float, rho: float) -> float:
    return entropy_ratio * spectral_factor(rho)


# --- structure and rule-probability shape -----------------------------------


@dataclass(frozen=True)
class StructuralMetrics:
    num_nonterminals: int
    num_rules: int
    avg_rules_per_nt: float
    avg_rhs_len: float
    max_branching_factor: int


def structural_metrics(pcfg: Pcfg) -> StructuralMetrics:
    g = pcfg.grammar
    per_nt = {nt: pcfg.observed_rules(nt) for nt in g.nonterminals}
    per_nt = {nt: ids for nt, ids in per_nt.items() if ids}
    if not per_nt:
        raise EmptyGrammar("no observed rules")
    rules = [r for ids in per_nt.values() for r in ids]
    return StructuralMetrics(
        num_nonterminals=len(per_nt),
        num_rules=len(rules),
        avg_rules_per_nt=len(rules) / len(per_nt),
        avg_rhs_len=float(np.mean([len(g.rules[r].rhs) for r in rules])),
        max_branching_factor=max(len(ids) for ids in per_nt.values()),
    )


@dataclass(frozen=True)
class RuleDistStats:
    mean: float
    std: float
    skew: float
    kurtosis: float
    median: float
    min: float
    max: float


def moments(values) -> tuple[float, float, float, float]:
    """Population mean, std, skewness and excess kurtosis (0, 0 when std is 0)."""
    v = np.asarray(values, dtype=float)
    mu = float(v.mean())
    d = v - mu
    m2 = float(np.mean(d**2))
    if m2 <= 1e-30:
        return mu, 0.0, 0.0, 0.0
    m3 = float(np.mean(d**3))
    m4 = float(np.mean(d**4))
    return mu, math.sqrt(m2), m3 / m2**1.5, m4 / m2**2 - 3.0


def rule_distribution_stats(pcfg: Pcfg) -> RuleDistStats:
    probs = []
    for nt in pcfg.grammar.nonterminals:
        if pcfg.observed_rules(nt):
            probs.extend(_observed_dist(pcfg, nt))
    if not probs:
        raise EmptyGrammar("no observed rules")
    mu, sd, sk, ku = moments(probs)
    arr = np.asarray(probs)
    return RuleDistStats(mu, sd, sk, ku, float(np.median(arr)), float(arr.min()), float(arr.max()))


# --- token-level baselines --------------------------------------------------


@dataclass(frozen=True)
class TokenBaselines:
    token_entropy: Optional[float]
    token_perplexity: Optional[float]
    token_kurtosis: Optional[float]


def token_level_baselines(records: Sequence[tuple[Optional[Sequence[float]], Optional[Sequence[Sequence[float]]]]]) -> TokenBaselines:
    """Token-probability baselines from per-sample ``(logprobs, topk)`` pairs.

    Perplexity is ``exp(-mean logprob)`` per sample, averaged over samples.
    Entropy is the mean Shannon entropy (bits) over all tokens of the
    renormalized top-k lists. Kurtosis is the excess kurtosis of the pooled
    chosen-token log-probabilities.
    """
    ppl, pooled, ents = [], [], []
    for logprobs, topk in records:
        if logprobs:
            lp = np.asarray(logprobs, dtype=float)
            ppl.append(math.exp(-lp.mean()))
            pooled.extend(lp.tolist())
        for dist in topk or ():
            d = np.asarray(dist, dtype=float)
            if d.sum() > 0:
                ents.append(shannon(d / d.sum()))
    if not ppl and not ents:
        raise MissingTokenData("no sample carries token log-probabilities or top-k lists")
    return TokenBaselines(
        token_entropy=float(np.mean(ents)) if ents else None,
        token_perplexity=float(np.mean(ppl)) if ppl else None,
        token_kurtosis=moments(pooled)[3] if pooled else None,
    )


# --- per-question vector ----------------------------------------------------


@dataclass
class MetricVector:
    grammar_entropy: float
    perplexity: float
    kl_divergence_uniform: float
    nsui: float
    renyi_entropy_2: float
    renyi_entropy_05: float
    max_entropy: float
    entropy_ratio: float
    spectral_factor: float
    spectral_radius: float
    num_nonterminals: int
    num_rules: int
    avg_rules_per_nt: float
    avg_rhs_len: float
    max_branching_factor: int
    rule_dist_mean: float
    rule_dist_std: float
    rule_dist_skew: float
    rule_dist_kurtosis: float
    token_entropy: Optional[float] = None
    token_perplexity: Optional[float] = None
    token_kurtosis: Optional[float] = None
    self_consistency_text: Optional[float] = None
    self_consistency_smt: Optional[float] = None
    # verbose-only extras
    min_entropy: Optional[float] = None
    rule_dist_median: Optional[float] = None
    rule_dist_min: Optional[float] = None
    rule_dist_max: Optional[float] = None

    def as_dict(self, verbose: bool = False) -> dict:
        d = asdict(self)
        if not verbose:
            for k in VERBOSE_COLUMNS:
                d.pop(k)
        return d


VERBOSE_COLUMNS = ("min_entropy", "rule_dist_median", "rule_dist_min", "rule_dist_max")
METRIC_COLUMNS = tuple(f.name for f in fields(MetricVector) if f.name not in VERBOSE_COLUMNS)


def metric_vector(
    counts: RuleCounts,
    method: EstimationMethod | None = None,
    pi_mode: PiMode = PiMode.EMPIRICAL,
    self_consistency_text: Optional[float] = None,
    self_consistency_smt: Optional[float] = None,
    token_records=None,
) -> MetricVector:
    """Fill the full metric suite for one ensemble's rule counts."""
    if counts.counts.sum() == 0:
        raise NoParsedPrograms(f"no parsed programs ({counts.programs_failed} failed)")
    pcfg = estimate(counts, method).restrict_to_observed()
    pi = expected_nonterminal_frequencies(pcfg, counts, pi_mode)
    ent = grammar_level_entropies(pcfg, pi)
    rho = spectral_radius(mean_matrix(pcfg))
    st = structural_metrics(pcfg)
    rd = rule_distribution_stats(pcfg)
    tok = TokenBaselines(None, None, None)
    if token_records and any(lp or tk for lp, tk in token_records):
        tok = token_level_baselines(token_records)
    return MetricVector(
        grammar_entropy=ent.grammar_entropy,
        perplexity=ent.perplexity,
        kl_divergence_uniform=ent.kl_divergence_uniform,
        nsui=nsui(ent.entropy_ratio, rho),
        renyi_entropy_2=grammar_renyi(pcfg, pi, 2.0),
        renyi_entropy_05=grammar_renyi(pcfg, pi, 0.5),
        max_entropy=ent.max_entropy,
        entropy_ratio=ent.entropy_ratio,
        spectral_factor=spectral_factor(rho),
        spectral_radius=rho,
        num_nonterminals=st.num_nonterminals,
        num_rules=st.num_rules,
        avg_rules_per_nt=st.avg_rules_per_nt,
        avg_rhs_len=st.avg_rhs_len,
        max_branching_factor=st.max_branching_factor,
        rule_dist_mean=rd.mean,
        rule_dist_std=rd.std,
        rule_dist_skew=rd.skew,
        rule_dist_kurtosis=rd.kurtosis,
        token_entropy=tok.token_entropy,
        token_perplexity=tok.token_perplexity,
        token_kurtosis=tok.token_kurtosis,
        self_consistency_text=self_consistency_text,
        self_consistency_smt=self_consistency_smt,
        min_entropy=grammar_renyi(pcfg, pi, math.inf),
        rule_dist_median=rd.median,
        rule_dist_min=rd.min,
        rule_dist_max=rd.max,
    )
