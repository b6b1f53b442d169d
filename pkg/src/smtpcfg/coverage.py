"""Sample-coverage bound for N i.i.d. draws, its Lambert-W inversion and temperature schedules."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, InvalidDistribution, InvalidParameters

_INV_E = math.exp(-1.0)


def lambert_w0(x: float, max_iter: int = 50) -> float:
    """Principal branch of the Lambert W function via Halley's iteration."""
    if x < -_INV_E - 1e-12:
        raise DomainError(f"lambert_w0 undefined for x = {x!r} < -1/e")
    if x <= -_INV_E:
        return -1.0
    if x == 0.0:
        return 0.0
    if x > math.e:
        lx = math.log(x)
        w = lx - math.log(lx)
    elif x < -0.25:
        # series about the branch point keeps Halley away from w = -1
        w = -1.0 + math.sqrt(2.0 * (1.0 + math.e * x))
    else:
        w = x
    for _ in range(max_iter):
        ew = math.exp(w)
        f = w * ew - x
        if f == 0.0:
            break
        wp1 = w + 1.0
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        w_next = w - f / denom
        if abs(w_next - w) <= 1e-15 * (1.0 + abs(w_next)):
            w = w_next
            break
        w = w_next
    return max(w, -1.0)


@dataclass(frozen=True)
class CoverageQuery:
    n_samples: int
    entropy_bits: float
    region_mass: float

    def __post_init__(self):
        if self.n_samples < 1 or self.entropy_bits < 0 or not 0.0 <= self.region_mass <= 1.0:
            raise InvalidParameters(f"invalid coverage query {self!r}")


def miss_probability_bound(q: CoverageQuery) -> float:
    return min(1.0, math.exp(-q.n_samples * q.region_mass / 2.0**q.entropy_bits))


@dataclass(frozen=True)
class CriticalEpsilon:
    exact: float
    asymptotic: Optional[float]


def critical_epsilon(n: int, h: float) -> CriticalEpsilon:
    """The region mass at which the miss bound equals the mass itself."""
    if n < 1 or h < 0:
        raise InvalidParameters("need N >= 1 and H >= 0")
    scale = 2.0**h
    r = n / scale
    exact = lambert_w0(r) / r
    asym = math.log(r) / r if r > 1 else None
    return CriticalEpsilon(exact, asym)


class ScheduleKind(enum.Enum):
    GAUSSIAN = "gaussian"
    EXPONENTIAL = "exponential"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class TemperatureSchedule:
    kind: ScheduleKind
    tau_min: float
    tau_max: float
    param: Optional[float]
    values: tuple[float, ...]

    def to_csv(self) -> str:
        return "index,temperature\n" + "".join(f"{i},{t:.6f}\n" for i, t in enumerate(self.values))


def _check_range(n: int, tau_min: float, tau_max: float) -> None:
    if n < 1 or tau_max < tau_min or tau_min < 0:
        raise InvalidParameters(f"bad schedule parameters N={n}, tau=[{tau_min}, {tau_max}]")


def gaussian_schedule(
    n: int, tau_min: float = 0.1, tau_max: float = 1.5, sigma: Optional[float] = None
) -> TemperatureSchedule:
    _check_range(n, tau_min, tau_max)
    sigma = n / 5.0 if sigma is None else sigma
    if sigma <= 0:
        raise InvalidParameters("sigma must be positive")
    i = np.arange(n)
    vals = tau_min + (tau_max - tau_min) * np.exp(-((i - n / 2.0) ** 2) / (2.0 * sigma**2))
    return TemperatureSchedule(ScheduleKind.GAUSSIAN, tau_min, tau_max, sigma, tuple(map(float, np.clip(vals, tau_min, tau_max))))


def exponential_schedule(n: int, lam: float, tau_min: float = 0.1, tau_max: float = 1.5) -> TemperatureSchedule:
    _check_range(n, tau_min, tau_max)
    if not lam > 0:
        raise InvalidParameters("lambda must be positive")
    vals = tau_min + (tau_max - tau_min) * np.exp(-lam * np.arange(n))
    return TemperatureSchedule(ScheduleKind.EXPONENTIAL, tau_min, tau_max, lam, tuple(map(float, vals)))


def uniform_schedule(n: int, tau_min: float = 0.1, tau_max: float = 1.5) -> TemperatureSchedule:
    """Evenly spaced temperatures from tau_min to tau_max inclusive."""
    _check_range(n, tau_min, tau_max)
    vals = np.linspace(tau_min, tau_max, n) if n > 1 else np.array([tau_min])
    return TemperatureSchedule(ScheduleKind.UNIFORM, tau_min, tau_max, None, tuple(map(float, vals)))


@dataclass(frozen=True)
class CoverageValidation:
    empirical_miss_rate: float
    exact_miss: float
    bound: float
    holds: bool
    in_regime: bool
    standard_error: float


def validate_coverage_bound(
    distribution: Sequence[float], region: Sequence[int], n: int, trials: int = 100_000, seed: int = 0
) -> CoverageValidation:
    """Monte-Carlo check of P(all N draws miss the region) against the bound.

    ``in_regime`` flags N >= 2^H with region mass <= 1/2, where the bound is
    expected to hold; outside it the comparison is only reported.
    """
    p = np.asarray(distribution, dtype=float)
    if p.ndim != 1 or len(p) == 0 or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise InvalidDistribution("distribution must be nonnegative and sum to 1")
    if trials < 1000:
        raise InvalidParameters("need at least 1000 trials")
    mask = np.zeros(len(p), dtype=bool)
    mask[list(region)] = True
    eps = float(min(1.0, p[mask].sum()))
    nz = p[p > 0]
    h = float(max(0.0, -(nz * np.log2(nz)).sum()))
    bound = miss_probability_bound(CoverageQuery(n, h, eps))
    exact = (1.0 - eps) ** n
    rng = np.random.default_rng(seed)
    misses = 0
    chunk = max(1, 2_000_000 // max(n, 1))
    for start in range(0, trials, chunk):
        m = min(chunk, trials - start)
        draws = rng.choice(len(p), size=(m, n), p=p)
        misses += int(np.count_nonzero(~mask[draws].any(axis=1)))
    emp = misses / trials
    se = math.sqrt(max(emp * (1.0 - emp), 0.0) / trials)
    return CoverageValidation(emp, exact, bound, emp <= bound + 3.0 * se, n >= 2.0**h and eps <= 0.5, se)
