"""Shot planning and binomial-proportion estimation."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy import stats

from ._validation import check_choice, check_open_unit, check_positive_int

CI_METHODS = ("wilson", "clopper_pearson")


def _norm_method(method: str) -> str:
    return check_choice(method.replace("-", "_"), "ci_method", CI_METHODS)


@dataclass(frozen=True)
class SamplingPlan:
    shots: int
    epsilon: Optional[float] = None
    delta: Optional[float] = None

    def __post_init__(self):
        check_positive_int(self.shots, "shots")

    @classmethod
    def from_shots(cls, shots: int) -> SamplingPlan:
        return cls(int(shots))


def hoeffding_shots(epsilon: float, delta: float) -> int:
    return max(1, math.ceil(math.log(2.0 / delta) / (2.0 * epsilon * epsilon)))


def hoeffding_epsilon(shots: int, delta: float) -> float:
    """Two-sided additive error guaranteed with probability 1 - delta."""
    return math.sqrt(math.log(2.0 / delta) / (2.0 * shots))


def plan_shots(epsilon: float, delta: float) -> SamplingPlan:
    """Smallest P with Pr[|f_hat - f| > epsilon] <= delta for every f.

    Uses the two-sided Hoeffding bound P = ceil(ln(2/delta) / (2 epsilon^2)).
    The register width does not enter.
    """
    epsilon = check_open_unit(epsilon, "epsilon")
    delta = check_open_unit(delta, "delta")
    return SamplingPlan(hoeffding_shots(epsilon, delta), epsilon, delta)


def estimate_fraction(ones: int, shots: int) -> float:
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if not 0 <= ones <= shots:
        raise ValueError(f"ones={ones} must lie in [0, shots={shots}]")
    return float(Fraction(ones, shots))


def _wilson(ones: int, n: int, alpha: float) -> tuple[float, float]:
    z = stats.norm.ppf(1.0 - alpha / 2.0)
    z2 = z * z
    p = ones / n
    denom = 1.0 + z2 / n
    center = (p + z2 / (2 * n)) / denom
    margin = (z / denom) * math.sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n))
    return center - margin, center + margin


def _clopper_pearson(ones: int, n: int, alpha: float) -> tuple[float, float]:
    low = stats.beta.ppf(alpha / 2.0, ones, n - ones + 1) if ones > 0 else 0.0
    high = stats.beta.ppf(1.0 - alpha / 2.0, ones + 1, n - ones) if ones < n else 1.0
    return float(low), float(high)


def confidence_interval(
    ones: int, shots: int, alpha: float = 0.05, method: str = "wilson"
) -> tuple[float, float]:
    """Two-sided ``1 - alpha`` interval for the success probability.

    ``method`` is ``"wilson"`` (score interval) or ``"clopper_pearson"``
    (exact, conservative). Bounds are clamped to [0, 1] and always contain
    the point estimate.
    """
    alpha = check_open_unit(alpha, "alpha")
    method = _norm_method(method)
    f_hat = estimate_fraction(ones, shots)
    if method == "wilson":
        low, high = _wilson(ones, shots, alpha)
    else:
        low, high = _clopper_pearson(ones, shots, alpha)
    # the closed forms hit 0 and 1 exactly only up to rounding
    if ones == 0:
        low = 0.0
    if ones == shots:
        high = 1.0
    low = min(max(0.0, float(low)), f_hat)
    high = max(min(1.0, float(high)), f_hat)
    return low, high


@dataclass(frozen=True)
class EstimateResult:
    ones: int
    shots: int
    f_hat: float
    ci_low: float
    ci_high: float
    ci_method: str
    alpha: float
    seed: int
    exact_f: Optional[Fraction] = None

    def __post_init__(self):
        if not 0 <= self.ones <= self.shots:
            raise ValueError("ones must lie in [0, shots]")
        if not 0.0 <= self.ci_low <= self.f_hat <= self.ci_high <= 1.0:
            raise ValueError("interval must satisfy 0 <= ci_low <= f_hat <= ci_high <= 1")

    @property
    def abs_error(self) -> Optional[float]:
        if self.exact_f is None:
            return None
        return abs(float(Fraction(self.ones, self.shots) - self.exact_f))

    def to_dict(self) -> dict:
        return {
            "ones": self.ones,
            "shots": self.shots,
            "f_hat": self.f_hat,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "ci_method": self.ci_method,
            "alpha": self.alpha,
            "seed": self.seed,
            "exact_f": None if self.exact_f is None else str(self.exact_f),
            "abs_error": self.abs_error,
        }


def aggregate(
    bits,
    alpha: float = 0.05,
    method: str = "wilson",
    seed: int = 0,
    exact_f: Optional[Fraction] = None,
) -> EstimateResult:
    """Summarise a stream of 0/1 outcomes. Only the count of ones matters."""
    bits = np.asarray(bits)
    if bits.size == 0:
        raise ValueError("cannot aggregate an empty outcome sequence")
    if not np.isin(bits, (0, 1)).all():
        raise ValueError("outcome bits must be 0 or 1")
    return from_counts(int(np.count_nonzero(bits)), int(bits.size), alpha, method, seed, exact_f)


def from_counts(
    ones: int,
    shots: int,
    alpha: float = 0.05,
    method: str = "wilson",
    seed: int = 0,
    exact_f: Optional[Fraction] = None,
) -> EstimateResult:
    method = _norm_method(method)
    low, high = confidence_interval(ones, shots, alpha, method)
    return EstimateResult(
        ones=ones,
        shots=shots,
        f_hat=estimate_fraction(ones, shots),
        ci_low=low,
        ci_high=high,
        ci_method=method,
        alpha=float(alpha),
        seed=int(seed),
        exact_f=None if exact_f is None else Fraction(exact_f),
    )
