"""The decay constant K(alpha, m) and its minimizing delta.

    K(alpha, m) = min_{delta > 0} delta^(-1/2) prod_{j=0}^{m} (alpha + j/2 + delta)^(1/2)

All products are evaluated in log space so large ``m`` cannot overflow.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect
from scipy.special import gammaln

from nsdecay.errors import DomainError

logger = logging.getLogger(__name__)

BRACKET_LOW = 1e-9
STATIONARITY_TOLERANCE = 1e-10
_BISECTION_RTOL = 1e-13
_MAX_BRACKET_EXPANSIONS = 60


class BoundaryMarker(enum.Enum):
    """Where the infimum sits when it is not attained at a finite delta."""

    ZERO_LIMIT = "delta->0"
    INFINITY_LIMIT = "delta->inf"


@dataclass(frozen=True)
class DecayQuery:
    alpha: float
    m: int

    def __post_init__(self) -> None:
        if not self.alpha >= 0:
            raise DomainError(f"alpha must be nonnegative, got {self.alpha}.")
        if self.m < 0:
            raise DomainError(f"m must be nonnegative, got {self.m}.")

    def offsets(self) -> np.ndarray:
        """``alpha + j/2`` for ``j = 0..m``."""
        return self.alpha + 0.5 * np.arange(self.m + 1)


@dataclass(frozen=True)
class ConstantResult:
    query: DecayQuery
    K: float
    delta_star: float | BoundaryMarker
    attained: bool

    @property
    def delta_label(self) -> str:
        if isinstance(self.delta_star, BoundaryMarker):
            return self.delta_star.value
        return f"{self.delta_star:.6f}"


def k_objective(delta: float, q: DecayQuery) -> float:
    """``f(delta) = delta^(-1/2) prod_j (alpha + j/2 + delta)^(1/2)``."""
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta}.")
    log_f = 0.5 * (float(np.sum(np.log(q.offsets() + delta))) - math.log(delta))
    return math.exp(log_f)


def stationarity(delta: float, q: DecayQuery) -> float:
    """``g(delta) = sum_j delta / (alpha + j/2 + delta) - 1``; its root minimizes ``f``."""
    return float(np.sum(delta / (q.offsets() + delta))) - 1.0


def _bracket(q: DecayQuery) -> tuple[float, float]:
    low = BRACKET_LOW
    high = max(1.0, 2.0 * (q.alpha + q.m)) * 1e3
    for _ in range(_MAX_BRACKET_EXPANSIONS):
        if stationarity(low, q) < 0:
            break
        low /= 10.0
    for _ in range(_MAX_BRACKET_EXPANSIONS):
        if stationarity(high, q) > 0:
            break
        high *= 10.0
    return low, high


def k_constant(q: DecayQuery) -> ConstantResult:
    """Minimize ``f`` over ``delta > 0``, returning limit values at the boundary cases.

    ``alpha = 0``: ``f`` increases, infimum ``(m!/2^m)^(1/2)`` as ``delta -> 0``.
    ``m = 0`` with ``alpha > 0``: infimum 1 as ``delta -> inf``.
    """
    if q.alpha == 0:
        log_k = 0.5 * (float(gammaln(q.m + 1)) - q.m * math.log(2.0))
        return ConstantResult(q, math.exp(log_k), BoundaryMarker.ZERO_LIMIT, attained=False)
    if q.m == 0:
        return ConstantResult(q, 1.0, BoundaryMarker.INFINITY_LIMIT, attained=False)

    low, high = _bracket(q)
    delta_star = bisect(
        stationarity,
        low,
        high,
        args=(q,),
        xtol=1e-300,
        rtol=_BISECTION_RTOL,
        maxiter=2000,
    )
    residual = abs(stationarity(delta_star, q))
    if residual > STATIONARITY_TOLERANCE:
        logger.warning(
            "Stationarity residual %.3e above tolerance for alpha=%g, m=%d", residual, q.alpha, q.m
        )
    return ConstantResult(q, k_objective(delta_star, q), float(delta_star), attained=True)


def grid_minimum(
    q: DecayQuery,
    lo: float = 1e-6,
    hi: float = 1e3,
    points: int = 200_001,
) -> tuple[float, float]:
    """Dense log-spaced scan of ``f``; returns ``(min f, argmin delta)``."""
    deltas = np.geomspace(lo, hi, points)
    log_f = 0.5 * (np.sum(np.log(q.offsets()[:, None] + deltas[None, :]), axis=0) - np.log(deltas))
    index = int(np.argmin(log_f))
    return float(np.exp(log_f[index])), float(deltas[index])


def main_theorem_bound(alpha: float, m: int, viscosity: float, limsup_value: float) -> float:
    """Right side ``K(alpha, m) nu^(-m/2) lambda`` of the decay inequality."""
    result = k_constant(DecayQuery(alpha, m))
    return result.K * viscosity ** (-m / 2) * limsup_value
