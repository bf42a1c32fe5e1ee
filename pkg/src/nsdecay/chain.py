"""Energy-inequality and weighted-integral induction checks on measured norm series.

Every check compares a measured left side with the bound a solution must obey
for ``t >= t0``; ``(lambda0 + eps)`` and the ``(2 - eps) nu`` factors share one
``eps``. Integrals are composite trapezoids over recorded samples only.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from nsdecay.errors import ConfigurationError, RangeError
from nsdecay.solver import NormSeries

logger = logging.getLogger(__name__)

ABSORPTION_CONSTANT = 8.0 * math.sqrt(2.0)
PASS_TOLERANCE = 1e-9
TAIL_DECAY_FACTOR = 10.0

CHECK_ENERGY = "energy"
CHECK_BASE_INTEGRAL = "2.5"
CHECK_FIRST_POINTWISE = "2.6a"
CHECK_FIRST_INTEGRAL = "2.6b"
CHECK_POINTWISE = "2.8a"
CHECK_INTEGRAL = "2.8b"


@dataclass(frozen=True)
class ChainCheckConfig:
    alpha: float
    delta: float
    epsilon: float
    t0: float
    m_max: int
    window: tuple[float, float]

    def __post_init__(self) -> None:
        if not self.alpha >= 0:
            raise ConfigurationError(f"alpha must be nonnegative, got {self.alpha}.", key="alpha")
        if not self.delta > 0:
            raise ConfigurationError(f"delta must be positive, got {self.delta}.", key="delta")
        if not 0 < self.epsilon < 2:
            raise ConfigurationError(f"epsilon must lie in (0, 2), got {self.epsilon}.", key="epsilon")
        if not self.t0 >= 0:
            raise ConfigurationError(f"t0 must be nonnegative, got {self.t0}.", key="t0")
        if self.m_max < 1:
            raise ConfigurationError(f"m_max must be at least 1, got {self.m_max}.", key="m_max")
        start, end = self.window
        if not self.t0 < start < end:
            raise ConfigurationError(
                f"window ({start}, {end}) must be a nonempty interval after t0={self.t0}.", key="window"
            )


@dataclass(frozen=True)
class LimsupEstimate:
    """Window maximum of ``t^alpha ||u(t)||``, the finite-horizon proxy for lambda0."""

    lambda0: float
    window: tuple[float, float]
    alpha: float
    in_tail: bool = True


@dataclass(frozen=True)
class CheckRecord:
    check: str
    k: int
    t: float
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs * (1.0 + PASS_TOLERANCE)


@dataclass
class WeightedIntegralReport:
    limsup: LimsupEstimate
    config: ChainCheckConfig
    viscosity: float
    records: list[CheckRecord] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(record.passed for record in self.records)

    @property
    def failures(self) -> list[CheckRecord]:
        return [record for record in self.records if not record.passed]

    def worst_margin(self, check: str | None = None) -> float:
        margins = [r.margin for r in self.records if check is None or r.check == check]
        return min(margins) if margins else math.inf

    def first_passing_time(self, check: str, k: int) -> float | None:
        """Earliest checkpoint from which ``check`` at order ``k`` passes for every later sample."""
        selected = [r for r in self.records if r.check == check and r.k == k]
        first = None
        for record in reversed(selected):
            if not record.passed:
                break
            first = record.t
        return first

    def checks(self) -> list[tuple[str, int]]:
        seen: dict[tuple[str, int], None] = {}
        for record in self.records:
            seen.setdefault((record.check, record.k), None)
        return list(seen)


def _sample_index(s: NormSeries, time: float) -> int:
    span = s.end_time - s.times[0]
    slack = 1e-9 * max(span, 1.0)
    if time < s.times[0] - slack or time > s.end_time + slack:
        raise RangeError(f"t={time} lies outside the recorded range [{s.times[0]}, {s.end_time}].")
    return int(np.argmin(np.abs(s.times - time)))


def energy_inequality_check(s: NormSeries, nu: float, s_time: float, t_time: float) -> float:
    """Residual ``||u(t)||^2 + 2 nu int_s^t ||Du||^2 - ||u(s)||^2`` on the nearest samples."""
    if not s_time < t_time:
        raise RangeError(f"need s < t, got s={s_time}, t={t_time}.")
    i = _sample_index(s, s_time)
    j = _sample_index(s, t_time)
    l2 = s.seminorm(0)
    dissipation = trapezoid(s.seminorm(1)[i : j + 1] ** 2, s.times[i : j + 1])
    return float(l2[j] ** 2 + 2.0 * nu * dissipation - l2[i] ** 2)


def lambda0_estimate(s: NormSeries, alpha: float, window: tuple[float, float]) -> LimsupEstimate:
    start, end = window
    selected = (s.times >= start) & (s.times <= end)
    if not np.any(selected):
        raise RangeError(f"window [{start}, {end}] contains no recorded samples.")
    weighted = s.times[selected] ** alpha * s.seminorm(0)[selected]
    l2 = s.seminorm(0)
    first = int(np.argmax(selected))
    in_tail = bool(l2[first] * TAIL_DECAY_FACTOR <= l2[0]) or l2[0] == 0
    return LimsupEstimate(lambda0=float(np.max(weighted)), window=(start, end), alpha=alpha, in_tail=in_tail)


def weighted_integral(s: NormSeries, t0: float, p: float, m: int, t_end: float | None = None) -> float:
    """``int_{t0}^{t_end} (tau - t0)^p ||D^m u(tau)||^2 dtau`` over samples with ``tau >= t0``."""
    _sample_index(s, t0)
    end = s.end_time if t_end is None else t_end
    selected = (s.times >= t0) & (s.times <= end)
    tau = s.times[selected]
    if tau.size < 2:
        return 0.0
    integrand = (tau - t0) ** p * s.seminorm(m)[selected] ** 2
    return float(trapezoid(integrand, tau))


def _running_integral(tau: np.ndarray, values: np.ndarray) -> np.ndarray:
    return cumulative_trapezoid(values, tau, initial=0.0)


def _product(alpha: float, delta: float, k: int) -> float:
    return math.prod(2.0 * alpha + j + delta for j in range(k + 1))


def check_chain(s: NormSeries, nu: float, cfg: ChainCheckConfig) -> WeightedIntegralReport:
    """Evaluate the weighted-integral induction bounds at every recorded ``t >= t0``."""
    if s.m_max < cfg.m_max + 1:
        raise ConfigurationError(
            f"Chain checks up to k={cfg.m_max} need seminorms through order {cfg.m_max + 1}; "
            f"the series records {s.m_max}.",
            key="m_max",
        )
    if cfg.window[1] > s.end_time * (1.0 + 1e-12):
        raise ConfigurationError(
            f"window end {cfg.window[1]} is past the series end {s.end_time}.", key="window"
        )
    limsup = lambda0_estimate(s, cfg.alpha, cfg.window)
    if not limsup.in_tail:
        logger.warning(
            "lambda0 window %s is not in the decaying tail (||u|| dropped less than %gx)",
            cfg.window, TAIL_DECAY_FACTOR,
        )
    report = WeightedIntegralReport(limsup=limsup, config=cfg, viscosity=nu)

    selected = s.times >= cfg.t0
    times = s.times[selected]
    tau = times - cfg.t0
    norms = s.norms[selected]
    alpha, delta, eps = cfg.alpha, cfg.delta, cfg.epsilon
    scale = (limsup.lambda0 + eps) ** 2
    damped = (2.0 - eps) * nu
    tau_delta = tau**delta

    def add(check: str, k: int, lhs: np.ndarray, rhs: np.ndarray) -> None:
        rhs = np.broadcast_to(rhs, lhs.shape)
        for t, left, right in zip(times, lhs, rhs):
            report.records.append(CheckRecord(check, k, float(t), float(left), float(right)))

    du = norms[:, 1] ** 2
    add(
        CHECK_BASE_INTEGRAL,
        0,
        _running_integral(tau, tau ** (2 * alpha + delta) * du),
        (1.0 / (2.0 * nu)) * ((2 * alpha + delta) / delta) * scale * tau_delta,
    )
    add(
        CHECK_FIRST_POINTWISE,
        1,
        tau ** (2 * alpha + 1) * du,
        np.asarray((1.0 / (2.0 * nu)) * (2 * alpha + 1 + delta) * ((2 * alpha + delta) / delta) * scale),
    )
    add(
        CHECK_FIRST_INTEGRAL,
        1,
        _running_integral(tau, tau ** (2 * alpha + 1 + delta) * norms[:, 2] ** 2),
        ((2 * alpha + 1 + delta) * (2 * alpha + delta)) / (delta * damped**2) * scale * tau_delta,
    )
    for k in range(cfg.m_max + 1):
        product = _product(alpha, delta, k)
        add(
            CHECK_POINTWISE,
            k,
            tau ** (2 * alpha + k) * norms[:, k] ** 2,
            np.asarray(product * scale / (delta * damped**k)),
        )
        add(
            CHECK_INTEGRAL,
            k,
            _running_integral(tau, tau ** (2 * alpha + k + delta) * norms[:, k + 1] ** 2),
            product * scale * tau_delta / (delta * damped ** (k + 1)),
        )

    if not report.passed:
        logger.warning("%d chain checks failed; worst margin %.3e", len(report.failures), report.worst_margin())
    return report


def absorption_margin(s: NormSeries, t0: float, epsilon: float, nu: float) -> float:
    """``eps nu - K1 sup_{tau >= t0} ||Du(tau)||`` with ``K1 = 8 sqrt(2)``.

    A positive value certifies that the first-order nonlinear term is absorbed
    by diffusion from ``t0`` on; a negative value means ``t0`` must grow.
    """
    _sample_index(s, t0)
    tail = s.seminorm(1)[s.times >= t0]
    supremum = float(np.max(tail)) if tail.size else 0.0
    return epsilon * nu - ABSORPTION_CONSTANT * supremum


def absorption_threshold(s: NormSeries, epsilon: float, nu: float) -> float | None:
    """Earliest recorded ``t0`` with a positive absorption margin, if any."""
    du = s.seminorm(1)
    # Suffix maxima: sup of ||Du|| over [t_i, T] for every sample i.
    suffix = np.maximum.accumulate(du[::-1])[::-1]
    ok = epsilon * nu - ABSORPTION_CONSTANT * suffix > 0
    if not np.any(ok):
        return None
    return float(s.times[int(np.argmax(ok))])


def theorem_bound_from_chain(
    alpha: float,
    m: int,
    nu: float,
    lambda0: float,
    delta: float,
    epsilon: float,
) -> float:
    """Large-t bound on ``t^(alpha + m/2) ||D^m u||`` implied by the pointwise check at ``k = m``."""
    bound_squared = _product(alpha, delta, m) * (lambda0 + epsilon) ** 2 / (
        delta * ((2.0 - epsilon) * nu) ** m
    )
    return math.sqrt(bound_squared)
