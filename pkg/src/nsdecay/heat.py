"""Exact whole-space heat-semigroup solutions with closed-form seminorms.

For the radial datum ``u0_hat(xi) = A |xi|^kappa exp(-|xi|^2 / 2)`` in R^n the
flow ``e^{nu t Laplacian} u0`` has

    ||D^m u(t)||^2 = A^2 omega_{n-1} / 2 * Gamma(s) * (1 + 2 nu t)^(-s),
    s = m + kappa + n/2,

with ``omega_{n-1} = 2 pi^(n/2) / Gamma(n/2)`` the area of the unit sphere.
Every closed form here has a quadrature twin so the two can be compared.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.integrate import quad
from scipy.special import eval_hermite, gammaln

from nsdecay.constants import DecayQuery, k_constant
from nsdecay.errors import DomainError
from nsdecay.solver import NormSeries

SMALL_TIMES = tuple(10.0**-p for p in range(1, 9))
_QUAD_RTOL = 1e-12
_TAIL_EXPONENT = 45.0


@dataclass(frozen=True)
class RadialProfile:
    """``u0_hat(xi) = A |xi|^kappa exp(-|xi|^2 / 2)`` in R^n."""

    kappa: float
    amplitude: float = 1.0
    dimension: int = 2

    def __post_init__(self) -> None:
        if not self.kappa >= 0:
            raise DomainError(f"kappa must be nonnegative, got {self.kappa}.")
        if not self.amplitude > 0:
            raise DomainError(f"amplitude must be positive, got {self.amplitude}.")
        if self.dimension not in (2, 3, 4):
            raise DomainError(f"dimension must be 2, 3 or 4, got {self.dimension}.")

    @property
    def alpha(self) -> float:
        """Decay rate of ``||u(t)||``: ``(kappa + n/2) / 2``."""
        return (self.kappa + self.dimension / 2) / 2

    def order(self, m: int) -> float:
        return m + self.kappa + self.dimension / 2

    def scaled(self, factor: float) -> RadialProfile:
        return RadialProfile(self.kappa, self.amplitude * factor, self.dimension)


@dataclass(frozen=True)
class HeatNormResult:
    """``value`` at one time; the squared norm decays like ``t^exponent`` toward ``limit_constant``."""

    value: float
    exponent: float
    limit_constant: float


@dataclass(frozen=True)
class InterpolationCheck:
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


def sphere_area(n: int) -> float:
    """``omega_{n-1} = 2 pi^(n/2) / Gamma(n/2)``."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def radial_moment(n: int, p: float, b: float) -> float:
    """``int_{R^n} |x|^p exp(-b |x|^2) dx = omega_{n-1} Gamma((p+n)/2) / (2 b^((p+n)/2))``."""
    half = (p + n) / 2
    return sphere_area(n) * math.exp(float(gammaln(half)) - half * math.log(b)) / 2.0


def _check_viscosity(nu: float) -> None:
    if not nu > 0:
        raise DomainError(f"viscosity must be positive, got {nu}.")


def _squared_log(p: RadialProfile, nu: float, t: float, m: int) -> float:
    s = p.order(m)
    return (
        2.0 * math.log(p.amplitude)
        + math.log(sphere_area(p.dimension) / 2.0)
        + float(gammaln(s))
        - s * math.log1p(2.0 * nu * t)
    )


def heat_seminorm(p: RadialProfile, nu: float, t: float, m: int) -> float:
    """Closed-form ``||D^m e^{nu t Laplacian} u0||``."""
    _check_viscosity(nu)
    if t < 0:
        raise DomainError(f"time must be nonnegative, got {t}.")
    if m < 0:
        raise DomainError(f"m must be nonnegative, got {m}.")
    return math.exp(0.5 * _squared_log(p, nu, t, m))


def heat_seminorm_quadrature(p: RadialProfile, nu: float, t: float, m: int) -> float:
    """Same norm by adaptive quadrature of the radial Fourier integral."""
    _check_viscosity(nu)
    decay = 1.0 + 2.0 * nu * t
    power = 2 * m + 2 * p.kappa + p.dimension - 1
    peak = math.sqrt(max(power, 0.0) / (2.0 * decay))
    cutoff = math.sqrt((power + _TAIL_EXPONENT) / decay) + peak

    def integrand(r: float) -> float:
        return r**power * math.exp(-decay * r * r)

    value, _ = quad(integrand, 0.0, cutoff, points=[peak], epsabs=0.0, epsrel=_QUAD_RTOL, limit=200)
    return p.amplitude * math.sqrt(sphere_area(p.dimension) * value)


def asymptotic_rate(p: RadialProfile, nu: float, m: int) -> tuple[float, float]:
    """``(alpha_m, L_m)`` with ``t^alpha_m ||D^m u(t)|| -> L_m`` as ``t -> inf``."""
    _check_viscosity(nu)
    s = p.order(m)
    log_limit = 0.5 * (
        2.0 * math.log(p.amplitude)
        + math.log(sphere_area(p.dimension) / 2.0)
        + float(gammaln(s))
        - s * math.log(2.0 * nu)
    )
    return s / 2.0, math.exp(log_limit)


def asymptotic_gap(p: RadialProfile, nu: float, m: int, t: float | None = None) -> float:
    """Relative gap ``|t^alpha_m ||D^m u(t)|| - L_m| / L_m``, by default at ``t = 1e6 / nu``."""
    t = 1e6 / nu if t is None else t
    alpha_m, limit = asymptotic_rate(p, nu, m)
    return abs(t**alpha_m * heat_seminorm(p, nu, t, m) - limit) / limit


def heat_norm(p: RadialProfile, nu: float, t: float, m: int) -> HeatNormResult:
    _, limit = asymptotic_rate(p, nu, m)
    return HeatNormResult(
        value=heat_seminorm(p, nu, t, m),
        exponent=-p.order(m),
        limit_constant=limit,
    )


def verify_main_inequality(p: RadialProfile, nu: float, m: int) -> float:
    """Margin ``K(alpha, m) nu^(-m/2) L_0 - L_m`` with ``alpha = (kappa + n/2) / 2``.

    The decay inequality is a theorem, so a negative margin signals a bug.
    """
    if m < 1:
        raise DomainError(f"m must be at least 1, got {m}.")
    _, limit_0 = asymptotic_rate(p, nu, 0)
    _, limit_m = asymptotic_rate(p, nu, m)
    constant = k_constant(DecayQuery(p.alpha, m)).K
    return constant * nu ** (-m / 2) * limit_0 - limit_m


def small_time_limit(
    p: RadialProfile,
    nu: float,
    m: int,
    times: Sequence[float] = SMALL_TIMES,
) -> tuple[np.ndarray, np.ndarray]:
    """``t^(m/2) ||D^m u(t)||`` along a decreasing sequence of times."""
    if m < 1:
        raise DomainError(f"m must be at least 1, got {m}.")
    grid = np.asarray(times, dtype=np.float64)
    values = np.array([t ** (m / 2) * heat_seminorm(p, nu, t, m) for t in grid])
    return grid, values


def heat_series(p: RadialProfile, nu: float, times: Sequence[float], m_max: int) -> NormSeries:
    """Closed-form seminorm trajectories packaged like a simulation's output."""
    grid = np.asarray(times, dtype=np.float64)
    orders = np.arange(m_max + 1)
    log_coefficient = (
        2.0 * math.log(p.amplitude)
        + math.log(sphere_area(p.dimension) / 2.0)
        + gammaln(orders + p.kappa + p.dimension / 2)
    )
    exponents = orders + p.kappa + p.dimension / 2
    squared_log = log_coefficient[None, :] - exponents[None, :] * np.log1p(2.0 * nu * grid)[:, None]
    return NormSeries(grid, np.exp(0.5 * squared_log), grid=None, viscosity=nu)


def energy_times(p: RadialProfile, nu: float, horizon: float, tolerance: float) -> np.ndarray:
    """Times on ``[0, horizon]`` fine enough for a trapezoid energy balance within ``tolerance`` of ``||u0||^2``.

    The grid is geometric in ``1 + 2 nu t``. With ratio ``r`` the relative
    trapezoid error of ``int ||Du||^2`` is about ``(r - 1)^2 s (s + 1) / 12``,
    ``s = 1 + kappa + n/2``; the ratio keeps that below a quarter of ``tolerance``.
    """
    _check_viscosity(nu)
    if not horizon > 0:
        raise DomainError(f"horizon must be positive, got {horizon}.")
    if not 0 < tolerance < 1:
        raise DomainError(f"tolerance must lie in (0, 1), got {tolerance}.")
    s = p.order(1)
    step = math.sqrt(3.0 * tolerance / (s * (s + 1.0)))
    end = 1.0 + 2.0 * nu * horizon
    count = max(2, math.ceil(math.log(end) / math.log1p(step)) + 1)
    times = (np.geomspace(1.0, end, count) - 1.0) / (2.0 * nu)
    times[0] = 0.0
    times[-1] = horizon
    return times


def regularity_time_bound(n: int, nu: float, l2_norm: float) -> float:
    """Known upper bounds on the regularity time: 0, nu^-5 ||u0||^4, nu^-3 ||u0||^2 for n = 2, 3, 4."""
    if n == 2:
        return 0.0
    if n == 3:
        return nu**-5 * l2_norm**4
    if n == 4:
        return nu**-3 * l2_norm**2
    raise DomainError(f"dimension must be 2, 3 or 4, got {n}.")


def _hermite_power_integral(order: int, q: int) -> float:
    """``int_R H_order(y)^q exp(-q y^2) dy`` by adaptive quadrature."""

    def integrand(y: float) -> float:
        return abs(float(eval_hermite(order, y))) ** q * math.exp(-q * y * y)

    value, _ = quad(integrand, -np.inf, np.inf, epsabs=0.0, epsrel=_QUAD_RTOL, limit=200)
    return value


def _hermite_power_integral_gauss(order: int, q: int, nodes: int) -> float:
    """Gauss-Hermite twin of :func:`_hermite_power_integral` after ``z = sqrt(q) y``."""
    z, w = hermgauss(nodes)
    y = z / math.sqrt(q)
    return float(np.sum(w * np.abs(eval_hermite(order, y)) ** q)) / math.sqrt(q)


def _compositions(total: int, parts: int):
    for cut in itertools.combinations(range(total + parts - 1), parts - 1):
        bounds = (-1, *cut, total + parts - 1)
        yield tuple(bounds[i + 1] - bounds[i] - 1 for i in range(parts))


def gaussian_seminorm(a: float, k: int, q: int, n: int = 4, *, gauss_nodes: int | None = None) -> float:
    """``||D^k u||_{L^q(R^n)}`` of ``u(x) = exp(-a |x|^2)``.

    Each ``D_{j1}...D_{jk} u`` factorizes into 1-D Hermite derivatives
    ``(-sqrt(a))^b H_b(sqrt(a) x) exp(-a x^2)``; the sum over ordered index
    tuples is a multinomial sum over compositions of ``k``. With
    ``gauss_nodes`` the 1-D integrals use Gauss-Hermite instead of adaptive
    quadrature.
    """
    if not a > 0:
        raise DomainError(f"a must be positive, got {a}.")
    cache: dict[int, float] = {}

    def one_dimensional(order: int) -> float:
        if order not in cache:
            if gauss_nodes is None:
                cache[order] = _hermite_power_integral(order, q)
            else:
                cache[order] = _hermite_power_integral_gauss(order, q, gauss_nodes)
        return cache[order]

    total = 0.0
    for beta in _compositions(k, n):
        multinomial = math.factorial(k) / math.prod(math.factorial(b) for b in beta)
        total += multinomial * math.prod(one_dimensional(b) for b in beta)
    # Each 1-D factor scales as a^(q b / 2 - 1/2).
    return (a ** (q * k / 2 - n / 2) * total) ** (1.0 / q)


def gaussian_l2_seminorm(a: float, k: int, n: int = 4) -> float:
    """Closed-form ``||D^k exp(-a|x|^2)||_{L^2(R^n)}`` via Plancherel."""
    return math.sqrt((2.0 * a) ** (-n) * radial_moment(n, 2 * k, 1.0 / (2.0 * a)))


def verify_interpolation(a: float) -> InterpolationCheck:
    """``||u||_{L^4(R^4)} <= ||Du||_{L^2(R^4)}`` for ``u = exp(-a |x|^2)``, from Gaussian moments."""
    if not a > 0:
        raise DomainError(f"a must be positive, got {a}.")
    lhs = radial_moment(4, 0, 4.0 * a) ** 0.25
    rhs = math.sqrt(4.0 * a * a * radial_moment(4, 2, 2.0 * a))
    return InterpolationCheck(lhs=lhs, rhs=rhs)


def verify_product_interpolation(a: float, m: int, ell: int, *, gauss_nodes: int | None = None) -> InterpolationCheck:
    """``||D^ell u||_{L^4} ||D^(m-ell) u||_{L^4} <= ||Du||_{L^2} ||D^(m+1) u||_{L^2}`` in R^4."""
    if not 0 <= ell <= m:
        raise DomainError(f"need 0 <= ell <= m, got ell={ell}, m={m}.")
    lhs = gaussian_seminorm(a, ell, 4, gauss_nodes=gauss_nodes) * gaussian_seminorm(
        a, m - ell, 4, gauss_nodes=gauss_nodes
    )
    rhs = gaussian_seminorm(a, 1, 2, gauss_nodes=gauss_nodes) * gaussian_seminorm(
        a, m + 1, 2, gauss_nodes=gauss_nodes
    )
    return InterpolationCheck(lhs=lhs, rhs=rhs)
