"""Heat-semigroup oracle tests."""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from nsdecay.constants import DecayQuery, k_constant
from nsdecay.errors import DomainError
from nsdecay.heat import (
    RadialProfile,
    asymptotic_gap,
    asymptotic_rate,
    gaussian_l2_seminorm,
    gaussian_seminorm,
    heat_norm,
    heat_seminorm,
    heat_seminorm_quadrature,
    heat_series,
    radial_moment,
    regularity_time_bound,
    small_time_limit,
    sphere_area,
    verify_interpolation,
    verify_main_inequality,
    verify_product_interpolation,
)

KAPPAS = (0.0, 0.5, 1.0, 2.0)
ORACLE_CASES = list(itertools.product(KAPPAS, (2, 3, 4), range(5), (0.0, 1.0, 10.0, 1e3)))
MAIN_INEQUALITY_CASES = list(itertools.product(KAPPAS, (2, 3, 4), range(1, 5), (0.5, 1.0, 2.0)))


def test_sphere_areas() -> None:
    assert sphere_area(2) == pytest.approx(2.0 * math.pi)
    assert sphere_area(3) == pytest.approx(4.0 * math.pi)
    assert sphere_area(4) == pytest.approx(2.0 * math.pi**2)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_radial_moment_of_plain_gaussian(n: int) -> None:
    assert radial_moment(n, 0, 1.0) == pytest.approx(math.pi ** (n / 2), rel=1e-13)
    assert radial_moment(n, 2, 1.0) == pytest.approx(n / 2 * math.pi ** (n / 2), rel=1e-13)


def test_profile_rate_follows_kappa_and_dimension() -> None:
    assert RadialProfile(1.0, dimension=2).alpha == pytest.approx(1.0)
    assert RadialProfile(0.0, dimension=3).alpha == pytest.approx(0.75)
    assert RadialProfile(2.0, 3.0, 4).scaled(2.0) == RadialProfile(2.0, 6.0, 4)


@pytest.mark.parametrize(("kappa", "n", "m", "t"), ORACLE_CASES)
def test_closed_form_matches_quadrature(kappa: float, n: int, m: int, t: float) -> None:
    profile = RadialProfile(kappa, 1.3, n)
    closed = heat_seminorm(profile, 0.5, t, m)
    assert heat_seminorm_quadrature(profile, 0.5, t, m) == pytest.approx(closed, rel=1e-8)


def test_energy_at_time_zero_for_unit_gaussian() -> None:
    # ||u0||^2 = omega_1 / 2 * Gamma(1) = pi for kappa = 0, n = 2.
    assert heat_seminorm(RadialProfile(0.0), 1.0, 0.0, 0) == pytest.approx(math.sqrt(math.pi), rel=1e-14)


@pytest.mark.parametrize(("kappa", "n", "m", "nu"), MAIN_INEQUALITY_CASES)
def test_main_inequality_margin_is_positive(kappa: float, n: int, m: int, nu: float) -> None:
    assert verify_main_inequality(RadialProfile(kappa, dimension=n), nu, m) > 0.0


@pytest.mark.parametrize(("kappa", "n"), list(itertools.product(KAPPAS, (2, 3, 4))))
def test_main_inequality_margin_is_linear_in_amplitude(kappa: float, n: int) -> None:
    profile = RadialProfile(kappa, 0.7, n)
    for m in range(1, 5):
        margin = verify_main_inequality(profile, 1.0, m)
        assert verify_main_inequality(profile.scaled(2.0), 1.0, m) == pytest.approx(2.0 * margin, rel=1e-12)


@pytest.mark.parametrize(("kappa", "n", "m"), list(itertools.product(KAPPAS, (2, 3, 4), range(1, 5))))
def test_main_inequality_margin_scales_with_viscosity(kappa: float, n: int, m: int) -> None:
    profile = RadialProfile(kappa, dimension=n)
    exponent = (kappa + n / 2) / 2 + m / 2
    scaled = [verify_main_inequality(profile, nu, m) * nu**exponent for nu in (0.5, 1.0, 2.0, 10.0)]
    assert scaled == pytest.approx([scaled[1]] * 4, rel=1e-10)


def test_limit_ratio_matches_gamma_product() -> None:
    profile = RadialProfile(1.0, 2.0, 3)
    _, limit_0 = asymptotic_rate(profile, 2.0, 0)
    rate, limit_2 = asymptotic_rate(profile, 2.0, 2)

    s0 = profile.order(0)
    assert rate == pytest.approx(profile.alpha + 1.0)
    assert (limit_2 / limit_0) ** 2 == pytest.approx(s0 * (s0 + 1) / 16.0, rel=1e-12)
    bound = k_constant(DecayQuery(profile.alpha, 2)).K * 2.0**-1 * limit_0
    assert verify_main_inequality(profile, 2.0, 2) == pytest.approx(bound - limit_2, rel=1e-12)


def test_asymptotic_gap_closes() -> None:
    assert asymptotic_gap(RadialProfile(0.0, dimension=2), 1.0, 1) < 1e-6
    early = asymptotic_gap(RadialProfile(0.0, dimension=2), 1.0, 1, t=1.0)
    assert early > 0.1


def test_heat_norm_reports_exponent_and_limit() -> None:
    profile = RadialProfile(1.0, dimension=2)
    result = heat_norm(profile, 1.0, 3.0, 2)
    assert result.value == pytest.approx(heat_seminorm(profile, 1.0, 3.0, 2))
    assert result.exponent == pytest.approx(-4.0)
    assert result.limit_constant == pytest.approx(asymptotic_rate(profile, 1.0, 2)[1])


@pytest.mark.parametrize("m", [1, 2, 3])
def test_small_time_ratio_tends_to_power_of_ten(m: int) -> None:
    times, values = small_time_limit(RadialProfile(1.0), 1.0, m)

    assert times[0] == pytest.approx(0.1)
    assert times[-1] == pytest.approx(1e-8)
    assert values[-1] / values[-2] == pytest.approx(10.0 ** (-m / 2), rel=1e-6)
    initial = heat_seminorm(RadialProfile(1.0), 1.0, 0.0, m)
    assert values[-1] / times[-1] ** (m / 2) == pytest.approx(initial, rel=1e-6)


def test_heat_series_matches_pointwise_norms() -> None:
    profile = RadialProfile(0.5, 2.0, 3)
    times = [0.0, 0.5, 10.0, 1e3]
    series = heat_series(profile, 0.3, times, 3)

    assert series.grid is None
    assert series.viscosity == 0.3
    assert series.m_max == 3
    for i, t in enumerate(times):
        expected = [heat_seminorm(profile, 0.3, t, m) for m in range(4)]
        assert series.norms[i] == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_gaussian_norms_in_four_dimensions(a: float) -> None:
    assert gaussian_seminorm(a, 0, 4) == pytest.approx(math.sqrt(math.pi / (4.0 * a)), rel=1e-10)
    assert gaussian_seminorm(a, 1, 2) == pytest.approx(math.pi / math.sqrt(a), rel=1e-10)
    assert gaussian_l2_seminorm(a, 1) == pytest.approx(math.pi / math.sqrt(a), rel=1e-12)
    for k in range(4):
        assert gaussian_seminorm(a, k, 2) == pytest.approx(gaussian_l2_seminorm(a, k), rel=1e-9)


def test_gauss_hermite_agrees_with_adaptive_quadrature() -> None:
    for k, q in [(1, 4), (2, 4), (3, 2)]:
        adaptive = gaussian_seminorm(1.0, k, q)
        gauss = gaussian_seminorm(1.0, k, q, gauss_nodes=60)
        assert gauss == pytest.approx(adaptive, rel=1e-8)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_interpolation_ratio_is_scale_free(a: float) -> None:
    check = verify_interpolation(a)
    assert check.lhs / check.rhs == pytest.approx(1.0 / (2.0 * math.sqrt(math.pi)), rel=1e-12)
    assert check.margin > 0


def test_product_interpolation_holds_for_gaussian() -> None:
    check = verify_product_interpolation(1.0, 2, 1)
    assert check.margin > 0
    assert check.lhs == pytest.approx(gaussian_seminorm(1.0, 1, 4) ** 2, rel=1e-12)


def test_regularity_time_bounds() -> None:
    assert regularity_time_bound(2, 0.1, 5.0) == 0.0
    assert regularity_time_bound(3, 0.5, 2.0) == pytest.approx(2.0**5 * 16.0)
    assert regularity_time_bound(4, 0.5, 2.0) == pytest.approx(8.0 * 4.0)
    with pytest.raises(DomainError):
        regularity_time_bound(5, 1.0, 1.0)


@pytest.mark.parametrize(
    "kwargs",
    [{"kappa": -0.5}, {"kappa": 1.0, "amplitude": 0.0}, {"kappa": 1.0, "dimension": 5}],
)
def test_invalid_profile_raises_domain_error(kwargs: dict) -> None:
    with pytest.raises(DomainError):
        RadialProfile(**kwargs)


def test_invalid_oracle_arguments_raise_domain_error() -> None:
    profile = RadialProfile(1.0)
    with pytest.raises(DomainError):
        heat_seminorm(profile, 0.0, 1.0, 1)
    with pytest.raises(DomainError):
        heat_seminorm(profile, 1.0, -1.0, 1)
    with pytest.raises(DomainError):
        heat_seminorm(profile, 1.0, 1.0, -1)
    with pytest.raises(DomainError):
        small_time_limit(profile, 1.0, 0)
    with pytest.raises(DomainError):
        verify_main_inequality(profile, 1.0, 0)
    with pytest.raises(DomainError):
        verify_product_interpolation(1.0, 1, 2)
    with pytest.raises(DomainError):
        gaussian_seminorm(0.0, 1, 2)
    assert np.isfinite(heat_seminorm(profile, 1.0, 1e12, 3))
