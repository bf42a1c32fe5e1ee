"""Spectral representation tests."""

from __future__ import annotations

import math

import numpy as np
import pytest

from nsdecay.errors import ConfigurationError, DomainError, StructuralError
from nsdecay.spectral import (
    GridSpec,
    PhysicalField,
    SpectralField,
    dealias_mask,
    divergence_max,
    forward_transform,
    hermitian_defect,
    inverse_transform,
    is_solenoidal,
    leray_project,
    riemann_l2,
    seminorm,
    seminorms,
    wavenumbers,
)


def _random_physical(grid: GridSpec, seed: int = 0) -> PhysicalField:
    rng = np.random.default_rng(seed)
    return PhysicalField(grid, rng.standard_normal(grid.field_shape))


def _sine_mode(grid: GridSpec) -> PhysicalField:
    x, _ = grid.coordinates()
    values = np.zeros(grid.field_shape)
    values[0] = np.sin(2.0 * math.pi * x / grid.box_length)
    return PhysicalField(grid, values)


@pytest.mark.parametrize(
    ("kwargs", "key"),
    [
        ({"dimension": 4, "box_length": 1.0, "resolution": 16, "viscosity": 1.0}, "dimension"),
        ({"dimension": 2, "box_length": 1.0, "resolution": 15, "viscosity": 1.0}, "resolution"),
        ({"dimension": 2, "box_length": 1.0, "resolution": 6, "viscosity": 1.0}, "resolution"),
        ({"dimension": 2, "box_length": 0.0, "resolution": 16, "viscosity": 1.0}, "box_length"),
        ({"dimension": 2, "box_length": 1.0, "resolution": 16, "viscosity": 0.0}, "viscosity"),
    ],
)
def test_grid_spec_rejects_invalid_parameters(kwargs: dict, key: str) -> None:
    with pytest.raises(ConfigurationError) as excinfo:
        GridSpec(**kwargs)
    assert excinfo.value.key == key


def test_single_sine_mode_has_half_modulus_on_unit_box() -> None:
    grid = GridSpec(2, 1.0, 16, 1.0)
    F = forward_transform(_sine_mode(grid))

    assert abs(F.coefficients[0, 1, 0]) == pytest.approx(0.5, abs=1e-14)
    assert abs(F.coefficients[0, -1, 0]) == pytest.approx(0.5, abs=1e-14)
    others = np.abs(F.coefficients).copy()
    others[0, 1, 0] = 0.0
    others[0, -1, 0] = 0.0
    assert np.max(others) < 1e-14


def test_sine_mode_coefficient_scales_with_box_length() -> None:
    grid = GridSpec(2, 2.0 * math.pi, 16, 1.0)
    F = forward_transform(_sine_mode(grid))
    assert abs(F.coefficients[0, 1, 0]) == pytest.approx(math.pi, rel=1e-13)


@pytest.mark.parametrize("dimension", [2, 3])
def test_transform_round_trip(dimension: int) -> None:
    grid = GridSpec(dimension, 2.0 * math.pi, 8 if dimension == 3 else 16, 0.1)
    f = _random_physical(grid)
    back = inverse_transform(forward_transform(f))
    assert np.max(np.abs(back.values - f.values)) <= 1e-12


def test_parseval_matches_riemann_sum() -> None:
    grid = GridSpec(2, 3.0, 32, 0.1)
    f = _random_physical(grid, seed=4)
    assert seminorm(forward_transform(f), 0) == pytest.approx(riemann_l2(f), rel=1e-12)


def test_seminorms_of_sine_mode() -> None:
    grid = GridSpec(2, 1.0, 16, 1.0)
    F = forward_transform(_sine_mode(grid))
    values = seminorms(F, 3)

    base = math.sqrt(0.5)
    expected = [base * (2.0 * math.pi) ** m for m in range(4)]
    assert values == pytest.approx(expected, rel=1e-12)
    assert seminorm(F, 2) == pytest.approx(expected[2], rel=1e-12)


def test_seminorm_rejects_negative_order() -> None:
    grid = GridSpec(2, 1.0, 16, 1.0)
    with pytest.raises(DomainError):
        seminorm(SpectralField.zeros(grid), -1)
    with pytest.raises(DomainError):
        seminorms(SpectralField.zeros(grid), -1)


def test_leray_projection_is_idempotent_and_solenoidal() -> None:
    grid = GridSpec(3, 2.0 * math.pi, 8, 0.1)
    F = forward_transform(_random_physical(grid, seed=2))
    P = leray_project(F)
    PP = leray_project(P)

    assert P.solenoidal
    assert divergence_max(P) <= 1e-12
    assert is_solenoidal(P)
    assert not is_solenoidal(F)
    assert np.max(np.abs(PP.coefficients - P.coefficients)) <= 1e-12


def test_leray_projection_removes_gradient_and_keeps_mean() -> None:
    grid = GridSpec(2, 2.0 * math.pi, 16, 0.1)
    x, y = grid.coordinates()
    values = np.stack([np.cos(x) * np.sin(2 * y) + 0.3, 2 * np.sin(x) * np.cos(2 * y) - 0.1])
    P = leray_project(forward_transform(PhysicalField(grid, values)))

    mean = P.coefficients[:, 0, 0] / grid.box_length
    assert mean.real == pytest.approx([0.3, -0.1], abs=1e-12)
    nonmean = P.coefficients.copy()
    nonmean[:, 0, 0] = 0.0
    assert np.max(np.abs(nonmean)) <= 1e-12


def test_dealias_mask_keeps_two_thirds() -> None:
    grid = GridSpec(2, 1.0, 12, 1.0)
    mask = dealias_mask(grid)
    assert mask.shape == grid.shape
    assert int(mask.sum()) == 7 * 7
    assert not mask[4, 0]
    assert mask[3, 3]


def test_wavenumbers_are_cached_and_read_only() -> None:
    grid = GridSpec(2, 2.0 * math.pi, 8, 1.0)
    lattice = wavenumbers(grid)
    assert wavenumbers(grid) is lattice
    assert lattice.indices[0, 1, 0] == 1
    assert lattice.indices[0, -1, 0] == -1
    assert lattice.squared[1, 1] == pytest.approx(2.0)
    with pytest.raises(ValueError):
        lattice.squared[0, 0] = 1.0


def test_hermitian_defect_of_real_field_vanishes() -> None:
    grid = GridSpec(2, 1.0, 16, 1.0)
    F = forward_transform(_random_physical(grid, seed=9))
    assert hermitian_defect(F) <= 1e-13

    broken = F.coefficients.copy()
    broken[0, 1, 2] += 1j
    assert hermitian_defect(F.with_coefficients(broken)) == pytest.approx(1.0, rel=1e-12)


def test_field_shape_mismatch_raises_structural_error() -> None:
    grid = GridSpec(2, 1.0, 16, 1.0)
    with pytest.raises(StructuralError):
        SpectralField(grid, np.zeros((3, 16, 16), dtype=complex))
    with pytest.raises(StructuralError):
        PhysicalField(grid, np.zeros((2, 8, 8)))
    with pytest.raises(StructuralError):
        PhysicalField(grid, np.zeros(grid.field_shape, dtype=complex))
