"""Periodic-box grids, Fourier-side vector fields and derivative seminorms.

Coefficients follow the unitary-integral convention: for a real field ``u`` on
``[0, L]^n`` sampled at ``N`` points per axis,

    u_hat(k) = fftn(u) / N**n * L**(n/2)

so that ``sum_k |u_hat(k)|**2`` equals the continuum box integral of
``|u|**2`` and ``seminorm(F, m)`` is directly comparable with closed-form
integrals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from nsdecay.errors import ConfigurationError, DomainError, StructuralError

SOLENOIDAL_TOLERANCE = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Periodic box ``[0, L]^n`` with ``N`` collocation points per axis."""

    dimension: int
    box_length: float
    resolution: int
    viscosity: float

    def __post_init__(self) -> None:
        if self.dimension not in (2, 3):
            raise ConfigurationError(
                f"Grid dimension must be 2 or 3, got {self.dimension}.", key="dimension"
            )
        if self.resolution < 8 or self.resolution % 2:
            raise ConfigurationError(
                f"Grid resolution must be an even integer >= 8, got {self.resolution}.",
                key="resolution",
            )
        if not self.box_length > 0:
            raise ConfigurationError(
                f"Box length must be positive, got {self.box_length}.", key="box_length"
            )
        if not self.viscosity > 0:
            raise ConfigurationError(
                f"Viscosity must be positive, got {self.viscosity}.", key="viscosity"
            )

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.resolution,) * self.dimension

    @property
    def field_shape(self) -> tuple[int, ...]:
        return (self.dimension, *self.shape)

    @property
    def spatial_axes(self) -> tuple[int, ...]:
        return tuple(range(1, self.dimension + 1))

    @property
    def spacing(self) -> float:
        return self.box_length / self.resolution

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dimension

    @property
    def normalization(self) -> float:
        """Factor taking raw ``fftn`` output to unitary-integral coefficients."""
        return self.box_length ** (self.dimension / 2) / self.resolution**self.dimension

    def coordinates(self) -> tuple[np.ndarray, ...]:
        """Collocation points ``x_j = j L / N`` as an ``ij``-indexed mesh."""
        axis = np.arange(self.resolution) * self.spacing
        return tuple(np.meshgrid(*([axis] * self.dimension), indexing="ij"))


@dataclass(frozen=True, eq=False)
class Wavenumbers:
    """Read-only wavenumber lattice of a grid."""

    indices: np.ndarray
    vectors: np.ndarray
    squared: np.ndarray


@lru_cache(maxsize=16)
def wavenumbers(grid: GridSpec) -> Wavenumbers:
    """Lattice ``k = (2 pi / L) z`` with integer ``z`` in ``[-N/2, N/2)``."""
    z1 = np.fft.fftfreq(grid.resolution, d=1.0 / grid.resolution)
    indices = np.stack(np.meshgrid(*([z1] * grid.dimension), indexing="ij"))
    vectors = indices * (2.0 * math.pi / grid.box_length)
    squared = np.sum(vectors**2, axis=0)
    for array in (indices, vectors, squared):
        array.setflags(write=False)
    return Wavenumbers(indices=indices, vectors=vectors, squared=squared)


@lru_cache(maxsize=16)
def dealias_mask(grid: GridSpec) -> np.ndarray:
    """2/3-rule mask: keep modes with ``|z_j| < N/3`` on every axis."""
    mask = np.all(np.abs(wavenumbers(grid).indices) < grid.resolution / 3.0, axis=0)
    mask.setflags(write=False)
    return mask


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Vector field stored as one n-vector of Fourier coefficients per wavenumber."""

    grid: GridSpec
    coefficients: np.ndarray
    solenoidal: bool = False

    def __post_init__(self) -> None:
        coefficients = np.asarray(self.coefficients, dtype=np.complex128)
        if coefficients.shape != self.grid.field_shape:
            raise StructuralError(
                f"Spectral coefficients have shape {coefficients.shape}, "
                f"grid expects {self.grid.field_shape}."
            )
        object.__setattr__(self, "coefficients", coefficients)

    @classmethod
    def zeros(cls, grid: GridSpec) -> SpectralField:
        return cls(grid, np.zeros(grid.field_shape, dtype=np.complex128), solenoidal=True)

    def with_coefficients(self, coefficients: np.ndarray, *, solenoidal: bool | None = None) -> SpectralField:
        flag = self.solenoidal if solenoidal is None else solenoidal
        return SpectralField(self.grid, coefficients, solenoidal=flag)


@dataclass(frozen=True, eq=False)
class PhysicalField:
    """Real vector field sampled on the collocation lattice."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values)
        if values.shape != self.grid.field_shape:
            raise StructuralError(
                f"Physical values have shape {values.shape}, grid expects {self.grid.field_shape}."
            )
        if np.iscomplexobj(values):
            raise StructuralError("Physical field values must be real.")
        object.__setattr__(self, "values", values.astype(np.float64, copy=False))


def forward_transform(f: PhysicalField) -> SpectralField:
    grid = f.grid
    coefficients = np.fft.fftn(f.values, axes=grid.spatial_axes) * grid.normalization
    return SpectralField(grid, coefficients)


def inverse_transform(F: SpectralField) -> PhysicalField:
    grid = F.grid
    values = np.fft.ifftn(F.coefficients / grid.normalization, axes=grid.spatial_axes).real
    return PhysicalField(grid, values)


def riemann_l2(f: PhysicalField) -> float:
    """Physical-space L2 norm: Riemann sum times cell volume."""
    return math.sqrt(float(np.sum(f.values**2)) * f.grid.cell_volume)


def _k_dot(F: SpectralField) -> np.ndarray:
    return np.sum(wavenumbers(F.grid).vectors * F.coefficients, axis=0)


def leray_project(F: SpectralField) -> SpectralField:
    """Project onto divergence-free fields: ``u_hat - k (k . u_hat) / |k|^2``.

    The mean mode is left untouched.
    """
    lattice = wavenumbers(F.grid)
    inverse_squared = np.divide(
        1.0,
        lattice.squared,
        out=np.zeros_like(lattice.squared),
        where=lattice.squared > 0,
    )
    projected = F.coefficients - lattice.vectors * (_k_dot(F) * inverse_squared)
    return F.with_coefficients(projected, solenoidal=True)


def seminorm(F: SpectralField, m: int) -> float:
    """``||D^m u||`` as ``(sum_k |k|^(2m) |u_hat(k)|^2)^(1/2)``."""
    if m < 0:
        raise DomainError(f"Seminorm order must be nonnegative, got {m}.")
    power = np.sum(np.abs(F.coefficients) ** 2, axis=0)
    if m > 0:
        power = power * wavenumbers(F.grid).squared**m
    return math.sqrt(float(np.sum(power)))


def seminorms(F: SpectralField, m_max: int) -> np.ndarray:
    """Vector ``(||u||, ||Du||, ..., ||D^m_max u||)`` from one pass over the modes."""
    if m_max < 0:
        raise DomainError(f"Seminorm order must be nonnegative, got {m_max}.")
    power = np.sum(np.abs(F.coefficients) ** 2, axis=0)
    squared = wavenumbers(F.grid).squared
    values = np.empty(m_max + 1)
    weighted = power
    for m in range(m_max + 1):
        values[m] = math.sqrt(float(np.sum(weighted)))
        weighted = weighted * squared
    return values


def divergence_max(F: SpectralField) -> float:
    """``max_k |k . u_hat(k)|``."""
    return float(np.max(np.abs(_k_dot(F))))


def is_solenoidal(F: SpectralField, tolerance: float = SOLENOIDAL_TOLERANCE) -> bool:
    """Check ``|k . u_hat| <= tol |k| |u_hat|`` on every nonzero mode."""
    lattice = wavenumbers(F.grid)
    magnitude = np.sqrt(np.sum(np.abs(F.coefficients) ** 2, axis=0))
    bound = tolerance * np.sqrt(lattice.squared) * magnitude
    return bool(np.all(np.abs(_k_dot(F)) <= bound + np.finfo(float).tiny))


def hermitian_defect(F: SpectralField) -> float:
    """``max_k |u_hat(k) - conj(u_hat(-k))|``; zero for real fields."""
    axes = F.grid.spatial_axes
    reflected = np.roll(np.flip(F.coefficients, axis=axes), 1, axis=axes)
    return float(np.max(np.abs(F.coefficients - np.conj(reflected))))
