"""Pseudo-spectral time stepping of the incompressible Navier-Stokes system.

The viscous term is integrated exactly through the factor
``exp(-nu |k|^2 dt)``; the Leray-projected, 2/3-dealiased convective term is
advanced with the classical four-stage Runge-Kutta scheme written in
integrating-factor (Lawson) form.
"""

from __future__ import annotations

import logging
import math
import struct
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from nsdecay.errors import BlowUpError, ConfigurationError, StructuralError
from nsdecay.spectral import (
    GridSpec,
    SpectralField,
    dealias_mask,
    divergence_max,
    inverse_transform,
    is_solenoidal,
    leray_project,
    seminorm,
    seminorms,
    wavenumbers,
)

logger = logging.getLogger(__name__)

CFL_NUMBER = 0.5
_MEAN_TOLERANCE = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    """Time stepping and recording parameters.

    ``horizon`` is the final time T and must be a whole number of steps.
    """

    dt: float
    horizon: float
    dealias: bool = True
    record_stride: int = 1
    m_max: int = 3
    nonlinear: bool = True

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ConfigurationError(f"Time step must be positive, got {self.dt}.", key="dt")
        if not self.horizon > self.dt:
            raise ConfigurationError(
                f"Horizon T={self.horizon} must exceed the time step dt={self.dt}.", key="horizon"
            )
        if self.record_stride < 1:
            raise ConfigurationError(
                f"Record stride must be a positive integer, got {self.record_stride}.",
                key="record_stride",
            )
        if self.m_max < 1:
            raise ConfigurationError(f"m_max must be at least 1, got {self.m_max}.", key="m_max")
        if abs(self.steps * self.dt - self.horizon) > 1e-9 * self.horizon:
            raise ConfigurationError(
                f"Horizon T={self.horizon} is not a whole number of steps of dt={self.dt}.",
                key="horizon",
            )

    @property
    def steps(self) -> int:
        return max(1, round(self.horizon / self.dt))


@dataclass(frozen=True, eq=False)
class NormSeries:
    """Seminorm trajectories ``t -> (||u||, ||Du||, ..., ||D^m_max u||)``.

    ``grid`` is ``None`` for whole-space series produced by the heat oracle.
    """

    times: np.ndarray
    norms: np.ndarray
    grid: GridSpec | None = None
    viscosity: float | None = None
    divergence: np.ndarray | None = None

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=np.float64)
        norms = np.asarray(self.norms, dtype=np.float64)
        if times.ndim != 1 or norms.ndim != 2 or norms.shape[0] != times.shape[0]:
            raise StructuralError(
                f"Norm table of shape {norms.shape} does not match {times.shape[0]} sample times."
            )
        if times.size == 0 or times[0] != 0.0:
            raise StructuralError("Norm series must start at t = 0.")
        if np.any(np.diff(times) <= 0):
            raise StructuralError("Norm series times must be strictly increasing.")
        if np.any(norms < 0) or not np.all(np.isfinite(norms)):
            raise StructuralError("Norm series entries must be finite and nonnegative.")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "norms", norms)
        if self.divergence is not None:
            object.__setattr__(self, "divergence", np.asarray(self.divergence, dtype=np.float64))

    def __len__(self) -> int:
        return int(self.times.size)

    @property
    def m_max(self) -> int:
        return int(self.norms.shape[1]) - 1

    @property
    def end_time(self) -> float:
        return float(self.times[-1])

    def seminorm(self, m: int) -> np.ndarray:
        return self.norms[:, m]

    def refined_every(self, stride: int) -> NormSeries:
        """Subsample every ``stride``-th record, keeping the final one."""
        keep = np.arange(0, len(self), stride)
        if keep[-1] != len(self) - 1:
            keep = np.append(keep, len(self) - 1)
        divergence = None if self.divergence is None else self.divergence[keep]
        return NormSeries(self.times[keep], self.norms[keep], self.grid, self.viscosity, divergence)


@dataclass(frozen=True, eq=False)
class StateSnapshot:
    time: float
    field: SpectralField


@dataclass(frozen=True, eq=False)
class SimulationRun:
    series: NormSeries
    final: StateSnapshot
    snapshots: tuple[StateSnapshot, ...] = ()


def taylor_green(grid: GridSpec, amplitude: float) -> SpectralField:
    """``amplitude * (cos x sin y, -sin x cos y)`` on ``[0, 2 pi]^2``, built mode by mode."""
    if grid.dimension != 2 or not math.isclose(grid.box_length, 2.0 * math.pi, rel_tol=1e-12):
        raise ConfigurationError(
            "Taylor-Green data needs a 2D grid with box length 2*pi.", key="preset"
        )
    coefficients = np.zeros(grid.field_shape, dtype=np.complex128)
    scale = amplitude * grid.box_length ** (grid.dimension / 2)
    n = grid.resolution
    for a in (1, -1):
        for b in (1, -1):
            coefficients[0, a % n, b % n] = -0.25j * b * scale
            coefficients[1, a % n, b % n] = 0.25j * a * scale
    return SpectralField(grid, coefficients, solenoidal=True)


def taylor_green_seminorm(amplitude: float, viscosity: float, t: float, m: int) -> float:
    """Exact ``||D^m u(t)||`` of the Taylor-Green solution on ``[0, 2 pi]^2``."""
    return abs(amplitude) * math.pi * math.sqrt(2.0) * 2.0 ** (m / 2) * math.exp(-2.0 * viscosity * t)


def random_solenoidal(grid: GridSpec, seed: int, amplitude: float = 1.0, k_cut: float = 4.0) -> SpectralField:
    """Seeded zero-mean solenoidal field with spectrum on ``0 < |z| <= k_cut``.

    ``amplitude`` is the target RMS velocity ``||u|| / L^(n/2)``.
    """
    if not 0 < k_cut < grid.resolution / 3.0:
        raise ConfigurationError(
            f"Spectral cutoff {k_cut} must lie inside the dealiased band (< N/3).", key="k_cut"
        )
    rng = np.random.default_rng(seed)
    lattice = wavenumbers(grid)
    radius = np.sqrt(np.sum(lattice.indices**2, axis=0))
    support = (radius > 0) & (radius <= k_cut)
    raw = (rng.standard_normal(grid.field_shape) + 1j * rng.standard_normal(grid.field_shape)) * support
    # Taking the real part in physical space makes the coefficients Hermitian.
    physical = np.fft.ifftn(raw, axes=grid.spatial_axes).real
    coefficients = np.fft.fftn(physical, axes=grid.spatial_axes) * support
    field = leray_project(SpectralField(grid, coefficients))
    rms = seminorm(field, 0) / grid.box_length ** (grid.dimension / 2)
    if rms == 0 or amplitude == 0:
        return SpectralField.zeros(grid)
    return field.with_coefficients(field.coefficients * (amplitude / rms))


def linear_decay_seminorms(u0: SpectralField, t: float, m_max: int) -> np.ndarray:
    """Mode-sum closed form of ``||D^m e^{nu t Laplacian} u0||`` for ``m <= m_max``."""
    grid = u0.grid
    squared = wavenumbers(grid).squared
    power = np.sum(np.abs(u0.coefficients) ** 2, axis=0) * np.exp(-2.0 * grid.viscosity * squared * t)
    values = np.empty(m_max + 1)
    for m in range(m_max + 1):
        values[m] = math.sqrt(float(np.sum(power * squared**m)))
    return values


def max_speed(u: SpectralField) -> float:
    values = inverse_transform(u).values
    return float(np.max(np.sqrt(np.sum(values**2, axis=0))))


def speed_bound(u: SpectralField) -> float:
    """Upper bound ``L^(-n/2) sum_k |u_hat(k)|`` on ``max|u|`` without a transform."""
    magnitude = np.sqrt(np.sum(np.abs(u.coefficients) ** 2, axis=0))
    return float(np.sum(magnitude)) / u.grid.box_length ** (u.grid.dimension / 2)


def cfl_limit(u: SpectralField) -> float:
    """Largest stable time step ``C_cfl * dx / max|u|`` (infinite for a fluid at rest)."""
    speed = max_speed(u)
    if speed == 0:
        return math.inf
    return CFL_NUMBER * u.grid.spacing / speed


def _within_cfl(u: SpectralField, dt: float) -> bool:
    bound = speed_bound(u)
    if bound == 0 or dt <= CFL_NUMBER * u.grid.spacing / bound:
        return True
    return dt <= cfl_limit(u)


@lru_cache(maxsize=16)
def _nyquist_free_mask(grid: GridSpec) -> np.ndarray:
    mask = np.all(np.abs(wavenumbers(grid).indices) < grid.resolution / 2, axis=0)
    mask.setflags(write=False)
    return mask


def _full_spectrum(half: np.ndarray, grid: GridSpec) -> np.ndarray:
    """All coefficients of a real vector field from its ``rfftn`` half along the last axis."""
    n = grid.resolution
    full = np.empty(grid.field_shape, dtype=np.complex128)
    full[..., : n // 2 + 1] = half
    mirrored = np.conj(half[..., n // 2 - 1 : 0 : -1])
    other = grid.spatial_axes[:-1]
    full[..., n // 2 + 1 :] = np.roll(np.flip(mirrored, axis=other), 1, axis=other)
    return full


def nonlinear_term(u: SpectralField, *, dealias: bool = True) -> SpectralField:
    """Leray-projected spectral form of ``-(u . grad) u``.

    Evaluated as ``-div(u u)`` on the real-to-complex half spectrum. Without
    dealiasing the Nyquist planes are still dropped.
    """
    grid = u.grid
    lattice = wavenumbers(grid)
    half = grid.resolution // 2 + 1
    vectors = lattice.vectors[..., :half]
    velocity = np.fft.irfftn(u.coefficients[..., :half], s=grid.shape, axes=grid.spatial_axes)
    velocity /= grid.normalization

    result = np.zeros((grid.dimension, *vectors.shape[1:]), dtype=np.complex128)
    for i in range(grid.dimension):
        for j in range(i, grid.dimension):
            flux = np.fft.rfftn(velocity[i] * velocity[j]) * grid.normalization
            result[i] -= 1j * vectors[j] * flux
            if j != i:
                result[j] -= 1j * vectors[i] * flux
    mask = dealias_mask(grid) if dealias else _nyquist_free_mask(grid)
    result *= mask[..., :half]

    squared = lattice.squared[..., :half]
    inverse_squared = np.divide(1.0, squared, out=np.zeros_like(squared), where=squared > 0)
    result -= vectors * (np.sum(vectors * result, axis=0) * inverse_squared)
    return SpectralField(grid, _full_spectrum(result, grid), solenoidal=True)


class IntegratingFactorRK4:
    """Lawson RK4 stepper with the exact viscous factor precomputed per grid."""

    def __init__(self, grid: GridSpec, cfg: SolverConfig) -> None:
        self.grid = grid
        self.cfg = cfg
        squared = wavenumbers(grid).squared
        self.full = np.exp(-grid.viscosity * squared * cfg.dt)
        self.half = np.exp(-grid.viscosity * squared * cfg.dt / 2.0)

    def _rhs(self, coefficients: np.ndarray) -> np.ndarray:
        if not self.cfg.nonlinear:
            return np.zeros_like(coefficients)
        field = SpectralField(self.grid, coefficients)
        return nonlinear_term(field, dealias=self.cfg.dealias).coefficients

    def advance(self, coefficients: np.ndarray, time: float) -> np.ndarray:
        dt = self.cfg.dt
        E, E2 = self.full, self.half
        with np.errstate(over="ignore", invalid="ignore"):
            a = self._rhs(coefficients)
            b = self._rhs(E2 * (coefficients + 0.5 * dt * a))
            c = self._rhs(E2 * coefficients + 0.5 * dt * b)
            d = self._rhs(E * coefficients + dt * E2 * c)
            updated = E * coefficients + (dt / 6.0) * (E * a + 2.0 * E2 * (b + c) + d)
        if not np.all(np.isfinite(updated)):
            raise BlowUpError(time + dt)
        return updated


def step(s: StateSnapshot, cfg: SolverConfig) -> StateSnapshot:
    """Advance one snapshot by ``cfg.dt``."""
    stepper = IntegratingFactorRK4(s.field.grid, cfg)
    coefficients = stepper.advance(s.field.coefficients, s.time)
    return StateSnapshot(s.time + cfg.dt, s.field.with_coefficients(coefficients, solenoidal=True))


def _check_initial_data(u0: SpectralField, cfg: SolverConfig) -> None:
    grid = u0.grid
    if not is_solenoidal(u0):
        raise ConfigurationError("Initial data must be divergence-free.", key="preset")
    mean = np.abs(u0.coefficients[(slice(None),) + (0,) * grid.dimension])
    if np.max(mean) > _MEAN_TOLERANCE * (1.0 + seminorm(u0, 0)):
        raise ConfigurationError("Initial data must have zero mean.", key="preset")
    limit = cfl_limit(u0)
    if cfg.nonlinear and cfg.dt > limit:
        raise ConfigurationError(
            f"Time step dt={cfg.dt} violates the advective bound dt <= {limit:.3e} "
            f"(C_cfl={CFL_NUMBER}).",
            key="dt",
        )


def simulate(u0: SpectralField, cfg: SolverConfig, *, keep_snapshots: bool = False) -> SimulationRun:
    """Integrate from ``u0`` to ``cfg.horizon`` recording seminorms every ``record_stride`` steps."""
    grid = u0.grid
    _check_initial_data(u0, cfg)
    stepper = IntegratingFactorRK4(grid, cfg)
    steps = cfg.steps
    logger.info(
        "Simulating %d steps of dt=%g on N=%d (n=%d, nu=%g)",
        steps, cfg.dt, grid.resolution, grid.dimension, grid.viscosity,
    )

    coefficients = u0.coefficients.copy()
    field = u0.with_coefficients(coefficients, solenoidal=True)
    times = [0.0]
    norms = [seminorms(field, cfg.m_max)]
    divergence = [divergence_max(field)]
    snapshots = [StateSnapshot(0.0, field)] if keep_snapshots else []
    cfl_warned = False

    for i in range(1, steps + 1):
        coefficients = stepper.advance(coefficients, (i - 1) * cfg.dt)
        if i % cfg.record_stride and i != steps:
            continue
        time = i * cfg.dt
        field = u0.with_coefficients(coefficients, solenoidal=True)
        times.append(time)
        norms.append(seminorms(field, cfg.m_max))
        divergence.append(divergence_max(field))
        if keep_snapshots:
            snapshots.append(StateSnapshot(time, field))
        if cfg.nonlinear and not cfl_warned and not _within_cfl(field, cfg.dt):
            logger.warning("Advective bound violated at t=%.6g (dt=%g)", time, cfg.dt)
            cfl_warned = True
        logger.debug("t=%.6g ||u||=%.6e ||Du||=%.6e", time, norms[-1][0], norms[-1][1])

    series = NormSeries(
        np.asarray(times),
        np.vstack(norms),
        grid=grid,
        viscosity=grid.viscosity,
        divergence=np.asarray(divergence),
    )
    final = StateSnapshot(steps * cfg.dt, field)
    return SimulationRun(series=series, final=final, snapshots=tuple(snapshots))


_SNAPSHOT_MAGIC = b"NSDS"
_SNAPSHOT_HEADER = struct.Struct("<4sIIddd")


def save_snapshot(path: str | Path, snapshot: StateSnapshot) -> None:
    """Write header ``(magic, n, N, L, nu, time)`` then little-endian complex128 coefficients."""
    grid = snapshot.field.grid
    header = _SNAPSHOT_HEADER.pack(
        _SNAPSHOT_MAGIC,
        grid.dimension,
        grid.resolution,
        grid.box_length,
        grid.viscosity,
        snapshot.time,
    )
    payload = np.ascontiguousarray(snapshot.field.coefficients, dtype="<c16").tobytes()
    Path(path).write_bytes(header + payload)


def load_snapshot(path: str | Path) -> StateSnapshot:
    data = Path(path).read_bytes()
    if len(data) < _SNAPSHOT_HEADER.size:
        raise StructuralError(f"Snapshot {path} is truncated.")
    magic, dimension, resolution, box_length, viscosity, time = _SNAPSHOT_HEADER.unpack_from(data)
    if magic != _SNAPSHOT_MAGIC:
        raise StructuralError(f"{path} is not a snapshot file.")
    grid = GridSpec(dimension, box_length, resolution, viscosity)
    payload = np.frombuffer(data, dtype="<c16", offset=_SNAPSHOT_HEADER.size)
    if payload.size != math.prod(grid.field_shape):
        raise StructuralError(
            f"Snapshot {path} holds {payload.size} coefficients, header implies "
            f"{math.prod(grid.field_shape)}."
        )
    field = SpectralField(grid, payload.reshape(grid.field_shape).astype(np.complex128))
    return StateSnapshot(time, field.with_coefficients(field.coefficients, solenoidal=is_solenoidal(field)))
