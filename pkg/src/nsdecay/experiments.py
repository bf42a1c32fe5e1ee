"""Per-mode experiment runners producing :class:`RunReport` objects."""

from __future__ import annotations

import logging
import math
import time
from typing import Callable

import numpy as np

from nsdecay.chain import (
    CHECK_ENERGY,
    CHECK_FIRST_POINTWISE,
    ChainCheckConfig,
    CheckRecord,
    absorption_margin,
    absorption_threshold,
    check_chain,
    energy_inequality_check,
    theorem_bound_from_chain,
)
from nsdecay.config import ChainSettings, ExperimentConfig
from nsdecay.constants import (
    STATIONARITY_TOLERANCE,
    BoundaryMarker,
    DecayQuery,
    grid_minimum,
    k_constant,
    stationarity,
)
from nsdecay.errors import ConfigurationError
from nsdecay.heat import (
    asymptotic_rate,
    energy_times,
    heat_seminorm,
    heat_seminorm_quadrature,
    heat_series,
    regularity_time_bound,
    small_time_limit,
    verify_interpolation,
    verify_product_interpolation,
)
from nsdecay.report import RunReport, Table
from nsdecay.solver import NormSeries, simulate, taylor_green_seminorm
from nsdecay.spectral import SOLENOIDAL_TOLERANCE, seminorm

logger = logging.getLogger(__name__)

ENERGY_TOLERANCE = 1e-6
ORACLE_ENERGY_TOLERANCE = 1e-8
QUADRATURE_TOLERANCE = 1e-8
TAYLOR_GREEN_TOLERANCE = 1e-6
SMALL_TIME_TOLERANCE = 1e-6
QUADRATURE_TIMES = (0.0, 1.0, 100.0)
# Extends the default small-time sequence so the decade ratio settles below SMALL_TIME_TOLERANCE.
RATIO_TIMES = tuple(10.0**-p for p in range(1, 13))
INTERPOLATION_SCALES = (0.5, 1.0, 2.0)
CHAIN_EPSILON_LIMIT = 1e-12
HEAT_ORACLE_FILE = "heat_oracle.csv"
HEAT_ORACLE_HEADER = ("t", "m", "norm", "weighted", "bound", "margin")


def _energy_record(series: NormSeries, nu: float, tolerance: float = ENERGY_TOLERANCE) -> CheckRecord:
    residual = energy_inequality_check(series, nu, 0.0, series.end_time)
    scale = float(series.seminorm(0)[0]) ** 2
    return CheckRecord(CHECK_ENERGY, 0, series.end_time, residual, tolerance * scale)


def run_constant(config: ExperimentConfig) -> RunReport:
    query = config.constant
    result = k_constant(query)
    scan_min, scan_arg = grid_minimum(query)
    report = RunReport(config=config)
    report.records.append(CheckRecord("grid_minimum", query.m, math.nan, result.K, scan_min))
    if result.attained:
        residual = abs(stationarity(result.delta_star, query))
        report.records.append(CheckRecord("stationarity", query.m, math.nan, residual, STATIONARITY_TOLERANCE))
    report.summary = {
        "alpha": query.alpha,
        "m": query.m,
        "K": result.K,
        "delta_star": result.delta_label if isinstance(result.delta_star, BoundaryMarker) else result.delta_star,
        "attained": result.attained,
        "grid_minimum": scan_min,
        "grid_argmin": scan_arg,
    }
    return report


def run_heat_oracle(config: ExperimentConfig) -> RunReport:
    settings = config.profile
    profile = settings.profile()
    nu = settings.viscosity
    times = settings.times()
    series = heat_series(profile, nu, times, settings.m_max)
    report = RunReport(config=config, series=series)

    _, limit_0 = asymptotic_rate(profile, nu, 0)
    rows: list[tuple[float, int, float, float, float, float]] = []
    limits: dict[str, dict[str, float]] = {}
    for m in range(settings.m_max + 1):
        for t in QUADRATURE_TIMES:
            closed = heat_seminorm(profile, nu, t, m)
            quadrature = heat_seminorm_quadrature(profile, nu, t, m)
            report.records.append(
                CheckRecord("quadrature", m, t, abs(closed - quadrature), QUADRATURE_TOLERANCE * closed)
            )
        if m == 0:
            continue

        constant = k_constant(DecayQuery(profile.alpha, m)).K
        bound = constant * nu ** (-m / 2) * limit_0
        rate, limit_m = asymptotic_rate(profile, nu, m)
        weighted = times**rate * series.seminorm(m)
        rows.extend(
            (float(t), m, float(norm), float(w), bound, bound - float(w))
            for t, norm, w in zip(times, series.seminorm(m), weighted)
        )
        report.records.append(CheckRecord("main_inequality", m, math.inf, limit_m, bound))
        limits[f"m{m}"] = {"limit": limit_m, "bound": bound, "margin": bound - limit_m}

        # t^(m/2) ||D^m u(t)|| shrinks by 10^(-m/2) per decade as t -> 0.
        grid, values = small_time_limit(profile, nu, m, RATIO_TIMES)
        expected = 10.0 ** (-m / 2)
        ratio = float(values[-1] / values[-2])
        report.records.append(
            CheckRecord("small_time", m, float(grid[-1]), abs(ratio - expected), SMALL_TIME_TOLERANCE * expected)
        )

    for a in INTERPOLATION_SCALES:
        check = verify_interpolation(a)
        report.records.append(CheckRecord("interpolation", 0, math.nan, check.lhs, check.rhs))
    product = verify_product_interpolation(1.0, 2, 1)
    report.records.append(CheckRecord("product_interpolation", 2, math.nan, product.lhs, product.rhs))

    report.tables[HEAT_ORACLE_FILE] = Table(HEAT_ORACLE_HEADER, rows)
    report.summary = {"alpha": profile.alpha, "L0": limit_0, "limits": limits}
    return report


def _simulation_records(report: RunReport, series: NormSeries, nu: float) -> None:
    for t, value in zip(series.times, series.divergence):
        report.records.append(CheckRecord("divergence", 0, float(t), float(value), SOLENOIDAL_TOLERANCE))
    report.records.append(_energy_record(series, nu))
    l2 = series.seminorm(0)
    growth = float(np.max(np.diff(l2))) if l2.size > 1 else 0.0
    report.records.append(CheckRecord("energy_monotone", 0, series.end_time, growth, 1e-14 * float(l2[0])))


def _run_source_simulation(config: ExperimentConfig, report: RunReport) -> NormSeries:
    settings = config.simulation
    u0 = settings.initial_data(config.seed)
    run = simulate(u0, settings.solver_config())
    series = run.series
    report.series = series
    _simulation_records(report, series, settings.viscosity)

    if settings.preset == "taylor-green":
        for m in range(series.m_max + 1):
            exact = taylor_green_seminorm(settings.initial_amplitude, settings.viscosity, series.end_time, m)
            measured = float(series.seminorm(m)[-1])
            report.records.append(
                CheckRecord("taylor_green", m, series.end_time, abs(measured - exact), TAYLOR_GREEN_TOLERANCE * exact)
            )
    if settings.dimension == 3:
        bound = regularity_time_bound(3, settings.viscosity, seminorm(u0, 0))
        report.notes.append(f"whole-space regularity time bound nu^-5 ||u0||^4 = {bound:.6g}")
    if settings.snapshot:
        report.snapshot = run.final
    report.summary.update(
        {
            "steps": settings.solver_config().steps,
            "final_norms": [float(value) for value in series.norms[-1]],
            "max_divergence": float(np.max(series.divergence)),
        }
    )
    return series


def run_simulation(config: ExperimentConfig) -> RunReport:
    report = RunReport(config=config)
    _run_source_simulation(config, report)
    return report


def _chain_config(
    settings: ChainSettings,
    alpha: float,
    t0: float,
    default_window: tuple[float, float],
) -> ChainCheckConfig:
    window = default_window if settings.window is None else settings.window
    return ChainCheckConfig(
        alpha=alpha,
        delta=settings.delta,
        epsilon=settings.epsilon,
        t0=t0,
        m_max=settings.m_max,
        window=window,
    )


def run_verify_chain(config: ExperimentConfig) -> RunReport:
    settings = config.chain
    report = RunReport(config=config)

    if settings.source == "heat-oracle":
        profile_settings = config.profile
        profile = profile_settings.profile()
        nu = profile_settings.viscosity
        series = heat_series(profile, nu, profile_settings.times(), profile_settings.m_max)
        report.series = series
        dense = heat_series(profile, nu, energy_times(profile, nu, series.end_time, ORACLE_ENERGY_TOLERANCE), 1)
        report.records.append(_energy_record(dense, nu, ORACLE_ENERGY_TOLERANCE))
        alpha = profile.alpha if settings.alpha is None else settings.alpha
        t0 = min(10.0, 0.05 * series.end_time) if settings.t0 is None else settings.t0
        cfg = _chain_config(settings, alpha, t0, (0.1 * series.end_time, series.end_time))
    else:
        series = _run_source_simulation(config, report)
        nu = config.simulation.viscosity
        alpha = 0.0 if settings.alpha is None else settings.alpha
        t0 = settings.t0
        if t0 is None:
            t0 = absorption_threshold(series, settings.epsilon, nu)
            if t0 is None:
                report.notes.append("no recorded time absorbs the nonlinear term; checking from t0 = 0")
                t0 = 0.0
            else:
                report.notes.append(f"t0 = {t0:.6g} chosen as the earliest absorbing time")
        margin = absorption_margin(series, t0, settings.epsilon, nu)
        if margin <= 0:
            logger.warning("Absorption margin %.3e is not positive at t0=%.6g", margin, t0)
        report.records.append(
            CheckRecord("absorption", 1, t0, settings.epsilon * nu - margin, settings.epsilon * nu)
        )
        end = series.end_time
        cfg = _chain_config(settings, alpha, t0, (t0 + 0.5 * (end - t0), end))

    chain = check_chain(series, nu, cfg)
    report.records.extend(chain.records)
    limsup = chain.limsup
    if not limsup.in_tail:
        report.notes.append(f"lambda0 window {limsup.window} is not in the decaying tail")

    if settings.source == "heat-oracle" and alpha == profile.alpha:
        _, limit_0 = asymptotic_rate(profile, nu, 0)
        for m in range(1, cfg.m_max + 1):
            result = k_constant(DecayQuery(alpha, m))
            bound = theorem_bound_from_chain(
                alpha, m, nu, limit_0, 2.0 * float(result.delta_star), CHAIN_EPSILON_LIMIT
            )
            _, limit_m = asymptotic_rate(profile, nu, m)
            report.records.append(CheckRecord("theorem_link", m, math.inf, limit_m, bound))

    report.summary.update(
        {
            "alpha": alpha,
            "t0": cfg.t0,
            "window": list(cfg.window),
            "lambda0": limsup.lambda0,
            "in_tail": limsup.in_tail,
            "first_pointwise_passing_time": chain.first_passing_time(CHECK_FIRST_POINTWISE, 1),
        }
    )
    return report


_RUNNERS: dict[str, Callable[[ExperimentConfig], RunReport]] = {
    "constant": run_constant,
    "heat-oracle": run_heat_oracle,
    "simulate": run_simulation,
    "verify-chain": run_verify_chain,
}


def run_experiment(config: ExperimentConfig) -> RunReport:
    """Run one experiment; raises on configuration errors or numerical blow-up."""
    runner = _RUNNERS.get(config.mode)
    if runner is None:
        raise ConfigurationError(f"mode '{config.mode}' is not a single experiment", key="experiment.mode")
    logger.info("Running %s experiment %s", config.mode, config.digest()[:12])
    started = time.perf_counter()
    report = runner(config)
    report.wall_time = time.perf_counter() - started
    logger.info(
        "%s finished in %.3fs: %d checks, %d failed",
        config.mode, report.wall_time, len(report.records), len(report.failures),
    )
    return report
