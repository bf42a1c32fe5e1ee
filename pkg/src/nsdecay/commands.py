"""Command handlers and output formatting for nsdecay."""

from __future__ import annotations

import argparse
import asyncio
import hashlib
import json
import logging
import math
import os
import sys
from pathlib import Path
from typing import Any, Sequence

from nsdecay.common import default_output_dir
from nsdecay.config import (
    ConfigFile,
    ExperimentConfig,
    RawValue,
    SweepEntry,
    build_config,
    expand_sweep,
    normalize_key,
    parse_grid_axis,
    read_config_file,
)
from nsdecay.errors import BlowUpError, ConfigurationError, NsDecayError
from nsdecay.experiments import run_experiment
from nsdecay.report import (
    REPORT_FILE,
    SWEEP_FILE,
    RunReport,
    SweepRow,
    format_float,
    write_run,
    write_sweep_csv,
)

logger = logging.getLogger(__name__)

_SHARED_KEYS = {"seed": "experiment.seed", "output_dir": "experiment.output_dir"}
_CONSTANT_KEYS = {"alpha": "constant.alpha", "m": "constant.m"}
_PROFILE_KEYS = {
    "kappa": "profile.kappa",
    "dimension": "profile.dimension",
    "amplitude": "profile.amplitude",
    "nu": "profile.viscosity",
    "horizon": "profile.horizon",
    "samples": "profile.samples",
    "m_max": "profile.m_max",
}
_SIMULATION_KEYS = {
    "preset": "simulation.preset",
    "dimension": "simulation.dimension",
    "box_length": "simulation.box_length",
    "resolution": "simulation.resolution",
    "nu": "simulation.viscosity",
    "amplitude": "simulation.amplitude",
    "k_cut": "simulation.k_cut",
    "dt": "simulation.dt",
    "horizon": "simulation.horizon",
    "record_stride": "simulation.record_stride",
    "m_max": "simulation.m_max",
    "dealias": "simulation.dealias",
    "nonlinear": "simulation.nonlinear",
    "snapshot": "simulation.snapshot",
}
_CHAIN_KEYS = {
    "source": "chain.source",
    "alpha": "chain.alpha",
    "delta": "chain.delta",
    "epsilon": "chain.epsilon",
    "t0": "chain.t0",
    "m_max": "chain.m_max",
    "window": "chain.window",
}


def _print_json(payload: dict[str, Any]) -> None:
    print(json.dumps(payload, indent=2, ensure_ascii=False, default=str))


def _print_table(headers: list[str], rows: list[list[str]]) -> None:
    widths = [len(h) for h in headers]

    for row in rows:
        for idx, cell in enumerate(row):
            widths[idx] = max(widths[idx], len(cell))

    def _format_row(row_values: list[str]) -> str:
        padded = [value.ljust(widths[i]) for i, value in enumerate(row_values)]
        return "  ".join(padded).rstrip()

    print(_format_row(headers))
    print(_format_row(["-" * width for width in widths]))
    for row in rows:
        print(_format_row(row))


def _collect(args: argparse.Namespace, mapping: dict[str, str]) -> dict[str, RawValue]:
    collected: dict[str, RawValue] = {}
    for dest, key in mapping.items():
        value = getattr(args, dest, None)
        if value is not None:
            collected[key] = RawValue(str(value))
    return collected


def _load_file(args: argparse.Namespace) -> ConfigFile:
    path = getattr(args, "config", None)
    if path is None:
        return ConfigFile(values={}, grid={}, children=[])
    return read_config_file(path)


def _chain_source(args: argparse.Namespace, values: dict[str, RawValue]) -> str:
    if getattr(args, "source", None):
        return args.source
    raw = values.get("chain.source")
    return raw.text.strip().lower() if raw is not None else "heat-oracle"


def _overrides(args: argparse.Namespace, mode: str, values: dict[str, RawValue]) -> dict[str, RawValue]:
    """Map command-line flags onto dotted config keys for ``mode``."""
    overrides = _collect(args, _SHARED_KEYS)
    if mode == "constant":
        overrides.update(_collect(args, _CONSTANT_KEYS))
    elif mode == "heat-oracle":
        overrides.update(_collect(args, _PROFILE_KEYS))
    elif mode == "simulate":
        overrides.update(_collect(args, _SIMULATION_KEYS))
    elif mode == "verify-chain":
        overrides.update(_collect(args, _CHAIN_KEYS))
        source_keys = _PROFILE_KEYS if _chain_source(args, values) == "heat-oracle" else _SIMULATION_KEYS
        overrides.update(_collect(args, {k: v for k, v in source_keys.items() if k != "m_max"}))
    return overrides


def config_from_args(args: argparse.Namespace, mode: str) -> ExperimentConfig:
    """Defaults, then ``--config`` file values, then command-line flags."""
    loaded = _load_file(args)
    raws = dict(loaded.values)
    file_mode = raws.get("experiment.mode")
    if file_mode is not None and file_mode.text.strip().lower() != mode:
        logger.warning("Config file mode '%s' ignored for '%s' command", file_mode.text.strip(), mode)
    raws["experiment.mode"] = RawValue(mode)
    raws.update(_overrides(args, mode, raws))
    return build_config(raws)


def _resolve_output_dir(args: argparse.Namespace, config: ExperimentConfig) -> Path:
    if getattr(args, "output_dir", None):
        return Path(args.output_dir)
    return config.output_dir


def _print_report_pretty(report: RunReport, output_dir: Path) -> None:
    rows = []
    for check, (passed, total) in report.check_counts().items():
        margins = [record.margin for record in report.records if record.check == check]
        rows.append([check, f"{passed}/{total}", f"{min(margins):.3e}"])
    if rows:
        _print_table(["CHECK", "PASSED", "WORST MARGIN"], rows)
        print()
    for note in report.notes:
        print(f"Note: {note}")
    print(f"Result: {'PASS' if report.passed else 'FAIL'} ({len(report.records)} checks, {report.wall_time:.2f}s)")
    print(f"Output: {output_dir}")


def _finish_run(args: argparse.Namespace, config: ExperimentConfig) -> tuple[RunReport, Path, list[Path]]:
    output_dir = _resolve_output_dir(args, config)
    report = run_experiment(config.with_output_dir(output_dir))
    written = write_run(report, output_dir)
    return report, output_dir, written


def _emit_json(report: RunReport, output_dir: Path, written: list[Path]) -> None:
    payload = report.to_json()
    payload["output_dir"] = str(output_dir)
    payload["files"] = [path.name for path in written]
    _print_json(payload)


def _run_constant_command(args: argparse.Namespace) -> int:
    config = config_from_args(args, "constant")
    report, output_dir, written = _finish_run(args, config)
    summary = report.summary
    if getattr(args, "json", False):
        _emit_json(report, output_dir, written)
    else:
        delta = summary["delta_star"]
        print(f"K = {summary['K']:.6f}")
        if summary["attained"]:
            print(f"delta* = {delta:.6f}")
        else:
            print(f"delta* = {delta} (boundary)")
        print(f"grid check = {summary['grid_minimum']:.6f}")
    return 0 if report.passed else 1


def _run_heat_oracle_command(args: argparse.Namespace) -> int:
    config = config_from_args(args, "heat-oracle")
    report, output_dir, written = _finish_run(args, config)
    if getattr(args, "json", False):
        _emit_json(report, output_dir, written)
        return 0 if report.passed else 1

    summary = report.summary
    print(f"alpha = {summary['alpha']:.6g}  L0 = {summary['L0']:.6e}")
    rows = [
        [name[1:], f"{entry['limit']:.6e}", f"{entry['bound']:.6e}", f"{entry['margin']:.3e}"]
        for name, entry in summary["limits"].items()
    ]
    _print_table(["M", "L_M", "BOUND", "MARGIN"], rows)
    print()
    _print_report_pretty(report, output_dir)
    return 0 if report.passed else 1


def _run_simulate_command(args: argparse.Namespace) -> int:
    config = config_from_args(args, "simulate")
    report, output_dir, written = _finish_run(args, config)
    if getattr(args, "json", False):
        _emit_json(report, output_dir, written)
        return 0 if report.passed else 1

    summary = report.summary
    norms = ", ".join(f"{value:.6e}" for value in summary["final_norms"])
    print(f"Steps: {summary['steps']}")
    print(f"Final norms (m = 0..{len(summary['final_norms']) - 1}): {norms}")
    print(f"Max divergence: {summary['max_divergence']:.3e}")
    _print_report_pretty(report, output_dir)
    return 0 if report.passed else 1


def _run_verify_chain_command(args: argparse.Namespace) -> int:
    config = config_from_args(args, "verify-chain")
    report, output_dir, written = _finish_run(args, config)
    if getattr(args, "json", False):
        _emit_json(report, output_dir, written)
        return 0 if report.passed else 1

    summary = report.summary
    start, end = summary["window"]
    print(f"Source: {config.chain.source}")
    print(f"alpha = {summary['alpha']:.6g}  t0 = {summary['t0']:.6g}  window = [{start:.6g}, {end:.6g}]")
    print(f"lambda0 = {summary['lambda0']:.6e}{'' if summary['in_tail'] else ' (window not in tail)'}")
    first = summary["first_pointwise_passing_time"]
    print(f"First-order pointwise bound holds from t = {'never' if first is None else f'{first:.6g}'}")
    print()
    _print_report_pretty(report, output_dir)
    return 0 if report.passed else 1


def _failed_row(entry: SweepEntry, error: str, mode: str = "-") -> SweepRow:
    digest = entry.config.digest() if entry.config is not None else hashlib.sha256(entry.name.encode()).hexdigest()
    return SweepRow(digest=digest, name=entry.name, mode=mode, passed=False, error=error)


async def _run_sweep_child(entry: SweepEntry, output_dir: Path, semaphore: asyncio.Semaphore) -> SweepRow:
    if entry.config is None:
        logger.warning("Sweep child %s rejected: %s", entry.name, entry.error)
        return _failed_row(entry, entry.error or "invalid configuration")

    child_dir = output_dir / entry.config.digest()[:12]
    config = entry.config.with_output_dir(child_dir)
    async with semaphore:
        try:
            report = await asyncio.to_thread(run_experiment, config)
            await asyncio.to_thread(write_run, report, child_dir)
        except Exception as exc:
            logger.warning("Sweep child %s failed: %s", entry.name, exc)
            return _failed_row(entry, f"{type(exc).__name__}: {exc}", config.mode)
    if not report.passed:
        logger.warning("Sweep child %s: %d checks failed", entry.name, len(report.failures))
    return SweepRow.from_report(report)


async def run_sweep(entries: Sequence[SweepEntry], output_dir: Path, workers: int | None = None) -> list[SweepRow]:
    """Run independent experiments concurrently; rows come back sorted by config hash."""
    limit = workers or os.cpu_count() or 1
    if limit < 1:
        raise ConfigurationError(f"workers must be at least 1, got {limit}.", key="workers")
    semaphore = asyncio.Semaphore(limit)

    unique: dict[str, SweepEntry] = {}
    for entry in entries:
        key = entry.config.digest() if entry.config is not None else f"invalid:{entry.name}"
        if key in unique:
            logger.info("Skipping duplicate sweep child %s", entry.name)
            continue
        unique[key] = entry

    logger.info("Running %d sweep children with %d workers", len(unique), limit)
    rows = await asyncio.gather(*(_run_sweep_child(entry, output_dir, semaphore) for entry in unique.values()))
    return sorted(rows, key=lambda row: row.digest)


def _sweep_summary(rows: list[SweepRow]) -> str:
    passed = sum(row.passed for row in rows)
    lines = [f"sweep: {passed}/{len(rows)} children passed"]
    for row in rows:
        status = "PASS" if row.passed else "FAIL"
        detail = row.error or f"{row.checks} checks, worst margin {format_float(row.worst_margin)}"
        lines.append(f"  {row.digest[:12]} {status} {row.name} ({detail})")
    return "\n".join(lines) + "\n"


async def _run_sweep_command(args: argparse.Namespace) -> int:
    loaded = _load_file(args)
    extra_axes = [parse_grid_axis(text) for text in getattr(args, "grid", []) or []]
    if getattr(args, "seed", None) is not None:
        loaded.values[normalize_key("seed")] = RawValue(str(args.seed))

    if getattr(args, "output_dir", None):
        output_dir = Path(args.output_dir)
    elif "experiment.output_dir" in loaded.values:
        output_dir = Path(loaded.values["experiment.output_dir"].text.strip())
    else:
        output_dir = default_output_dir()

    if not loaded.values and not loaded.grid and not loaded.children and not extra_axes:
        entries: list[SweepEntry] = []
    else:
        entries = expand_sweep(loaded.values, loaded.grid, loaded.children, extra_axes)

    rows = await run_sweep(entries, output_dir, getattr(args, "workers", None))
    output_dir.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(output_dir / SWEEP_FILE, rows)
    (output_dir / REPORT_FILE).write_text(_sweep_summary(rows), encoding="utf-8")

    all_passed = all(row.passed for row in rows)
    if getattr(args, "json", False):
        _print_json(
            {
                "passed": all_passed,
                "children": len(rows),
                "failures": sum(not row.passed for row in rows),
                "output_dir": str(output_dir),
                "rows": [
                    {
                        "hash": row.digest,
                        "name": row.name,
                        "mode": row.mode,
                        "passed": row.passed,
                        "checks": row.checks,
                        "worst_margin": row.worst_margin if math.isfinite(row.worst_margin) else format_float(row.worst_margin),
                        "error": row.error,
                    }
                    for row in rows
                ],
            }
        )
    elif rows:
        _print_table(
            ["HASH", "MODE", "RESULT", "CHECKS", "WORST MARGIN", "NAME"],
            [
                [
                    row.digest[:12],
                    row.mode,
                    "PASS" if row.passed else "FAIL",
                    str(row.checks),
                    "-" if row.error else f"{row.worst_margin:.3e}",
                    row.name,
                ]
                for row in rows
            ],
        )
        print()
        print(f"Sweep: {sum(row.passed for row in rows)}/{len(rows)} passed. Output: {output_dir}")
    else:
        print(f"Sweep: no children. Output: {output_dir}")
    return 0 if all_passed else 1


def run_experiment_cli(args: argparse.Namespace) -> int:
    """Run a single-experiment command and map errors onto exit codes."""
    try:
        if args.command == "constant":
            return _run_constant_command(args)
        if args.command == "heat-oracle":
            return _run_heat_oracle_command(args)
        if args.command == "simulate":
            return _run_simulate_command(args)
        if args.command == "verify-chain":
            return _run_verify_chain_command(args)

        raise ValueError(f"Unsupported command: {args.command}")

    except ConfigurationError as exc:
        print(f"Configuration error: {exc}", file=sys.stderr)
        return 2
    except BlowUpError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return 2
    except NsDecayError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return 1


async def run_sweep_cli(args: argparse.Namespace) -> int:
    """Run the sweep command; child failures are reported, not raised."""
    try:
        return await _run_sweep_command(args)
    except ConfigurationError as exc:
        print(f"Configuration error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return 2
