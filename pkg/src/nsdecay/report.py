"""Run reports and the CSV/text files written for every experiment."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

from nsdecay.chain import CheckRecord
from nsdecay.common import get_version
from nsdecay.config import ExperimentConfig
from nsdecay.solver import NormSeries, StateSnapshot, save_snapshot

logger = logging.getLogger(__name__)

NORMS_FILE = "norms.csv"
MARGINS_FILE = "margins.csv"
REPORT_FILE = "report.txt"
SNAPSHOT_FILE = "final.snap"
SWEEP_FILE = "sweep.csv"

MARGINS_HEADER = ("check", "k", "t", "lhs", "rhs", "margin", "pass")
SWEEP_HEADER = ("hash", "name", "mode", "passed", "checks", "worst_margin", "error")


def format_float(value: float) -> str:
    """Shortest round-trip text for a float; ``inf``/``nan`` stay readable."""
    return repr(float(value))


@dataclass(frozen=True)
class Table:
    headers: tuple[str, ...]
    rows: list[tuple[Any, ...]]


@dataclass
class RunReport:
    config: ExperimentConfig
    records: list[CheckRecord] = field(default_factory=list)
    series: NormSeries | None = None
    tables: dict[str, Table] = field(default_factory=dict)
    summary: dict[str, Any] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    snapshot: StateSnapshot | None = None
    wall_time: float = 0.0
    version: str = field(default_factory=get_version)

    @property
    def passed(self) -> bool:
        return all(record.passed for record in self.records)

    @property
    def failures(self) -> list[CheckRecord]:
        return [record for record in self.records if not record.passed]

    def worst_margin(self) -> float:
        margins = [record.margin for record in self.records]
        return min(margins) if margins else math.inf

    def check_counts(self) -> dict[str, tuple[int, int]]:
        """``check -> (passed, total)`` in first-seen order."""
        counts: dict[str, tuple[int, int]] = {}
        for record in self.records:
            passed, total = counts.get(record.check, (0, 0))
            counts[record.check] = (passed + int(record.passed), total + 1)
        return counts

    def to_json(self) -> dict[str, Any]:
        return {
            "mode": self.config.mode,
            "name": self.config.name,
            "hash": self.config.digest(),
            "seed": self.config.seed,
            "version": self.version,
            "passed": self.passed,
            "checks": len(self.records),
            "failures": len(self.failures),
            "worst_margin": _json_float(self.worst_margin()),
            "wall_time": round(self.wall_time, 6),
            "summary": self.summary,
            "notes": list(self.notes),
        }


def _json_float(value: float) -> float | str:
    return value if math.isfinite(value) else format_float(value)


def write_norms_csv(path: Path, series: NormSeries) -> None:
    headers = ["t", *(f"m{m}" for m in range(series.m_max + 1))]
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(headers)
        for t, row in zip(series.times, series.norms):
            writer.writerow([format_float(t), *(format_float(value) for value in row)])


def write_margins_csv(path: Path, records: Iterable[CheckRecord]) -> None:
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(MARGINS_HEADER)
        for record in records:
            writer.writerow(
                [
                    record.check,
                    record.k,
                    format_float(record.t),
                    format_float(record.lhs),
                    format_float(record.rhs),
                    format_float(record.margin),
                    "1" if record.passed else "0",
                ]
            )


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return format_float(value)
    return "" if value is None else str(value)


def write_table_csv(path: Path, headers: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(headers)
        for row in rows:
            writer.writerow([_cell(value) for value in row])


def render_text(report: RunReport) -> str:
    config = report.config
    lines = [
        f"ns-decay-lab {report.version}",
        f"mode: {config.mode}",
        f"name: {config.name or '-'}",
        f"hash: {config.digest()}",
        f"seed: {config.seed}",
        f"wall time: {report.wall_time:.3f} s",
        f"result: {'PASS' if report.passed else 'FAIL'}",
        "",
        "checks:",
    ]
    for check, (passed, total) in report.check_counts().items():
        lines.append(f"  {check}: {passed}/{total} passed")
    if not report.records:
        lines.append("  (none)")
    lines.append(f"worst margin: {format_float(report.worst_margin())}")
    if report.summary:
        lines.append("")
        lines.append("summary:")
        for key, value in report.summary.items():
            lines.append(f"  {key}: {value}")
    if report.notes:
        lines.append("")
        lines.append("notes:")
        lines.extend(f"  - {note}" for note in report.notes)
    lines.append("")
    lines.append("config:")
    for key, value in config.echo().items():
        lines.append(f"  {key}: {value}")
    return "\n".join(lines) + "\n"


def write_run(report: RunReport, output_dir: Path) -> list[Path]:
    """Write every artifact of one run into ``output_dir``; returns the files written."""
    output_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    if report.series is not None:
        path = output_dir / NORMS_FILE
        write_norms_csv(path, report.series)
        written.append(path)
    path = output_dir / MARGINS_FILE
    write_margins_csv(path, report.records)
    written.append(path)
    for filename, table in report.tables.items():
        path = output_dir / filename
        write_table_csv(path, table.headers, table.rows)
        written.append(path)
    if report.snapshot is not None:
        path = output_dir / SNAPSHOT_FILE
        save_snapshot(path, report.snapshot)
        written.append(path)
    path = output_dir / REPORT_FILE
    path.write_text(render_text(report), encoding="utf-8")
    written.append(path)
    logger.info("Wrote %d files to %s", len(written), output_dir)
    return written


@dataclass(frozen=True)
class SweepRow:
    digest: str
    name: str
    mode: str
    passed: bool
    checks: int = 0
    worst_margin: float = math.inf
    error: str | None = None

    @classmethod
    def from_report(cls, report: RunReport) -> SweepRow:
        return cls(
            digest=report.config.digest(),
            name=report.config.name,
            mode=report.config.mode,
            passed=report.passed,
            checks=len(report.records),
            worst_margin=report.worst_margin(),
        )

    def as_row(self) -> tuple[Any, ...]:
        return (self.digest, self.name, self.mode, self.passed, self.checks, self.worst_margin, self.error)


def write_sweep_csv(path: Path, rows: Iterable[SweepRow]) -> None:
    write_table_csv(path, SWEEP_HEADER, (row.as_row() for row in rows))
