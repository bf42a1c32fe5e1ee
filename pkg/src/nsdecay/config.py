"""Experiment configuration: INI files, dotted overrides and validation."""

from __future__ import annotations

import configparser
import hashlib
import itertools
import json
import math
import re
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Mapping

import numpy as np

from nsdecay.common import default_output_dir
from nsdecay.constants import DecayQuery
from nsdecay.errors import ConfigurationError, NsDecayError
from nsdecay.heat import RadialProfile
from nsdecay.solver import SolverConfig, random_solenoidal, taylor_green
from nsdecay.spectral import GridSpec, SpectralField

MODES = ("constant", "heat-oracle", "simulate", "verify-chain", "sweep")
PRESETS = ("taylor-green", "random")
# Default RMS velocity of random data: small enough that ||Du|| falls below
# nu / (8 sqrt 2) well before T = 20 at nu = 0.05, N = 128.
RANDOM_AMPLITUDE = 1e-3
SOURCES = ("heat-oracle", "simulate")
BLOCKS = ("experiment", "constant", "profile", "simulation", "chain")

_SEED_LIMIT = 2**64
_KEY_ALIASES = {
    "nu": "viscosity",
    "t": "horizon",
    "n": "resolution",
    "l": "box_length",
}


@dataclass(frozen=True)
class RawValue:
    """A textual setting and where it came from."""

    text: str
    line: int | None = None
    origin: str = "cli"


@dataclass(frozen=True)
class SimulationSettings:
    preset: str = "taylor-green"
    dimension: int = 2
    box_length: float = 2.0 * math.pi
    resolution: int = 64
    viscosity: float = 0.1
    amplitude: float | None = None
    k_cut: float = 4.0
    dt: float = 1e-3
    horizon: float = 1.0
    record_stride: int = 1
    m_max: int = 3
    dealias: bool = True
    nonlinear: bool = True
    snapshot: bool = False

    def grid(self) -> GridSpec:
        return GridSpec(self.dimension, self.box_length, self.resolution, self.viscosity)

    def solver_config(self) -> SolverConfig:
        return SolverConfig(
            dt=self.dt,
            horizon=self.horizon,
            dealias=self.dealias,
            record_stride=self.record_stride,
            m_max=self.m_max,
            nonlinear=self.nonlinear,
        )

    @property
    def initial_amplitude(self) -> float:
        """Explicit amplitude, else 1 for Taylor-Green and ``RANDOM_AMPLITUDE`` for random data."""
        if self.amplitude is not None:
            return self.amplitude
        return 1.0 if self.preset == "taylor-green" else RANDOM_AMPLITUDE

    def initial_data(self, seed: int) -> SpectralField:
        grid = self.grid()
        if self.preset == "taylor-green":
            return taylor_green(grid, self.initial_amplitude)
        return random_solenoidal(grid, seed, self.initial_amplitude, self.k_cut)


@dataclass(frozen=True)
class ProfileSettings:
    kappa: float = 1.0
    amplitude: float = 1.0
    dimension: int = 2
    viscosity: float = 1.0
    m_max: int = 4
    horizon: float = 1e4
    samples: int = 4000

    def profile(self) -> RadialProfile:
        return RadialProfile(self.kappa, self.amplitude, self.dimension)

    def times(self) -> np.ndarray:
        """Uniform samples on [0, 20] then geometric samples out to the horizon."""
        if self.horizon <= 20.0:
            return np.linspace(0.0, self.horizon, self.samples + 1)
        early = np.linspace(0.0, 20.0, 2001)
        late = np.geomspace(20.0, self.horizon, self.samples)
        return np.unique(np.concatenate([early, late]))


@dataclass(frozen=True)
class ChainSettings:
    source: str = "heat-oracle"
    alpha: float | None = None
    delta: float = 1.0
    epsilon: float = 1.0
    t0: float | None = None
    m_max: int = 3
    window: tuple[float, float] | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    seed: int = 0
    output_dir: Path = field(default_factory=default_output_dir)
    name: str = ""
    constant: DecayQuery | None = None
    profile: ProfileSettings | None = None
    simulation: SimulationSettings | None = None
    chain: ChainSettings | None = None

    def echo(self) -> dict[str, Any]:
        """Plain-data view of every setting except the output directory."""
        payload: dict[str, Any] = {"mode": self.mode, "seed": self.seed, "name": self.name}
        for block in ("constant", "profile", "simulation", "chain"):
            value = getattr(self, block)
            if value is not None:
                payload[block] = asdict(value)
        return payload

    def digest(self) -> str:
        canonical = json.dumps(self.echo(), sort_keys=True, default=str)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def with_output_dir(self, output_dir: Path) -> ExperimentConfig:
        return replace(self, output_dir=output_dir)


@dataclass(frozen=True)
class ConfigFile:
    values: dict[str, RawValue]
    grid: dict[str, RawValue]
    children: list[tuple[str, dict[str, RawValue]]]


@dataclass(frozen=True)
class SweepEntry:
    name: str
    config: ExperimentConfig | None = None
    error: str | None = None


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in {"1", "true", "yes", "on"}:
        return True
    if lowered in {"0", "false", "no", "off"}:
        return False
    raise ValueError(f"expected a boolean, got '{text}'")


def _parse_seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < _SEED_LIMIT:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {value}")
    return value


def _parse_window(text: str) -> tuple[float, float]:
    parts = [part for part in re.split(r"[,\s]+", text.strip()) if part]
    if len(parts) != 2:
        raise ValueError(f"expected 'start,end', got '{text}'")
    return float(parts[0]), float(parts[1])


def _choice(options: tuple[str, ...]) -> Callable[[str], str]:
    def parse(text: str) -> str:
        value = text.strip().lower()
        if value not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got '{text}'")
        return value

    return parse


def _optional(parse: Callable[[str], Any]) -> Callable[[str], Any]:
    def wrapped(text: str) -> Any:
        if text.strip().lower() in {"", "auto", "none"}:
            return None
        return parse(text)

    return wrapped


_PARSERS: dict[str, Callable[[str], Any]] = {
    "experiment.mode": _choice(MODES),
    "experiment.seed": _parse_seed,
    "experiment.output_dir": lambda text: Path(text.strip()),
    "experiment.name": str.strip,
    "constant.alpha": float,
    "constant.m": int,
    "profile.kappa": float,
    "profile.amplitude": float,
    "profile.dimension": int,
    "profile.viscosity": float,
    "profile.m_max": int,
    "profile.horizon": float,
    "profile.samples": int,
    "simulation.preset": _choice(PRESETS),
    "simulation.dimension": int,
    "simulation.box_length": float,
    "simulation.resolution": int,
    "simulation.viscosity": float,
    "simulation.amplitude": _optional(float),
    "simulation.k_cut": float,
    "simulation.dt": float,
    "simulation.horizon": float,
    "simulation.record_stride": int,
    "simulation.m_max": int,
    "simulation.dealias": _parse_bool,
    "simulation.nonlinear": _parse_bool,
    "simulation.snapshot": _parse_bool,
    "chain.source": _choice(SOURCES),
    "chain.alpha": _optional(float),
    "chain.delta": float,
    "chain.epsilon": float,
    "chain.t0": _optional(float),
    "chain.m_max": int,
    "chain.window": _optional(_parse_window),
}


def normalize_key(key: str, section: str | None = None) -> str:
    """Canonical dotted key: ``[simulation] nu`` and ``simulation.nu`` both give ``simulation.viscosity``."""
    key = key.strip().lower().replace("-", "_")
    if "." in key:
        section, key = key.split(".", 1)
    elif section is None:
        section = "experiment"
    if section == "simulation":
        key = _KEY_ALIASES.get(key, key)
    elif section == "profile" and key in {"nu", "t"}:
        key = _KEY_ALIASES[key]
    return f"{section}.{key}"


def _line_index(text: str) -> dict[tuple[str, str], int]:
    section = configparser.DEFAULTSECT
    index: dict[tuple[str, str], int] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        header = re.match(r"^\s*\[([^\]]+)\]", line)
        if header:
            section = header.group(1).strip()
            index[(section, "")] = number
            continue
        option = re.match(r"^\s*([^=:#;\s][^=:]*?)\s*[=:]", line)
        if option:
            index[(section, option.group(1).strip().lower())] = number
    return index


def read_config_file(path: str | Path) -> ConfigFile:
    """Parse an experiment or sweep INI file, keeping line numbers for diagnostics."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc.strerror}") from exc

    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigurationError(f"{path}: {exc}") from exc

    lines = _line_index(text)
    values: dict[str, RawValue] = {}
    grid: dict[str, RawValue] = {}
    children: list[tuple[str, dict[str, RawValue]]] = []

    for section in parser.sections():
        entries = {
            option: RawValue(value, lines.get((section, option)), origin=str(path))
            for option, value in parser.items(section, raw=True)
        }
        if section in BLOCKS:
            for option, raw in entries.items():
                values[normalize_key(option, section)] = raw
        elif section == "sweep":
            for option, raw in entries.items():
                grid[normalize_key(option)] = raw
        elif section.startswith("child "):
            overrides = {normalize_key(option): raw for option, raw in entries.items()}
            children.append((section[len("child ") :].strip(), overrides))
        else:
            raise ConfigurationError(
                f"unknown section [{section}]", key=section, line=lines.get((section, ""))
            )
    return ConfigFile(values=values, grid=grid, children=children)


def _convert(key: str, raw: RawValue) -> Any:
    parse = _PARSERS.get(key)
    if parse is None:
        raise ConfigurationError(f"unknown setting '{key}'", key=key, line=raw.line)
    try:
        return parse(raw.text)
    except ValueError as exc:
        raise ConfigurationError(f"invalid value for '{key}': {exc}", key=key, line=raw.line) from exc


def _block(values: Mapping[str, Any], block: str, cls: type) -> Any:
    prefix = f"{block}."
    kwargs = {key[len(prefix) :]: value for key, value in values.items() if key.startswith(prefix)}
    return cls(**kwargs)


def _validate_block(
    build: Callable[[], Any],
    block: str,
    raws: Mapping[str, RawValue],
) -> Any:
    """Run a domain constructor, attaching the config line of the offending key on failure."""
    try:
        return build()
    except NsDecayError as exc:
        key = f"{block}.{getattr(exc, 'key', '') or ''}".rstrip(".")
        raw = raws.get(key)
        line = raw.line if raw is not None else None
        message = getattr(exc, "message", str(exc))
        raise ConfigurationError(message, key=key, line=line) from exc


def build_config(raws: Mapping[str, RawValue], *, name: str = "") -> ExperimentConfig:
    """Turn dotted raw settings into a validated :class:`ExperimentConfig`."""
    values = {key: _convert(key, raw) for key, raw in raws.items()}
    mode = values.get("experiment.mode")
    if mode is None:
        raise ConfigurationError("no experiment mode given", key="experiment.mode")

    config = ExperimentConfig(
        mode=mode,
        seed=values.get("experiment.seed", 0),
        output_dir=values.get("experiment.output_dir", default_output_dir()),
        name=values.get("experiment.name", name),
    )
    if mode == "sweep":
        return config

    if mode == "constant":
        if "constant.alpha" not in values or "constant.m" not in values:
            raise ConfigurationError("constant mode needs both alpha and m", key="constant")
        query = _validate_block(
            lambda: DecayQuery(values["constant.alpha"], values["constant.m"]), "constant", raws
        )
        return replace(config, constant=query)

    source = mode
    chain = None
    if mode == "verify-chain":
        chain = _block(values, "chain", ChainSettings)
        source = chain.source
        _validate_block(
            lambda: _check_chain_settings(chain),
            "chain",
            raws,
        )

    if source == "heat-oracle":
        profile = _block(values, "profile", ProfileSettings)
        if chain is not None and profile.m_max < chain.m_max + 1:
            profile = replace(profile, m_max=chain.m_max + 1)
        _validate_block(lambda: _check_profile_settings(profile), "profile", raws)
        return replace(config, profile=profile, chain=chain)

    simulation = _block(values, "simulation", SimulationSettings)
    if chain is not None and simulation.m_max < chain.m_max + 1:
        simulation = replace(simulation, m_max=chain.m_max + 1)
    _validate_block(lambda: _check_simulation_settings(simulation), "simulation", raws)
    return replace(config, simulation=simulation, chain=chain)


def _check_profile_settings(profile: ProfileSettings) -> None:
    profile.profile()
    if not profile.viscosity > 0:
        raise ConfigurationError(f"viscosity must be positive, got {profile.viscosity}.", key="viscosity")
    if profile.m_max < 1:
        raise ConfigurationError(f"m_max must be at least 1, got {profile.m_max}.", key="m_max")
    if not profile.horizon > 0:
        raise ConfigurationError(f"horizon must be positive, got {profile.horizon}.", key="horizon")
    if profile.samples < 2:
        raise ConfigurationError(f"samples must be at least 2, got {profile.samples}.", key="samples")


def _check_simulation_settings(simulation: SimulationSettings) -> None:
    grid = simulation.grid()
    simulation.solver_config()
    if simulation.preset == "taylor-green" and (
        grid.dimension != 2 or not math.isclose(grid.box_length, 2.0 * math.pi, rel_tol=1e-12)
    ):
        raise ConfigurationError("Taylor-Green data needs dimension 2 and box length 2*pi.", key="preset")
    if simulation.preset == "random" and not 0 < simulation.k_cut < simulation.resolution / 3.0:
        raise ConfigurationError(
            f"k_cut={simulation.k_cut} must lie in (0, N/3).", key="k_cut"
        )


def _check_chain_settings(chain: ChainSettings) -> None:
    if chain.alpha is not None and not chain.alpha >= 0:
        raise ConfigurationError(f"alpha must be nonnegative, got {chain.alpha}.", key="alpha")
    if not chain.delta > 0:
        raise ConfigurationError(f"delta must be positive, got {chain.delta}.", key="delta")
    if not 0 < chain.epsilon < 2:
        raise ConfigurationError(f"epsilon must lie in (0, 2), got {chain.epsilon}.", key="epsilon")
    if chain.m_max < 1:
        raise ConfigurationError(f"m_max must be at least 1, got {chain.m_max}.", key="m_max")
    if chain.t0 is not None and not chain.t0 >= 0:
        raise ConfigurationError(f"t0 must be nonnegative, got {chain.t0}.", key="t0")


def parse_grid_axis(text: str) -> tuple[str, list[str]]:
    """``key=v1,v2,...`` into a dotted key and its (possibly empty) value list."""
    if "=" not in text:
        raise ConfigurationError(f"grid axis '{text}' must look like key=v1,v2")
    key, _, values = text.partition("=")
    return normalize_key(key), [value.strip() for value in values.split(",") if value.strip()]


def expand_sweep(
    base: Mapping[str, RawValue],
    grid: Mapping[str, RawValue],
    children: list[tuple[str, dict[str, RawValue]]],
    extra_axes: list[tuple[str, list[str]]] | None = None,
) -> list[SweepEntry]:
    """Cartesian product of child sections and grid axes; invalid children are kept as errors."""
    axes: list[tuple[str, list[RawValue]]] = []
    for key, raw in grid.items():
        options = [value.strip() for value in raw.text.split(",") if value.strip()]
        axes.append((key, [RawValue(option, raw.line, raw.origin) for option in options]))
    for key, options in extra_axes or []:
        axes.append((key, [RawValue(option) for option in options]))

    shared = dict(base)
    if shared.get("experiment.mode", RawValue("")).text.strip().lower() == "sweep":
        del shared["experiment.mode"]

    seeds = children or [("run", {})]
    keys = [key for key, _ in axes]
    entries: list[SweepEntry] = []
    for child_name, overrides in seeds:
        for combination in itertools.product(*(options for _, options in axes)):
            raws = dict(shared)
            raws.update(overrides)
            raws.update(zip(keys, combination))
            label = ",".join(f"{key}={raw.text}" for key, raw in zip(keys, combination))
            name = f"{child_name}[{label}]" if label else child_name
            try:
                config = build_config(raws, name=name)
                if config.mode == "sweep":
                    raise ConfigurationError("sweep children cannot be sweeps", key="experiment.mode")
                entries.append(SweepEntry(name=name, config=config))
            except ConfigurationError as exc:
                entries.append(SweepEntry(name=name, error=f"Configuration error: {exc}"))
    return entries
