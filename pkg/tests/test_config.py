"""Configuration parsing and sweep expansion tests."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest

from nsdecay.config import (
    ProfileSettings,
    RawValue,
    build_config,
    expand_sweep,
    normalize_key,
    parse_grid_axis,
    read_config_file,
)
from nsdecay.constants import DecayQuery
from nsdecay.errors import ConfigurationError

SIMULATION_INI = """\
# random-data run
[experiment]
mode = simulate
seed = 0x10

[simulation]
preset = random
N = 32
nu = 0.05   ; inline comment
T = 0.5
k_cut = 3
dealias = yes
"""


def _write(tmp_path: Path, text: str, name: str = "run.ini") -> Path:
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def _raws(**values: str) -> dict[str, RawValue]:
    return {normalize_key(key.replace("__", ".")): RawValue(text) for key, text in values.items()}


def test_normalize_key_applies_aliases() -> None:
    assert normalize_key("mode") == "experiment.mode"
    assert normalize_key("nu", "simulation") == "simulation.viscosity"
    assert normalize_key("simulation.N") == "simulation.resolution"
    assert normalize_key("box-length", "simulation") == "simulation.box_length"
    assert normalize_key("profile.nu") == "profile.viscosity"
    assert normalize_key("n", "profile") == "profile.n"


def test_read_config_file_keeps_line_numbers(tmp_path: Path) -> None:
    loaded = read_config_file(_write(tmp_path, SIMULATION_INI))

    assert loaded.values["simulation.resolution"].text == "32"
    assert loaded.values["simulation.resolution"].line == 8
    assert loaded.values["simulation.viscosity"].text == "0.05"
    assert loaded.values["experiment.seed"].line == 4
    assert loaded.grid == {}
    assert loaded.children == []


def test_build_config_from_file(tmp_path: Path) -> None:
    config = build_config(read_config_file(_write(tmp_path, SIMULATION_INI)).values)

    assert config.mode == "simulate"
    assert config.seed == 16
    sim = config.simulation
    assert (sim.preset, sim.resolution, sim.viscosity, sim.horizon, sim.k_cut) == ("random", 32, 0.05, 0.5, 3.0)
    assert sim.dealias is True
    assert sim.box_length == pytest.approx(2.0 * math.pi)
    assert config.profile is None
    assert config.chain is None


def test_bad_value_reports_its_line(tmp_path: Path) -> None:
    loaded = read_config_file(_write(tmp_path, SIMULATION_INI.replace("T = 0.5", "T = soon")))
    with pytest.raises(ConfigurationError) as excinfo:
        build_config(loaded.values)

    assert excinfo.value.key == "simulation.horizon"
    assert excinfo.value.line == 10
    assert str(excinfo.value).startswith("line 10: ")


def test_unknown_key_reports_its_line(tmp_path: Path) -> None:
    loaded = read_config_file(_write(tmp_path, SIMULATION_INI + "reynolds = 100\n"))
    with pytest.raises(ConfigurationError) as excinfo:
        build_config(loaded.values)
    assert excinfo.value.key == "simulation.reynolds"
    assert excinfo.value.line == 13


def test_unknown_section_is_rejected(tmp_path: Path) -> None:
    with pytest.raises(ConfigurationError) as excinfo:
        read_config_file(_write(tmp_path, SIMULATION_INI + "\n[solver]\ndt = 1\n"))
    assert excinfo.value.line == 14


def test_missing_file_is_configuration_error(tmp_path: Path) -> None:
    with pytest.raises(ConfigurationError, match="cannot read"):
        read_config_file(tmp_path / "absent.ini")


def test_domain_violation_points_at_offending_key(tmp_path: Path) -> None:
    loaded = read_config_file(_write(tmp_path, SIMULATION_INI.replace("N = 32", "N = 31")))
    with pytest.raises(ConfigurationError) as excinfo:
        build_config(loaded.values)
    assert excinfo.value.key == "simulation.resolution"
    assert excinfo.value.line == 8


def test_taylor_green_needs_two_dimensions() -> None:
    with pytest.raises(ConfigurationError) as excinfo:
        build_config(_raws(mode="simulate", simulation__preset="taylor-green", simulation__dimension="3"))
    assert excinfo.value.key == "simulation.preset"


def test_random_cutoff_must_stay_below_resolution_third() -> None:
    with pytest.raises(ConfigurationError) as excinfo:
        build_config(_raws(mode="simulate", simulation__preset="random", simulation__N="16", simulation__k_cut="6"))
    assert excinfo.value.key == "simulation.k_cut"


def test_missing_mode_is_rejected() -> None:
    with pytest.raises(ConfigurationError) as excinfo:
        build_config(_raws(constant__alpha="1"))
    assert excinfo.value.key == "experiment.mode"


def test_constant_mode_needs_alpha_and_m() -> None:
    config = build_config(_raws(mode="constant", constant__alpha="0.5", constant__m="3"))
    assert config.constant == DecayQuery(0.5, 3)

    with pytest.raises(ConfigurationError):
        build_config(_raws(mode="constant", constant__alpha="0.5"))
    with pytest.raises(ConfigurationError) as excinfo:
        build_config(_raws(mode="constant", constant__alpha="-1", constant__m="3"))
    assert "alpha" in str(excinfo.value)


def test_verify_chain_raises_source_order() -> None:
    heat = build_config(_raws(mode="verify-chain", chain__m_max="5"))
    assert heat.chain.source == "heat-oracle"
    assert heat.profile.m_max == 6
    assert heat.simulation is None

    sim = build_config(_raws(mode="verify-chain", chain__source="simulate", chain__m_max="2"))
    assert sim.simulation.m_max == 3
    assert sim.profile is None


@pytest.mark.parametrize(
    ("key", "text"),
    [("chain__epsilon", "2"), ("chain__delta", "0"), ("chain__t0", "-1"), ("chain__window", "1,2,3")],
)
def test_invalid_chain_settings(key: str, text: str) -> None:
    with pytest.raises(ConfigurationError):
        build_config(_raws(mode="verify-chain", **{key: text}))


def test_chain_optional_values_accept_auto() -> None:
    config = build_config(_raws(mode="verify-chain", chain__t0="auto", chain__alpha="none", chain__window="10, 20"))
    assert config.chain.t0 is None
    assert config.chain.alpha is None
    assert config.chain.window == (10.0, 20.0)


@pytest.mark.parametrize("text", ["-1", str(2**64), "seven"])
def test_seed_must_be_unsigned_64_bit(text: str) -> None:
    with pytest.raises(ConfigurationError) as excinfo:
        build_config(_raws(mode="constant", constant__alpha="1", constant__m="1", seed=text))
    assert excinfo.value.key == "experiment.seed"


def test_digest_ignores_output_dir_and_tracks_settings(tmp_path: Path) -> None:
    base = build_config(_raws(mode="constant", constant__alpha="1", constant__m="1"))
    again = build_config(_raws(mode="constant", constant__alpha="1.0", constant__m="1"))
    other = build_config(_raws(mode="constant", constant__alpha="1", constant__m="2"))

    assert base.digest() == again.digest()
    assert base.with_output_dir(tmp_path).digest() == base.digest()
    assert base.digest() != other.digest()
    assert "output_dir" not in base.echo()


def test_profile_times_cover_early_and_late_samples() -> None:
    times = ProfileSettings(horizon=1e4, samples=100).times()
    assert times[0] == 0.0
    assert times[-1] == pytest.approx(1e4)
    assert np.all(np.diff(times) > 0)
    assert np.count_nonzero(times <= 20.0) == 2001

    short = ProfileSettings(horizon=5.0, samples=50).times()
    assert short.size == 51
    assert short[-1] == 5.0


def test_parse_grid_axis() -> None:
    assert parse_grid_axis("constant.alpha=0.5, 1,2") == ("constant.alpha", ["0.5", "1", "2"])
    assert parse_grid_axis("simulation.nu=") == ("simulation.viscosity", [])
    with pytest.raises(ConfigurationError):
        parse_grid_axis("constant.alpha")


def test_expand_sweep_takes_cartesian_product() -> None:
    base = _raws(mode="sweep")
    base.update(_raws(constant__alpha="1"))
    grid = {"constant.alpha": RawValue("0.5,1,2", 5), "constant.m": RawValue("1,2,3", 6)}
    child = {"experiment.mode": RawValue("constant")}

    entries = expand_sweep(base, grid, [("k", child)])
    assert len(entries) == 9
    assert all(entry.config is not None for entry in entries)
    assert entries[0].name == "k[constant.alpha=0.5,constant.m=1]"
    assert {entry.config.constant for entry in entries} == {
        DecayQuery(a, m) for a in (0.5, 1.0, 2.0) for m in (1, 2, 3)
    }
    assert len({entry.config.digest() for entry in entries}) == 9


def test_expand_sweep_keeps_invalid_children_as_errors() -> None:
    base = _raws(mode="constant", constant__m="1")
    children = [
        ("good", {"constant.alpha": RawValue("1")}),
        ("bad", {"constant.alpha": RawValue("-1", 12)}),
        ("nested", {"experiment.mode": RawValue("sweep")}),
    ]

    entries = expand_sweep(base, {}, children, [("experiment.seed", ["1"])])
    by_name = {entry.name.split("[")[0]: entry for entry in entries}
    assert by_name["good"].config is not None
    assert by_name["good"].config.seed == 1
    assert by_name["bad"].config is None
    assert by_name["bad"].error.startswith("Configuration error: ")
    assert by_name["nested"].config is None


def test_empty_grid_axis_yields_no_children() -> None:
    base = _raws(mode="constant", constant__alpha="1", constant__m="1")
    assert expand_sweep(base, {}, [], [("constant.m", [])]) == []
