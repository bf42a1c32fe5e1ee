"""Numerical lab for derivative decay of Navier-Stokes solutions."""

from __future__ import annotations

from importlib.metadata import PackageNotFoundError, version

from nsdecay.app import cli_main, main
from nsdecay.chain import check_chain, energy_inequality_check
from nsdecay.commands import run_sweep
from nsdecay.constants import DecayQuery, k_constant
from nsdecay.errors import (
    BlowUpError,
    ConfigurationError,
    DomainError,
    NsDecayError,
    RangeError,
    StructuralError,
)
from nsdecay.experiments import run_experiment
from nsdecay.heat import RadialProfile, heat_seminorm
from nsdecay.solver import SolverConfig, simulate
from nsdecay.spectral import GridSpec

try:
    __version__ = version("ns-decay-lab")
except PackageNotFoundError:
    __version__ = "unknown"

__all__ = [
    "BlowUpError",
    "ConfigurationError",
    "DecayQuery",
    "DomainError",
    "GridSpec",
    "NsDecayError",
    "RadialProfile",
    "RangeError",
    "SolverConfig",
    "StructuralError",
    "__version__",
    "check_chain",
    "cli_main",
    "energy_inequality_check",
    "heat_seminorm",
    "k_constant",
    "main",
    "run_experiment",
    "run_sweep",
    "simulate",
]
