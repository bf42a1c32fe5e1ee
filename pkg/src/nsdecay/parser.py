"""Argument parser construction for nsdecay."""

from __future__ import annotations

import argparse

from nsdecay.common import get_version


def _add_run_arguments(command_parser: argparse.ArgumentParser, *, help_text: str) -> None:
    command_parser.add_argument(
        "--config",
        "-c",
        type=str,
        default=None,
        help="INI experiment file; command-line flags override its values.",
    )
    command_parser.add_argument(
        "--output-dir",
        "-o",
        type=str,
        default=None,
        help="Directory for norms.csv, margins.csv and report.txt (default: $NSDECAY_OUTPUT_DIR or ./runs).",
    )
    command_parser.add_argument(
        "--seed",
        type=str,
        default=None,
        help="64-bit seed for random initial data.",
    )
    command_parser.add_argument(
        "--json",
        action="store_true",
        help=help_text,
    )


def _add_profile_arguments(command_parser: argparse.ArgumentParser) -> None:
    command_parser.add_argument("--kappa", type=str, default=None, help="Profile exponent kappa >= 0.")
    command_parser.add_argument("--dimension", "-n", type=str, default=None, help="Space dimension n (2-4).")
    command_parser.add_argument("--amplitude", type=str, default=None, help="Profile amplitude A > 0.")
    command_parser.add_argument("--nu", type=str, default=None, help="Viscosity nu > 0.")
    command_parser.add_argument("--horizon", "--T", "-T", type=str, default=None, help="Last sample time.")
    command_parser.add_argument("--samples", type=str, default=None, help="Geometric samples after t = 20.")


def _add_simulation_arguments(command_parser: argparse.ArgumentParser) -> None:
    command_parser.add_argument(
        "--preset",
        choices=["taylor-green", "random"],
        default=None,
        help="Initial data: exact Taylor-Green vortex or seeded random solenoidal field.",
    )
    command_parser.add_argument("--dimension", "-n", type=str, default=None, help="Space dimension n (2 or 3).")
    command_parser.add_argument("--box-length", "-L", type=str, default=None, help="Box side length L.")
    command_parser.add_argument("--resolution", "-N", type=str, default=None, help="Grid points per axis.")
    command_parser.add_argument("--nu", type=str, default=None, help="Viscosity nu > 0.")
    command_parser.add_argument("--amplitude", type=str, default=None, help="Initial amplitude (RMS for random data, default 1e-3; Taylor-Green default 1).")
    command_parser.add_argument("--k-cut", type=str, default=None, help="Largest excited wavenumber for random data.")
    command_parser.add_argument("--dt", type=str, default=None, help="Time step.")
    command_parser.add_argument("--horizon", "--T", "-T", type=str, default=None, help="Final time.")
    command_parser.add_argument("--record-stride", type=str, default=None, help="Record norms every N steps.")
    command_parser.add_argument(
        "--no-dealias",
        dest="dealias",
        action="store_const",
        const="false",
        default=None,
        help="Disable the 2/3-rule truncation of the nonlinear term.",
    )
    command_parser.add_argument(
        "--linear",
        dest="nonlinear",
        action="store_const",
        const="false",
        default=None,
        help="Drop the nonlinear term (Stokes flow).",
    )


def create_parser() -> argparse.ArgumentParser:
    """Create and configure the argument parser."""
    parser = argparse.ArgumentParser(
        prog="nsdecay",
        description="Numerical lab for derivative decay of Navier-Stokes solutions",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""\
Examples:
  %(prog)s constant --alpha 1 --m 1          Decay constant K(1, 1)
  %(prog)s heat-oracle --kappa 1 -n 2        Closed-form heat decay checks
  %(prog)s simulate --preset taylor-green    Pseudo-spectral run with exact reference
  %(prog)s verify-chain --source simulate    Energy and weighted-integral checks
  %(prog)s sweep --config sweep.ini          Run a parameter grid
""",
    )

    parser.add_argument(
        "--version",
        "-V",
        action="version",
        version=f"%(prog)s {get_version()}",
    )

    parser.add_argument(
        "--verbose",
        "-v",
        action="count",
        default=0,
        help="Log progress to stderr (-v info, -vv debug).",
    )

    subparsers = parser.add_subparsers(
        dest="command",
        title="commands",
        description="Available commands",
        metavar="<command>",
    )

    constant_parser = subparsers.add_parser(
        "constant",
        help="Compute the decay constant K(alpha, m)",
        description="""\
Minimize delta^(-1/2) prod_{j=0}^{m} (alpha + j/2 + delta)^(1/2) over delta > 0.

At alpha = 0 the infimum sits at delta -> 0; at m = 0 it sits at delta -> inf.
""",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""\
Examples:
  nsdecay constant --alpha 1 --m 1
  nsdecay constant --alpha 0.5 --m 3 --json
""",
    )
    constant_parser.add_argument("--alpha", type=str, default=None, help="Decay rate alpha >= 0.")
    constant_parser.add_argument("--m", "-m", type=str, default=None, help="Derivative order m >= 0.")
    _add_run_arguments(constant_parser, help_text="Output K and delta* as JSON.")

    heat_parser = subparsers.add_parser(
        "heat-oracle",
        help="Verify decay rates on exact heat-equation solutions",
        description="""\
Evolve u0 with |u0_hat(k)| = A |k|^kappa exp(-|k|^2 / 2) by the heat semigroup
and check the asymptotic decay inequality, closed forms against quadrature,
the small-time limit and the L^4 interpolation estimates.
""",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""\
Examples:
  nsdecay heat-oracle --kappa 1 -n 2 --nu 1
  nsdecay heat-oracle --kappa 0 -n 3 --m-max 6 -o runs/heat
""",
    )
    _add_profile_arguments(heat_parser)
    heat_parser.add_argument("--m-max", type=str, default=None, help="Highest derivative order.")
    _add_run_arguments(heat_parser, help_text="Output the run summary as JSON.")

    simulate_parser = subparsers.add_parser(
        "simulate",
        help="Run the periodic-box pseudo-spectral solver",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""\
Examples:
  nsdecay simulate --preset taylor-green --nu 0.1 -T 1 --dt 1e-3
  nsdecay simulate --preset random -N 32 --seed 7 --snapshot
""",
    )
    _add_simulation_arguments(simulate_parser)
    simulate_parser.add_argument("--m-max", type=str, default=None, help="Highest recorded derivative order.")
    simulate_parser.add_argument(
        "--snapshot",
        action="store_const",
        const="true",
        default=None,
        help="Write the final state to final.snap.",
    )
    _add_run_arguments(simulate_parser, help_text="Output the run summary as JSON.")

    chain_parser = subparsers.add_parser(
        "verify-chain",
        help="Check the energy inequality and weighted-integral chain",
        description="""\
Measure a norm series from the heat oracle or the box solver and compare it
against the energy inequality and the weighted-integral induction bounds
for every recorded t >= t0.
""",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""\
Examples:
  nsdecay verify-chain --source heat-oracle --kappa 1
  nsdecay verify-chain --source simulate --preset random --amplitude 1e-4 --nu 0.05
""",
    )
    chain_parser.add_argument(
        "--source",
        choices=["heat-oracle", "simulate"],
        default=None,
        help="Where the norm series comes from (default: heat-oracle).",
    )
    chain_parser.add_argument("--alpha", type=str, default=None, help="Decay rate alpha (default: from the source).")
    chain_parser.add_argument("--delta", type=str, default=None, help="Weight exponent delta > 0.")
    chain_parser.add_argument("--epsilon", type=str, default=None, help="Slack epsilon in (0, 2).")
    chain_parser.add_argument("--t0", type=str, default=None, help="Start time (default: chosen from the series).")
    chain_parser.add_argument("--m-max", type=str, default=None, help="Highest chain order k.")
    chain_parser.add_argument("--window", type=str, default=None, help="lambda0 window as 'start,end'.")
    chain_parser.add_argument("--kappa", type=str, default=None, help="Heat source: profile exponent kappa.")
    chain_parser.add_argument("--samples", type=str, default=None, help="Heat source: geometric samples.")
    _add_simulation_arguments(chain_parser)
    _add_run_arguments(chain_parser, help_text="Output the run summary as JSON.")

    sweep_parser = subparsers.add_parser(
        "sweep",
        help="Run a grid of experiments concurrently",
        description="""\
Expand a sweep file ([sweep] grid axes plus optional [child NAME] sections)
into independent experiments, run them concurrently and write sweep.csv.
Each child writes its own files into a subdirectory named by its hash.
""",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""\
Examples:
  nsdecay sweep --config sweep.ini
  nsdecay sweep --config base.ini --grid constant.alpha=0.5,1,2 --grid constant.m=1,2
""",
    )
    sweep_parser.add_argument(
        "--grid",
        action="append",
        default=[],
        metavar="KEY=V1,V2",
        help="Extra grid axis; repeat for a Cartesian product.",
    )
    sweep_parser.add_argument(
        "--workers",
        type=int,
        default=None,
        help="Maximum concurrent experiments (default: CPU count).",
    )
    _add_run_arguments(sweep_parser, help_text="Output the sweep table as JSON.")

    return parser
