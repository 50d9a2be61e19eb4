"""Command-line front end.

    dephase gamma -c scenario.json -o gamma.csv
    dephase rho -c scenario.json
    dephase oracle-compare -c scenario.json --tolerance 1e-6
    dephase regimes -c scenario.json

Exit codes: 0 success, 1 validation error, 2 numerical failure,
3 comparison failure. Output is written only after every row has been
computed, so a failing run leaves no partial file.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys

import numpy as np

from . import __version__
from .config import ConfigError, ScenarioConfig, load
from .continuum import analyze_regimes, decoherence_complete, gamma_continuum
from .core import gamma_discrete, reduced_density_matrix
from .errors import DimensionBudgetExceeded, NumericalError, QuadratureNonconvergence, ValidationError
from .oracle import build_total_hamiltonian, converge_truncation, evolve_and_trace

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_COMPARISON = 3


def fmt(x) -> str:
    """17 significant digits, enough to round-trip a double."""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


class Table:
    """Rows plus leading comment lines, rendered as CSV or TSV."""

    def __init__(self, command: str, config: ScenarioConfig, header: list):
        self.comments = [f"dephase {__version__} {command}", f"config: {config.canonical()}"]
        self.header = header
        self.rows = []
        self.delimiter = "\t" if config.output_format == "tsv" else ","

    def render(self) -> str:
        buf = io.StringIO()
        for line in self.comments:
            buf.write(f"# {line}\n")
        writer = csv.writer(buf, delimiter=self.delimiter, lineterminator="\n")
        writer.writerow(self.header)
        writer.writerows(self.rows)
        return buf.getvalue()


def cmd_gamma(config: ScenarioConfig) -> tuple:
    """Gamma(t) on the configured grid: discrete sum or continuum quadrature."""
    table = Table("gamma", config, ["t", "gamma", "source", "quad_error"])
    status = EXIT_OK
    if config.discrete_bath is not None:
        values = np.atleast_1d(gamma_discrete(config.discrete_bath, config.temperature, config.times))
        table.rows = [[fmt(t), fmt(g), "discrete", fmt(0.0)] for t, g in zip(config.times, values)]
        return table, status
    for t in config.times:
        try:
            value, err = gamma_continuum(config.spectral, config.temperature, t, config.tolerance)
            source = "continuum"
        except QuadratureNonconvergence as exc:
            value, err, source = exc.value, exc.error, "continuum-nonconverged"
            print(f"warning: {exc}", file=sys.stderr)
            status = EXIT_NUMERICAL
        table.rows.append([fmt(t), fmt(value), source, fmt(err)])
    return table, status


def cmd_rho(config: ScenarioConfig) -> tuple:
    """All d^2 reduced density-matrix elements at each time."""
    system = config.require_system()
    bath = config.bath_for_evolution()
    table = Table("rho", config, ["t", "m", "n", "re", "im", "abs"])
    d = system.dim
    for t in config.times:
        rho = reduced_density_matrix(system, bath, config.temperature, t, config.renormalize).entries
        for m in range(d):
            for n in range(d):
                z = rho[m, n]
                table.rows.append([fmt(t), m, n, fmt(z.real), fmt(z.imag), fmt(abs(z))])
    return table, EXIT_OK


def cmd_oracle_compare(config: ScenarioConfig) -> tuple:
    """Closed form against the converged truncated-Fock oracle.

    The truncation is converged at the last grid time to a tenth of the
    tolerance; the run passes when every per-time max-norm difference is
    below the tolerance.
    """
    system = config.require_system()
    if config.discrete_bath is None:
        raise ConfigError("bath: oracle-compare needs a discrete bath")
    bath = config.discrete_bath
    beta = config.temperature
    try:
        trunc = converge_truncation(
            system, bath, beta, float(config.times[-1]), 0.1 * config.tolerance, config.renormalize, config.budget
        )
    except DimensionBudgetExceeded as exc:
        raise DimensionBudgetExceeded(
            f"{exc}. Raise --budget, reduce the number of modes, or loosen --tolerance.", exc.best_delta
        ) from None
    H = build_total_hamiltonian(system, bath, trunc, config.renormalize)
    table = Table("oracle-compare", config, ["t", "max_abs_diff", "status"])
    table.comments.append(f"levels_per_mode: {list(trunc.levels_per_mode)}")
    table.comments.append(f"truncation_delta: {fmt(trunc.achieved_delta)}")
    worst = 0.0
    for t in config.times:
        oracle = evolve_and_trace(H, system, bath, beta, trunc, t).entries
        closed = reduced_density_matrix(system, bath, beta, t, config.renormalize).entries
        diff = float(np.max(np.abs(oracle - closed)))
        worst = max(worst, diff)
        table.rows.append([fmt(t), fmt(diff), "PASS" if diff < config.tolerance else "FAIL"])
    passed = worst < config.tolerance
    table.comments.append(f"result: {'PASS' if passed else 'FAIL'} (max diff {fmt(worst)}, tolerance {fmt(config.tolerance)})")
    return table, EXIT_OK if passed else EXIT_COMPARISON


def cmd_regimes(config: ScenarioConfig) -> tuple:
    """Fitted exponents per regime and the complete/incomplete verdict."""
    if config.spectral is None:
        raise ConfigError("bath: regimes needs a spectral bath")
    spec = config.spectral
    windows = {k: v for k, v in config.regimes.items() if k != "samples"}
    fits = analyze_regimes(spec, config.temperature, windows, config.regimes.get("samples", 25), config.tolerance)
    table = Table("regimes", config, ["regime", "model", "t_start", "t_stop", "slope", "residual"])
    for f in fits:
        table.rows.append([f.regime, f.model.value, fmt(f.window[0]), fmt(f.window[1]), fmt(f.slope), fmt(f.residual)])
    if decoherence_complete(spec):
        verdict = f"complete decoherence: Gamma grows without bound (n = {spec.exponent:g} < 2)"
    else:
        verdict = f"incomplete decoherence: Gamma saturates (n = {spec.exponent:g} >= 2)"
    table.comments.append(f"verdict: {verdict}")
    return table, EXIT_OK


COMMANDS = {
    "gamma": cmd_gamma,
    "rho": cmd_rho,
    "oracle-compare": cmd_oracle_compare,
    "regimes": cmd_regimes,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dephase", description="Exact adiabatic decoherence in a boson bath.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func in COMMANDS.items():
        p = sub.add_parser(name, help=func.__doc__.splitlines()[0])
        p.add_argument("-c", "--config", required=True, help="scenario JSON file")
        p.add_argument("-o", "--output", help="output file (default: config output.path, else stdout)")
        p.add_argument("--format", choices=["csv", "tsv"], help="override output.format")
        p.add_argument("--tolerance", type=float, help="override flags.tolerance")
        p.add_argument("--renormalize", action=argparse.BooleanOptionalAction, default=None, help="override flags.renormalize")
        p.add_argument("--budget", type=int, help="override flags.budget (oracle dimension limit)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {"tolerance": args.tolerance, "renormalize": args.renormalize, "budget": args.budget}
    try:
        config = load(args.config, overrides)
        if args.format:
            config.output_format = args.format
        table, status = COMMANDS[args.command](config)
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    text = table.render()
    path = args.output or config.output_path
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for line in table.comments[2:]:
        print(line, file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
