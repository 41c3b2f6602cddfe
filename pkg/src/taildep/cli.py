"""Command-line front end: ``taildep <subcommand> [options]``.

Exit status is 0 on success, 2 for configuration errors and 3 when a
computation fails.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

from . import simulate as sim
from .exceptions import TailDepError
from .ingest import write_table
from .report import ConfigError, PairError, RunConfig, parse_k_grid, run_pairwise_report

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE = 0, 2, 3

SUBCOMMAND_SECTIONS = {
    "spectral": ("spectral",),
    "stdf": ("stdf",),
    "coeffs": ("coeffs",),
    "test": ("test",),
    "report": ("spectral", "stdf", "coeffs", "test"),
}

# defaults for flags shared by several subcommands; argparse uses SUPPRESS so
# that a flag given before the subcommand is not overwritten by the subparser
DEFAULTS = {
    "input": None,
    "out": ".",
    "seed": 0,
    "cols": None,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _csv_floats(text: str):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _cols(text: str):
    parts = tuple(v.strip() for v in text.split(","))
    if len(parts) != 2 or not all(parts):
        raise argparse.ArgumentTypeError("--cols takes two names, A,B")
    return parts


def _global_flags() -> argparse.ArgumentParser:
    g = _Parser(add_help=False)
    g.add_argument("--input", default=argparse.SUPPRESS, help="comma or tab delimited input file")
    g.add_argument("--out", default=argparse.SUPPRESS, help="output directory (default: current)")
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed (default 0)")
    g.add_argument("--cols", type=_cols, default=argparse.SUPPRESS, help="analyze only the pair A,B")
    return g


def _data_flags(p):
    p.add_argument("--returns", action="store_true", help="input columns are already returns")
    p.add_argument("--period", type=int, default=1, help="subsampling stride for price series")
    p.add_argument("--figures", action="store_true", help="also render PNG figures (needs matplotlib)")


def _spectral_flags(p):
    rule = p.add_mutually_exclusive_group()
    rule.add_argument("--k", type=int, help="number of exceedances (radius order statistic)")
    rule.add_argument("--quantile", type=float, help="radius quantile threshold (default 0.95)")
    p.add_argument("--estimator", choices=("emp", "mel", "euc"), default="euc")
    p.add_argument("--nu", default="cv", help="beta-kernel concentration, or 'cv' (default)")


def _stdf_flags(p):
    p.add_argument("--stdf-k", type=int, default=50, help="order statistic for the stdf estimators")
    p.add_argument("--levels", type=_csv_floats, default=(0.2, 0.4, 0.6, 0.8, 1.0))
    if not any(a.dest == "estimator" for a in p._actions):
        p.add_argument("--estimator", choices=("emp", "mel", "euc"), default="euc")


def _coeff_flags(p):
    p.add_argument("--u-grid", type=_csv_floats, default=None, help="comma list of u values")
    p.add_argument("--eta-k-grid", type=parse_k_grid, default=None, help="a:b:step")


def _test_flags(p, both: bool):
    choices = ("dependence", "independence", "both") if both else ("dependence", "independence")
    p.add_argument("--null", choices=choices, default="both" if both else "dependence")
    p.add_argument("--k-grid", type=parse_k_grid, default=parse_k_grid("25:250:25"))
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--variance", choices=("at_one", "at_estimate"), default="at_one")
    p.add_argument("--critical", choices=("paper", "simulate"), default="paper")
    p.add_argument("--mc-paths", type=int, default=200_000)
    p.add_argument("--mc-steps", type=int, default=2000)


def build_parser() -> argparse.ArgumentParser:
    g = _global_flags()
    parser = _Parser(prog="taildep", description="Nonparametric extremal dependence analysis.", parents=[g])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[g], help="write a sample from a copula")
    p.add_argument("--copula", default="gumbel:2.5", help="gumbel:THETA, normal:RHO, indep, comonotone")
    p.add_argument("--n", type=int, default=729)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--name", default="sample.csv", help="file name inside --out")

    p = sub.add_parser("spectral", parents=[g], help="spectral weights and smoothed density")
    _data_flags(p)
    _spectral_flags(p)

    p = sub.add_parser("stdf", parents=[g], help="level sets of the stdf estimators")
    _data_flags(p)
    _stdf_flags(p)

    p = sub.add_parser("coeffs", parents=[g], help="chi(u) and eta tables")
    _data_flags(p)
    _coeff_flags(p)

    p = sub.add_parser("test", parents=[g], help="asymptotic (in)dependence tests")
    _data_flags(p)
    _test_flags(p, both=False)

    p = sub.add_parser("report", parents=[g], help="every table for every selected pair")
    _data_flags(p)
    _spectral_flags(p)
    _stdf_flags(p)
    _coeff_flags(p)
    _test_flags(p, both=True)
    return parser


def _config(ns) -> RunConfig:
    kw = dict(
        input=ns.input,
        out=ns.out,
        cols=ns.cols,
        seed=ns.seed,
        returns=ns.returns,
        period=ns.period,
        figures=ns.figures,
    )
    for attr, key in (
        ("k", "k"),
        ("quantile", "quantile"),
        ("estimator", "estimator"),
        ("nu", "nu"),
        ("stdf_k", "stdf_k"),
        ("levels", "levels"),
        ("eta_k_grid", "eta_k_grid"),
        ("k_grid", "k_grid"),
        ("alpha", "alpha"),
        ("null", "null"),
        ("variance", "variance_mode"),
        ("critical", "critical"),
        ("mc_paths", "mc_paths"),
        ("mc_steps", "mc_steps"),
    ):
        if getattr(ns, attr, None) is not None:
            kw[key] = getattr(ns, attr)
    if getattr(ns, "u_grid", None) is not None:
        kw["u_grid"] = ns.u_grid
    return RunConfig(**kw)


def _simulate(ns) -> int:
    try:
        spec = sim.parse_copula(ns.copula, ns.d)
        if ns.n < 2:
            raise ValueError("--n must be at least 2")
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    os.makedirs(ns.out, exist_ok=True)
    data = sim.sample(spec, ns.n, ns.seed)
    meta = json.dumps({"copula": ns.copula, "n": ns.n, "d": ns.d, "seed": ns.seed}, sort_keys=True)
    path = os.path.join(ns.out, ns.name)
    write_table(path, data, [f"config: {meta}"])
    print(path)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        for key, value in DEFAULTS.items():
            if not hasattr(ns, key):
                setattr(ns, key, value)
        if ns.command == "simulate":
            return _simulate(ns)
        cfg = _config(ns)
        bundle = run_pairwise_report(cfg, sections=SUBCOMMAND_SECTIONS[ns.command])
    except ConfigError as exc:
        print(f"taildep: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PairError as exc:
        print(f"taildep: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except (TailDepError, ValueError, ArithmeticError, OSError) as exc:
        print(f"taildep: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    for (a, b), tables in bundle.items():
        print(f"{a},{b}: {', '.join(sorted(tables))}")
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
