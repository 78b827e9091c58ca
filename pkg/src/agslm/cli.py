"""Command-line front end: ``python -m agslm <command> ...``."""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .analytics import expected_ag_cost, papr_ccdf
from .harness import (
    QUICK_TRIALS,
    ExperimentSpec,
    ccdf_table,
    fig7_compare,
    kcurve_rows,
    reproduce_table,
    run_experiment,
    write_rows,
)
from .schemes import ConfigError, Scheme, SlmConfig


def _u_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _common(p: argparse.ArgumentParser, trials: bool = True) -> None:
    if trials:
        p.add_argument("--trials", type=int, default=100_000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--quick", action="store_true", help=f"run {QUICK_TRIALS} trials")
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _scheme_args(p: argparse.ArgumentParser, u_default: str = "8") -> None:
    p.add_argument("--scheme", choices=[s.value for s in Scheme], default="conventional")
    p.add_argument("--n", type=int, default=256, help="data subcarriers")
    p.add_argument("--oversample", type=int, default=4)
    p.add_argument("--u", type=_u_list, default=_u_list(u_default), help="candidate count(s), comma separated")
    p.add_argument("--ag", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--r", type=int, default=5, help="stages after the split (Lim)")
    p.add_argument("--gamma0-db", type=float, default=None, help="saturation threshold (Baxley)")
    p.add_argument("--verify", action="store_true", help="recheck every AG selection against the baseline")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="agslm", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Monte Carlo cost of one scheme")
    _scheme_args(p)
    _common(p)

    p = sub.add_parser("table", help="reproduce one of the published cost tables")
    p.add_argument("which", choices=["I", "II", "III", "IV"])
    p.add_argument("--verify", action="store_true")
    _common(p)

    p = sub.add_parser("fig7", help="analytic against simulated relative AG cost")
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--oversample", type=int, default=1)
    p.add_argument("--u", type=int, default=16, help="largest U")
    _common(p)

    p = sub.add_parser("kcurve", help="K(a)/T for one transform size")
    p.add_argument("--n", type=int, default=128, help="transform size")
    _common(p, trials=False)

    p = sub.add_parser("analyze", help="model expected AG cost for U = 1..u")
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--oversample", type=int, default=1)
    p.add_argument("--u", type=int, default=16)
    _common(p, trials=False)

    p = sub.add_parser("ccdf", help="PAPR CCDF of the selected candidates")
    _scheme_args(p)
    p.add_argument("--grid", default="4:12:0.1", help="start:stop:step in dB")
    _common(p)
    return parser


def _configs(a) -> list[SlmConfig]:
    forms = (False, True) if a.ag else (False,)
    return [
        SlmConfig(a.n, a.oversample, u, Scheme(a.scheme), ag=ag, r=a.r, gamma0_db=a.gamma0_db)
        for u in a.u
        for ag in forms
    ]


def _trials(a) -> int:
    return QUICK_TRIALS if a.quick else a.trials


def _grid(text: str) -> np.ndarray:
    start, stop, step = (float(v) for v in text.split(":"))
    return np.round(np.arange(start, stop + step / 2, step), 10)


def main(argv=None) -> int:
    a = build_parser().parse_args(argv)
    try:
        return _dispatch(a)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def _dispatch(a) -> int:
    if a.command == "simulate":
        spec = ExperimentSpec(tuple(_configs(a)), _trials(a), a.seed, a.out, a.format, a.verify)
        res = run_experiment(spec)
        if a.out is None:
            write_rows(res.rows(), None, a.format, spec.describe())
        if a.verify and res.violations:
            print(f"error: {res.violations} AG equivalence violations", file=sys.stderr)
            return 1
        return 0

    if a.command == "table":
        tab = reproduce_table(a.which, a.trials, a.seed, quick=a.quick, verify=a.verify)
        meta = {"table": a.which, "trials": tab.trials, "master_seed": a.seed, "quick": a.quick}
        if a.out is None and a.format == "csv":
            print(tab.to_text())
        else:
            write_rows(tab.rows, a.out, a.format, meta)
        return 0

    if a.command == "fig7":
        res = fig7_compare(a.n, range(2, a.u + 1), _trials(a), a.seed, a.oversample)
        meta = {"N": a.n, "trials": res.trials, "master_seed": a.seed}
        write_rows(res.rows(), a.out, a.format, meta)
        return 0

    if a.command == "kcurve":
        write_rows(kcurve_rows(a.n), a.out, a.format, {"N": a.n})
        return 0

    if a.command == "analyze":
        rows = []
        for u in range(1, a.u + 1):
            cost = expected_ag_cost(u, a.n, a.oversample)
            rows.append({"U": u, "expected_cost_T": cost, "relative": cost / u})
        write_rows(rows, a.out, a.format, {"N": a.n})
        return 0

    if a.command == "ccdf":
        cfgs = _configs(a)
        res = run_experiment(ExperimentSpec(tuple(cfgs), _trials(a), a.seed, verify=a.verify))
        grid = _grid(a.grid)
        curves = {c.label(): ccdf_table(res.papr(c), grid) for c in cfgs}
        rows = []
        for k, g in enumerate(grid):
            row = {"papr_db": float(g)}
            row.update({name: float(v[k]) for name, v in curves.items()})
            if a.oversample == 1:
                for u in sorted(set(a.u)):
                    row[f"model U={u}"] = float(papr_ccdf(10 ** (g / 10), a.n, u))
            rows.append(row)
        meta = {"configs": [c.label() for c in cfgs], "trials": _trials(a), "master_seed": a.seed}
        write_rows(rows, a.out, a.format, meta)
        return 0
    raise AssertionError(a.command)


if __name__ == "__main__":
    sys.exit(main())
