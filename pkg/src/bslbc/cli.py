"""Command-line front end: ``bslbc <command> [flags]``.

Every command except ``verify`` writes CSV to ``--out`` or to stdout.
"""

from __future__ import annotations

import argparse
import sys

from . import acceptance, experiments
from .analytic import CallOption, call_price, payoff_vector
from .grid import build_sinh_grid
from .operator import ModelParams, Scheme, Treatment, assemble
from .timestepper import ThetaConfig, solve


def _m_list(text):
    return tuple(int(x) for x in text.split(",") if x.strip())


def _common(p):
    p.add_argument("--r", type=float, default=None, help="default 0.1 (0.3 for fractions)")
    p.add_argument("--sigma", type=float, default=None, help="default 0.3 (0.1 for fractions)")
    p.add_argument("--E", type=float, default=100.0)
    p.add_argument("--c", type=float, default=None, help="sinh grid spread (default E/5)")
    p.add_argument("--S", type=float, default=None)
    p.add_argument("--m-list", type=_m_list, default=None, help="comma separated, e.g. 100,200")
    p.add_argument("--scheme", action="append", choices=[s.value for s in Scheme],
                   help="repeatable; default all")
    p.add_argument("--treatment", action="append", choices=[t.value for t in Treatment],
                   help="repeatable; default both")
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--steps", type=int, default=None, help="time steps N")
    p.add_argument("--T", type=float, default=None)
    p.add_argument("--out", default=None, help="CSV path (default stdout)")
    p.add_argument("--paper-scale", action="store_true")
    p.add_argument("--workers", type=int, default=1)


def build_parser():
    parser = argparse.ArgumentParser(prog="bslbc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in [
        ("stability", "max over t of ||exp(tM)|| against 2S/h"),
        ("convergence", "errors at T against the Black-Scholes call, with fitted orders"),
        ("fractions", "share of rows where the mixed schemes fall back to forward"),
        ("lbc-compare", "LBC1 vs LBC2 errors side by side"),
        ("price", "solve one European call and dump U, exact value and error"),
    ]:
        _common(sub.add_parser(name, help=text))
    v = sub.add_parser("verify", help="run the reproduction checks; exit 1 on any failure")
    v.add_argument("--fast", action="store_true", help="skip the convergence-order sweep")
    v.add_argument("--workers", type=int, default=1)
    v.add_argument("--paper-scale", action="store_true")
    return parser


def _overrides(args):
    kw = {"E": args.E}
    if args.c is not None:
        kw["c"] = args.c
    elif args.E != 100.0:
        kw["c"] = args.E / 5
    for key, val in (("S", args.S), ("m_list", args.m_list), ("N", args.steps), ("T", args.T)):
        if val is not None:
            kw[key] = val
    if args.scheme:
        kw["schemes"] = tuple(args.scheme)
    if args.treatment:
        kw["treatments"] = tuple(args.treatment)
    kw["theta"] = args.theta
    return kw


def _emit(rows, out):
    text = experiments.write_csv(rows)
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as f:
            f.write(text)


def _price(args):
    S = 400.0 if args.S is None else args.S
    m = (args.m_list or (200,))[0]
    T = 1.0 if args.T is None else args.T
    params = ModelParams(args.r, args.sigma, S, args.E, T)
    grid = build_sinh_grid(args.E, args.E / 5 if args.c is None else args.c, S, m)
    scheme = (args.scheme or ["central_a"])[0]
    treatment = (args.treatment or ["lbc1"])[0]
    op = assemble(grid, params, scheme, treatment)
    exact = call_price(grid.unknown_nodes, T, CallOption.from_params(params))
    res = solve(op, payoff_vector(grid, args.E),
                config=ThetaConfig(args.theta, args.steps or 1000), reference=exact)
    return [{"s_j": s, "U_j": u, "analytic_j": a, "error_j": a - u}
            for s, u, a in zip(res.nodes, res.U, exact)]


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        if args.fast:
            results = [fn() for fn in acceptance.FAST_CHECKS]
        else:
            results = acceptance.run_all(workers=args.workers)
        for chk in sorted(results, key=lambda c: c.number):
            print(chk.line(), flush=True)
        return 0 if all(c.passed for c in results) else 1

    if args.r is None:
        args.r = 0.3 if args.command == "fractions" else 0.1
    if args.sigma is None:
        args.sigma = 0.1 if args.command == "fractions" else 0.3
    if args.command == "price":
        _emit(_price(args), args.out)
        return 0

    kw = _overrides(args)
    if args.command == "stability":
        preset = experiments.stability_preset(args.r, args.sigma, args.paper_scale, **kw)
        rows = experiments.run_stability(preset, workers=args.workers)
    elif args.command == "fractions":
        base = experiments.fractions_preset()
        kw.setdefault("m_list", base.m_list)
        kw.setdefault("S", base.S)
        rows = experiments.run_fractions(experiments.ExperimentPreset(args.r, args.sigma, **kw))
    else:
        preset = experiments.convergence_preset(args.r, args.sigma, args.paper_scale, **kw)
        run = (experiments.run_convergence if args.command == "convergence"
               else experiments.run_lbc_comparison)
        rows = run(preset, workers=args.workers)
    _emit(rows, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
