"""Command-line interface: group inspection, critical-exponent estimation,
measure export, and the convergence experiments."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__, conformal, flow, fuchsian, lab, spectral
from .lab import ConfigError
from .moebius import PlanePoint

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3


def _add_common(sp):
    sp.add_argument("--config", required=True, help="group config file")
    sp.add_argument("--out", default=None, help="output path (default stdout)")
    sp.add_argument("--depth", type=int, default=None, help="measure depth")
    sp.add_argument("--tol", type=float, default=1e-6, help="quadrature tolerance")
    sp.add_argument("--seed", type=int, default=0, help="run seed (recorded)")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="horolab",
        description="numerical experiments on thin-group horocycle averages",
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("group", help="group inspection")
    gsub = g.add_subparsers(dest="group_command", required=True)
    ginfo = gsub.add_parser("info", help="echo config and basic group facts")
    _add_common(ginfo)

    d = sub.add_parser("delta", help="estimate the critical exponent")
    _add_common(d)
    d.add_argument("--method", choices=("bowen", "poincare"), default="bowen")
    d.add_argument("--level", type=int, default=8, help="word length for the estimate")

    m = sub.add_parser("ps-measure", help="export the atomic boundary measure")
    _add_common(m)

    e = sub.add_parser("experiment", help="run a convergence experiment")
    e.add_argument("kind", choices=("phi", "thm1", "translate", "measures"))
    _add_common(e)
    e.add_argument("--n", type=int, default=0, help="eigenfunction index (phi)")

    s = sub.add_parser("selftest", help="run fast structural checks")
    s.add_argument("--config", default=None)
    return ap


def _emit(args, header, rows, metadata):
    writer = lab.write_csv if args.format == "csv" else lab.write_json
    body = writer(args.out, header, rows, metadata)
    if args.out is None:
        sys.stdout.write(body)


def cmd_group_info(args):
    setup = lab.load_setup(args.config, args.depth)
    g = setup.group
    info = {
        "fingerprint": setup.fingerprint,
        "rank": g.rank,
        "has_cusp": g.has_cusp,
        "word_count_6": g.word_count(6),
        "generator_traces": [gen.trace() for gen in g.generators],
    }
    out = sys.stdout if args.out is None else open(args.out, "w")
    try:
        for line in setup.raw_lines:
            out.write(line + "\n")
        out.write("# ---\n")
        out.write(json.dumps(info, indent=1, sort_keys=True) + "\n")
    finally:
        if args.out is not None:
            out.close()
    return EXIT_OK


def cmd_delta(args):
    setup = lab.load_setup(args.config, args.depth)
    value, spread = setup.group.estimate_delta(args.level, args.method)
    _emit(
        args,
        ["method", "level", "delta", "spread"],
        [(args.method, args.level, value, spread)],
        [("group_fingerprint", setup.fingerprint), ("seed", args.seed)],
    )
    return EXIT_OK


def cmd_ps_measure(args):
    setup = lab.load_setup(args.config, args.depth)
    delta = setup.delta()
    nu = conformal.ps_density(setup.group, setup.depth, delta=delta)
    rows = [(float(p), float(w)) for p, w in zip(nu.points, nu.weights)]
    md = [
        ("group_fingerprint", setup.fingerprint),
        ("delta_hat", delta),
        ("depth", setup.depth),
        ("seed", args.seed),
        ("total_mass", nu.total_mass),
        ("inf_weight", nu.inf_weight),
    ]
    _emit(args, ["point", "weight"], rows, md)
    return EXIT_OK


def cmd_experiment(args):
    setup = lab.load_setup(args.config, args.depth)
    if args.kind == "phi":
        res = lab.run_phi(setup, n=args.n, seed=args.seed)
    elif args.kind == "thm1":
        res = lab.run_thm1(setup, tol=args.tol, seed=args.seed)
    elif args.kind == "translate":
        res = lab.run_translate(setup, tol=args.tol, seed=args.seed)
    else:
        res = lab.run_measures(setup, seed=args.seed)
    _emit(args, res.header, res.rows, res.metadata)
    return EXIT_OK


def cmd_selftest(args):
    import math

    from .moebius import (
        BoundaryPoint,
        GroupElement,
        busemann_base,
        hyp_dist,
        identity,
        iwasawa,
        n_x,
        a_y,
        recompose,
    )

    checks = []
    checks.append(("dist_i_2i", abs(hyp_dist(PlanePoint(0, 1), PlanePoint(0, 2)) - math.log(2)) < 1e-12))
    checks.append(("busemann_log4", abs(busemann_base(BoundaryPoint(0.0), PlanePoint(0, 4)) - math.log(4)) < 1e-12))
    g = n_x(0.3) * a_y(2.1)
    x, y, th = iwasawa(g, "NAK")
    checks.append(("nak_roundtrip", recompose(x, y, th, "NAK").close_to(g)))
    p = spectral.SpectralParams(0.75, 3)
    c, k = spectral.constants(p)
    checks.append(("kappa_identity", abs(k * c * c - spectral.kappa_0(0.75)) < 1e-10))
    if args.config:
        setup = lab.load_setup(args.config)
        nu = conformal.ps_density(setup.group, min(setup.depth, 6))
        checks.append(("ps_mass_one", abs(nu.total_mass - 1.0) < 1e-12))
    ok = all(passed for _, passed in checks)
    for name, passed in checks:
        print(f"{name}: {'ok' if passed else 'FAIL'}")
    return EXIT_OK if ok else 1


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.command == "group":
            return cmd_group_info(args)
        if args.command == "delta":
            return cmd_delta(args)
        if args.command == "ps-measure":
            return cmd_ps_measure(args)
        if args.command == "experiment":
            return cmd_experiment(args)
        if args.command == "selftest":
            return cmd_selftest(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (fuchsian.EnumerationBudget, flow.QuadratureBudget, spectral.QuadratureBudget) as e:
        print(f"budget error: {e}", file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
