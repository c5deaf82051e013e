"""Command-line front end: ``python3 -m interpoint <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 domain or data error, 3 numerical failure.
Every JSON report embeds the resolved configuration; passing a report back
through ``--config`` reruns it and reproduces the same bytes.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import ballgeom, bounds, empirics, figures
from . import distances as dist
from .densities import DensitySpec
from .errors import DimensionMismatch, InterpointError
from .io import atomic_write_text, csv_text, load_config, read_points, write_report

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

SHORTHANDS = {
    "l1": lambda dim, arg: dist.DistanceSpec.lp(1.0, dim),
    "l2": lambda dim, arg: dist.DistanceSpec.lp(2.0, dim),
    "linf": lambda dim, arg: dist.DistanceSpec.lp(np.inf, dim),
    "lp": lambda dim, arg: dist.DistanceSpec.lp(float(arg), dim),
    "lpp": lambda dim, arg: dist.DistanceSpec.lp_pow_p(float(arg), dim),
    "canberra": lambda dim, arg: dist.DistanceSpec.canberra(dim),
    "braycurtis": lambda dim, arg: dist.DistanceSpec.bray_curtis(dim),
    "entropic": lambda dim, arg: dist.DistanceSpec.entropic(dim),
    "sphere": lambda dim, arg: dist.DistanceSpec.sphere(dim if dim else 3),
    "oscillatory": lambda dim, arg: dist.DistanceSpec.oscillatory(float(arg) if arg else 0.1, dim=dim),
}

# center / comparison point / radius scale used by ``regularity`` when not given
REGULARITY_DEFAULTS = {
    "entropic": {"dim": 2, "center": [1.0, 2.0], "other": [2.0, 1.0], "t_max": 0.1},
    "canberra": {"dim": 2, "center": [1.0, 2.0], "other": [2.0, 3.0], "t_max": 0.1},
    "bray_curtis": {"dim": 2, "center": [1.0, 2.0], "other": [2.0, 3.0], "t_max": 0.05},
    "sphere": {"dim": 3, "center": [0.0, 0.0, 1.0], "other": [1.0, 0.0, 0.0], "t_max": 0.5},
    "oscillatory": {"dim": 1, "center": [0.0], "other": [1.0], "t_max": 0.05},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_distance(text, dim=None):
    """A :class:`DistanceSpec` from a shorthand (``l2``, ``lp:3``, ``canberra``...) or a JSON object."""
    if isinstance(text, dict):
        return dist.DistanceSpec.from_dict({"dim": dim, **text} if "dim" not in text else text)
    text = str(text).strip()
    if text.startswith("{"):
        return parse_distance(json.loads(text), dim)
    name, _, arg = text.partition(":")
    name = name.lower().replace("-", "").replace("_", "")
    if name not in SHORTHANDS:
        raise UsageError(f"unknown distance {text!r}")
    if dim is None and name != "sphere":
        raise UsageError("distance dimension unknown; pass --dim")
    return SHORTHANDS[name](dim, arg)


def _floats(value):
    if value is None:
        return None
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    return [float(v) for v in str(value).split(",") if v.strip()]


def _emit(args, text):
    atomic_write_text(args.out, text)


def _config(args):
    skip = {"func", "config", "out"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) in (None, "")]
    if missing:
        raise UsageError(f"missing required argument(s): {', '.join(missing)}")


def _load_pair(args):
    _require(args, "x", "y")
    X, Y = read_points(args.x), read_points(args.y)
    if X.shape[1] != Y.shape[1]:
        raise DimensionMismatch(f"{args.x} has {X.shape[1]} columns but {args.y} has {Y.shape[1]}")
    return X, Y


# subcommands ----------------------------------------------------------------------


def cmd_dist(args):
    X, Y = _load_pair(args)
    spec = parse_distance(args.distance, X.shape[1])
    rows = []
    for pair, d in (
        ("xx", empirics.pairwise_distances(spec, X)),
        ("yy", empirics.pairwise_distances(spec, Y)),
        ("xy", empirics.pairwise_distances(spec, X, Y)),
    ):
        rows.extend((pair, float(v)) for v in d)
    _emit(args, csv_text(["pair", "distance"], rows))


def cmd_volume(args):
    _require(args, "center")
    center = _floats(args.center)
    spec = parse_distance(args.distance, len(center))
    rows = ballgeom.volume_table(spec, center, _floats(args.t), mc_n=args.mc_n, seed=args.seed, threads=args.threads)
    keys = ("t", "phi_exact", "phi_mc", "stderr", "lower", "upper")
    payload = {"distance": spec.to_dict(), "rows": [dict(zip(keys, r)) for r in rows]}
    write_report(args.out, payload, _config(args))


def _regularity_setup(args):
    # only the family matters here; dimension 3 is valid for every family
    probe = parse_distance(args.distance, args.dim or 3)
    defaults = REGULARITY_DEFAULTS.get(probe.family, {})
    center = _floats(args.center)
    if center is None:
        center = defaults.get("center") or [0.0] * (args.dim or 1)
    dim = len(center)
    spec = parse_distance(args.distance, dim)
    other = _floats(args.other)
    if other is None:
        other = defaults.get("other") or [1.0] * dim
    t_max = args.t_max if args.t_max is not None else defaults.get("t_max", 1.0)
    return spec, np.array(center), np.array(other), t_max


def cmd_regularity(args):
    spec, x, y, t_max = _regularity_setup(args)
    t_grid = ballgeom.dyadic_grid(t_max, args.n_grid)
    report = ballgeom.check_volume_regularity(
        spec, x, y, t_grid, mc_n=args.mc_n, seed=args.seed, method=args.method, threads=args.threads
    )
    fit = ballgeom.estimate_ahlfors_alpha(
        spec, x, t_grid[::-1], mc_n=args.mc_n, seed=args.seed, method=args.method, threads=args.threads
    )
    payload = {
        "distance": spec.to_dict(),
        "center": x.tolist(),
        "other": y.tolist(),
        "regularity": report.to_dict(),
        "ahlfors": fit.to_dict(),
    }
    write_report(args.out, payload, _config(args))


def cmd_ecdf(args):
    X, Y = _load_pair(args)
    spec = parse_distance(args.distance, X.shape[1])
    triple = empirics.ecdf_triple(spec, X, Y, cap=args.grid_cap)
    disc = empirics.kolmogorov_discrepancy(triple)
    rows = np.column_stack([triple.rows(), disc.delta_k])
    _emit(args, csv_text(["t", "f_xx", "f_yy", "f_xy", "delta_k"], rows.tolist()))


def cmd_test(args):
    X, Y = _load_pair(args)
    spec = parse_distance(args.distance, X.shape[1])
    result = empirics.permutation_test(spec, X, Y, kind=args.kind, B=args.B, seed=args.seed)
    write_report(args.out, {"distance": spec.to_dict(), "result": result.to_dict()}, _config(args))


def _experiment(args):
    exp = args.experiment
    if exp is None:
        raise UsageError("bounds needs an experiment JSON file")
    if isinstance(exp, str):
        with open(exp) as fh:
            exp = json.load(fh)
        args.experiment = exp
    return exp


def run_experiment(exp, seed=0):
    """Evaluate a bounds experiment dictionary; returns the report payload."""
    try:
        f = DensitySpec.from_dict(exp["f"])
        g = DensitySpec.from_dict(exp.get("g", exp["f"]))
    except (KeyError, TypeError) as exc:
        raise UsageError(f"experiment needs density 'f' (and optionally 'g'): {exc}") from None
    spec = parse_distance(exp.get("distance", "l2"), f.dim)
    consts = {"c": 1.0, "delta_star": 1.0, "C": 1.0, "delta_sup": 1.0, **exp.get("constants", {})}
    xi = exp.get("xi")
    mc_n = int(exp.get("mc_n", bounds.MIN_PAIR_DRAWS))
    method = exp.get("method", "auto")
    out = {"distance": spec.to_dict(), "checks": []}
    for t in exp.get("t", []):
        for kind in exp.get("checks", ["ineq_l2", "ineq_delta"]):
            if kind == "ineq_l2":
                res = bounds.check_ineq_l2(spec, f, g, xi, t, consts["c"], consts["delta_star"], method, mc_n, seed)
            elif kind == "ineq_delta":
                res = bounds.check_ineq_deltaK(spec, f, g, xi, t, consts["C"], consts["delta_sup"], method, mc_n, seed)
            else:
                raise UsageError(f"unknown check {kind!r}")
            out["checks"].append({"kind": kind, **res.to_dict()})
    if "rate" in exp:
        r = exp["rate"]
        fit = bounds.rate_experiment(spec, f, r["ladder"], r["alpha"], r["beta"], method, mc_n, seed)
        out["rate"] = fit.to_dict()
    return out


def cmd_bounds(args):
    exp = _experiment(args)
    write_report(args.out, run_experiment(exp, args.seed), _config(args))


def cmd_figures(args):
    out_dir = args.out if args.out not in (None, "-") else "figures"
    fig = figures.regenerate(args.which, args.resolution, out_dir)
    sys.stdout.write("".join(f"{p}\n" for p in fig.files))


# parser ---------------------------------------------------------------------------


def _global_flags(parser, suppress):
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=default(0), help="master seed")
    parser.add_argument("--threads", type=int, default=default(1), help="worker threads for Monte Carlo")
    parser.add_argument("--out", default=default("-"), help="output file (figures: directory); '-' is stdout")
    parser.add_argument("--config", default=default(None), help="JSON file of defaults or a previous report")


def build_parser():
    parser = _Parser(prog="interpoint", description="Generalized interpoint distances, ball volumes and bounds.")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        _global_flags(p, suppress=True)
        p.set_defaults(func=func)
        return p

    p = add("dist", cmd_dist, "sorted within/between-sample distances as CSV")
    p.add_argument("x", nargs="?", help="CSV of X points")
    p.add_argument("y", nargs="?", help="CSV of Y points")
    p.add_argument("--distance", default="l2")

    p = add("volume", cmd_volume, "ball volume table (exact, Monte Carlo, rectangle bounds)")
    p.add_argument("--distance", default="l2")
    p.add_argument("--center", help="comma-separated coordinates")
    p.add_argument("--t", default="0.1", help="comma-separated radii")
    p.add_argument("--mc-n", type=int, default=10**5)

    p = add("regularity", cmd_regularity, "volume-regularity verdict and Ahlfors exponent")
    p.add_argument("--distance", default="l2")
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--center", default=None)
    p.add_argument("--other", default=None)
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--n-grid", type=int, default=8)
    p.add_argument("--mc-n", type=int, default=2 * 10**5)
    p.add_argument("--method", choices=("auto", "exact", "mc"), default="auto")

    p = add("ecdf", cmd_ecdf, "interpoint ECDFs and running Kolmogorov discrepancy as CSV")
    p.add_argument("x", nargs="?")
    p.add_argument("y", nargs="?")
    p.add_argument("--distance", default="l2")
    p.add_argument("--grid-cap", type=int, default=empirics.GRID_CAP)

    p = add("test", cmd_test, "permutation two-sample test")
    p.add_argument("x", nargs="?")
    p.add_argument("y", nargs="?")
    p.add_argument("--distance", default="l2")
    p.add_argument("--kind", choices=("sup", "cvm"), default="sup")
    p.add_argument("-B", "--permutations", dest="B", type=int, default=199)

    p = add("bounds", cmd_bounds, "inequality checks and rate fits from an experiment JSON")
    p.add_argument("experiment", nargs="?")

    p = add("figures", cmd_figures, "regenerate figure rasters (SVG + CSV)")
    p.add_argument("which", nargs="?", choices=sorted(figures.BUILDERS))
    p.add_argument("--resolution", type=int, default=256)
    return parser


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    cfg = load_config(known.config)
    cfg.pop("command", None)
    parser.set_defaults(**{k: cfg[k] for k in ("seed", "threads") if k in cfg})
    subs = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for sp in subs.choices.values():
        dests = {a.dest for a in sp._actions} - {"config", "out", "help", "seed", "threads"}
        sp.set_defaults(**{k: v for k, v in cfg.items() if k in dests})


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (OSError, ValueError) as exc:
        print(f"interpoint: cannot read config: {exc}", file=sys.stderr)
        return EXIT_DATA
    for name in ("seed", "threads", "out"):
        if not hasattr(args, name):
            setattr(args, name, parser.get_default(name))
    if args.command == "figures" and args.which is None:
        print("interpoint: figures needs fig1 or fig2", file=sys.stderr)
        return EXIT_USAGE
    try:
        args.func(args)
    except UsageError as exc:
        print(f"interpoint: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InterpointError as exc:
        print(f"interpoint: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError, KeyError) as exc:
        print(f"interpoint: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK
