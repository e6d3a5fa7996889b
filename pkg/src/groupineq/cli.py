"""Command-line front end.

Every subcommand writes CSV (or JSON for ``fit``) to standard output or
``--out``.  Exit status is 0 on success, 2 on usage errors and 1 on data or
numerical errors.
"""

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .density_fit import GLD, LI, fit, model_from_dict
from .distributions import RefDistribution, true_measures
from .errors import InequalityError
from .grouped import BINS_CSV, PERCENTILE_TABLE, read_grouped
from .intervals import (BOOTSTRAP, DEFAULT_B, DEFAULT_LEVEL, MEASURES, WALD,
                        bootstrap_ci, diff_ci, point_estimates, wald_qri_ci)
from .measures import DEFAULT_EPSILON, DEFAULT_J
from .sim import (CENTERED_FIELDS, COVERAGE_FIELDS, DESK_B, DESK_REPS, SimConfig,
                  centered_estimates, run_coverage)


class StageError(Exception):
    def __init__(self, stage, exc):
        super().__init__(f"{stage}: {exc}")
        self.stage = stage


def _csv_list(text):
    return [t.strip().lower() for t in text.split(",") if t.strip()]


def _measure_list(text):
    ms = _csv_list(text)
    bad = [m for m in ms if m not in MEASURES]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown measure(s): {', '.join(bad)}")
    return ms


def _ci_list(text):
    ms = _csv_list(text)
    bad = [m for m in ms if m not in (BOOTSTRAP, WALD)]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown interval method(s): {', '.join(bad)}")
    return ms


def _dist(text):
    try:
        return RefDistribution.from_spec(text)
    except InequalityError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _common(p):
    p.add_argument("--out", help="write output to this file instead of stdout")
    p.add_argument("--pretty", action="store_true", help="human-readable table")


def _data_args(p, suffixes=("",)):
    for s in suffixes:
        p.add_argument(f"--input{s}", metavar="PATH", help="grouped data CSV")
    p.add_argument("--format", default=BINS_CSV, choices=[BINS_CSV, PERCENTILE_TABLE],
                   help="input layout (default: bins)")
    p.add_argument("--top", "--top-value", dest="top", type=float, default=None,
                   help="finite upper bound for the last bin")
    p.add_argument("--lower-bound", type=float, default=0.0,
                   help="lowest income boundary for percentile tables (default 0)")
    p.add_argument("--total-n", type=int, default=None,
                   help="total sample size behind a percentile table")
    p.add_argument("--method", choices=[GLD, LI], default=None,
                   help="density reconstruction method")
    p.add_argument("--bounded-last", action="store_true",
                   help="LI: fit a linear density on a bounded last bin instead of the tail")


def _interval_args(p):
    p.add_argument("--ci", type=_ci_list, default=[BOOTSTRAP, WALD],
                   help="comma list of bootstrap,wald (default both)")
    p.add_argument("--measures", type=_measure_list, default=list(MEASURES),
                   help="comma list of gini,theil,atkinson,qri")
    p.add_argument("--level", type=float, default=DEFAULT_LEVEL)
    p.add_argument("--B", type=int, default=DEFAULT_B, help="bootstrap replicates")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--J", type=int, default=DEFAULT_J)
    p.add_argument("--threads", type=int, default=0, help="worker threads (0: all cores)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="groupineq",
        description="Inequality measures and confidence intervals from grouped income data.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    p = sub.add_parser("true-values", help="population measures of a reference distribution")
    p.add_argument("--dist", type=_dist, action="append", required=True,
                   help="family:param1,param2,... (repeatable)")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--J", type=int, default=DEFAULT_J)
    p.add_argument("--digits", type=int, default=3)
    _common(p)

    p = sub.add_parser("fit", help="fit a density to grouped data, emit model JSON")
    _data_args(p)
    _common(p)

    p = sub.add_parser("estimate", help="plug-in point estimates")
    _data_args(p)
    p.add_argument("--model", metavar="PATH", help="fitted model JSON from `fit`")
    p.add_argument("--measures", type=_measure_list, default=list(MEASURES))
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--J", type=int, default=DEFAULT_J)
    _common(p)

    p = sub.add_parser("interval", help="bootstrap and Wald confidence intervals")
    _data_args(p)
    p.add_argument("--model", metavar="PATH", help="fitted model JSON from `fit`")
    p.add_argument("--n", type=int, default=None,
                   help="bootstrap/Wald sample size (default: grouped total)")
    _interval_args(p)
    _common(p)

    p = sub.add_parser("compare", help="intervals for two samples and their difference")
    _data_args(p, ("1", "2"))
    p.add_argument("--n1", type=int, default=None)
    p.add_argument("--n2", type=int, default=None)
    _interval_args(p)
    _common(p)

    p = sub.add_parser("simulate", help="Monte-Carlo coverage study")
    p.add_argument("--mode", choices=["coverage", "centered"], default="coverage")
    p.add_argument("--dist", type=_dist, default=None, help="family:params (coverage mode)")
    p.add_argument("--n", type=int, default=None, help="sample size (centered default 250)")
    p.add_argument("--scheme", choices=["quintiles", "deciles"], default="quintiles")
    p.add_argument("--fit", choices=[GLD, LI], default=LI)
    p.add_argument("--reps", type=int, default=DESK_REPS)
    p.add_argument("--B", type=int, default=DESK_B)
    p.add_argument("--level", type=float, default=DEFAULT_LEVEL)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--measures", type=_measure_list, default=list(MEASURES))
    p.add_argument("--sigmas", default="0.5,1,1.5,2",
                   help="lognormal sigmas for centered mode")
    p.add_argument("--threads", type=int, default=0, help="worker processes (0: all cores)")
    _common(p)
    return parser


def _format(v):
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    if v is None:
        return ""
    if isinstance(v, tuple):
        return ":".join(str(x) for x in v)
    return str(v)


def _emit(args, fields, rows):
    rows = list(rows)
    out = io.StringIO()
    if args.pretty:
        table = [list(fields)] + [
            [f"{r[f]:.4f}" if isinstance(r[f], float) else _format(r[f]) for f in fields]
            for r in rows]
        widths = [max(len(row[i]) for row in table) for i in range(len(fields))]
        for row in table:
            out.write("  ".join(c.rjust(w) for c, w in zip(row, widths)) + "\n")
    else:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(fields)
        for r in rows:
            w.writerow([_format(r[f]) for f in fields])
    _write(args, out.getvalue())


def _write(args, text):
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _seed(args):
    if args.seed is None:
        args.seed = int(np.random.SeedSequence().entropy % 2 ** 63)
        print(f"seed: {args.seed}", file=sys.stderr)
    return args.seed


def _load(parser, args, path, total_n=None):
    if args.format == PERCENTILE_TABLE and total_n is None:
        parser.error("--total-n is required for --format percentile-table")
    kw = {"format": args.format, "label": path}
    if args.format == PERCENTILE_TABLE:
        kw.update(lower_bound=args.lower_bound, total_n=total_n,
                  top_value=math.inf if args.top is None else args.top)
    try:
        g = read_grouped(path, **kw)
    except (InequalityError, OSError) as exc:
        raise StageError("read", exc) from exc
    if args.top is not None and args.format == BINS_CSV and g.unbounded:
        try:
            g = g.with_top(args.top)
        except InequalityError as exc:
            raise StageError("read", exc) from exc
    if args.method == LI and not g.has_means:
        parser.error(f"--method li needs bin means, which {path} does not provide")
    return g


def _fit(g, args):
    try:
        return fit(g, args.method, args.bounded_last)
    except InequalityError as exc:
        raise StageError("fit", exc) from exc


def _model_and_n(parser, args):
    """Fitted model plus grouped total, from --model or --input."""
    if getattr(args, "model", None):
        try:
            with open(args.model, encoding="utf-8") as fh:
                doc = json.load(fh)
            return model_from_dict(doc), doc.get("n")
        except (OSError, ValueError, KeyError, InequalityError) as exc:
            raise StageError("read", exc) from exc
    if not args.input:
        parser.error("one of --input or --model is required")
    if args.method is None:
        parser.error("--method is required with --input")
    g = _load(parser, args, args.input, args.total_n)
    return _fit(g, args), g.n


def cmd_true_values(parser, args):
    rows = []
    for d in args.dist:
        try:
            t = true_measures(d, args.epsilon, args.J)
        except InequalityError as exc:
            raise StageError("quadrature", exc) from exc
        row = {"dist": d.to_spec(), "epsilon": args.epsilon, "J": args.J}
        row.update({k: f"{v:.{args.digits}f}" for k, v in t.as_dict().items()})
        rows.append(row)
    _emit(args, ("dist", "epsilon", "J", "gini", "theil", "atkinson", "qri"), rows)


def cmd_fit(parser, args):
    if not args.input:
        parser.error("--input is required")
    if args.method is None:
        parser.error("--method is required")
    g = _load(parser, args, args.input, args.total_n)
    doc = _fit(g, args).to_dict()
    doc["n"] = g.n
    doc["label"] = args.input
    _write(args, json.dumps(doc, indent=2) + "\n")


def cmd_estimate(parser, args):
    e, n = _model_and_n(parser, args)
    try:
        pe = point_estimates(e, args.measures, args.epsilon, args.J)
    except InequalityError as exc:
        raise StageError("estimate", exc) from exc
    rows = [{"fit": e.method, "n": n, "measure": m, "point": v, "epsilon": args.epsilon,
             "J": args.J} for m, v in pe.items()]
    _emit(args, ("fit", "n", "measure", "point", "epsilon", "J"), rows)


INTERVAL_FIELDS = ("group", "fit", "n", "measure", "method", "point", "lower", "upper",
                   "level", "B", "seed")


def _intervals(e, n, args, seed):
    out = []
    try:
        if BOOTSTRAP in args.ci:
            out += bootstrap_ci(e, n, args.B, args.level, args.measures, seed,
                                args.epsilon, args.J, args.threads)
        if WALD in args.ci and "qri" in args.measures:
            out.append(wald_qri_ci(e, n, args.level, args.J))
    except InequalityError as exc:
        raise StageError("interval", exc) from exc
    return out


def _rows(group, e, n, results):
    for r in results:
        row = r.as_row()
        row.update(group=group, fit=e.method, n=n)
        if r.method == WALD:
            row["B"] = row["seed"] = None
        yield row


def cmd_interval(parser, args):
    e, n = _model_and_n(parser, args)
    n = args.n or n
    if not n:
        parser.error("--n is required when the model does not record a sample size")
    seed = _seed(args) if BOOTSTRAP in args.ci else args.seed
    _emit(args, INTERVAL_FIELDS, _rows("1", e, n, _intervals(e, n, args, seed)))


def cmd_compare(parser, args):
    if not (args.input1 and args.input2):
        parser.error("--input1 and --input2 are required")
    if args.method is None:
        parser.error("--method is required")
    fits = []
    for path, n in ((args.input1, args.n1), (args.input2, args.n2)):
        g = _load(parser, args, path, args.total_n)
        fits.append((_fit(g, args), n or g.n))
    (e1, n1), (e2, n2) = fits
    seed = _seed(args) if BOOTSTRAP in args.ci else args.seed
    rows = list(_rows("1", e1, n1, _intervals(e1, n1, args, seed)))
    rows += list(_rows("2", e2, n2, _intervals(e2, n2, args, seed)))
    diffs = []
    try:
        if BOOTSTRAP in args.ci:
            diffs += diff_ci(e1, n1, e2, n2, BOOTSTRAP, args.level, args.B, seed,
                             args.measures, args.epsilon, args.J, args.threads)
        if WALD in args.ci and "qri" in args.measures:
            diffs += diff_ci(e1, n1, e2, n2, WALD, args.level, J=args.J)
    except InequalityError as exc:
        raise StageError("interval", exc) from exc
    for row in _rows("difference", e1, f"{n1}:{n2}", diffs):
        rows.append(row)
    _emit(args, INTERVAL_FIELDS, rows)


def cmd_simulate(parser, args):
    seed = _seed(args)
    if args.mode == "centered":
        try:
            sigmas = [float(s) for s in _csv_list(args.sigmas)]
        except ValueError:
            parser.error(f"malformed --sigmas {args.sigmas!r}")
        rows = centered_estimates(sigmas, args.n or 250, args.reps, args.fit, seed,
                                  args.scheme)
        _emit(args, CENTERED_FIELDS, rows)
        return
    if args.dist is None or args.n is None:
        parser.error("--dist and --n are required in coverage mode")
    try:
        c = SimConfig(args.dist, args.n, args.scheme, args.fit, args.reps, args.B,
                      args.level, seed, tuple(args.measures))
    except InequalityError as exc:
        parser.error(str(exc))
    try:
        row = run_coverage(c, workers=args.threads)
    except InequalityError as exc:
        raise StageError("simulate", exc) from exc
    _emit(args, COVERAGE_FIELDS, row.rows())


COMMANDS = {
    "true-values": cmd_true_values,
    "fit": cmd_fit,
    "estimate": cmd_estimate,
    "interval": cmd_interval,
    "compare": cmd_compare,
    "simulate": cmd_simulate,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    try:
        COMMANDS[args.command](sub, args)
    except StageError as exc:
        print(f"error [{exc}]", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
