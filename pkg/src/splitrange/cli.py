"""Command-line front end.

Exit codes: 0 when every check passes, 1 when any check fails, 2 on a
usage error or an unparseable operator spec.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys

import numpy as np

from .cloud import Box, PointCloud
from .errors import DimensionMismatchError, SplitRangeError, SpecError
from .experiments import SCHEMA_VERSION, list_experiments, resolve_params, run_experiment
from .geometry import near_equal
from .ranges import (build_pair_sets, estimate_displacement_vector, sample_T_range,
                     sample_displacement_range, solve_perturbed)
from .splitting import OperatorPair

VECTOR_OPTIONS = ("--w", "--window", "--x0")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _vector(text, name):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise SpecError(f"expected comma-separated numbers, got {text!r}", field=name) from None
    if not vals or not all(np.isfinite(vals)):
        raise SpecError(f"expected finite comma-separated numbers, got {text!r}", field=name)
    return np.array(vals)


def _window(text, dim):
    vals = _vector(text, "window")
    if len(vals) != 2:
        raise SpecError("window must be 'lo,hi'", field="window")
    lo, hi = vals
    if not lo < hi:
        raise SpecError("window needs lo < hi", field="window")
    return Box(np.full(dim, lo), np.full(dim, hi))


def _load_pair(path):
    try:
        with open(path) as fh:
            spec = json.load(fh)
    except OSError as exc:
        raise SpecError(f"cannot read pair file: {exc.strerror}", field="pair") from None
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON in pair file: {exc.msg} (line {exc.lineno})",
                        field="pair") from None
    return OperatorPair.from_spec(spec)


def _envelope(args, payload):
    out = {"schema_version": SCHEMA_VERSION}
    if not args.no_timestamp:
        out["generated_at"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    out.update(payload)
    return out


def _emit(args, payload, filename):
    text = json.dumps(_envelope(args, payload), indent=2, sort_keys=True)
    print(text)
    if args.output_dir:
        os.makedirs(args.output_dir, exist_ok=True)
        with open(os.path.join(args.output_dir, filename), "w") as fh:
            fh.write(text + "\n")


def _output_dir(args):
    return args.output_dir or os.environ.get("SPLITRANGE_OUT") or None


def cmd_experiment(args):
    if args.all == bool(args.name):
        raise UsageError("experiment: give exactly one of NAME or --all")
    params = {}
    for item in args.param:
        if "=" not in item:
            raise SpecError(f"--param expects key=value, got {item!r}", field="param")
        k, v = item.split("=", 1)
        params[k.strip()] = v
    names = list_experiments() if args.all else [args.name]
    if args.all and params:
        raise UsageError("experiment: --param cannot be combined with --all")
    for n in names:
        resolve_params(n, params)
    reports = [run_experiment(n, params, seed=args.seed, output_dir=args.output_dir)
               for n in names]
    keep_time = not args.no_timestamp
    if args.output_dir:
        for r in reports:
            with open(os.path.join(args.output_dir, f"{r.name}.json"), "w") as fh:
                fh.write(r.to_json(include_runtime=keep_time) + "\n")
    if args.all and args.format != "json":
        width = max(len(n) for n in names)
        print(f"{'experiment':<{width}}  result  checks  runtime_ms")
        for r in reports:
            ok = sum(c.passed for c in r.checks)
            rt = r.runtime_ms if keep_time else "-"
            print(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL':6}  "
                  f"{ok:>3}/{len(r.checks):<3} {rt:>10}")
        print(f"overall: {'PASS' if all(r.passed for r in reports) else 'FAIL'}")
    elif args.all:
        payload = {"reports": [r.to_dict(keep_time) for r in reports],
                   "pass": all(r.passed for r in reports)}
        print(json.dumps(_envelope(args, payload), indent=2, sort_keys=True))
    else:
        payload = reports[0].to_dict(keep_time)
        payload.pop("schema_version")
        print(json.dumps(_envelope(args, payload), indent=2, sort_keys=True))
    return 0 if all(r.passed for r in reports) else 1


def cmd_range(args):
    pair = _load_pair(args.pair)
    rng = np.random.default_rng(args.seed)
    window = _window(args.window, pair.dim)
    inputs = window.scaled(args.input_scale).uniform(args.samples, rng)
    sampler = sample_displacement_range if args.of == "displacement" else sample_T_range
    cloud = sampler(pair, inputs)
    which = "DR" if args.of == "displacement" else "DR_dual"
    report = None
    try:
        target = build_pair_sets(pair, args.samples, window).sample(which, rng)
        report = near_equal(cloud, target, tol=args.set_tol, window=window, seed=args.seed)
    except SplitRangeError as exc:
        note = f"predicted set not sampled: {exc}"
    else:
        note = None
    if args.output_dir:
        os.makedirs(args.output_dir, exist_ok=True)
        cloud.to_csv(os.path.join(args.output_dir, f"range_{args.of}.csv"))
    if args.format == "csv":
        sys.stdout.write(",".join(f"x{i}" for i in range(cloud.dim)) + "\n")
        for row in cloud.points:
            sys.stdout.write(",".join(repr(float(v)) for v in row) + "\n")
        return 0 if report is None or report.verdict else 1
    payload = {"command": "range", "of": args.of, "count": len(cloud),
               "points": cloud.points.tolist(),
               "near_equality": None if report is None else report.to_dict()}
    if note:
        payload["note"] = note
    _emit(args, payload, f"range_{args.of}.json")
    return 0 if report is None or report.verdict else 1


def cmd_displacement(args):
    pair = _load_pair(args.pair)
    x0 = None if args.x0 is None else _vector(args.x0, "x0")
    est = estimate_displacement_vector(pair, x0=x0, max_iter=args.max_iter, tol=args.tol)
    # a flagged estimate means slow convergence, which the payload reports
    _emit(args, {"command": "displacement", **est.to_dict()}, "displacement.json")
    return 0


def cmd_perturbed(args):
    pair = _load_pair(args.pair)
    w = _vector(args.w, "w")
    if w.shape[0] != pair.dim:
        raise SpecError(f"w has {w.shape[0]} entries, the pair acts on R^{pair.dim}", field="w")
    x0 = None if args.x0 is None else _vector(args.x0, "x0")
    verdict = solve_perturbed(pair, w, x0=x0, tol=args.tol, max_iter=args.max_iter)
    payload = {"command": "perturbed", "w": w.tolist(), **verdict.to_dict(),
               "iterations": verdict.iterations}
    _emit(args, payload, "perturbed.json")
    if args.expect and args.expect != verdict.status:
        return 1
    return 0


def cmd_compare(args):
    try:
        a = PointCloud.from_csv(args.cloud_a)
        b = PointCloud.from_csv(args.cloud_b)
    except OSError as exc:
        raise SpecError(f"cannot read cloud: {exc.strerror}", field="cloud") from None
    except ValueError as exc:
        raise SpecError(f"malformed cloud CSV: {exc}", field="cloud") from None
    window = _window(args.window, a.dim)
    rep = near_equal(a, b, tol=args.set_tol, n_directions=args.directions, window=window,
                     seed=args.seed)
    if args.output_dir:
        os.makedirs(args.output_dir, exist_ok=True)
        rep.export_support_csv(os.path.join(args.output_dir, "support_gap.csv"))
    _emit(args, {"command": "compare", **rep.to_dict()}, "compare.json")
    return 0 if rep.verdict else 1


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for all randomness")
    common.add_argument("--output-dir", default=None,
                        help="directory for exported files (env SPLITRANGE_OUT)")
    common.add_argument("--format", choices=("json", "csv"), default=None,
                        help="json (default) or csv; experiment --all prints a table unless json")
    common.add_argument("--no-timestamp", action="store_true",
                        help="omit timestamps and runtimes so output is reproducible")
    common.add_argument("--window", default="-10,10", help="comparison window 'lo,hi'")
    common.add_argument("--samples", type=int, default=1000)

    parser = _Parser(prog="splitrange",
                     description="Douglas-Rachford range sampling and experiment runner.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("experiment", parents=[common], help="run registered experiments")
    p.add_argument("name", nargs="?", choices=list_experiments(), default=None,
                   metavar="NAME")
    p.add_argument("--all", action="store_true")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("range", parents=[common], help="sample ran(Id - T) or ran T")
    p.add_argument("--pair", required=True)
    p.add_argument("--of", choices=("displacement", "T"), default="displacement")
    p.add_argument("--input-scale", type=float, default=5.0,
                   help="inputs are drawn from the window scaled by this factor")
    p.add_argument("--set-tol", type=float, default=0.05)
    p.set_defaults(func=cmd_range)

    p = sub.add_parser("displacement", parents=[common], help="estimate v_(A,B)")
    p.add_argument("--pair", required=True)
    p.add_argument("--x0", default=None)
    p.add_argument("--max-iter", type=int, default=10000)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_displacement)

    p = sub.add_parser("perturbed", parents=[common], help="decide whether Z_w is nonempty")
    p.add_argument("--pair", required=True)
    p.add_argument("--w", required=True)
    p.add_argument("--x0", default=None)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=100000)
    p.add_argument("--expect", choices=("SOLVED", "UNSOLVED", "INCONCLUSIVE"), default=None)
    p.set_defaults(func=cmd_perturbed)

    p = sub.add_parser("compare", parents=[common], help="near equality of two CSV clouds")
    p.add_argument("--cloud-a", required=True)
    p.add_argument("--cloud-b", required=True)
    p.add_argument("--set-tol", type=float, default=0.05)
    p.add_argument("--directions", type=int, default=None)
    p.set_defaults(func=cmd_compare)
    return parser


def _join_vector_options(argv):
    """Turn ``--w -3,2`` into ``--w=-3,2`` so negative vectors are not read as flags."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in VECTOR_OPTIONS and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_join_vector_options(argv))
        if args.command is None:
            raise UsageError("a subcommand is required: " + ", ".join(
                ("experiment", "range", "displacement", "perturbed", "compare")))
        if args.samples < 1:
            raise SpecError("samples must be at least 1", field="samples")
        args.output_dir = _output_dir(args)
        code = args.func(args)
        sys.stdout.flush()
        return code
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SpecError, DimensionMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SplitRangeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BrokenPipeError:
        # downstream closed the pipe (e.g. `| head`); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0
