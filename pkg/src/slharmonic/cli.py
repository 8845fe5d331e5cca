"""Command-line entry point.

Exit status: 0 on success, 1 on invalid input, 2 when ``verify-paper`` sees a
verdict other than the one registered for a claim.
"""

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from .connections import ConnectionFn, beta_eval
from .darboux import ChartMap, harmonic_residual
from .errors import ToolkitError
from .geodesics import (
    GeodesicProblem,
    catalan_f,
    closed_form_nplus_oracle,
    closed_form_nplus_paper,
    compare_trajectories,
    integrate_geodesic,
    nplus_evaluator,
    symmetric_evaluator,
)
from .iwasawa import ChartPoint, decompose_KAN, to_chart
from .lie_algebra import check_reductivity
from .verify import run_verify_suite

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_DISCREPANT = 2


class UsageError(ToolkitError):
    pass


def _read_json(path):
    if path is None or path == "-":
        text, name = sys.stdin.read(), "<stdin>"
    else:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc.strerror}") from None
        name = path
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{name}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from None


def _emit(text, path):
    """Write ``text`` to ``path`` atomically, or to stdout."""
    if path is None or path == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _side_channel(obj, output):
    # summaries go to stdout unless stdout already carries the CSV
    stream = sys.stderr if output in (None, "-") else sys.stdout
    stream.write(_dump(obj))


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _matrix(obj, key=None):
    if key is not None:
        if not isinstance(obj, dict) or key not in obj:
            raise UsageError(f"input is missing {key!r}")
        obj = obj[key]
    try:
        return np.array(obj, dtype=float)
    except (TypeError, ValueError):
        raise UsageError(f"{key or 'matrix'}: expected a list of numeric rows") from None


def _connection(args):
    inner = "trace" if args.connection == "riemannian" else None
    return ConnectionFn(args.connection, args.m, inner)


def _check_n(args, n):
    if args.n is not None and args.n != n:
        raise UsageError(f"--n {args.n} does not match input dimension {n}")


def cmd_decompose(args):
    data = _read_json(args.input)
    g = _matrix(data["matrix"] if isinstance(data, dict) and "matrix" in data else data)
    f = decompose_KAN(g)
    _check_n(args, g.shape[0])
    out = f.to_dict()
    out["chart"] = to_chart(f).to_dict()
    _emit(_dump(out), args.output)
    return EXIT_OK


def cmd_beta(args):
    data = _read_json(args.input)
    X, Y = _matrix(data, "X"), _matrix(data, "Y")
    _check_n(args, X.shape[0] if X.ndim == 2 else 0)
    B = beta_eval(_connection(args), X, Y)
    _emit(_dump({"connection": args.connection, "m": args.m, "beta": B.tolist()}), args.output)
    return EXIT_OK


def cmd_harmonic(args):
    F = ChartMap.from_dict(_read_json(args.input))
    _check_n(args, F.n)
    r = harmonic_residual(F, _connection(args), args.convention, args.sign)
    summary = r.summary()
    summary.update(connection=args.connection, convention=args.convention, sign=args.sign)
    if args.format == "csv":
        _emit(r.to_csv(), args.output)
        _side_channel(summary, args.output)
    else:
        _emit(_dump(summary), args.output)
    return EXIT_OK


def cmd_geodesic(args):
    data = _read_json(args.input)
    v0 = _matrix(data, "v0")
    if v0.ndim != 2:
        raise UsageError("v0: expected a square matrix")
    n = v0.shape[0]
    _check_n(args, n)
    p0 = ChartPoint.from_dict(data["p0"]) if "p0" in data else ChartPoint.identity(n)
    prob = GeodesicProblem(
        _connection(args), p0, v0, args.horizon, args.steps, args.convention, args.sign
    )
    comparison = None
    if args.compare != "none":
        if args.compare == "symmetric":
            ev = symmetric_evaluator(prob.v0)
        elif args.compare == "nplus-oracle":
            ev = nplus_evaluator(closed_form_nplus_oracle, prob.v0, sign=prob.sign)
        else:
            ev = nplus_evaluator(closed_form_nplus_paper, prob.v0)
    traj = integrate_geodesic(prob)
    if args.compare != "none":
        comparison = compare_trajectories(traj, ev)
    if args.format == "csv":
        _emit(traj.to_csv(), args.output)
        side = {"blow_up": traj.blow_up, "t_end": float(traj.times[-1])}
        if comparison is not None:
            side["comparison"] = comparison.to_dict()
        _side_channel(side, args.output)
    else:
        out = traj.to_dict()
        if comparison is not None:
            out["comparison"] = comparison.to_dict()
        _emit(_dump(out), args.output)
    return EXIT_OK


def cmd_catalan(args):
    if args.max < 1:
        raise UsageError("--max must be >= 1")
    rows = [f"{j}\t{catalan_f(j)}" for j in range(1, args.max + 1)]
    _emit("\n".join(rows) + "\n", args.output)
    return EXIT_OK


def cmd_check_reductivity(args):
    rep = check_reductivity(args.m, args.samples, args.seed, n=args.n or 3)
    _emit(rep.to_json() + "\n", args.output)
    return EXIT_OK


def cmd_verify(args):
    rep = run_verify_suite(args.seed)
    _emit(rep.to_json(), args.output)
    for rec in rep.records:
        mark = "ok " if rec["verdict"] == rec["expected_verdict"] else "!! "
        sys.stderr.write(f"{mark}{rec['claim_id']}: {rec['verdict']}\n")
    return EXIT_DISCREPANT if rep.unexpected else EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=None)
    common.add_argument(
        "--connection",
        choices=["canonical1", "canonical2", "riemannian", "alpha"],
        default="alpha",
    )
    common.add_argument("--m", choices=["iwasawa", "cartan"], default="iwasawa")
    common.add_argument("--convention", choices=["chart", "log"], default="chart")
    common.add_argument("--sign", choices=["lemma", "example"], default="lemma")
    common.add_argument("--steps", type=int, default=1000)
    common.add_argument("--horizon", type=float, default=1.0)
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--input", default=None, help="input file (default stdin)")
    common.add_argument("--output", default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=["json", "csv"], default=None)

    parser = argparse.ArgumentParser(prog="slharmonic", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("decompose", parents=[common], help="Iwasawa KAN factors of a matrix").set_defaults(
        func=cmd_decompose, fmt="json")
    sub.add_parser("beta", parents=[common], help="evaluate a connection function").set_defaults(
        func=cmd_beta, fmt="json")
    sub.add_parser("harmonic", parents=[common], help="harmonicity residual of a ChartMap").set_defaults(
        func=cmd_harmonic, fmt="csv")
    p = sub.add_parser("geodesic", parents=[common], help="integrate a geodesic")
    p.add_argument("--compare", choices=["none", "symmetric", "nplus-oracle", "nplus-paper"], default="none")
    p.set_defaults(func=cmd_geodesic, fmt="csv")
    p = sub.add_parser("catalan", parents=[common], help="table of the recurrence f")
    p.add_argument("--max", type=int, default=10)
    p.set_defaults(func=cmd_catalan, fmt="csv")
    p = sub.add_parser("check-reductivity", parents=[common], help="sampled Ad(SO(n)) stability of m")
    p.add_argument("--samples", type=int, default=100)
    p.set_defaults(func=cmd_check_reductivity, fmt="json")
    sub.add_parser("verify-paper", parents=[common], help="run the claim registry").set_defaults(
        func=cmd_verify, fmt="json")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = args.fmt
    if args.convention == "log":
        args.convention = "logarithmic"
    if args.format == "csv" and args.fmt == "json":
        sys.stderr.write(f"error: {args.command} only writes JSON\n")
        return EXIT_INVALID
    try:
        return args.func(args)
    except (ToolkitError, OverflowError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
