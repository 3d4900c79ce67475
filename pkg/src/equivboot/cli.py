"""Command-line front end.

    equivboot test      run one equivalence test on observed counts
    equivboot simulate  estimate rejection rates over a scenario grid (CSV)
    equivboot limit     quantile of the limit law d'_{p-q}(Z)
    equivboot plot      draw rejection-rate curves from a simulate CSV

Invalid input exits with status 2 and one line on standard error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import covariance_sigma, limit_quantile
from .bootstrap import equivalence_test
from .config import TestConfig
from .errors import EquivbootError
from .norms import active_sets, norm_eval
from .plotting import render_figure, render_svg
from .sampling import RngStream, parse_seed
from .simplex import CountVector, NormKind, validate_prob
from .simulation import BUILTIN, DEFAULT_NORM, Scenario, SweepResult, default_deltas, sweep


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _floats(text: str) -> list[float]:
    parts = [t for t in text.replace(" ", "").split(",") if t]
    if not parts:
        raise argparse.ArgumentTypeError("expected a comma-separated list of numbers")
    try:
        values = [float(t) for t in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from None
    if not all(math.isfinite(v) for v in values):
        raise argparse.ArgumentTypeError(f"non-finite value in {text!r}")
    return values


def _counts(text: str) -> list[int]:
    parts = [t for t in text.replace(" ", "").split(",") if t]
    if not parts or not all(t.isdigit() for t in parts):
        raise argparse.ArgumentTypeError(f"counts must be nonnegative integers: {text!r}")
    return [int(t) for t in parts]


def _ints(text: str) -> list[int]:
    parts = [t for t in text.replace(" ", "").split(",") if t]
    if not parts or not all(t.isdigit() and int(t) > 0 for t in parts):
        raise argparse.ArgumentTypeError(f"expected positive integers: {text!r}")
    return [int(t) for t in parts]


def _seed(text: str) -> int:
    try:
        return parse_seed(text)
    except EquivbootError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _norm(text: str) -> NormKind:
    try:
        return NormKind.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(text: str) -> int:
    if not text.isdigit() or int(text) < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return int(text)


def _add_test_flags(p: argparse.ArgumentParser, norm_required: bool, epsilon_default=None):
    p.add_argument("--norm", type=_norm, required=norm_required, help="l1, linf or l2")
    p.add_argument("--epsilon", type=float, required=epsilon_default is None, default=epsilon_default,
                   help="equivalence margin")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--bootstrap", type=_positive_int, default=500, metavar="B")
    p.add_argument("--seed", type=_seed, default=0, metavar="U64")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="equivboot", description="Constrained bootstrap equivalence test for two multinomials.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("test", help="test H0: ||p - q|| >= eps on observed counts")
    t.add_argument("--x", type=_counts, help="counts of the first sample, e.g. 3,7,0")
    t.add_argument("--y", type=_counts, help="counts of the second sample")
    t.add_argument("--input", type=Path, help="JSON file with fields x and y")
    _add_test_flags(t, norm_required=True)
    fmt = t.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="compact JSON (default)")
    fmt.add_argument("--pretty", action="store_true", help="indented JSON")

    s = sub.add_parser("simulate", help="rejection rates over a grid of scenarios")
    s.add_argument("--scenario", choices=BUILTIN)
    s.add_argument("--p", type=_floats, help="custom first probability vector")
    s.add_argument("--q", type=_floats, help="custom second probability vector")
    s.add_argument("--deltas", type=str, help="comma-separated delta grid (default: nine points around the boundary)")
    s.add_argument("--n", type=_ints, default=[100, 250, 500, 1000], help="sample sizes n1 (comma-separated)")
    s.add_argument("--ratio", type=float, default=1.0, help="n2 / n1 (default 1)")
    s.add_argument("--reps", type=_positive_int, default=1000)
    _add_test_flags(s, norm_required=False, epsilon_default=0.25)
    s.add_argument("--out", type=Path, help="CSV path (default: standard output)")
    s.add_argument("--figure", type=Path, help="also render the curves with matplotlib to this file")

    lim = sub.add_parser("limit", help="quantile of the limit law of the statistic")
    lim.add_argument("--p", type=_floats, required=True)
    lim.add_argument("--q", type=_floats, required=True)
    lim.add_argument("--norm", type=_norm, required=True)
    lim.add_argument("--alpha", type=float, default=0.05)
    lim.add_argument("--draws", type=_positive_int, default=100_000, metavar="M")
    lim.add_argument("--lambda1", type=float, default=0.5, help="n1 / (n1 + n2)")
    lim.add_argument("--seed", type=_seed, default=0, metavar="U64")

    pl = sub.add_parser("plot", help="draw rejection-rate curves from a simulate CSV")
    pl.add_argument("--in", dest="input", type=Path, required=True)
    pl.add_argument("--out", type=Path, required=True, help=".svg, .png or .pdf")
    return parser


def _emit(text: str, path: Path | None):
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text, encoding="utf-8", newline="\n")


def cmd_test(args) -> int:
    if args.input is not None:
        if args.x is not None or args.y is not None:
            raise UsageError("equivboot test: error: use either --input or --x/--y, not both")
        try:
            data = json.loads(args.input.read_text(encoding="utf-8"))
            xs, ys = data["x"], data["y"]
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise UsageError(f"equivboot test: error: cannot read x and y from {args.input}: {exc}") from None
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in [*xs, *ys]):
            raise UsageError("equivboot test: error: counts must be nonnegative integers")
    else:
        if args.x is None or args.y is None:
            raise UsageError("equivboot test: error: --x and --y (or --input) are required")
        xs, ys = args.x, args.y
    x, y = CountVector(np.array(xs, dtype=np.int64)), CountVector(np.array(ys, dtype=np.int64))
    if x.k != y.k:
        raise EquivbootError(f"--x has {x.k} classes but --y has {y.k}")
    config = TestConfig(args.norm, args.epsilon, args.alpha, args.bootstrap, args.seed)
    report = equivalence_test(x, y, config)
    indent = 2 if args.pretty else None
    sep = None if args.pretty else (",", ":")
    sys.stdout.write(json.dumps(report.to_dict(), indent=indent, separators=sep) + "\n")
    return 0


def cmd_simulate(args) -> int:
    if args.scenario and (args.p or args.q):
        raise UsageError("equivboot simulate: error: use either --scenario or --p/--q")
    if args.deltas is not None:
        try:
            deltas = _floats(args.deltas)
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"equivboot simulate: error: argument --deltas: {exc}") from None
    else:
        deltas = None
    if args.scenario:
        norm = args.norm or DEFAULT_NORM[args.scenario]
        deltas = deltas if deltas is not None else default_deltas(args.scenario, args.epsilon)
        scenarios = [Scenario.builtin(args.scenario, d) for d in deltas]
    elif args.p and args.q:
        if args.norm is None:
            raise UsageError("equivboot simulate: error: --norm is required with --p/--q")
        norm = args.norm
        scenarios = [Scenario.custom(args.p, args.q)]
    else:
        raise UsageError("equivboot simulate: error: give --scenario or both --p and --q")
    if not args.ratio > 0:
        raise UsageError("equivboot simulate: error: --ratio must be positive")
    sizes = [(n, max(1, round(n * args.ratio))) for n in args.n]
    config = TestConfig(norm, args.epsilon, args.alpha, args.bootstrap, args.seed)
    result = sweep(scenarios, sizes, args.reps, config, RngStream(args.seed))
    _emit(result.to_csv(), args.out)
    if args.figure is not None:
        render_figure(result, args.figure)
    return 0


def cmd_limit(args) -> int:
    p, q = validate_prob(args.p), validate_prob(args.q)
    if p.k != q.k:
        raise EquivbootError(f"--p has {p.k} entries but --q has {q.k}")
    if not 0 < args.alpha < 1:
        raise EquivbootError("--alpha must lie in (0, 1)")
    if not 0 < args.lambda1 < 1:
        raise EquivbootError("--lambda1 must lie in (0, 1)")
    if args.draws < 10 / args.alpha:
        raise EquivbootError(f"--draws must be at least 10/alpha = {math.ceil(10 / args.alpha)}")
    theta = p.entries - q.entries
    sigma = covariance_sigma(p.entries, q.entries, args.lambda1, 1.0 - args.lambda1)
    stream = RngStream(args.seed).derive("limit", 0)
    qa = limit_quantile(args.norm, theta, sigma, args.alpha, args.draws, stream)
    out = {
        "q_alpha": qa,
        "draws": args.draws,
        "theta_norm": norm_eval(args.norm, theta),
        "fully_differentiable": active_sets(args.norm, theta).fully_differentiable,
        "norm": str(args.norm),
        "alpha": args.alpha,
        "lambda1": args.lambda1,
        "seed": args.seed,
    }
    sys.stdout.write(json.dumps(out, separators=(",", ":")) + "\n")
    return 0


def cmd_plot(args) -> int:
    try:
        text = args.input.read_text(encoding="utf-8")
    except OSError as exc:
        raise EquivbootError(f"cannot read {args.input}: {exc.strerror}") from None
    result = SweepResult.from_csv(text)
    if not result.rows:
        raise EquivbootError(f"{args.input} has no data rows")
    if args.out.suffix.lower() == ".svg":
        args.out.write_text(render_svg(result), encoding="utf-8", newline="\n")
    else:
        render_figure(result, args.out)
    return 0


COMMANDS = {"test": cmd_test, "simulate": cmd_simulate, "limit": cmd_limit, "plot": cmd_plot}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(str(exc).splitlines()[0], file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        # EquivbootError is a ValueError; unreadable or unwritable paths land here too
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"equivboot: error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
