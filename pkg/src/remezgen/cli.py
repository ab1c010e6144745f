"""Command-line front end.

Exit codes: 0 success, 1 unreadable or malformed input, 2 solver did not
converge, 3 degeneracy abort, 4 any other solver failure.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .applications import (
    SpectrumSpec,
    markov_bernstein_exponential,
    markov_bernstein_lacunary,
    min_stability_interval,
)
from .errors import DegeneracyError, InitializationError, ParseError, RemezError
from .oracle import grid_chebyshev_lp
from .problem import (
    ProblemSpec,
    dumps,
    load_problem,
    result_to_dict,
    warm_start,
    write_gap_csv,
    write_samples_csv,
    write_table_csv,
    write_trace_csv,
)
from .random_systems import PROBLEMS, StatsConfig, degeneracy_stats, write_stats_csv

EXIT_OK, EXIT_PARSE, EXIT_NONCONVERGED, EXIT_DEGENERATE, EXIT_FAILED = 0, 1, 2, 3, 4

log = logging.getLogger("remezgen")


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _open_out(path: str):
    if path == "-":
        return contextlib.nullcontext(sys.stdout)
    return open(path, "w", encoding="utf-8", newline="")


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: invalid JSON: {e}") from None


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ParseError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _options(spec: ProblemSpec, args) -> "ProblemSpec":
    opts = spec.options
    if args.epsilon is not None:
        opts = replace(opts, epsilon=args.epsilon)
    if args.max_iters is not None:
        opts = replace(opts, max_iters=args.max_iters)
    if args.regularize is not None:
        opts = replace(opts, regularize=args.regularize)
    if args.seed is not None:
        opts = replace(opts, seed=args.seed)
    if args.warm_start:
        opts = warm_start(opts, _read_json(args.warm_start))
    return replace(spec, options=opts)


def cmd_approx(args, constrained: bool = False) -> int:
    spec = _options(load_problem(args.spec), args)
    if constrained and not spec.constraints:
        raise ParseError("approx-constrained needs a 'constraints' list in the problem file")
    res = spec.solve()
    _write(args.out, dumps(result_to_dict(res)))
    if args.trace:
        with _open_out(args.trace) as fh:
            write_trace_csv(res, fh)
    if args.gap:
        with _open_out(args.gap) as fh:
            write_gap_csv(res, fh)
    if args.samples:
        with _open_out(args.samples_out) as fh:
            write_samples_csv(res, args.samples, fh)
    if res.status == "degenerate":
        return EXIT_DEGENERATE
    return EXIT_OK if res.converged else EXIT_NONCONVERGED


def cmd_mb(args) -> int:
    orders = [int(j) for j in _floats(args.orders)]
    rows, status = [], EXIT_OK
    if args.spectrum:
        spectrum = SpectrumSpec.from_list(_read_json(args.spectrum))
        consts = [markov_bernstein_exponential(spectrum, j) for j in orders]
        label = " ".join(f"{z.re}{z.im:+}i^{z.jordan}" for z in spectrum.eigenvalues)
        rows.append([label] + [c.constant for c in consts])
        status = max(status, *(_status(c.result) for c in consts))
    for powers in args.powers or []:
        pw = [int(m) for m in _floats(powers)]
        consts = [markov_bernstein_lacunary(pw, j) for j in orders]
        rows.append([" ".join(f"t^{m}" for m in pw)] + [c.constant for c in consts])
        status = max(status, *(_status(c.result) for c in consts))
    if not rows:
        raise ParseError("mb needs --powers or --spectrum")
    with _open_out(args.out) as fh:
        write_table_csv(["basis"] + [f"C{j}" for j in orders], rows, fh)
    return status


def _status(res) -> int:
    if res is None:
        return EXIT_OK
    if res.status == "degenerate":
        return EXIT_DEGENERATE
    return EXIT_OK if res.converged else EXIT_NONCONVERGED


def cmd_dwell(args) -> int:
    data = _read_json(args.spectra)
    if not isinstance(data, list) or not data:
        raise ParseError("spectra file must hold a nonempty list of spectra")
    spectra = [SpectrumSpec.from_list(s) for s in data]
    out = min_stability_interval(spectra, args.m, args.tol)
    doc = {
        "M": out.M,
        "T": out.T,
        "m": out.m,
        "monotone": out.monotone,
        "bisection": [{"T": t, "values": list(v)} for t, v in sorted(out.trace)],
    }
    _write(args.out, dumps(doc))
    return EXIT_OK


def cmd_oracle(args) -> int:
    spec = load_problem(args.spec)
    dom = spec.system.domain
    if dom.is_halfline:
        if args.right is None:
            raise ParseError("oracle on a half-line needs --right")
        b = args.right
    else:
        b = dom.b
    grid = np.linspace(dom.a, b, args.points)
    sol = grid_chebyshev_lp(spec.system, spec.target, grid, spec.constraint_set() if spec.constraints else None)
    doc = {
        "coeffs": sol.coeffs.tolist(),
        "value": sol.value,
        "active": [{"t": float(t), "sign": float(s), "weight": float(w)} for t, s, w in zip(sol.active, sol.signs, sol.weights)],
        "grid_points": args.points,
        "pivots": sol.pivots,
    }
    _write(args.out, dumps(doc))
    return EXIT_OK


def cmd_stats(args) -> int:
    cells = [tuple(int(x) for x in c.split(",")) for c in args.cells]
    rows = []
    for problem in args.problem:
        for m, n in cells:
            rows.append(degeneracy_stats(StatsConfig(m, n, problem, args.trials, args.seed)))
    with _open_out(args.out) as fh:
        write_stats_csv(rows, fh)
    return EXIT_OK


def _solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("spec", help="problem JSON file")
    p.add_argument("--out", default="-", help="result JSON path (default stdout)")
    p.add_argument("--epsilon", type=float, help="stop when B - b < epsilon")
    p.add_argument("--max-iters", type=int)
    p.add_argument("--regularize", choices=["auto", "always", "never"])
    p.add_argument("--seed", type=int, help="seed for start-point jitter (REMEZGEN_SEED overrides)")
    p.add_argument("--warm-start", metavar="RESULT", help="start from the nodes of a previous result JSON")
    p.add_argument("--trace", metavar="CSV", help="write per-iteration k,b,B,r,alpha0,mode")
    p.add_argument("--gap", metavar="CSV", help="write log10(B - b) per iteration")
    p.add_argument("--samples", type=int, metavar="N", help="write N rows of t,f,p,f-p")
    p.add_argument("--samples-out", default="samples.csv", metavar="CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="remezgen", description="Best uniform approximation by arbitrary function systems.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("approx", help="best approximation of a problem file")
    _solver_flags(p)
    p.set_defaults(func=lambda a: cmd_approx(a, False))

    p = sub.add_parser("approx-constrained", help="best approximation under the file's linear constraints")
    _solver_flags(p)
    p.set_defaults(func=lambda a: cmd_approx(a, True))

    p = sub.add_parser("mb", help="Markov-Bernstein constants as CSV")
    p.add_argument("--powers", action="append", metavar="M1,M2,...", help="lacunary exponents; repeat for several rows")
    p.add_argument("--spectrum", metavar="JSON", help="half-line quasipolynomials from a spectrum file")
    p.add_argument("--orders", default="1,2", help="derivative orders (default 1,2)")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_mb)

    p = sub.add_parser("dwell", help="minimal stability interval M = m + T")
    p.add_argument("spectra", help="JSON list of spectra, each a list of {re, im, jordan}")
    p.add_argument("--m", type=float, required=True, help="dwell time m")
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_dwell)

    p = sub.add_parser("oracle", help="grid linear-programming solution of a problem file")
    p.add_argument("spec")
    p.add_argument("--points", type=int, default=2001)
    p.add_argument("--right", type=float, help="grid end for half-line domains")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("stats", help="degeneracy statistics over random spline systems")
    p.add_argument("--problem", action="append", choices=PROBLEMS, help="repeatable; default all three")
    p.add_argument("--cells", nargs="+", default=["10,3", "10,5", "5,7"], metavar="M,N")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "problem", None) is None and args.command == "stats":
        args.problem = list(PROBLEMS)
    try:
        return args.func(args)
    except (ParseError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except (DegeneracyError, InitializationError) as e:
        print(f"degenerate: {e}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (RemezError, ValueError) as e:
        print(f"failed: {e}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
