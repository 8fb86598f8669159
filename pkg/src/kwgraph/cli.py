"""Command-line interface.

Exit codes: 0 success, 1 infeasible problem or failed solve, 2 bad input.
Reports go to ``--output`` (default stdout); errors go to stderr as
``{"error": {...}}``.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Any

from . import io
from .errors import InputError, KWError, ParseError, SolverError
from .feasibility import Status, check
from .numerics import spectral_gap
from .operators import Problem, gamma, grad_norm, laplacian, poly_laplacian
from .solvers.config import SolverConfig
from .solvers.dispatch import METHODS, solve
from .threshold import estimate_c_minus

EXIT_OK, EXIT_SOLVER, EXIT_INPUT = 0, 1, 2
OPS = ("laplacian", "gamma", "gradnorm", "polylap")


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on its own; route it through the JSON error path
    def error(self, message):
        raise ParseError(message, field="arguments")


def _finite(text: str) -> float:
    x = float(text)
    if not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"{text!r} is not a finite number")
    return x


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kwgraph", description="Solve Δᵐu = c − h·eᵘ on finite weighted graphs.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph", required=True, help="graph JSON file")
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "tsv"), default="json",
                        help="tsv is available for function outputs only")
    common.add_argument("--verbose", action="store_true", help="include iteration traces")
    seeded = argparse.ArgumentParser(add_help=False)
    seeded.add_argument("--seed", type=int, default=0, help="RNG seed for random restarts")

    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("apply", parents=[common], help="apply an operator to a function")
    p.add_argument("--op", choices=OPS, required=True)
    p.add_argument("--u", required=True, help="function JSON file")
    p.add_argument("--v", help="second function (gamma only)")
    p.add_argument("--m", type=int, default=1, help="power for polylap")

    p = sub.add_parser("check", parents=[common], help="classify solvability")
    p.add_argument("--h", required=True)
    p.add_argument("--c", type=_finite, required=True)
    p.add_argument("--m", type=int, default=1)

    p = sub.add_parser("solve", parents=[common, seeded], help="solve the equation")
    p.add_argument("--h", required=True)
    p.add_argument("--c", type=_finite, required=True)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--method", choices=METHODS, default="auto")
    p.add_argument("--init", help="initial guess for Newton")

    p = sub.add_parser("threshold", parents=[common, seeded], help="bracket the critical c < 0")
    p.add_argument("--h", required=True)

    sub.add_parser("spectrum", parents=[common], help="spectral gap and Poincaré constant")
    return parser


def _apply(args, g) -> tuple[Any, int]:
    u = io.load_function(g, args.u)
    if args.op == "gamma":
        if args.v is None:
            raise ParseError("--op gamma needs --v", field="--v")
        return gamma(g, u, io.load_function(g, args.v)), EXIT_OK
    if args.v is not None:
        raise ParseError(f"--v is only used by --op gamma, not {args.op}", field="--v")
    if args.op == "laplacian":
        return laplacian(g, u), EXIT_OK
    if args.op == "gradnorm":
        return grad_norm(g, u), EXIT_OK
    if args.m < 1:
        raise ParseError(f"--m must be >= 1, got {args.m}", field="--m")
    return poly_laplacian(g, u, args.m), EXIT_OK


def _check(args, g) -> tuple[Any, int]:
    verdict = check(g, Problem(args.m, args.c, io.load_function(g, args.h)))
    code = EXIT_SOLVER if verdict.status is Status.INFEASIBLE else EXIT_OK
    return verdict.to_dict(), code


def _solve(args, g) -> tuple[Any, int]:
    p = Problem(args.m, args.c, io.load_function(g, args.h))
    init = io.load_function(g, args.init) if args.init else None
    cfg = SolverConfig(rng_seed=args.seed)
    rep = solve(g, p, cfg, method=args.method, init=init)
    if args.format == "tsv":
        return rep.solution, EXIT_OK
    out = rep.to_dict(verbose=args.verbose)
    out["rng_seed"] = cfg.rng_seed
    return out, EXIT_OK


def _threshold(args, g) -> tuple[Any, int]:
    cfg = SolverConfig(rng_seed=args.seed)
    out = estimate_c_minus(g, io.load_function(g, args.h), cfg).to_dict()
    out["rng_seed"] = cfg.rng_seed
    return out, EXIT_OK


def _spectrum(args, g) -> tuple[Any, int]:
    return spectral_gap(g).to_dict(), EXIT_OK


HANDLERS = {"apply": _apply, "check": _check, "solve": _solve,
            "threshold": _threshold, "spectrum": _spectrum}
FUNCTION_OUTPUTS = ("apply", "solve")


def error_payload(exc: KWError) -> dict:
    err: dict[str, Any] = {"type": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ParseError):
        err["line"] = exc.line
        err["field"] = exc.field
    return {"error": err}


def _emit(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")


def run(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.format == "tsv" and args.command not in FUNCTION_OUTPUTS:
            raise ParseError(f"--format tsv is only available for {FUNCTION_OUTPUTS}",
                             field="--format")
        g = io.load_graph(args.graph)
        result, code = HANDLERS[args.command](args, g)
        if args.format == "tsv":
            text = io.function_tsv(result)
        elif hasattr(result, "to_dict"):
            text = io.dumps(result.to_dict())
        else:
            text = io.dumps(result)
        _emit(text, args.output)
        return code
    except KWError as exc:
        sys.stderr.write(io.dumps(error_payload(exc)))
        if isinstance(exc, InputError):
            return EXIT_INPUT
        if isinstance(exc, SolverError):
            return EXIT_SOLVER
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
