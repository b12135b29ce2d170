"""Command-line entry point: ``fluxcf solve`` and ``fluxcf converge``."""

import argparse
import logging
import sys

from .cases import get_case
from .errors import ConfigurationError, FluxCFError
from .flux1d import FluxVariant
from .harness import (DEFAULT_LEVELS_1D, DEFAULT_LEVELS_2D, emit_csv, emit_solution, run_convergence,
                      solve_level)

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3

log = logging.getLogger("fluxcf")


def _levels(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid level list {text!r}") from None


def build_parser():
    parser = argparse.ArgumentParser(prog="fluxcf", description="Complete flux scheme solver and convergence harness")
    parser.add_argument("-v", "--verbose", action="store_true", help="log run metadata to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--case", type=int, choices=(1, 2, 3), required=True)
        p.add_argument("--diffusion", type=float, required=True)
        p.add_argument("--amp", type=float, default=None, help="Poisson source amplitude A (case 2)")
        p.add_argument("--mu", type=float, default=1.0)
        p.add_argument("--flux", choices=[v.value for v in FluxVariant], default="auto")

    ps = sub.add_parser("solve", help="solve one mesh level")
    common(ps)
    ps.add_argument("--n", type=int, required=True, help="cells per direction")
    ps.add_argument("--dump", default=None, help="write x[,y],c_numeric,c_exact to this CSV")

    pc = sub.add_parser("converge", help="run a grid refinement study")
    common(pc)
    pc.add_argument("--levels", type=_levels, default=None, help="comma-separated doubling levels")
    pc.add_argument("--out", default=None, help="CSV destination (stdout if omitted)")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        case = get_case(args.case, args.diffusion, args.amp, args.mu)
        if args.command == "solve":
            res = solve_level(case, args.flux, args.n)
            log.info("case=%d N=%d flux=%s D=%g", args.case, args.n, args.flux, args.diffusion)
            sys.stdout.write(f"N,l2_error\n{args.n},{res.error:.10g}\n")
            if args.dump:
                emit_solution(res, args.dump)
        else:
            levels = args.levels
            if levels is None:
                levels = DEFAULT_LEVELS_1D if case.dimension == 1 else DEFAULT_LEVELS_2D
            report = run_convergence(case, args.flux, levels)
            emit_csv(report, args.out if args.out else sys.stdout)
    except ConfigurationError as exc:
        print(f"fluxcf: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FluxCFError as exc:
        print(f"fluxcf: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"fluxcf: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
