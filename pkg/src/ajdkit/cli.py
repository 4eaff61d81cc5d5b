"""Command-line interface: ``ajdkit {measure,project,ajd,mean,bench}``.

Exit codes: 0 success, 1 invalid input or arguments (non-HPD matrix, alpha
out of range, unknown flag), 2 an iterative method did not converge (results
are still written and flagged), 3 a file could not be read or written.
Results go to standard output or the named files, diagnostics to standard
error. Every output file is written to a temporary name and renamed.
"""

import argparse
import json
import os
import sys
import warnings

import numpy as np

from . import __version__
from .ajd import AjdProblem, SolveOptions, solve
from .baselines import jadiag, uwedge
from .bench import ScenarioConfig, export, run_experiment
from .io import atomic_write, dumps, format_float, matrix_to_obj, read_matrix, read_matrix_set
from .linalg import ConvergenceWarning, DimensionError, DomainError
from .means import ajd_mean
from .measures import all_measures
from .projections import CRITERIA, closest_diagonal

EXIT_OK, EXIT_DOMAIN, EXIT_NOT_CONVERGED, EXIT_IO = 0, 1, 2, 3

ALGOS = {"ldnewton": solve, "jadiag": jadiag, "uwedge": uwedge}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2, which is taken by non-convergence here
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _float_list(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def default_threads():
    env = os.environ.get("AJDKIT_THREADS")
    if env:
        try:
            return _positive_int(env)
        except (ValueError, argparse.ArgumentTypeError):
            raise UsageError(f"AJDKIT_THREADS must be a positive integer, got {env!r}") from None
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def build_parser():
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="ajdkit", description=__doc__.splitlines()[0], formatter_class=fmt)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, output=True):
        p.add_argument("--input", required=True, help="input JSON file")
        if output:
            p.add_argument("--output", default=None, help="write the result here instead of standard output")
        p.add_argument("--verbose", action="store_true", help="log progress to standard error")

    p = sub.add_parser("measure", help="diagonality measures of a matrix", formatter_class=fmt)
    common(p)
    p.add_argument("--alphas", type=_float_list, default=[-0.75, 0.0, 0.75],
                   help="comma-separated alphas for the log-det alpha measure")

    p = sub.add_parser("project", help="closest positive diagonal matrix", formatter_class=fmt)
    common(p)
    p.add_argument("--criterion", choices=CRITERIA, default="riemannian", help="projection criterion")
    p.add_argument("--alpha", type=float, default=None, help="alpha for --criterion logdet_alpha")
    p.add_argument("--tol", type=_positive_float, default=1e-10, help="residual tolerance")
    p.add_argument("--max-iter", type=_positive_int, default=500, help="iteration cap")

    p = sub.add_parser("ajd", help="joint diagonalizer of a matrix set", formatter_class=fmt)
    common(p)
    p.add_argument("--alpha", type=float, default=0.0, help="log-det alpha in [-1, 1] (ldnewton only)")
    p.add_argument("--algo", choices=sorted(ALGOS), default="ldnewton", help="algorithm")
    p.add_argument("--tol", type=_positive_float, default=SolveOptions.tol, help="stop statistic tolerance")
    p.add_argument("--max-iter", type=_positive_int, default=SolveOptions.max_iter, help="iteration cap")
    p.add_argument("--trace", default=None, help="write the per-iteration trace to this CSV file")

    p = sub.add_parser("mean", help="AJD-based geometric or power mean", formatter_class=fmt)
    common(p)
    p.add_argument("--p", type=float, default=0.0, help="power in [-1, 1]; 0 is the geometric mean")
    p.add_argument("--alpha", type=float, default=0.0, help="log-det alpha of the diagonalizer")
    p.add_argument("--tol", type=_positive_float, default=SolveOptions.tol, help="stop statistic tolerance")
    p.add_argument("--max-iter", type=_positive_int, default=SolveOptions.max_iter, help="iteration cap")

    p = sub.add_parser("bench", help="synthetic separation benchmark", formatter_class=fmt)
    p.add_argument("--config", required=True, help="scenario JSON with the ScenarioConfig field names")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--threads", type=_positive_int, default=None,
                   help="worker processes; None means AJDKIT_THREADS, else all available cores")
    p.add_argument("--verbose", action="store_true", help="log progress to standard error")
    return parser


def _emit(text, path):
    if path is None:
        sys.stdout.write(text + "\n")
    else:
        atomic_write(path, text + "\n")


def _log(args, msg):
    if getattr(args, "verbose", False):
        print(msg, file=sys.stderr)


def cmd_measure(args):
    a = read_matrix(args.input)
    _emit(dumps(all_measures(a, alphas=args.alphas), indent=2), args.output)
    return EXIT_OK


def cmd_project(args):
    a = read_matrix(args.input)
    x, rep = closest_diagonal(a, args.criterion, alpha=args.alpha, tol=args.tol, max_iter=args.max_iter)
    _log(args, f"{args.criterion}: {rep.iterations} iterations, residual {rep.residual:.3e}")
    out = {
        "criterion": args.criterion,
        "alpha": args.alpha,
        "diagonal": np.diag(x),
        "residual": rep.residual,
        "iterations": rep.iterations,
        "converged": rep.converged,
    }
    _emit(dumps(out, indent=2), args.output)
    return EXIT_OK if rep.converged else EXIT_NOT_CONVERGED


def _trace_csv(trace):
    lines = ["iter,cost,grad_norm,step,stop_stat"]
    for e in trace:
        lines.append(",".join([str(e.iter)] + [format_float(v) for v in (e.cost, e.grad_norm, e.step, e.stop_stat)]))
    return "\n".join(lines) + "\n"


def cmd_ajd(args):
    mats = read_matrix_set(args.input)
    problem = AjdProblem(mats, alpha=args.alpha)
    opts = SolveOptions(tol=args.tol, max_iter=args.max_iter)

    def log(it, c):
        _log(args, f"iter {it}")

    res = ALGOS[args.algo](problem, opts=opts, callback=log if args.verbose else None)
    if args.trace:
        atomic_write(args.trace, _trace_csv(res.trace))
    _emit(dumps(matrix_to_obj(res.c), indent=2), args.output)
    if not res.converged:
        print(f"ajd: {args.algo} did not converge in {res.iterations} iterations "
              f"({res.trace[-1].note or 'max_iter'})", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_mean(args):
    mats = read_matrix_set(args.input)
    opts = SolveOptions(tol=args.tol, max_iter=args.max_iter)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        mean, res = ajd_mean(mats, p=args.p, alpha=args.alpha, opts=opts, return_result=True)
    _emit(dumps(matrix_to_obj(mean), indent=2), args.output)
    if not res.converged:
        print(f"mean: joint diagonalization did not converge in {res.iterations} iterations", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_bench(args):
    with open(args.config) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise OSError(f"cannot parse {args.config}: {exc}") from exc
    if not isinstance(data, dict):
        raise ValueError("scenario JSON must be an object")
    cfg = ScenarioConfig.from_dict(data)
    threads = args.threads or default_threads()
    _log(args, f"bench: {cfg.n_simulations} simulations on {threads} workers")
    records, summary = run_experiment(cfg, n_jobs=threads)
    for path in export(records, summary, args.out):
        _log(args, f"wrote {path}")
    return EXIT_OK


COMMANDS = {"measure": cmd_measure, "project": cmd_project, "ajd": cmd_ajd, "mean": cmd_mean, "bench": cmd_bench}


def main(argv=None):
    """Run the CLI and return the exit code."""
    try:
        args = build_parser().parse_args(argv)
        if args.command == "bench" and args.threads is None:
            default_threads()
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"ajdkit: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"ajdkit: cannot parse input: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DomainError, DimensionError, ValueError) as exc:
        print(f"ajdkit: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except np.linalg.LinAlgError as exc:
        print(f"ajdkit: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


def entry_point():
    sys.exit(main())
