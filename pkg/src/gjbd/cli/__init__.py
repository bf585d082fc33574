"""Command-line interface: gen, fixture, solve, eval, bench."""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from ..datagen import UnknownFixture, fixture, random_instance
from ..eigsel import NearlyDependent, SchurFailure
from ..matpoly import MatrixSet, Partition
from ..metrics import quality_report
from ..pipeline import SolveOptions, solve
from ..refine import offblock_cost
from . import bench as bench_mod
from .files import (MatrixSetFileError, read_matrixset, read_solution,
                    write_matrixset, write_solution)

EXIT_OK = 0
EXIT_SOLVE_FAILED = 2
EXIT_BAD_INPUT = 3

EVAL_CSV_HEADER = ("pi", "theta", "success_strict", "success_merge",
                   "cond_w", "cost")


def _parse_partition(text: str) -> Partition:
    try:
        return Partition(tuple(int(x) for x in text.split(",")))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad partition {text!r}: {exc}")


def _parse_snr(text: str) -> float:
    if text.strip().lower() in ("inf", "+inf", "infinity"):
        return float("inf")
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad SNR {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gjbd",
        description="Joint block diagonalization of a set of square matrices.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a random problem instance")
    p_gen.add_argument("--n", type=int, required=True, help="matrix order")
    p_gen.add_argument("--partition", type=_parse_partition, required=True,
                       help="true block sizes, e.g. 3,3,3")
    p_gen.add_argument("--p", type=int, required=True,
                       help="polynomial degree (p+1 matrices are generated)")
    p_gen.add_argument("--snr", type=_parse_snr, required=True,
                       help="signal-to-noise ratio in dB, or 'inf'")
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument("--real", action="store_true",
                       help="draw real-valued data")
    p_gen.add_argument("--out", required=True)

    p_fix = sub.add_parser("fixture", help="write a bundled fixture to a file")
    p_fix.add_argument("--name", required=True)
    p_fix.add_argument("--out", required=True)

    p_solve = sub.add_parser("solve", help="solve a matrix-set file")
    src = p_solve.add_mutually_exclusive_group(required=True)
    src.add_argument("--in", dest="in_path", help="matrix-set file")
    src.add_argument("--fixture", dest="fixture_name",
                     help="solve a bundled fixture instead of a file")
    p_solve.add_argument("--loops", type=int, default=3,
                         help="refinement loops (default 3)")
    p_solve.add_argument("--real", action="store_true",
                         help="extract a real diagonalizer (real input only)")
    p_solve.add_argument("--trace", action="store_true",
                         help="embed solver diagnostics in the output")
    p_solve.add_argument("--clusterer", choices=("components", "kmeans"),
                         default="components")
    p_solve.add_argument("--out", required=True)

    p_eval = sub.add_parser("eval", help="score a solution against ground truth")
    p_eval.add_argument("--solution", required=True)
    p_eval.add_argument("--truth", required=True,
                        help="matrix-set file with embedded ground truth")
    p_eval.add_argument("--header", action="store_true",
                        help="print the CSV header line first")

    p_bench = sub.add_parser("bench", help="run a benchmark experiment")
    p_bench.add_argument("--experiment", required=True,
                         choices=bench_mod.EXPERIMENT_IDS)
    p_bench.add_argument("--trials", type=int, default=None,
                         help="trials per grid cell (per-experiment default)")
    p_bench.add_argument("--seed", type=int, default=0, help="master seed")
    p_bench.add_argument("--out", required=True, help="output CSV path")
    p_bench.add_argument("--jobs", type=int, default=None,
                         help="parallel workers (default: all cores, "
                              "capped by GJBD_THREADS)")
    p_bench.add_argument("--snrs", type=float, nargs="+", default=None,
                         help="override the SNR grid")
    p_bench.add_argument("--sizes", type=int, nargs="+", default=None,
                         help="override the size grid of scaling experiments")
    p_bench.add_argument("--no-figures", dest="figures", action="store_false",
                         help="skip rendering PNG figures next to the CSV")
    p_bench.add_argument("--quiet", action="store_true")
    return parser


def cmd_gen(args) -> int:
    if args.partition.n != args.n:
        print(f"error: partition sums to {args.partition.n}, expected {args.n}",
              file=sys.stderr)
        return EXIT_BAD_INPUT
    instance = random_instance(args.n, args.partition, args.p, args.snr,
                               args.seed, real_valued=args.real)
    write_matrixset(args.out, instance.ms, ground_truth={
        "v_mix": instance.v_mix, "partition": instance.true_partition.parts,
        "snr_db": instance.snr_db, "seed": instance.seed})
    return EXIT_OK


def cmd_fixture(args) -> int:
    try:
        fx = fixture(args.name)
    except UnknownFixture as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    truth = None
    if fx.name == "ex41-complex":
        # Reference factorization exists for this fixture: A_i = V D_i V^H,
        # i.e. mixing matrix V^H in the random-model convention.
        truth = {"v_mix": fx.aux["v"].conj().T,
                 "partition": fx.known_solutions[0][0].parts,
                 "snr_db": float("inf"), "seed": 0}
    write_matrixset(args.out, fx.ms, ground_truth=truth)
    return EXIT_OK


def cmd_solve(args) -> int:
    if args.fixture_name is not None:
        try:
            ms = fixture(args.fixture_name).ms
        except UnknownFixture as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_BAD_INPUT
    else:
        try:
            ms, _ = read_matrixset(args.in_path)
        except OSError as exc:
            print(f"error: cannot read {args.in_path}: {exc}", file=sys.stderr)
            return EXIT_BAD_INPUT
        except MatrixSetFileError as exc:
            print(f"error: malformed input: {exc}", file=sys.stderr)
            return EXIT_BAD_INPUT
    opts = SolveOptions(refine_loops=args.loops, want_real=args.real,
                        clusterer=args.clusterer, record_trace=args.trace)
    try:
        solution, trace = solve(ms, opts)
    except (NearlyDependent, SchurFailure) as exc:
        print(f"error: solve failed: {exc}", file=sys.stderr)
        return EXIT_SOLVE_FAILED
    write_solution(args.out, solution, trace if args.trace else None)
    for line in trace.warnings:
        print(f"warning: {line}", file=sys.stderr)
    print(f"partition {','.join(str(x) for x in solution.partition.parts)} "
          f"cost {solution.cost:.6e}")
    return EXIT_OK


def cmd_eval(args) -> int:
    try:
        partition, w_mat, _ = read_solution(args.solution)
        ms, truth = read_matrixset(args.truth)
    except (OSError, MatrixSetFileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    if truth is None:
        print("error: truth file has no ground_truth section", file=sys.stderr)
        return EXIT_BAD_INPUT
    v_inv = np.linalg.inv(truth["v_mix"])
    cost = offblock_cost(ms, partition, w_mat)
    report = quality_report(v_inv, truth["partition"], w_mat, partition, cost)
    if args.header:
        print(",".join(EVAL_CSV_HEADER))
    print(f"{report.pi!r},{report.theta!r},"
          f"{1 if report.success else 0},{1 if report.success_merge else 0},"
          f"{report.cond_w!r},{report.cost!r}")
    return EXIT_OK


def cmd_bench(args) -> int:
    started = time.perf_counter()
    progress = None
    if not args.quiet and sys.stderr.isatty():
        def progress(done, total):
            print(f"\r{done}/{total} trials", end="", file=sys.stderr)
    rows = bench_mod.run_bench(args.experiment, trials=args.trials,
                               master_seed=args.seed, jobs=args.jobs,
                               snrs=args.snrs, sizes=args.sizes,
                               progress=progress)
    if progress:
        print(file=sys.stderr)
    bench_mod.write_rows(args.out, rows)
    if not args.quiet:
        print(bench_mod.format_summary(bench_mod.summarize(rows)))
        print(f"{len(rows)} rows -> {args.out} "
              f"({time.perf_counter() - started:.1f} s)")
    if args.figures:
        from .figures import render_bench_figures
        for path in render_bench_figures(args.experiment, rows, args.out):
            if not args.quiet:
                print(f"figure -> {path}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "gen": cmd_gen,
        "fixture": cmd_fixture,
        "solve": cmd_solve,
        "eval": cmd_eval,
        "bench": cmd_bench,
    }[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
