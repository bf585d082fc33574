"""Benchmark experiments over the random block model, with CSV reporting.

Each experiment id expands to a grid of parameter cells; every cell runs a
number of independent trials whose seeds derive from the master seed and
the (cell, trial) indices, so results do not depend on scheduling.  Rows
are written in trial order.
"""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..datagen import derive_seed, random_instance
from ..metrics import performance_index, quality_report
from ..pipeline import SolveOptions, solve

CSV_SCHEMA_VERSION = 1

# Versioned column order; changing it requires bumping CSV_SCHEMA_VERSION.
CSV_HEADER = (
    "experiment", "seed", "n", "partition", "p", "snr_db",
    "detected_partition", "success_strict", "success_merge",
    "pi", "pi_pre", "theta", "cond_w", "cost_pre", "cost_post",
    "time_stage1_ms", "time_stage2_ms", "time_stage25_ms", "time_stage3_ms",
    "time_total_ms",
)

EXPERIMENT_IDS = ("table2-p1", "table2-p2", "fig12-sweep", "scaling-p3",
                  "scaling-p4")

DEFAULT_TRIALS = {
    "table2-p1": 200,
    "table2-p2": 200,
    "fig12-sweep": 50,
    "scaling-p3": 3,
    "scaling-p4": 5,
}

_P1 = dict(n=9, partition=(3, 3, 3), p=24)
_P2 = dict(n=9, partition=(2, 3, 4), p=24)
_TABLE2_SNRS = (30, 40, 50, 60, 70, 80, 90, 100)
_FIG12_SNRS = (40, 60, 80, 100)


@dataclass(frozen=True)
class BenchCell:
    """One grid point of an experiment."""

    experiment: str
    index: int
    n: int
    partition: tuple[int, ...]
    p: int
    snr_db: float


@dataclass(frozen=True)
class BenchRow:
    """One trial outcome, one CSV line."""

    experiment: str
    seed: int
    n: int
    partition: str
    p: int
    snr_db: float
    detected_partition: str
    success_strict: bool
    success_merge: bool
    pi: float
    pi_pre: float
    theta: float
    cond_w: float
    cost_pre: float
    cost_post: float
    time_stage1_ms: float
    time_stage2_ms: float
    time_stage25_ms: float
    time_stage3_ms: float
    time_total_ms: float

    def to_csv(self) -> list[str]:
        return [
            self.experiment, str(self.seed), str(self.n), self.partition,
            str(self.p), _fmt_snr(self.snr_db), self.detected_partition,
            "1" if self.success_strict else "0",
            "1" if self.success_merge else "0",
            repr(self.pi), repr(self.pi_pre), repr(self.theta),
            repr(self.cond_w), repr(self.cost_pre), repr(self.cost_post),
            repr(self.time_stage1_ms), repr(self.time_stage2_ms),
            repr(self.time_stage25_ms), repr(self.time_stage3_ms),
            repr(self.time_total_ms),
        ]


def _fmt_snr(snr_db: float) -> str:
    return "inf" if math.isinf(snr_db) else repr(float(snr_db))


def _fmt_partition(parts) -> str:
    return ",".join(str(int(x)) for x in parts)


def experiment_cells(experiment: str, snrs=None, sizes=None) -> list[BenchCell]:
    """Expand an experiment id into its parameter grid.

    ``snrs`` overrides the SNR grid of the table2/fig12 experiments;
    ``sizes`` overrides the matrix-count grid (p+1 values) of scaling-p3
    or the size multipliers m of scaling-p4.
    """
    if experiment not in EXPERIMENT_IDS:
        raise ValueError(
            f"unknown experiment {experiment!r}; choose from {EXPERIMENT_IDS}")
    cells = []
    if experiment in ("table2-p1", "table2-p2"):
        params = _P1 if experiment.endswith("p1") else _P2
        for snr in (snrs or _TABLE2_SNRS):
            cells.append(dict(**params, snr_db=float(snr)))
    elif experiment == "fig12-sweep":
        for params in (_P1, _P2):
            for snr in (snrs or _FIG12_SNRS):
                cells.append(dict(**params, snr_db=float(snr)))
    elif experiment == "scaling-p3":
        for count in (sizes or range(20, 201, 20)):
            cells.append(dict(n=9, partition=(2, 3, 4), p=int(count) - 1,
                              snr_db=80.0))
    else:  # scaling-p4
        for m in (sizes or (1, 2, 3, 4)):
            m = int(m)
            cells.append(dict(n=9 * m, partition=(2 * m, 3 * m, 4 * m),
                              p=9, snr_db=80.0))
    return [BenchCell(experiment=experiment, index=i, **c)
            for i, c in enumerate(cells)]


def run_trial(cell: BenchCell, seed: int, refine_loops: int = 3) -> BenchRow:
    """Generate, solve and score a single trial."""
    instance = random_instance(cell.n, cell.partition, cell.p, cell.snr_db,
                               seed)
    t0 = time.perf_counter()
    try:
        solution, trace = solve(instance.ms,
                                SolveOptions(refine_loops=refine_loops,
                                             record_trace=True))
    except Exception:
        nan = float("nan")
        return BenchRow(
            experiment=cell.experiment, seed=seed, n=cell.n,
            partition=_fmt_partition(cell.partition), p=cell.p,
            snr_db=cell.snr_db, detected_partition="",
            success_strict=False, success_merge=False, pi=nan, pi_pre=nan,
            theta=nan, cond_w=nan, cost_pre=nan, cost_post=nan,
            time_stage1_ms=nan, time_stage2_ms=nan, time_stage25_ms=nan,
            time_stage3_ms=nan,
            time_total_ms=(time.perf_counter() - t0) * 1e3)
    total_ms = (time.perf_counter() - t0) * 1e3
    v_inv = instance.true_unmixing
    report = quality_report(v_inv, instance.true_partition, solution.w_mat,
                            solution.partition, solution.cost)
    if report.success:
        pi_pre = performance_index(v_inv, trace.w_pre,
                                   instance.true_partition,
                                   solution.partition)
    else:
        pi_pre = float("nan")
    times = trace.stage_times_ms
    return BenchRow(
        experiment=cell.experiment, seed=seed, n=cell.n,
        partition=_fmt_partition(cell.partition), p=cell.p,
        snr_db=cell.snr_db,
        detected_partition=_fmt_partition(solution.partition.parts),
        success_strict=report.success, success_merge=report.success_merge,
        pi=report.pi, pi_pre=pi_pre, theta=report.theta,
        cond_w=report.cond_w, cost_pre=trace.pre_refine_cost,
        cost_post=trace.post_refine_cost,
        time_stage1_ms=times.get("stage1", float("nan")),
        time_stage2_ms=times.get("stage2", float("nan")),
        time_stage25_ms=times.get("stage25", float("nan")),
        time_stage3_ms=times.get("stage3", float("nan")),
        time_total_ms=total_ms)


def _worker_init():
    try:
        from threadpoolctl import threadpool_limits
        threadpool_limits(limits=1)
    except Exception:
        pass


def _run_task(args):
    cell, seed = args
    return run_trial(cell, seed)


def default_jobs() -> int:
    jobs = os.cpu_count() or 1
    cap = os.environ.get("GJBD_THREADS")
    if cap:
        jobs = max(1, min(jobs, int(cap)))
    return jobs


def run_bench(experiment: str, trials: int | None = None,
              master_seed: int = 0, jobs: int | None = None,
              snrs=None, sizes=None, progress=None) -> list[BenchRow]:
    """Run all cells of an experiment; rows come back in (cell, trial) order."""
    cells = experiment_cells(experiment, snrs=snrs, sizes=sizes)
    if trials is None:
        trials = DEFAULT_TRIALS[experiment]
    tasks = [(cell, derive_seed(master_seed, cell.index, trial))
             for cell in cells for trial in range(trials)]
    jobs = jobs if jobs is not None else default_jobs()
    cap = os.environ.get("GJBD_THREADS")
    if cap:
        jobs = max(1, min(jobs, int(cap)))
    if jobs > 1 and len(tasks) > 1:
        chunksize = max(1, min(8, len(tasks) // (jobs * 8)))
        with ProcessPoolExecutor(max_workers=jobs,
                                 initializer=_worker_init) as pool:
            rows = []
            for i, row in enumerate(pool.map(_run_task, tasks,
                                             chunksize=chunksize)):
                rows.append(row)
                if progress:
                    progress(i + 1, len(tasks))
    else:
        rows = []
        for i, task in enumerate(tasks):
            rows.append(_run_task(task))
            if progress:
                progress(i + 1, len(tasks))
    return rows


def write_rows(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow(row.to_csv())


def read_rows(path) -> list[BenchRow]:
    """Parse a bench CSV back into rows; the header must match the schema."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header}")
        rows = []
        for rec in reader:
            rows.append(BenchRow(
                experiment=rec[0], seed=int(rec[1]), n=int(rec[2]),
                partition=rec[3], p=int(rec[4]), snr_db=float(rec[5]),
                detected_partition=rec[6],
                success_strict=rec[7] == "1", success_merge=rec[8] == "1",
                pi=float(rec[9]), pi_pre=float(rec[10]), theta=float(rec[11]),
                cond_w=float(rec[12]), cost_pre=float(rec[13]),
                cost_post=float(rec[14]), time_stage1_ms=float(rec[15]),
                time_stage2_ms=float(rec[16]), time_stage25_ms=float(rec[17]),
                time_stage3_ms=float(rec[18]), time_total_ms=float(rec[19])))
    return rows


def _nanmedian(values) -> float:
    arr = np.asarray(list(values), dtype=float)
    good = arr[~np.isnan(arr)]
    return float(np.median(good)) if good.size else float("nan")


def summarize(rows) -> list[dict]:
    """Per-cell aggregates: success rates, median PIs, mean stage times."""
    groups: dict[tuple, list[BenchRow]] = {}
    order = []
    for row in rows:
        key = (row.n, row.partition, row.p, row.snr_db)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(row)
    out = []
    for key in order:
        members = groups[key]
        n, partition, p, snr_db = key
        out.append({
            "n": n, "partition": partition, "p": p, "snr_db": snr_db,
            "trials": len(members),
            "success_strict": 100.0 * sum(r.success_strict for r in members)
                              / len(members),
            "success_merge": 100.0 * sum(r.success_merge for r in members)
                             / len(members),
            "median_pi": _nanmedian(r.pi for r in members),
            "median_pi_pre": _nanmedian(r.pi_pre for r in members),
            "mean_time_total_ms": float(np.nanmean(
                [r.time_total_ms for r in members])),
            "mean_time_stage1_ms": float(np.nanmean(
                [r.time_stage1_ms for r in members])),
            "mean_time_stage2_ms": float(np.nanmean(
                [r.time_stage2_ms for r in members])),
            "mean_time_stage25_ms": float(np.nanmean(
                [r.time_stage25_ms for r in members])),
            "mean_time_stage3_ms": float(np.nanmean(
                [r.time_stage3_ms for r in members])),
        })
    return out


def format_summary(summary) -> str:
    lines = ["cell summary (per parameter set):"]
    for cell in summary:
        lines.append(
            f"  n={cell['n']} tau=({cell['partition']}) p+1={cell['p'] + 1} "
            f"snr={cell['snr_db']:g} trials={cell['trials']}: "
            f"success strict {cell['success_strict']:.1f}% / "
            f"merge {cell['success_merge']:.1f}%, "
            f"median PI {cell['median_pi']:.3e} "
            f"(pre-refine {cell['median_pi_pre']:.3e}), "
            f"mean total {cell['mean_time_total_ms']:.1f} ms "
            f"(stages {cell['mean_time_stage1_ms']:.1f}/"
            f"{cell['mean_time_stage2_ms']:.1f}/"
            f"{cell['mean_time_stage25_ms']:.1f}/"
            f"{cell['mean_time_stage3_ms']:.1f})")
    return "\n".join(lines)
