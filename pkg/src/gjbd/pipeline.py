"""End-to-end solve: basis selection, block revealing, refinement."""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import blockreveal, eigsel, refine as refine_mod
from .blockreveal import BlockStructure, InconsistentClustering
from .matpoly import CompanionPencil, MatrixSet, linearize
from .refine import AssumptionAViolation, RankCollapse


@dataclass(frozen=True)
class SolveOptions:
    """Knobs of the solve pipeline; defaults follow the module constants."""

    refine_loops: int = 3
    want_real: bool = False
    tol_rank: float | None = None
    tol_zero: float = blockreveal.ZERO_RTOL
    clusterer: str = "components"
    record_trace: bool = False
    kmeans_seed: int = 0

    def __post_init__(self):
        if self.refine_loops < 0:
            raise ValueError("refine_loops must be >= 0")
        if self.tol_rank is not None and self.tol_rank <= 0:
            raise ValueError("tol_rank must be positive")
        if self.tol_zero <= 0:
            raise ValueError("tol_zero must be positive")
        if self.clusterer not in ("components", "kmeans"):
            raise ValueError(f"unknown clusterer {self.clusterer!r}")


@dataclass(frozen=True)
class SolveTrace:
    """Diagnostics collected along a solve.

    ``w_pre`` (the diagonalizer entering refinement) is populated only
    when SolveOptions.record_trace is set.
    """

    basis_cond: float
    basis_r_nn: float
    basis_lambdas: tuple[complex, ...]
    structure: BlockStructure
    pre_refine_cost: float
    post_refine_cost: float
    warnings: tuple[str, ...]
    stage_times_ms: dict = field(default_factory=dict)
    w_pre: np.ndarray | None = None


def _promoted_pencil(ms: MatrixSet) -> CompanionPencil:
    # Degree-zero input: fall back to the standard eigenproblem of A_0 via
    # the pencil lam*I + A_0 (eigenvectors are those of A_0).
    return CompanionPencil(m_mat=np.eye(ms.n, dtype=np.complex128),
                           n_mat=np.array(ms.coeffs[0]), n=ms.n, p=1)


def _promoted_residuals(ms, candidates):
    a0 = ms.coeffs[0]
    scale = np.linalg.norm(a0, 2)
    out = np.empty(len(candidates))
    for j, (lam, x) in enumerate(candidates):
        if eigsel.is_infinite(lam):
            out[j] = np.linalg.norm(a0 @ x) / scale
        else:
            out[j] = np.linalg.norm(a0 @ x + lam * x) / (scale + abs(lam))
    return out


def solve(ms: MatrixSet, opts: SolveOptions | None = None):
    """Solve the joint block diagonalization problem for a matrix set.

    Returns (Solution, SolveTrace).  Stage order: eigenvector basis
    selection, spectral block revealing, optional real-diagonalizer
    extraction (``want_real`` on all-real input), then SVD refinement.
    NearlyDependent and SchurFailure propagate; recoverable conditions are
    recorded as trace warnings.
    """
    opts = opts or SolveOptions()
    warn_log: list[str] = []
    times: dict[str, float] = {}

    t0 = time.perf_counter()
    if ms.p == 0:
        warn_log.append("degree-0 input promoted to the standard "
                        "eigenproblem of A_0; block semantics are heuristic")
        pencil = _promoted_pencil(ms)
        pairs = eigsel.solve_pencil(pencil)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", eigsel.ZeroBlock)
            candidates = eigsel.extract_pep_vectors(pairs, ms.n, 1)
        residuals = _promoted_residuals(ms, candidates)
    else:
        pencil = linearize(ms)
        pairs = eigsel.solve_pencil(pencil)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", eigsel.ZeroBlock)
            candidates = eigsel.extract_pep_vectors(pairs, ms.n, ms.p)
        residuals = eigsel.scaled_residuals(ms, candidates)
    warn_log.extend(str(w.message) for w in caught)
    order = np.argsort(residuals, kind="stable")
    basis = eigsel.select_basis([candidates[i] for i in order], ms.n,
                                tol_rank=opts.tol_rank)
    times["stage1"] = (time.perf_counter() - t0) * 1e3

    t0 = time.perf_counter()
    h_mat = blockreveal.interaction_matrix(ms, basis.x_mat)
    lap = blockreveal.laplacian(h_mat)
    try:
        structure = blockreveal.detect_blocks(
            lap, tol_zero=opts.tol_zero, clusterer=opts.clusterer,
            seed=opts.kmeans_seed)
    except InconsistentClustering as exc:
        warn_log.append(f"clustering disagreement, trusting components: {exc}")
        structure = exc.structure
    partition = structure.partition
    w_start = basis.x_mat[:, structure.perm]
    times["stage2"] = (time.perf_counter() - t0) * 1e3

    t0 = time.perf_counter()
    if opts.want_real:
        if ms.is_real:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always", AssumptionAViolation)
                w_start = refine_mod.realify(ms, partition, w_start)
            warn_log.extend(str(w.message) for w in caught)
        else:
            warn_log.append("want_real ignored: the input set is not all real")
    times["stage25"] = (time.perf_counter() - t0) * 1e3

    pre_cost = refine_mod.offblock_cost(ms, partition, w_start)
    t0 = time.perf_counter()
    try:
        solution = refine_mod.refine(ms, partition, w_start,
                                     loops=opts.refine_loops)
    except RankCollapse as exc:
        warn_log.append(f"refinement aborted, keeping unrefined W: {exc}")
        solution = refine_mod.build_solution(ms, partition, w_start)
    times["stage3"] = (time.perf_counter() - t0) * 1e3

    trace = SolveTrace(
        basis_cond=basis.cond,
        basis_r_nn=basis.r_nn,
        basis_lambdas=tuple(complex(x) for x in basis.lambdas),
        structure=structure,
        pre_refine_cost=float(pre_cost),
        post_refine_cost=float(solution.cost),
        warnings=tuple(warn_log),
        stage_times_ms=times,
        w_pre=np.array(w_start) if opts.record_trace else None,
    )
    return solution, trace
