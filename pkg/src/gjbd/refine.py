"""Alternating SVD refinement of a block diagonalizer and the cost f."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .matpoly import MatrixSet, Partition

# Smallest singular value of W must exceed n * eps * largest.
_SINGULAR_RTOL = np.finfo(float).eps

# Noise floor for the real-diagonalizer sanity check, relative to the
# transformed scale; roundoff-level costs on exact data must not trigger it.
_REALIFY_COST_FLOOR = 1e-16


class RankCollapse(RuntimeError):
    """A block update would have made the diagonalizer numerically singular."""


class AssumptionAViolation(UserWarning):
    """The realified diagonalizer is much worse than the complex one.

    Signals that the problem may not admit a real diagonalizer at all
    (solutions not equivalent, or none of them real).
    """


@dataclass(frozen=True)
class Solution:
    """A partition together with its (refined) diagonalizer and residuals.

    ``per_matrix_residuals`` holds, for every input matrix, the pair
    (||off-block part of W^H A_i W||_F, ||W^H A_i W||_F); ``cost`` is the
    sum of the squared first components.
    """

    partition: Partition
    w_mat: np.ndarray
    cost: float
    per_matrix_residuals: tuple[tuple[float, float], ...]
    refine_loops: int
    is_real: bool


def offblock_part(mat: np.ndarray, partition: Partition) -> np.ndarray:
    """Copy of a matrix with its diagonal blocks zeroed."""
    out = np.array(mat)
    for s in partition.slices():
        out[s, s] = 0
    return out


def offblock_cost(ms: MatrixSet, partition: Partition, w_mat: np.ndarray) -> float:
    """f = sum_i ||OffBdiag(W^H A_i W)||_F**2."""
    total = 0.0
    wh = w_mat.conj().T
    for a in _working_coeffs(ms, w_mat):
        t = wh @ a @ w_mat
        total += np.linalg.norm(offblock_part(t, partition), "fro") ** 2
    return float(total)


def build_solution(ms: MatrixSet, partition: Partition, w_mat: np.ndarray,
                   refine_loops: int = 0) -> Solution:
    """Assemble a Solution record (residuals, cost, realness) around W."""
    wh = w_mat.conj().T
    residuals = []
    cost = 0.0
    for a in _working_coeffs(ms, w_mat):
        t = wh @ a @ w_mat
        off = float(np.linalg.norm(offblock_part(t, partition), "fro"))
        residuals.append((off, float(np.linalg.norm(t, "fro"))))
        cost += off ** 2
    return Solution(partition=partition, w_mat=w_mat, cost=float(cost),
                    per_matrix_residuals=tuple(residuals),
                    refine_loops=refine_loops,
                    is_real=bool(np.all(np.asarray(w_mat).imag == 0)))


def _working_coeffs(ms: MatrixSet, w_mat: np.ndarray) -> np.ndarray:
    # Real inputs and a real W are kept in real arithmetic so the updated
    # blocks stay exactly real (complex SVD phases would leak in otherwise).
    if ms.is_real and not np.iscomplexobj(w_mat):
        return ms.coeffs.real
    return ms.coeffs


def _stacked_coeffs(ms: MatrixSet, w_mat: np.ndarray) -> np.ndarray:
    """The A_i (interleaved with A_i^H unless Hermitian) as one 3-D array."""
    coeffs = _working_coeffs(ms, w_mat)
    if ms.hermitian:
        return coeffs
    out = np.empty((2 * len(coeffs),) + coeffs.shape[1:], dtype=coeffs.dtype)
    out[0::2] = coeffs
    out[1::2] = coeffs.conj().transpose(0, 2, 1)
    return out


def coupling_stack(ms: MatrixSet, partition: Partition, w_mat: np.ndarray,
                   j: int) -> np.ndarray:
    """The stacked coupling matrix whose rows hit block j's columns.

    Rows are the conjugate transposes of A_i @ W_others (interleaved with
    A_i^H @ W_others when the set is not Hermitian), so for any candidate
    block B the squared norm of stack @ B equals the squared off-block
    coupling of B against the other blocks through every matrix.
    """
    t = partition.cardinality
    if not 1 <= j <= t:
        raise ValueError(f"block index {j} outside 1..{t}")
    slices = partition.slices()
    coeffs = _stacked_coeffs(ms, w_mat)
    w_rest = np.concatenate(
        [w_mat[:, s] for i, s in enumerate(slices) if i != j - 1], axis=1)
    prod = coeffs @ w_rest  # (m, n, n-n_j), m = (p+1) or 2(p+1)
    return prod.conj().transpose(0, 2, 1).reshape(-1, ms.n)


def refine_block(ms: MatrixSet, partition: Partition, w_mat: np.ndarray,
                 j: int) -> np.ndarray:
    """Replace block j (1-based) by the best columns given the others.

    The other blocks are stacked through every A_i (and A_i^H when the set
    is not Hermitian, interleaved per matrix); the new block consists of
    the right singular vectors for the smallest singular values, i.e. the
    columns least coupled to the rest.  Raises RankCollapse, leaving the
    input untouched, if the update would make W numerically singular.
    """
    t = partition.cardinality
    if not 1 <= j <= t:
        raise ValueError(f"block index {j} outside 1..{t}")
    if t == 1:
        return np.array(w_mat)
    slices = partition.slices()
    n_j = partition.parts[j - 1]
    b_j = coupling_stack(ms, partition, w_mat, j)
    # Economy SVD already yields the complete right basis when rows >= n;
    # the tall-n case needs the full factorization for the null-space rows.
    _, _, vh = np.linalg.svd(b_j, full_matrices=b_j.shape[0] < ms.n)
    new_block = vh[-n_j:].conj().T
    updated = np.array(w_mat, dtype=np.result_type(w_mat, new_block))
    updated[:, slices[j - 1]] = new_block
    svals = np.linalg.svd(updated, compute_uv=False)
    if svals[-1] <= ms.n * _SINGULAR_RTOL * svals[0]:
        raise RankCollapse(
            f"updating block {j} collapses W to numerical rank "
            f"{int(np.sum(svals > ms.n * _SINGULAR_RTOL * svals[0]))}")
    return updated


def refine(ms: MatrixSet, partition: Partition, w_mat: np.ndarray,
           loops: int = 3, early_stop: bool = False) -> Solution:
    """Run full refinement loops (block 1..t each) and package the result.

    With ``early_stop`` the iteration ends once a loop improves the cost by
    less than 1e-12 relative.  RankCollapse from a block update propagates.
    """
    if loops < 0:
        raise ValueError("loops must be >= 0")
    w = np.array(w_mat)
    done = 0
    prev_cost = offblock_cost(ms, partition, w) if early_stop else None
    for _ in range(loops):
        for j in range(1, partition.cardinality + 1):
            w = refine_block(ms, partition, w, j)
        done += 1
        if early_stop:
            cost = offblock_cost(ms, partition, w)
            if cost >= prev_cost - 1e-12 * max(prev_cost, 1.0):
                break
            prev_cost = cost
    return build_solution(ms, partition, w, refine_loops=done)


def realify(ms: MatrixSet, partition: Partition, w_mat: np.ndarray) -> np.ndarray:
    """Extract a real diagonalizer from a complex one, block by block.

    For each block the real and imaginary parts are stacked side by side
    and the leading left singular vectors span their common column space;
    on problems whose solutions are all equivalent to a real one this
    preserves the block subspaces exactly.  The output blocks have
    orthonormal columns.  If the real diagonalizer's cost exceeds ten times
    the complex one's (above a roundoff floor), AssumptionAViolation is
    warned: no real diagonalizer may exist for this input.
    """
    if not ms.is_real:
        raise ValueError("realify requires an all-real matrix set")
    w_mat = np.asarray(w_mat)
    out = np.empty((ms.n, ms.n))
    for s in partition.slices():
        block = w_mat[:, s]
        stacked = np.concatenate([block.real, block.imag], axis=1)
        u, _, _ = np.linalg.svd(stacked, full_matrices=False)
        out[:, s] = u[:, :s.stop - s.start]
    cost_real = offblock_cost(ms, partition, out)
    cost_cplx = offblock_cost(ms, partition, w_mat)
    scale = sum(np.linalg.norm(out.T @ a @ out, "fro") ** 2
                for a in ms.coeffs.real)
    if cost_real > 10.0 * max(cost_cplx, _REALIFY_COST_FLOOR * scale):
        warnings.warn(
            f"real diagonalizer cost {cost_real:.3e} far exceeds complex "
            f"cost {cost_cplx:.3e}; no equivalent real solution may exist",
            AssumptionAViolation, stacklevel=2)
    return out
