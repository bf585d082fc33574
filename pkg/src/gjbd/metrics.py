"""Quality measures: principal angles, performance index, conditioning."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .matpoly import Partition


class RankDeficient(ValueError):
    """A subspace argument has numerical rank below its column count."""


class PartitionMismatch(ValueError):
    """Computed and true partitions have different block-size multisets."""


@dataclass(frozen=True)
class QualityReport:
    """Scalar quality summary of a computed solution against ground truth.

    ``pi`` and ``theta`` are NaN when the corresponding comparison is not
    defined (size multiset mismatch, or differing block order for theta).
    ``success`` is the strict equal-multiset test; ``success_merge`` also
    accepts finer partitions whose blocks merge to the true sizes.
    """

    pi: float
    theta: float
    cond_w: float
    cost: float
    success: bool
    success_merge: bool


def _orthonormal(mat, label):
    mat = np.atleast_2d(np.asarray(mat))
    if mat.shape[0] < mat.shape[1]:
        raise RankDeficient(f"{label}: more columns than rows {mat.shape}")
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    tol = max(mat.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    if np.sum(s > tol) < mat.shape[1]:
        raise RankDeficient(f"{label}: numerical rank below {mat.shape[1]}")
    return u


def subspace_angle(e_mat, f_mat) -> float:
    """Largest principal angle (radians) between two column spaces.

    Evaluated through the orthogonal complement, asin(||Q_F - P_E Q_F||_2),
    which resolves tiny angles to machine precision where the arccos of a
    singular value cannot.
    """
    qe = _orthonormal(e_mat, "first subspace")
    qf = _orthonormal(f_mat, "second subspace")
    if qe.shape[1] != qf.shape[1]:
        raise ValueError(
            f"subspace dimensions differ: {qe.shape[1]} vs {qf.shape[1]}")
    resid = qf - qe @ (qe.conj().T @ qf)
    sine = np.linalg.norm(resid, 2)
    return float(np.arcsin(min(1.0, sine)))


def condition_2(w_mat) -> float:
    """Ratio of extreme singular values; inf when the smallest is zero."""
    s = np.linalg.svd(np.asarray(w_mat), compute_uv=False)
    if s[-1] == 0.0:
        return float(np.inf)
    return float(s[0] / s[-1])


def _blocks(mat, partition):
    return [mat[:, s] for s in partition.slices()]


def performance_index(v_inv: np.ndarray, w_mat: np.ndarray,
                      true_partition, w_partition=None) -> float:
    """Assignment-minimized max principal angle between true and found blocks.

    ``v_inv`` holds the ground-truth diagonalizer blocks as columns, split
    by ``true_partition``; ``w_mat`` is split by ``w_partition`` (defaults
    to the true one).  All block assignments with matching sizes are
    enumerated (block counts are small), so the minimum is exact.  Raises
    PartitionMismatch if the size multisets differ.
    """
    tp = true_partition if isinstance(true_partition, Partition) \
        else Partition(tuple(true_partition))
    wp = tp if w_partition is None else (
        w_partition if isinstance(w_partition, Partition)
        else Partition(tuple(w_partition)))
    if sorted(tp.parts) != sorted(wp.parts):
        raise PartitionMismatch(
            f"block sizes {wp.parts} are not a rearrangement of {tp.parts}")
    v_blocks = _blocks(np.asarray(v_inv), tp)
    w_blocks = _blocks(np.asarray(w_mat), wp)
    t = tp.cardinality
    # Angle cache over size-compatible pairs only.
    angles = np.full((t, t), np.inf)
    for i in range(t):
        for j in range(t):
            if tp.parts[i] == wp.parts[j]:
                angles[i, j] = subspace_angle(v_blocks[i], w_blocks[j])
    best = np.inf
    for assign in _size_matched_assignments(tp.parts, wp.parts):
        worst = max(angles[i, assign[i]] for i in range(t))
        best = min(best, worst)
    return float(best)


def _size_matched_assignments(true_sizes, w_sizes):
    """All bijections true-block -> w-block preserving block size."""
    by_size = {}
    for j, size in enumerate(w_sizes):
        by_size.setdefault(size, []).append(j)
    groups = {}
    for i, size in enumerate(true_sizes):
        groups.setdefault(size, []).append(i)
    sizes = list(groups)
    pools = [itertools.permutations(by_size[s]) for s in sizes]
    for combo in itertools.product(*pools):
        assign = [0] * len(true_sizes)
        for s, perm in zip(sizes, combo):
            for i, j in zip(groups[s], perm):
                assign[i] = j
        yield assign


def theta_max_angle(w_true: np.ndarray, w_hat: np.ndarray, partition) -> float:
    """Max per-block angle between two diagonalizers, blocks paired in order."""
    part = partition if isinstance(partition, Partition) \
        else Partition(tuple(partition))
    return max(subspace_angle(tb, hb) for tb, hb
               in zip(_blocks(np.asarray(w_true), part),
                      _blocks(np.asarray(w_hat), part)))


def partition_consistent_strict(true_partition, computed_partition) -> bool:
    """Same multiset of block sizes."""
    return sorted(tuple(true_partition)) == sorted(tuple(computed_partition))


def partition_merge_consistent(true_partition, computed_partition) -> bool:
    """Computed blocks can be grouped so the group sums are the true sizes.

    This accepts partitions finer than the truth (each computed block is
    used exactly once) and rejects coarser or incompatible ones.
    """
    true_sizes = sorted(tuple(true_partition), reverse=True)
    computed = sorted(tuple(computed_partition), reverse=True)
    if sum(true_sizes) != sum(computed):
        return False

    def place(remaining, targets):
        if not remaining:
            return all(t == 0 for t in targets)
        size = remaining[0]
        seen = set()
        for k, t in enumerate(targets):
            if size <= t and t not in seen:
                seen.add(t)
                targets[k] -= size
                if place(remaining[1:], targets):
                    targets[k] += size
                    return True
                targets[k] += size
        return False

    return place(computed, list(true_sizes))


def quality_report(v_inv: np.ndarray, true_partition, w_mat: np.ndarray,
                   w_partition, cost: float) -> QualityReport:
    """Bundle all quality measures; mismatched partitions give a failed row."""
    tp = true_partition if isinstance(true_partition, Partition) \
        else Partition(tuple(true_partition))
    wp = w_partition if isinstance(w_partition, Partition) \
        else Partition(tuple(w_partition))
    strict = partition_consistent_strict(tp.parts, wp.parts)
    merge = partition_merge_consistent(tp.parts, wp.parts)
    if strict:
        pi = performance_index(v_inv, w_mat, tp, wp)
    else:
        pi = float("nan")
    if tp.parts == wp.parts:
        theta = theta_max_angle(v_inv, w_mat, tp)
    else:
        theta = float("nan")
    return QualityReport(pi=pi, theta=theta, cond_w=condition_2(w_mat),
                         cost=float(cost), success=strict,
                         success_merge=merge)
