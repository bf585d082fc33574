"""Block-structure detection from the interaction graph of a basis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matpoly import MatrixSet, Partition

# Laplacian eigenvalues below ZERO_RTOL * lambda_max count as zero.
ZERO_RTOL = 1e-8


class InconsistentClustering(RuntimeError):
    """Connected components and k-means disagree on the cluster labeling.

    Carries the components-based result (``structure``) so callers can
    proceed with the exact labeling, plus the k-means labels for diagnosis.
    """

    def __init__(self, structure, kmeans_labels):
        self.structure = structure
        self.kmeans_labels = tuple(int(x) for x in kmeans_labels)
        super().__init__(
            f"k-means labels {self.kmeans_labels} disagree with connected "
            f"components {structure.partition.parts}")


@dataclass(frozen=True)
class BlockStructure:
    """Detected partition plus the column permutation that groups blocks.

    ``perm`` holds 0-based column indices; applying X[:, perm] makes the
    transformed matrices (approximately) block diagonal with the detected
    ``partition``.  Clusters are ordered by smallest member index so the
    permutation is deterministic.
    """

    partition: Partition
    perm: tuple[int, ...]
    laplacian_spectrum: np.ndarray
    n_zero: int


def interaction_matrix(ms: MatrixSet, x_mat: np.ndarray) -> np.ndarray:
    """Symmetric nonnegative coupling strengths between basis columns.

    H = sum_i (|X^H A_i X| + |X^H A_i^H X|) with entrywise absolute values;
    entries coupling columns from different blocks vanish on exact data.
    """
    h = np.zeros((ms.n, ms.n))
    xh = x_mat.conj().T
    for a in ms.coeffs:
        b = np.abs(xh @ a @ x_mat)
        h += b + b.T
    return h


def laplacian(h_mat: np.ndarray) -> np.ndarray:
    """Combinatorial graph Laplacian of the thresholded interaction matrix.

    The directional test compares h_ij against the mean of column j; the
    undirected edge {i, j} exists iff h_ij strictly exceeds the geometric
    mean of the two directional thresholds.  This symmetrization keeps
    weakly scaled columns attached to their block (no splits on exact
    data) while rejecting borderline one-directional couplings that merge
    blocks under noise.  Strict inequality means a perfectly uniform H
    yields the empty graph (all-singleton partition).
    """
    h = np.asarray(h_mat, dtype=float)
    n = h.shape[0]
    col_mean = h.sum(axis=0) / n
    adj = h > np.sqrt(np.outer(col_mean, col_mean))
    np.fill_diagonal(adj, False)
    lap = np.diag(adj.sum(axis=1).astype(float)) - adj.astype(float)
    return lap


def adjacency_of(lap: np.ndarray) -> np.ndarray:
    """Recover the boolean adjacency matrix from a combinatorial Laplacian."""
    adj = lap < -0.5
    np.fill_diagonal(adj, False)
    return adj


def connected_components(adj: np.ndarray) -> np.ndarray:
    """Label vertices by connected component (labels in first-seen order)."""
    n = adj.shape[0]
    labels = -np.ones(n, dtype=int)
    current = 0
    for start in range(n):
        if labels[start] >= 0:
            continue
        stack = [start]
        labels[start] = current
        while stack:
            v = stack.pop()
            for w in np.nonzero(adj[v])[0]:
                if labels[w] < 0:
                    labels[w] = current
                    stack.append(int(w))
        current += 1
    return labels


def detect_blocks(lap: np.ndarray, tol_zero: float = ZERO_RTOL,
                  clusterer: str = "components", seed: int = 0) -> BlockStructure:
    """Partition and permutation from the Laplacian's zero eigenspace.

    The number of blocks is the multiplicity of the zero eigenvalue
    (relative threshold ``tol_zero``).  Cluster membership comes from the
    connected components of the thresholded graph; with
    ``clusterer="kmeans"`` a seeded k-means++ run on the rows of the
    zero-eigenvector matrix is computed as well and must agree, otherwise
    InconsistentClustering is raised (carrying the components result).
    """
    if clusterer not in ("components", "kmeans"):
        raise ValueError(f"unknown clusterer {clusterer!r}")
    lap = np.asarray(lap, dtype=float)
    n = lap.shape[0]
    evals, evecs = np.linalg.eigh(lap)
    scale = evals[-1] if evals[-1] > 0 else 1.0
    n_zero = int(np.sum(evals <= tol_zero * scale))
    labels = connected_components(adjacency_of(lap))
    structure = _structure_from_labels(labels, evals, n_zero)
    if clusterer == "kmeans":
        rng = np.random.Generator(np.random.Philox(seed))
        km_labels = _kmeans(evecs[:, :n_zero], n_zero, rng)
        if _as_partition_sets(km_labels, n) != _as_partition_sets(labels, n):
            raise InconsistentClustering(structure, km_labels)
    return structure


def _structure_from_labels(labels, evals, n_zero):
    n = len(labels)
    clusters = {}
    for idx in range(n):
        clusters.setdefault(labels[idx], []).append(idx)
    ordered = sorted(clusters.values(), key=lambda members: members[0])
    perm = tuple(i for members in ordered for i in members)
    partition = Partition(tuple(len(members) for members in ordered))
    return BlockStructure(partition=partition, perm=perm,
                          laplacian_spectrum=np.sort(evals), n_zero=n_zero)


def _as_partition_sets(labels, n):
    clusters = {}
    for idx in range(n):
        clusters.setdefault(labels[idx], set()).add(idx)
    return frozenset(frozenset(members) for members in clusters.values())


def _kmeans(rows: np.ndarray, k: int, rng, n_init: int = 10,
            max_iter: int = 100) -> np.ndarray:
    """Plain k-means with k-means++ seeding, deterministic given rng state."""
    rows = np.asarray(rows, dtype=float)
    n = rows.shape[0]
    if k <= 1:
        return np.zeros(n, dtype=int)
    if k >= n:
        return np.arange(n, dtype=int)
    best_labels, best_inertia = None, np.inf
    for _ in range(n_init):
        centers = _kmeanspp_init(rows, k, rng)
        labels = None
        for _it in range(max_iter):
            dist = ((rows[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
            new_labels = np.argmin(dist, axis=1)
            if labels is not None and np.array_equal(new_labels, labels):
                break
            labels = new_labels
            for c in range(k):
                members = rows[labels == c]
                if len(members):
                    centers[c] = members.mean(axis=0)
        dist = ((rows[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        inertia = dist[np.arange(n), labels].sum()
        if inertia < best_inertia - 1e-15:
            best_inertia, best_labels = inertia, labels
    return best_labels


def _kmeanspp_init(rows, k, rng):
    n = rows.shape[0]
    centers = np.empty((k, rows.shape[1]))
    centers[0] = rows[rng.integers(n)]
    closest = ((rows - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = closest.sum()
        if total <= 0:
            centers[c] = rows[rng.integers(n)]
            continue
        probs = closest / total
        centers[c] = rows[rng.choice(n, p=probs)]
        closest = np.minimum(closest, ((rows - centers[c]) ** 2).sum(axis=1))
    return centers
