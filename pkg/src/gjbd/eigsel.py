"""Eigenvector pool of the companion pencil and conditioned basis selection."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .matpoly import CompanionPencil, MatrixSet

# |alpha| <= INF_EIGVAL_RTOL * (|alpha| + |beta|) marks a pencil eigenvalue
# as infinite (alpha is the coefficient on the M side).
INF_EIGVAL_RTOL = 1e-14

# Default relative rank threshold: |R(n,n)| must exceed
# RANK_RTOL_FACTOR * n * eps * |R(1,1)|.
RANK_RTOL_FACTOR = 64

INFINITE = complex(np.inf, 0.0)


class SchurFailure(RuntimeError):
    """The QZ reduction of the pencil did not converge."""


class NearlyDependent(RuntimeError):
    """No numerically nonsingular basis can be drawn from the candidate pool.

    The remedy of computing more eigenvectors does not apply to the dense
    path, which already uses all np of them, so callers should treat this
    as final for the given input.
    """


class ZeroBlock(UserWarning):
    """A pencil eigenvector had no usable block; the pair was dropped."""


@dataclass(frozen=True)
class EigenBasis:
    """n selected unit-norm polynomial eigenvectors with QR diagnostics.

    ``pivot`` is the full column-pivot order over the candidate pool (as
    passed in); the basis columns are the first n pivots in pivot order.
    ``lambdas`` may contain the infinite marker (inf+0j).
    """

    x_mat: np.ndarray
    lambdas: np.ndarray
    r_nn: float
    pivot: tuple[int, ...]
    pool_size: int

    @property
    def cond(self) -> float:
        return float(np.linalg.cond(self.x_mat))


def is_infinite(lam) -> bool:
    return bool(np.isinf(lam))


def solve_pencil(pencil: CompanionPencil):
    """All generalized eigenpairs of (M, N), infinite eigenvalues marked.

    Returns a list of (eigenvalue, eigenvector) with the eigenvector of
    length n*p.  Eigenvalues come from the homogeneous pairs of the dense
    QZ solve; a pair whose M-side coefficient is negligible (or whose ratio
    is not finite) yields the marker inf+0j.
    """
    try:
        w, vr = sla.eig(pencil.n_mat, pencil.m_mat, right=True,
                        homogeneous_eigvals=True, check_finite=False)
    except np.linalg.LinAlgError as exc:  # non-converged QZ sweep
        raise SchurFailure(f"QZ iteration failed on the {pencil.n * pencil.p}"
                           f"x{pencil.n * pencil.p} pencil: {exc}") from exc
    # scipy convention: n_mat @ u = (w[0]/w[1]) * m_mat @ u, so the pencil
    # eigenvalue of lam*M + N is lam = -w[0]/w[1], infinite when w[1] ~ 0.
    num, den = w[0], w[1]
    pairs = []
    for j in range(len(num)):
        infinite = abs(den[j]) <= INF_EIGVAL_RTOL * (abs(num[j]) + abs(den[j]))
        lam = INFINITE if infinite else complex(-num[j] / den[j])
        if not infinite and not np.isfinite(lam):
            lam = INFINITE
        pairs.append((lam, vr[:, j]))
    return pairs


def extract_pep_vectors(pairs, n: int, p: int):
    """Recover unit polynomial eigenvectors from pencil eigenvectors.

    Each pencil eigenvector stacks the blocks lam**q * x for q = 0..p-1;
    the block of largest norm is read off and rescaled by lam**(-q), which
    never divides by a small power.  For infinite eigenvalues the dominant
    block is a null vector of A_p and is kept as-is.  Vectors whose every
    block is negligible are dropped with a ZeroBlock warning.
    """
    out = []
    for lam, u in pairs:
        blocks = np.asarray(u).reshape(p, n)
        norms = np.linalg.norm(blocks, axis=1)
        q = int(np.argmax(norms))
        if norms[q] <= 1e-14:
            warnings.warn("pencil eigenvector with all blocks ~ 0 dropped",
                          ZeroBlock, stacklevel=2)
            continue
        x = blocks[q]
        if not is_infinite(lam) and q > 0:
            x = x / lam ** q
        out.append((lam, x / np.linalg.norm(x)))
    return out


def scaled_residuals(ms: MatrixSet, candidates) -> np.ndarray:
    """Residual ||P(lam) x|| / (sum_i |lam|**i ||A_i||_2) per candidate.

    Infinite eigenvalues are scored by the null-structure residual
    ||A_p x|| / ||A_p||_2.  Candidates are assumed unit norm.
    """
    norms2 = np.array([np.linalg.norm(a, 2) for a in ms.coeffs])
    res = np.empty(len(candidates))
    lams = np.array([lam for lam, _ in candidates], dtype=np.complex128)
    x_all = np.column_stack([x for _, x in candidates]) \
        if candidates else np.empty((ms.n, 0), dtype=np.complex128)
    finite = ~np.isinf(lams)
    if np.any(finite):
        lam_f = lams[finite]
        x_f = x_all[:, finite]
        # Horner across all finite candidates at once.
        acc = ms.coeffs[-1] @ x_f
        for a in ms.coeffs[-2::-1]:
            acc = acc * lam_f[np.newaxis, :] + a @ x_f
        powers = np.abs(lam_f)[np.newaxis, :] ** np.arange(ms.p + 1)[:, np.newaxis]
        res[finite] = np.linalg.norm(acc, axis=0) / (norms2 @ powers)
    if np.any(~finite):
        scale = norms2[-1] if norms2[-1] > 0 else 1.0
        res[~finite] = np.linalg.norm(ms.coeffs[-1] @ x_all[:, ~finite],
                                      axis=0) / scale
    return res


def select_basis(candidates, n: int, tol_rank: float | None = None) -> EigenBasis:
    """Pick n well-conditioned columns from the pool by pivoted QR.

    ``tol_rank`` is a relative factor: the basis is accepted iff
    |R(n,n)| > tol_rank * |R(1,1)|; the default is 64 * n * eps.  Pivot
    tie-breaking is LAPACK's (first-come on equal norms), so the result is
    reproducible for a fixed candidate order.
    """
    k = len(candidates)
    if k < n:
        raise NearlyDependent(f"candidate pool has {k} vectors, need {n}")
    arr = np.column_stack([x for _, x in candidates])
    _, r, piv = sla.qr(arr, mode="economic", pivoting=True)
    rdiag = np.abs(np.diag(r))
    if tol_rank is None:
        tol_rank = RANK_RTOL_FACTOR * n * np.finfo(float).eps
    r_nn = float(rdiag[n - 1]) if rdiag.size >= n else 0.0
    if r_nn <= tol_rank * rdiag[0]:
        raise NearlyDependent(
            f"pivoted QR found only rank {int(np.sum(rdiag > tol_rank * rdiag[0]))}"
            f" in a pool of {k}; |R(n,n)|={r_nn:.3e} below threshold")
    sel = piv[:n]
    x_mat = arr[:, sel].copy()
    lambdas = np.array([candidates[i][0] for i in sel], dtype=np.complex128)
    return EigenBasis(x_mat=x_mat, lambdas=lambdas, r_nn=r_nn,
                      pivot=tuple(int(i) for i in piv), pool_size=k)
