"""Matrix sets, their matrix polynomial, and the companion pencil."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Relative Frobenius tolerance used to auto-detect Hermitian input.
HERMITIAN_RTOL = 1e-12


class DegreeTooLow(ValueError):
    """Raised when an operation requires polynomial degree p >= 1."""


@dataclass(frozen=True)
class Partition:
    """An ordered tuple of positive block sizes summing to the matrix order."""

    parts: tuple[int, ...]

    def __post_init__(self):
        parts = tuple(int(x) for x in self.parts)
        if not parts:
            raise ValueError("partition must contain at least one block")
        if any(x < 1 for x in parts):
            raise ValueError(f"partition entries must be >= 1, got {parts}")
        object.__setattr__(self, "parts", parts)

    @property
    def n(self) -> int:
        return sum(self.parts)

    @property
    def cardinality(self) -> int:
        return len(self.parts)

    def slices(self) -> list[slice]:
        """Column/row slices of the consecutive diagonal blocks."""
        edges = np.concatenate([[0], np.cumsum(self.parts)])
        return [slice(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:])]

    def __iter__(self):
        return iter(self.parts)

    def __len__(self):
        return len(self.parts)


class MatrixSet:
    """A set {A_0, ..., A_p} of dense square matrices of common order n.

    The set is identified with the coefficient list of the degree-p matrix
    polynomial ``P(lam) = sum_i lam**i A_i``.  Matrices are stored as a
    read-only complex array of shape (p+1, n, n).

    The ``hermitian`` flag is detected from the data, never declared: it is
    True iff every matrix equals its conjugate transpose to a relative
    Frobenius tolerance of 1e-12.  A false negative only costs extra work
    downstream, never correctness.
    """

    def __init__(self, matrices):
        mats = []
        for i, m in enumerate(matrices):
            arr = np.asarray(m, dtype=np.complex128)
            if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
                raise ValueError(f"matrix {i} is not square: shape {arr.shape}")
            if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
                raise ValueError(f"matrix {i} contains non-finite entries")
            mats.append(arr)
        if not mats:
            raise ValueError("matrix set must contain at least one matrix")
        n = mats[0].shape[0]
        if any(m.shape[0] != n for m in mats):
            raise ValueError("all matrices must share the same order")
        coeffs = np.stack(mats)
        if not np.any(coeffs):
            raise ValueError("matrix set must contain at least one nonzero matrix")
        coeffs.setflags(write=False)
        self.coeffs = coeffs
        self.n = n
        self.p = len(mats) - 1
        self.hermitian = all(_is_hermitian(m) for m in mats)

    @property
    def matrices(self) -> tuple[np.ndarray, ...]:
        return tuple(self.coeffs)

    @property
    def is_real(self) -> bool:
        """True iff every entry has exactly zero imaginary part."""
        return bool(np.all(self.coeffs.imag == 0))

    def __repr__(self):
        return (f"MatrixSet(n={self.n}, p={self.p}, "
                f"hermitian={self.hermitian})")


def _is_hermitian(mat) -> bool:
    scale = np.linalg.norm(mat, "fro")
    if scale == 0:
        return True
    return np.linalg.norm(mat - mat.conj().T, "fro") <= HERMITIAN_RTOL * scale


@dataclass(frozen=True)
class CompanionPencil:
    """The np-by-np pencil lam*M + N linearizing the matrix polynomial.

    M is block diagonal with p-1 identity blocks followed by A_p; N carries
    -I blocks on the block superdiagonal and [A_0 ... A_{p-1}] in the last
    block row.  An eigenpair (lam, x) of the polynomial corresponds to the
    pencil eigenvector u = [x; lam*x; ...; lam**(p-1) * x].
    """

    m_mat: np.ndarray
    n_mat: np.ndarray
    n: int
    p: int


def evaluate(ms: MatrixSet, lam: complex) -> np.ndarray:
    """Evaluate the matrix polynomial at a scalar by Horner recurrence."""
    acc = np.array(ms.coeffs[-1], dtype=np.complex128)
    for a in ms.coeffs[-2::-1]:
        acc = lam * acc + a
    return acc


def linearize(ms: MatrixSet) -> CompanionPencil:
    """Build the companion pencil (M, N) of a degree >= 1 matrix set."""
    if ms.p < 1:
        raise DegreeTooLow(
            "a single matrix has no companion pencil; degree p >= 1 required")
    n, p = ms.n, ms.p
    m_mat = np.eye(n * p, dtype=np.complex128)
    m_mat[(p - 1) * n:, (p - 1) * n:] = ms.coeffs[p]
    n_mat = np.zeros((n * p, n * p), dtype=np.complex128)
    eye = np.eye(n)
    for q in range(p - 1):
        n_mat[q * n:(q + 1) * n, (q + 1) * n:(q + 2) * n] = -eye
    n_mat[(p - 1) * n:, :] = np.hstack([ms.coeffs[i] for i in range(p)])
    return CompanionPencil(m_mat=m_mat, n_mat=n_mat, n=n, p=p)
