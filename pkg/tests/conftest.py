"""Shared builders for randomized test cases."""

import numpy as np
import pytest

from gjbd import MatrixSet, Partition, random_instance


def rand_matrixset(rng, n, p, complex_entries=True, hermitian=False):
    """A dense random matrix set of order n and degree p."""
    mats = []
    for _ in range(p + 1):
        a = rng.standard_normal((n, n))
        if complex_entries:
            a = a + 1j * rng.standard_normal((n, n))
        if hermitian:
            a = a + a.conj().T
        mats.append(a)
    return MatrixSet(mats)


def rand_partition(rng, n, max_block=None):
    """A random partition of n, optionally capping the block size."""
    parts = []
    left = n
    while left:
        hi = left if max_block is None else min(left, max_block)
        k = int(rng.integers(1, hi + 1))
        parts.append(k)
        left -= k
    return Partition(tuple(parts))


def exact_instance(seed, n=6, partition=(1, 2, 3), p=2, real_valued=False):
    """Noise-free model instance (off-block parts exactly zero)."""
    return random_instance(n, partition, p, np.inf, seed,
                           real_valued=real_valued)


def orthonormalize_blocks(w_mat, partition):
    """QR-orthonormalize every diagonal block's columns."""
    out = np.array(w_mat, dtype=complex)
    for s in partition.slices():
        out[:, s] = np.linalg.qr(out[:, s])[0]
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
