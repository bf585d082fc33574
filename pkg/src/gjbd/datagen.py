"""Benchmark data: the random block model, SNR handling, bundled fixtures."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .matpoly import MatrixSet, Partition


class UnknownFixture(KeyError):
    """Requested fixture name is not one of the bundled problems."""


@dataclass(frozen=True)
class ProblemInstance:
    """A generated benchmark problem with its ground truth.

    The model is A_i = V^H D_i V with the D_i approximately block diagonal:
    block entries are standard normal per real/imaginary part, off-block
    entries are normal with standard deviation sigma = 10**(-snr_db/20).
    The ground-truth diagonalizer (up to equivalence) is inv(V).
    """

    ms: MatrixSet
    v_mix: np.ndarray
    true_partition: Partition
    snr_db: float
    seed: int
    real_valued: bool
    d_mats: np.ndarray

    @property
    def true_unmixing(self) -> np.ndarray:
        return np.linalg.inv(self.v_mix)


@dataclass(frozen=True)
class Fixture:
    """A bundled worked problem with its known solutions.

    ``known_solutions`` pairs a partition with a diagonalizer; ``aux``
    carries extra reference arrays (eigenvector pools, factors) used by the
    demonstration tests.
    """

    name: str
    ms: MatrixSet
    known_solutions: tuple[tuple[Partition, np.ndarray], ...]
    notes: str
    aux: dict = field(default_factory=dict)


def sigma_of_snr(snr_db: float) -> float:
    """Off-block noise standard deviation for a given SNR in dB."""
    if np.isinf(snr_db):
        return 0.0
    return float(10.0 ** (-snr_db / 20.0))


def snr_of_sigma(sigma: float) -> float:
    if sigma == 0.0:
        return float(np.inf)
    return float(-20.0 * np.log10(sigma))


def derive_seed(master_seed: int, *key: int) -> int:
    """Per-trial seed from a master seed and index path.

    Uses numpy's SeedSequence spawning (a counter-based splitmix-style
    hash), so parallel benchmark runs are reproducible regardless of
    scheduling order.
    """
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(key))
    return int(ss.generate_state(1, np.uint64)[0])


def random_instance(n: int, partition, p: int, snr_db: float, seed: int,
                    real_valued: bool = False) -> ProblemInstance:
    """Draw one problem from the random block model, fully seeded.

    The generator is Philox (counter based) keyed by ``seed``; the draw
    order is fixed (V, then block parts of all D_i, then off-block parts)
    and the off-block draw happens even at sigma = 0, so instances at
    different SNRs with the same seed share their exact part.
    """
    part = partition if isinstance(partition, Partition) \
        else Partition(tuple(partition))
    if part.n != n:
        raise ValueError(f"partition {part.parts} does not sum to n={n}")
    if p < 1:
        raise ValueError("model degree p must be >= 1")
    sigma = sigma_of_snr(snr_db)
    rng = np.random.Generator(np.random.Philox(seed))

    def draw(shape):
        if real_valued:
            return rng.standard_normal(shape)
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

    v = draw((n, n))
    block_mask = np.zeros((n, n), dtype=bool)
    for s in part.slices():
        block_mask[s, s] = True
    d_block = draw((p + 1, n, n))
    d_off = draw((p + 1, n, n))
    d_mats = np.where(block_mask, d_block, sigma * d_off)
    vh = v.conj().T
    a_mats = [vh @ d @ v for d in d_mats]
    return ProblemInstance(ms=MatrixSet(a_mats), v_mix=v, true_partition=part,
                           snr_db=float(snr_db), seed=int(seed),
                           real_valued=bool(real_valued), d_mats=d_mats)


FIXTURE_NAMES = ("sec2-3x3", "ex41-complex", "sec44-counterexample")


def fixture(name: str) -> Fixture:
    """One of the bundled demonstration problems, by name."""
    try:
        builder = _FIXTURE_BUILDERS[name]
    except KeyError:
        raise UnknownFixture(
            f"unknown fixture {name!r}; choose from {FIXTURE_NAMES}") from None
    return builder()


def _fixture_sec2() -> Fixture:
    a0 = np.array([[7, 8, 9], [4, -12, -8], [5, -4, 7]], dtype=float)
    a1 = np.array([[-8, 8, 8], [-4, 4, 0], [-4, 12, 0]], dtype=float)
    a2 = np.array([[5, 0, 3], [-8, 4, -4], [-5, 4, 1]], dtype=float)
    # Unit eigenvector pool and eigenvalues of the quadratic polynomial,
    # to four printed decimals.
    x_pool = np.array([
        [-0.1690, -0.5774, 0.3981 + 0.4094j, 0.3981 - 0.4094j, -0.5774, 0.4904],
        [-0.9710, -0.5774, 0.1108 + 0.5792j, 0.1108 - 0.5792j, -0.5774, -0.7205],
        [-0.1690, 0.5774, 0.3981 + 0.4094j, 0.3981 - 0.4094j, 0.5774, 0.4904],
    ])
    eigenvalues = np.array([-3.5830, 3.0000, -0.5283 + 1.3793j,
                            -0.5283 - 1.3793j, 1.0000, 0.6396])
    w_known = x_pool[:, [1, 0, 5]]
    return Fixture(
        name="sec2-3x3",
        ms=MatrixSet([a0, a1, a2]),
        known_solutions=((Partition((1, 2)), w_known),),
        notes=("Three real 3x3 matrices whose quadratic polynomial has six "
               "simple eigenvalues; picking pool columns [2, 1, 6] gives a "
               "(1, 2)-block diagonalizer."),
        aux={"x_pool": x_pool, "eigenvalues": eigenvalues},
    )


def _fixture_ex41() -> Fixture:
    v = np.array([
        [0.5377 + 2.7694j, 0.8622 + 0.7254j, -0.4336 - 0.2050j],
        [1.8339 - 1.3499j, 0.3188 - 0.0631j, 0.3426 - 0.1241j],
        [-2.2588 + 3.0349j, -1.3077 + 0.7147j, 3.5784 + 1.4897j],
    ])
    d_mats = np.array([
        [[0.2939 - 0.7873j, 0.0137 + 0.0044j, -0.0171 + 0.0038j],
         [0.0032 - 0.0086j, 0.8884 - 2.9443j, -1.0689 + 0.3252j],
         [0.0031 - 0.0003j, -1.1471 + 1.4384j, -0.8095 - 0.7549j]],
        [[-0.1649 + 0.6277j, -0.0077 + 0.0022j, 0.0037 + 0.0075j],
         [-0.0109 + 0.0055j, 1.0933 - 1.2141j, -0.8637 - 0.0068j],
         [0.0003 + 0.0110j, 1.1093 - 1.1135j, 0.0774 + 1.5326j]],
        [[1.5442 + 0.0859j, -0.0076 + 0.0025j, -0.0140 + 0.0062j],
         [-0.0018 + 0.0142j, -1.4916 - 0.6156j, -1.0616 - 0.1924j],
         [-0.0020 + 0.0029j, -0.7423 + 0.7481j, 2.3505 + 0.8886j]],
    ])
    x_pool = np.array([
        [-0.5269 - 0.3384j, -0.3566 + 0.4066j, 0.0646 - 0.5182j,
         0.1636 - 0.3165j, -0.2841 + 0.2244j, 0.4363 - 0.4082j],
        [-0.1210 - 0.7587j, -0.8248 + 0.0209j, 0.0578 - 0.7205j,
         0.7059 + 0.6000j, -0.4017 - 0.8314j, 0.7443 - 0.1520j],
        [-0.1247 + 0.0436j, -0.0681 + 0.1491j, -0.4029 - 0.2062j,
         0.0065 - 0.1214j, -0.0599 + 0.1128j, -0.0381 - 0.2541j],
    ])
    a_mats = [v @ d @ v.conj().T for d in d_mats]
    w_true = np.linalg.inv(v).conj().T
    return Fixture(
        name="ex41-complex",
        ms=MatrixSet(a_mats),
        known_solutions=((Partition((1, 2)), w_true),),
        notes=("Complex 3x3 set built as V D_i V^H with nearly "
               "(1, 2)-block-diagonal D_i; the reference diagonalizer is "
               "inv(V)^H.  The pool holds all six unit eigenvectors."),
        aux={"v": v, "d_mats": d_mats, "x_pool": x_pool},
    )


def _fixture_sec44() -> Fixture:
    a0 = np.array([[1, 1, 1], [1, 1, -3], [-3, 1, 1]], dtype=float)
    a1 = np.array([[3, -1, 1], [-1, 3, -3], [-3, 1, 3]], dtype=float)
    w_real = np.array([[1, 1, 0], [1, 0, 1], [0, 1, 1]], dtype=float)
    w_cplx = np.array([
        [1, 1 - 1j, 1 + 1j],
        [1, 1 + 1j, 1 - 1j],
        [0, 2, 2],
    ])
    return Fixture(
        name="sec44-counterexample",
        ms=MatrixSet([a0, a1]),
        known_solutions=((Partition((1, 2)), w_real),
                         (Partition((1, 1, 1)), w_cplx)),
        notes=("Real pair with two inequivalent exact solutions: a real "
               "(1, 2) diagonalizer and a complex (1, 1, 1) one.  No real "
               "(1, 1, 1) diagonalizer exists, so extracting a real matrix "
               "from the complex solution must fail loudly."),
    )


_FIXTURE_BUILDERS = {
    "sec2-3x3": _fixture_sec2,
    "ex41-complex": _fixture_ex41,
    "sec44-counterexample": _fixture_sec44,
}


def offblock_sigma_sample(instance: ProblemInstance) -> np.ndarray:
    """Flat real-valued sample of the off-block noise parts of the D's."""
    n = instance.ms.n
    mask = np.ones((n, n), dtype=bool)
    for s in instance.true_partition.slices():
        mask[s, s] = False
    vals = []
    for d in instance.d_mats:
        entries = d[mask]
        vals.append(entries.real)
        if not instance.real_valued:
            vals.append(entries.imag)
    return np.concatenate(vals)
