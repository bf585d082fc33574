"""Matrix set construction, polynomial evaluation, companion pencil."""

import numpy as np
import pytest

from gjbd import (DegreeTooLow, MatrixSet, Partition, evaluate, fixture,
                  linearize, solve_pencil)
from gjbd.eigsel import is_infinite

from conftest import rand_matrixset


class TestPartition:
    def test_valid(self):
        part = Partition((2, 3, 4))
        assert part.n == 9
        assert part.cardinality == 3
        assert [s.stop - s.start for s in part.slices()] == [2, 3, 4]

    def test_rejects_bad_entries(self):
        with pytest.raises(ValueError):
            Partition((0, 3))
        with pytest.raises(ValueError):
            Partition(())


class TestMatrixSet:
    def test_shape_validation(self):
        with pytest.raises(ValueError):
            MatrixSet([np.ones((2, 3))])
        with pytest.raises(ValueError):
            MatrixSet([np.eye(2), np.eye(3)])
        with pytest.raises(ValueError):
            MatrixSet([])
        with pytest.raises(ValueError):
            MatrixSet([np.zeros((3, 3)), np.zeros((3, 3))])
        with pytest.raises(ValueError):
            MatrixSet([np.array([[np.nan, 0], [0, 1]])])

    def test_hermitian_detection(self, rng):
        herm = rand_matrixset(rng, 4, 2, hermitian=True)
        assert herm.hermitian
        # a relative perturbation of 1e-13 stays within the tolerance
        mats = [np.array(a) for a in herm.coeffs]
        mats[0] = mats[0] + 1e-14 * np.linalg.norm(mats[0]) * 1j
        assert MatrixSet(mats).hermitian
        assert not rand_matrixset(rng, 4, 2).hermitian

    def test_is_real(self, rng):
        assert rand_matrixset(rng, 3, 1, complex_entries=False).is_real
        assert not rand_matrixset(rng, 3, 1).is_real


class TestEvaluate:
    def test_at_zero_returns_constant_term(self, rng):
        ms = rand_matrixset(rng, 4, 3)
        np.testing.assert_array_equal(evaluate(ms, 0.0), ms.coeffs[0])

    def test_printed_eigenpair_residual(self):
        # Fixture pool column 2 pairs with eigenvalue 3; the 4-decimal data
        # bounds the achievable residual.
        fx = fixture("sec2-3x3")
        x2 = fx.aux["x_pool"][:, 1]
        p3 = evaluate(fx.ms, 3.0)
        assert np.linalg.norm(p3 @ x2) <= 5e-4 * np.linalg.norm(p3, 2)

    def test_matches_term_sum(self, rng):
        ms = rand_matrixset(rng, 5, 2)
        direct = ms.coeffs[0] + 2 * ms.coeffs[1] + 4 * ms.coeffs[2]
        np.testing.assert_allclose(evaluate(ms, 2.0), direct, rtol=1e-13)

    def test_linear_in_matrix_set(self, rng):
        for seed in range(20):
            local = np.random.default_rng(seed)
            a = rand_matrixset(local, 4, 2)
            b = rand_matrixset(local, 4, 2)
            summed = MatrixSet([x + y for x, y in zip(a.coeffs, b.coeffs)])
            lam = complex(local.standard_normal(), local.standard_normal())
            np.testing.assert_allclose(
                evaluate(summed, lam),
                evaluate(a, lam) + evaluate(b, lam), atol=1e-10)


class TestLinearize:
    def test_degree_one_is_the_pencil_itself(self, rng):
        ms = rand_matrixset(rng, 4, 1)
        pencil = linearize(ms)
        np.testing.assert_array_equal(pencil.m_mat, ms.coeffs[1])
        np.testing.assert_array_equal(pencil.n_mat, ms.coeffs[0])

    def test_structure(self, rng):
        n, p = 3, 3
        ms = rand_matrixset(rng, n, p)
        pencil = linearize(ms)
        assert pencil.m_mat.shape == (n * p, n * p)
        assert pencil.n_mat.shape == (n * p, n * p)
        # M: identity blocks then A_p
        np.testing.assert_array_equal(pencil.m_mat[:n * (p - 1), :n * (p - 1)],
                                      np.eye(n * (p - 1)))
        np.testing.assert_array_equal(pencil.m_mat[n * (p - 1):, n * (p - 1):],
                                      ms.coeffs[p])
        # N: -I superdiagonal, last block row [A_0 ... A_{p-1}]
        for q in range(p - 1):
            np.testing.assert_array_equal(
                pencil.n_mat[q * n:(q + 1) * n, (q + 1) * n:(q + 2) * n],
                -np.eye(n))
        for i in range(p):
            np.testing.assert_array_equal(
                pencil.n_mat[n * (p - 1):, i * n:(i + 1) * n], ms.coeffs[i])

    def test_rejects_single_matrix(self):
        with pytest.raises(DegreeTooLow):
            linearize(MatrixSet([np.eye(3)]))

    def test_determinant_identity(self, rng):
        # det(lam*M + N) == det(P(lam)) pointwise; sample points away from
        # eigenvalues keep both determinants well scaled.
        ms = rand_matrixset(rng, 4, 3)
        pencil = linearize(ms)
        for _ in range(10):
            lam = complex(rng.standard_normal(), rng.standard_normal())
            lhs = np.linalg.det(lam * pencil.m_mat + pencil.n_mat)
            rhs = np.linalg.det(evaluate(ms, lam))
            assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), abs(rhs))

    def test_printed_eigenvalues(self):
        fx = fixture("sec2-3x3")
        pairs = solve_pencil(linearize(fx.ms))
        computed = np.array([lam for lam, _ in pairs])
        for ref in fx.aux["eigenvalues"]:
            assert np.min(np.abs(computed - ref)) <= 5e-4


def test_pencil_eigenpair_residual_bound():
    # Leading block of each finite pencil eigenvector solves the polynomial
    # problem to a scaled residual of 1e-8.
    checked = 0
    for seed in range(100):
        local = np.random.default_rng(seed)
        n = int(local.integers(2, 7))
        p = int(local.integers(1, 4))
        ms = rand_matrixset(local, n, p)
        norms = [np.linalg.norm(a, 2) for a in ms.coeffs]
        for lam, u in solve_pencil(linearize(ms)):
            if is_infinite(lam):
                continue
            x = u[:n]
            scale = sum(abs(lam) ** i * norms[i] for i in range(p + 1))
            resid = np.linalg.norm(evaluate(ms, lam) @ x)
            assert resid <= 1e-8 * scale * np.linalg.norm(x), \
                f"seed {seed}: residual {resid:.2e} vs scale {scale:.2e}"
            checked += 1
    assert checked >= 100
