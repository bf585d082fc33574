"""End-to-end solve behavior and pipeline-level properties."""

import numpy as np
import pytest

from gjbd import (AssumptionAViolation, InconsistentClustering, MatrixSet,
                  NearlyDependent, Partition, RankCollapse, SolveOptions,
                  fixture, performance_index, solve)
from gjbd import blockreveal, eigsel, pipeline
from gjbd.refine import offblock_part

from conftest import exact_instance, rand_partition


class TestSolveFixture:
    def test_sec2_partition_and_residuals(self):
        fx = fixture("sec2-3x3")
        solution, trace = solve(fx.ms)
        assert sorted(solution.partition.parts) == [1, 2]
        for off, tot in solution.per_matrix_residuals:
            assert off <= 1e-8 * tot
        assert trace.post_refine_cost <= trace.pre_refine_cost + 1e-12

    def test_exact_instance_recovers_truth(self):
        inst = exact_instance(17, n=9, partition=(2, 3, 4), p=3)
        solution, _ = solve(inst.ms)
        assert sorted(solution.partition.parts) == [2, 3, 4]
        pi = performance_index(np.linalg.inv(inst.v_mix), solution.w_mat,
                               inst.true_partition, solution.partition)
        assert pi <= 1e-8

    def test_deterministic(self):
        inst = exact_instance(3, n=6, partition=(2, 4), p=2)
        s1, t1 = solve(inst.ms)
        s2, t2 = solve(inst.ms)
        assert s1.w_mat.tobytes() == s2.w_mat.tobytes()
        assert s1.partition.parts == s2.partition.parts
        assert s1.cost == s2.cost
        assert t1.basis_lambdas == t2.basis_lambdas

    def test_trace_contents(self):
        inst = exact_instance(4, n=6, partition=(3, 3), p=2)
        solution, trace = solve(inst.ms, SolveOptions(record_trace=True))
        assert trace.basis_r_nn > 0
        assert trace.basis_cond >= 1
        assert len(trace.basis_lambdas) == 6
        assert trace.w_pre is not None
        assert set(trace.stage_times_ms) == {"stage1", "stage2", "stage25",
                                             "stage3"}
        assert trace.structure.partition.parts == solution.partition.parts
        # without record_trace the pre-refinement W is not kept
        _, bare = solve(inst.ms)
        assert bare.w_pre is None


def equivalent_solutions(w_a, part_a, w_b, part_b, tol=1e-6):
    if sorted(part_a.parts) != sorted(part_b.parts):
        return False
    return performance_index(w_a, w_b, part_a, part_b.parts) <= tol


class TestSolutionEquivalence:
    def test_relabeling_gives_equivalent_solution(self):
        # Congruence by a permutation relabels graph vertices; solutions of
        # the relabeled set must match the relabeled original solution.
        for seed in range(100):
            local = np.random.default_rng(seed)
            n = int(local.integers(4, 8))
            part = rand_partition(local, n, max_block=3)
            inst = exact_instance(seed, n=n, partition=part.parts,
                                  p=int(local.integers(1, 4)))
            s1, _ = solve(inst.ms)
            q = local.permutation(n)
            relabeled = MatrixSet([a[np.ix_(q, q)] for a in inst.ms.coeffs])
            s2, _ = solve(relabeled)
            assert equivalent_solutions(s1.w_mat[q, :], s1.partition,
                                        s2.w_mat, s2.partition), f"seed {seed}"

    def test_reversed_candidate_order_equivalent(self):
        # A different admissible basis (reversed pool order) yields an
        # equivalent solution on exact instances.
        from gjbd import (extract_pep_vectors, interaction_matrix, laplacian,
                          detect_blocks, linearize, refine, select_basis,
                          solve_pencil)
        for seed in range(30):
            local = np.random.default_rng(seed)
            n = int(local.integers(4, 8))
            part = rand_partition(local, n, max_block=3)
            inst = exact_instance(1000 + seed, n=n, partition=part.parts, p=2)
            ms = inst.ms
            cands = extract_pep_vectors(solve_pencil(linearize(ms)), n, 2)
            sols = []
            for ordering in (cands, cands[::-1]):
                basis = select_basis(ordering, n)
                structure = detect_blocks(
                    laplacian(interaction_matrix(ms, basis.x_mat)))
                w = basis.x_mat[:, structure.perm]
                sols.append(refine(ms, structure.partition, w))
            a, b = sols
            assert equivalent_solutions(a.w_mat, a.partition,
                                        b.w_mat, b.partition), f"seed {seed}"


class TestRealPath:
    def test_want_real_on_real_exact_instance(self):
        inst = exact_instance(8, n=6, partition=(2, 4), p=2, real_valued=True)
        solution, trace = solve(inst.ms, SolveOptions(want_real=True))
        assert solution.is_real
        assert not np.iscomplexobj(solution.w_mat)
        assert not any("AssumptionA" in w for w in trace.warnings)
        for off, tot in solution.per_matrix_residuals:
            assert off <= 1e-10 * tot

    def test_want_real_cost_within_factor_ten(self):
        for seed in range(5):
            inst = exact_instance(40 + seed, n=7, partition=(3, 4), p=2,
                                  real_valued=True)
            complex_sol, _ = solve(inst.ms)
            real_sol, trace = solve(inst.ms, SolveOptions(want_real=True))
            violated = any("real diagonalizer cost" in w
                           for w in trace.warnings)
            scale = sum(t ** 2 for _, t in real_sol.per_matrix_residuals)
            assert violated or real_sol.cost <= \
                10 * max(complex_sol.cost, 1e-16 * scale) + 1e-12 * scale

    def test_want_real_ignored_on_complex_input(self):
        inst = exact_instance(9, n=5, partition=(2, 3), p=2)
        solution, trace = solve(inst.ms, SolveOptions(want_real=True))
        assert any("not all real" in w for w in trace.warnings)
        assert not solution.is_real


class TestDegenerateAndFailurePaths:
    def test_degree_zero_promotion(self, rng):
        a0 = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        solution, trace = solve(MatrixSet([a0]))
        assert any("degree-0" in w for w in trace.warnings)
        assert solution.partition.n == 4

    def test_rank_collapse_falls_back_to_unrefined(self, monkeypatch):
        inst = exact_instance(12, n=5, partition=(2, 3), p=2)

        def boom(*args, **kwargs):
            raise RankCollapse("synthetic")

        monkeypatch.setattr(pipeline.refine_mod, "refine", boom)
        solution, trace = solve(inst.ms)
        assert solution.refine_loops == 0
        assert any("refinement aborted" in w for w in trace.warnings)

    def test_inconsistent_clustering_uses_components(self, monkeypatch):
        inst = exact_instance(13, n=5, partition=(2, 3), p=2)
        real_detect = blockreveal.detect_blocks

        def disagree(lap, **kwargs):
            structure = real_detect(lap)
            raise InconsistentClustering(structure, [0] * lap.shape[0])

        monkeypatch.setattr(pipeline.blockreveal, "detect_blocks", disagree)
        solution, trace = solve(inst.ms)
        assert any("clustering disagreement" in w for w in trace.warnings)
        assert sorted(solution.partition.parts) == [2, 3]

    def test_nearly_dependent_propagates(self, monkeypatch):
        inst = exact_instance(14, n=4, partition=(2, 2), p=1)

        def reject(*args, **kwargs):
            raise NearlyDependent("synthetic")

        monkeypatch.setattr(pipeline.eigsel, "select_basis", reject)
        with pytest.raises(NearlyDependent):
            solve(inst.ms)

    def test_options_validated(self):
        with pytest.raises(ValueError):
            SolveOptions(refine_loops=-1)
        with pytest.raises(ValueError):
            SolveOptions(tol_zero=0.0)
        with pytest.raises(ValueError):
            SolveOptions(clusterer="other")


class TestTraceCostMonotonicity:
    def test_exact_instances(self):
        for seed in range(20):
            local = np.random.default_rng(seed)
            part = rand_partition(local, 6, max_block=3)
            inst = exact_instance(2000 + seed, n=6, partition=part.parts, p=2)
            _, trace = solve(inst.ms)
            assert trace.post_refine_cost <= trace.pre_refine_cost + 1e-12, \
                f"seed {seed}"
