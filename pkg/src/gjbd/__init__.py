"""General joint block diagonalization of matrix sets.

Given square matrices A_0..A_p, find a nonsingular W and a partition such
that every W^H A_i W is (approximately) block diagonal with as many blocks
as possible.  The solver selects a well-conditioned basis of polynomial
eigenvectors, reveals the block structure spectrally, and refines the
diagonalizer by alternating SVD updates.
"""

from .blockreveal import (BlockStructure, InconsistentClustering,
                          detect_blocks, interaction_matrix, laplacian)
from .datagen import (Fixture, ProblemInstance, UnknownFixture, derive_seed,
                      fixture, random_instance, sigma_of_snr, snr_of_sigma)
from .eigsel import (EigenBasis, NearlyDependent, SchurFailure, ZeroBlock,
                     extract_pep_vectors, select_basis, solve_pencil)
from .matpoly import (CompanionPencil, DegreeTooLow, MatrixSet, Partition,
                      evaluate, linearize)
from .metrics import (PartitionMismatch, QualityReport, RankDeficient,
                      condition_2, partition_consistent_strict,
                      partition_merge_consistent, performance_index,
                      quality_report, subspace_angle, theta_max_angle)
from .pipeline import SolveOptions, SolveTrace, solve
from .refine import (AssumptionAViolation, RankCollapse, Solution,
                     coupling_stack, offblock_cost, realify, refine,
                     refine_block)

__version__ = "0.1.0"

__all__ = [
    "AssumptionAViolation", "BlockStructure", "CompanionPencil",
    "DegreeTooLow", "EigenBasis", "Fixture", "InconsistentClustering",
    "MatrixSet", "NearlyDependent", "Partition", "PartitionMismatch",
    "ProblemInstance", "QualityReport", "RankCollapse", "RankDeficient",
    "SchurFailure", "Solution", "SolveOptions", "SolveTrace",
    "UnknownFixture", "ZeroBlock", "condition_2", "coupling_stack",
    "derive_seed", "detect_blocks", "evaluate", "extract_pep_vectors",
    "fixture",
    "interaction_matrix", "laplacian", "linearize", "offblock_cost",
    "partition_consistent_strict", "partition_merge_consistent",
    "performance_index", "quality_report", "random_instance", "realify",
    "refine", "refine_block", "select_basis", "sigma_of_snr",
    "snr_of_sigma", "solve", "solve_pencil", "subspace_angle",
    "theta_max_angle",
]
