"""JSON-shaped text containers for matrix sets and solutions.

Complex entries are written as [re, im] pairs; Python's repr-based float
serialization round-trips IEEE-754 doubles exactly.  An infinite SNR is
encoded as the string "inf" so documents stay plain JSON.
"""

from __future__ import annotations

import json
import math

import numpy as np

from ..matpoly import MatrixSet, Partition
from ..refine import Solution

MATRIXSET_FORMAT_VERSION = 1
SOLUTION_FORMAT_VERSION = 1


class MatrixSetFileError(ValueError):
    """Malformed document; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


def _pairs(mat) -> list:
    arr = np.asarray(mat, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in arr]


def _snr_out(snr_db: float):
    return "inf" if math.isinf(snr_db) else float(snr_db)


def write_matrixset(path, ms: MatrixSet, ground_truth: dict | None = None):
    """Write a matrix set (plus optional ground truth) as JSON text."""
    doc = {
        "format_version": MATRIXSET_FORMAT_VERSION,
        "n": ms.n,
        "p": ms.p,
        "hermitian": ms.hermitian,
        "matrices": [_pairs(a) for a in ms.coeffs],
    }
    if ground_truth is not None:
        doc["ground_truth"] = {
            "v_mix": _pairs(ground_truth["v_mix"]),
            "partition": [int(x) for x in ground_truth["partition"]],
            "snr_db": _snr_out(ground_truth["snr_db"]),
            "seed": int(ground_truth["seed"]),
        }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, allow_nan=False)
        fh.write("\n")


def _need(doc, key, types, where):
    if key not in doc:
        raise MatrixSetFileError(f"{where}{key}", "missing")
    value = doc[key]
    if types is not None and not isinstance(value, types):
        raise MatrixSetFileError(
            f"{where}{key}", f"expected {types}, got {type(value).__name__}")
    return value


def _parse_complex_matrix(raw, n, where):
    if not isinstance(raw, list) or len(raw) != n:
        raise MatrixSetFileError(where, f"expected {n} rows")
    out = np.empty((n, n), dtype=np.complex128)
    for i, row in enumerate(raw):
        if not isinstance(row, list) or len(row) != n:
            raise MatrixSetFileError(f"{where}[{i}]", f"expected {n} entries")
        for j, pair in enumerate(row):
            if (not isinstance(pair, list) or len(pair) != 2
                    or not all(isinstance(x, (int, float)) for x in pair)):
                raise MatrixSetFileError(f"{where}[{i}][{j}]",
                                         "expected a [re, im] number pair")
            re, im = float(pair[0]), float(pair[1])
            if not (math.isfinite(re) and math.isfinite(im)):
                raise MatrixSetFileError(f"{where}[{i}][{j}]",
                                         "entries must be finite")
            out[i, j] = complex(re, im)
    return out


def read_matrixset(path):
    """Parse a matrix-set document; returns (MatrixSet, ground_truth|None).

    ground_truth, when present, is a dict with keys v_mix (ndarray),
    partition (Partition), snr_db (float, may be inf) and seed (int).
    """
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MatrixSetFileError("document", f"not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise MatrixSetFileError("document", "top level must be an object")
    version = _need(doc, "format_version", int, "")
    if version != MATRIXSET_FORMAT_VERSION:
        raise MatrixSetFileError("format_version",
                                 f"unsupported version {version}")
    n = _need(doc, "n", int, "")
    p = _need(doc, "p", int, "")
    if n < 1:
        raise MatrixSetFileError("n", "must be >= 1")
    if p < 0:
        raise MatrixSetFileError("p", "must be >= 0")
    _need(doc, "hermitian", bool, "")
    raw_mats = _need(doc, "matrices", list, "")
    if len(raw_mats) != p + 1:
        raise MatrixSetFileError(
            "matrices", f"expected {p + 1} matrices, found {len(raw_mats)}")
    mats = [_parse_complex_matrix(raw, n, f"matrices[{k}]")
            for k, raw in enumerate(raw_mats)]
    try:
        ms = MatrixSet(mats)
    except ValueError as exc:
        raise MatrixSetFileError("matrices", str(exc)) from exc

    truth = None
    if "ground_truth" in doc:
        gt = _need(doc, "ground_truth", dict, "")
        where = "ground_truth."
        v_mix = _parse_complex_matrix(_need(gt, "v_mix", list, where), n,
                                      where + "v_mix")
        raw_part = _need(gt, "partition", list, where)
        if not all(isinstance(x, int) for x in raw_part):
            raise MatrixSetFileError(where + "partition",
                                     "entries must be integers")
        try:
            partition = Partition(tuple(raw_part))
        except ValueError as exc:
            raise MatrixSetFileError(where + "partition", str(exc)) from exc
        if partition.n != n:
            raise MatrixSetFileError(where + "partition",
                                     f"sums to {partition.n}, expected {n}")
        raw_snr = _need(gt, "snr_db", (str, int, float), where)
        if isinstance(raw_snr, str):
            if raw_snr != "inf":
                raise MatrixSetFileError(where + "snr_db",
                                         'string form must be "inf"')
            snr_db = float("inf")
        else:
            snr_db = float(raw_snr)
        seed = _need(gt, "seed", int, where)
        truth = {"v_mix": v_mix, "partition": partition, "snr_db": snr_db,
                 "seed": seed}
    return ms, truth


def write_solution(path, solution: Solution, trace=None):
    """Write a solution document (W, partition, costs, optional trace)."""
    doc = {
        "format_version": SOLUTION_FORMAT_VERSION,
        "partition": [int(x) for x in solution.partition.parts],
        "w": _pairs(solution.w_mat),
        "is_real": solution.is_real,
        "cost": float(solution.cost),
        "per_matrix_residuals": [[float(a), float(b)]
                                 for a, b in solution.per_matrix_residuals],
        "refine_loops": int(solution.refine_loops),
    }
    if trace is not None:
        doc["trace"] = {
            "basis_cond": trace.basis_cond,
            "basis_r_nn": trace.basis_r_nn,
            "basis_lambdas": [[_inf_safe(z.real), _inf_safe(z.imag)]
                              for z in trace.basis_lambdas],
            "laplacian_spectrum": [float(x) for x in
                                   trace.structure.laplacian_spectrum],
            "n_zero": int(trace.structure.n_zero),
            "perm": [int(x) for x in trace.structure.perm],
            "pre_refine_cost": trace.pre_refine_cost,
            "post_refine_cost": trace.post_refine_cost,
            "warnings": list(trace.warnings),
            "stage_times_ms": {k: float(v)
                               for k, v in trace.stage_times_ms.items()},
        }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, allow_nan=False)
        fh.write("\n")


def _inf_safe(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


def read_solution(path):
    """Parse a solution document into (partition, W, summary dict)."""
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MatrixSetFileError("document", f"not valid JSON ({exc})") from exc
    version = _need(doc, "format_version", int, "")
    if version != SOLUTION_FORMAT_VERSION:
        raise MatrixSetFileError("format_version",
                                 f"unsupported version {version}")
    raw_part = _need(doc, "partition", list, "")
    try:
        partition = Partition(tuple(int(x) for x in raw_part))
    except (TypeError, ValueError) as exc:
        raise MatrixSetFileError("partition", str(exc)) from exc
    w_mat = _parse_complex_matrix(_need(doc, "w", list, ""), partition.n, "w")
    summary = {
        "is_real": bool(doc.get("is_real", False)),
        "cost": float(doc.get("cost", float("nan"))),
        "refine_loops": int(doc.get("refine_loops", 0)),
    }
    return partition, w_mat, summary
