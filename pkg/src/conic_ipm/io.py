"""Problem-file JSON schema.

A problem document is

    {"n": int, "m": int,
     "P": {"rowptr": [...], "colidx": [...], "values": [...]},
     "A": {"rowptr": [...], "colidx": [...], "values": [...]},
     "q": [...], "b": [...],
     "cones": [{"type": "zero|nonneg|soc|exp|pow|psd", "dim": int,
                "alpha": float?}, ...],
     "meta": {"name": str?, "seed": int?}}

For "psd" cones "dim" is the matrix side; the row span is side*(side+1)/2
triangular entries.  Numbers are serialized as shortest round-trip
decimals, so read(write(p)) reproduces the canonical form bit for bit.
"""
from __future__ import annotations

import json

import numpy as np

from .errors import ValidationError
from .problem import (EXP, NONNEG, POW, PSD, SOC, ZERO, ConeSpec, ProblemData,
                      psd_cone)
from .sparse import CsrMatrix

SIZE_GUARD_NNZ = 10 ** 7


def _matrix_doc(mat: CsrMatrix) -> dict:
    return {"rowptr": mat.rowptr.tolist(), "colidx": mat.colidx.tolist(),
            "values": mat.values.tolist()}


def _cone_doc(spec: ConeSpec) -> dict:
    if spec.kind == PSD:
        return {"type": PSD, "dim": spec.side}
    doc = {"type": spec.kind, "dim": spec.dim}
    if spec.kind == POW:
        doc["alpha"] = spec.alpha
    return doc


def problem_to_dict(problem: ProblemData, name: str | None = None,
                    seed: int | None = None) -> dict:
    meta: dict = {}
    if name is not None:
        meta["name"] = name
    if seed is not None:
        meta["seed"] = int(seed)
    return {"n": problem.n, "m": problem.m,
            "P": _matrix_doc(problem.P), "A": _matrix_doc(problem.A),
            "q": problem.q.tolist(), "b": problem.b.tolist(),
            "cones": [_cone_doc(c) for c in problem.cones],
            "meta": meta}


def write_problem(problem: ProblemData, path, name: str | None = None,
                  seed: int | None = None) -> None:
    if problem.P.nnz + problem.A.nnz > SIZE_GUARD_NNZ:
        import warnings
        warnings.warn("problem exceeds 1e7 nonzeros; JSON files this large "
                      "are slow to parse", stacklevel=2)
    with open(path, "w") as fh:
        json.dump(problem_to_dict(problem, name=name, seed=seed), fh)
        fh.write("\n")


def _matrix_from_doc(doc, nrows: int, ncols: int, where: str) -> CsrMatrix:
    try:
        return CsrMatrix(nrows, ncols,
                         np.asarray(doc["rowptr"], dtype=np.int64),
                         np.asarray(doc["colidx"], dtype=np.int64),
                         np.asarray(doc["values"], dtype=np.float64))
    except (KeyError, TypeError, ValueError) as err:
        raise ValidationError(f"{where}: malformed matrix document ({err})") from None


def _cone_from_doc(doc, idx: int) -> ConeSpec:
    try:
        kind = doc["type"]
        dim = int(doc["dim"])
    except (KeyError, TypeError, ValueError) as err:
        raise ValidationError(f"cones[{idx}]: malformed cone document ({err})") from None
    if kind == PSD:
        return psd_cone(dim)
    if kind == POW:
        if "alpha" not in doc:
            raise ValidationError(f"cones[{idx}]: power cone needs 'alpha'")
        return ConeSpec(POW, dim, alpha=float(doc["alpha"]))
    if kind in (ZERO, NONNEG, SOC, EXP):
        return ConeSpec(kind, dim)
    raise ValidationError(f"cones[{idx}]: unknown cone type {kind!r}")


def problem_from_dict(doc: dict) -> tuple[ProblemData, dict]:
    try:
        n, m = int(doc["n"]), int(doc["m"])
        q = np.asarray(doc["q"], dtype=np.float64)
        b = np.asarray(doc["b"], dtype=np.float64)
        cone_docs = doc["cones"]
    except (KeyError, TypeError, ValueError) as err:
        raise ValidationError(f"problem document: missing/malformed field ({err})") from None
    pmat = _matrix_from_doc(doc.get("P", {}), n, n, "P")
    amat = _matrix_from_doc(doc.get("A", {}), m, n, "A")
    cones = [_cone_from_doc(c, i) for i, c in enumerate(cone_docs)]
    return ProblemData(pmat, amat, q, b, cones), dict(doc.get("meta", {}))


def read_problem(path) -> tuple[ProblemData, dict]:
    """Parse a problem file; raises ValidationError with a pointered message."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as err:
            raise ValidationError(f"{path}: invalid JSON at line {err.lineno}, "
                                  f"column {err.colno}: {err.msg}") from None
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: top-level JSON value must be an object")
    return problem_from_dict(doc)
