"""JSON interchange for solutions and compiled evaluators.

The solution format is the ingestion surface for externally computed
piecewise quadratic solutions::

    {"n": 2,
     "regions":   [{"H": [[...], ...], "K": [...]}, ...],
     "functions": [{"A": [[...], ...], "B": [...], "C": 0.0}, ...],
     "partition": [1, 1, 2, ...],            # 1-based labels
     "control_laws": [{"F": [[...]], "g": [...]}, ...] | null}

Matrices are row-major nested lists; floats round-trip exactly through
Python's repr-based JSON encoding.  The evaluator format (version 1) stores
trees with sparse node hyperplanes, the affine functions, the region data
needed for leaf containment, and the op-model constants; loading it back
reproduces bit-identical evaluation.
"""

from __future__ import annotations

import json
from typing import List, Optional

import numpy as np

from .errors import InputError
from .geometry import Hyperplane, Polyhedron
from .merging import MergedSolution
from .solution import AffineFunction, PwqSolution, QuadraticFunction
from .trees import (CompiledEvaluator, Leaf, OpCountModel, SearchTree,
                    SplitNode)

EVALUATOR_FORMAT = "pwqlift-evaluator"
EVALUATOR_VERSION = 1


def _require(d: dict, key: str, path: str):
    if key not in d:
        raise InputError(f"{path}: missing required field '{key}'")
    return d[key]


def _as_matrix(obj, path: str) -> np.ndarray:
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{path}: not a numeric matrix ({exc})") from exc
    if arr.ndim == 1 and arr.size == 0:
        arr = arr.reshape(0, 0)
    if arr.ndim != 2:
        raise InputError(f"{path}: expected a matrix, got array of rank {arr.ndim}")
    return arr


def _as_vector(obj, path: str) -> np.ndarray:
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{path}: not a numeric vector ({exc})") from exc
    if arr.ndim != 1:
        raise InputError(f"{path}: expected a vector, got array of rank {arr.ndim}")
    return arr


def solution_to_dict(s: PwqSolution) -> dict:
    out = {
        "n": s.n,
        "regions": [{"H": p.H.tolist(), "K": p.K.tolist()} for p in s.regions],
        "functions": [{"A": f.A.tolist(), "B": f.B.tolist(), "C": f.C}
                      for f in s.functions],
        "partition": list(s.partition),
        "control_laws": None,
    }
    if s.control_laws is not None:
        out["control_laws"] = [{"F": F.tolist(), "g": g.tolist()}
                               for F, g in s.control_laws]
    return out


def solution_from_dict(d: dict) -> PwqSolution:
    if not isinstance(d, dict):
        raise InputError("solution file must contain a JSON object at top level")
    n = _require(d, "n", "$")
    if not isinstance(n, int) or n < 1:
        raise InputError("$.n: must be a positive integer")
    regions_raw = _require(d, "regions", "$")
    functions_raw = _require(d, "functions", "$")
    partition = _require(d, "partition", "$")
    if not isinstance(regions_raw, list) or not regions_raw:
        raise InputError("$.regions: must be a non-empty list")
    if not isinstance(functions_raw, list):
        raise InputError("$.functions: must be a list")

    regions = []
    for i, r in enumerate(regions_raw):
        path = f"$.regions[{i}]"
        H = _as_matrix(_require(r, "H", path), path + ".H")
        K = _as_vector(_require(r, "K", path), path + ".K")
        if H.shape[1] != n and H.shape[0] > 0:
            raise InputError(f"{path}.H: has {H.shape[1]} columns, expected n={n}")
        if H.shape[0] != K.size:
            raise InputError(f"{path}: H has {H.shape[0]} rows but K has {K.size}")
        regions.append(Polyhedron(H, K, dim=n))

    functions = []
    for i, f in enumerate(functions_raw):
        path = f"$.functions[{i}]"
        A = _as_matrix(_require(f, "A", path), path + ".A")
        B = _as_vector(_require(f, "B", path), path + ".B")
        C = _require(f, "C", path)
        if A.shape != (n, n):
            raise InputError(f"{path}.A: expected {n}x{n}, got {A.shape[0]}x{A.shape[1]}")
        if B.size != n:
            raise InputError(f"{path}.B: expected length {n}, got {B.size}")
        try:
            functions.append(QuadraticFunction(A, B, float(C)))
        except (TypeError, ValueError) as exc:
            raise InputError(f"{path}.C: not a number ({exc})") from exc

    laws = None
    laws_raw = d.get("control_laws")
    if laws_raw is not None:
        if not isinstance(laws_raw, list):
            raise InputError("$.control_laws: must be a list or null")
        laws = []
        for i, law in enumerate(laws_raw):
            path = f"$.control_laws[{i}]"
            F = _as_matrix(_require(law, "F", path), path + ".F")
            g = _as_vector(_require(law, "g", path), path + ".g")
            if F.shape[1] != n:
                raise InputError(f"{path}.F: has {F.shape[1]} columns, expected n={n}")
            if F.shape[0] != g.size:
                raise InputError(f"{path}: F has {F.shape[0]} rows but g has {g.size}")
            laws.append((F, g))

    return PwqSolution(regions=regions, functions=functions,
                       partition=partition, control_laws=laws)


def save_solution(s: PwqSolution, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(solution_to_dict(s), fh, indent=1)
        fh.write("\n")


def load_solution(path) -> PwqSolution:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}") from exc
    except OSError as exc:
        raise InputError(f"{path}: {exc}") from exc
    return solution_from_dict(data)


def _tree_to_dict(tree: SearchTree) -> dict:
    nodes = []
    for node in tree.nodes:
        if isinstance(node, SplitNode):
            nodes.append({
                "type": "split",
                "idx": [int(i) for i in node.support_idx],
                "val": [float(v) for v in node.support_val],
                "b": node.hyperplane.b,
                "low": node.low,
                "high": node.high,
            })
        else:
            nodes.append({"type": "leaf", "candidates": list(node.candidates)})
    return {"root": tree.root, "depth": tree.depth, "n_h": tree.n_h, "nodes": nodes}


def _tree_from_dict(d: dict, l: int, path: str) -> SearchTree:
    nodes: List = []
    for i, nd in enumerate(d["nodes"]):
        npath = f"{path}.nodes[{i}]"
        kind = _require(nd, "type", npath)
        if kind == "split":
            a = np.zeros(l)
            idx = np.asarray(nd["idx"], dtype=int)
            a[idx] = np.asarray(nd["val"], dtype=float)
            hyp = Hyperplane.__new__(Hyperplane)
            object.__setattr__(hyp, "a", a)
            object.__setattr__(hyp, "b", float(nd["b"]))
            nodes.append(SplitNode(hyp, int(nd["low"]), int(nd["high"])))
        elif kind == "leaf":
            nodes.append(Leaf([int(c) for c in nd["candidates"]]))
        else:
            raise InputError(f"{npath}: unknown node type '{kind}'")
    return SearchTree(nodes=nodes, root=int(d["root"]), depth=int(d["depth"]),
                      n_h=int(d["n_h"]))


def evaluator_to_dict(e: CompiledEvaluator) -> dict:
    out = {
        "format": EVALUATOR_FORMAT,
        "version": EVALUATOR_VERSION,
        "n": e.n,
        "l": e.l,
        "op_model": {
            "compare_cost": e.op_model.compare_cost,
            "function_eval_cost": e.op_model.function_eval_cost,
            "lift_cost": e.op_model.lift_cost,
        },
        "partition": list(e.partition),
        "provenance": list(e.provenance),
        "functions": [{"D": f.D.tolist(), "E": f.E} for f in e.functions],
        "regions": [{"H": p.H.tolist(), "K": p.K.tolist()} for p in e.regions],
        "trees": [_tree_to_dict(t) for t in e.trees],
        "control_laws": None,
    }
    if e.control_laws is not None:
        out["control_laws"] = [{"F": F.tolist(), "g": g.tolist()}
                               for F, g in e.control_laws]
    return out


def evaluator_from_dict(d: dict) -> CompiledEvaluator:
    if not isinstance(d, dict) or d.get("format") != EVALUATOR_FORMAT:
        raise InputError("not a pwqlift evaluator file")
    if d.get("version") != EVALUATOR_VERSION:
        raise InputError(f"unsupported evaluator version {d.get('version')}")
    n = int(_require(d, "n", "$"))
    l = int(_require(d, "l", "$"))
    regions = [Polyhedron(_as_matrix(r["H"], f"$.regions[{i}].H"),
                          _as_vector(r["K"], f"$.regions[{i}].K"), dim=l,
                          validate=False)
               for i, r in enumerate(_require(d, "regions", "$"))]
    functions = [AffineFunction(_as_vector(f["D"], f"$.functions[{i}].D"), float(f["E"]))
                 for i, f in enumerate(_require(d, "functions", "$"))]
    trees = [_tree_from_dict(t, l, f"$.trees[{i}]")
             for i, t in enumerate(_require(d, "trees", "$"))]
    laws = None
    if d.get("control_laws") is not None:
        laws = [(_as_matrix(law["F"], f"$.control_laws[{i}].F"),
                 _as_vector(law["g"], f"$.control_laws[{i}].g"))
                for i, law in enumerate(d["control_laws"])]
    return CompiledEvaluator(
        trees=trees,
        regions=regions,
        functions=functions,
        partition=[int(v) for v in _require(d, "partition", "$")],
        provenance=[int(v) for v in _require(d, "provenance", "$")],
        n=n,
        l=l,
        op_model=OpCountModel(n=n, l=l),
        control_laws=laws,
    )


def save_evaluator(e: CompiledEvaluator, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(evaluator_to_dict(e), fh)
        fh.write("\n")


def load_evaluator(path) -> CompiledEvaluator:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}") from exc
    except OSError as exc:
        raise InputError(f"{path}: {exc}") from exc
    return evaluator_from_dict(data)


def count_stored_reals(evaluator_dict: dict) -> int:
    """Number of floating-point values stored by the evaluator file.

    Convention (documented in bench reports): sparse node hyperplanes
    contribute ``support + 1`` reals, every affine function ``l + 1``, and
    every region row ``support + 1`` (regions are stored for the leaf
    containment checks).  Integer data (indices, candidate lists, labels)
    is not counted.
    """
    total = 0
    for tree in evaluator_dict["trees"]:
        for node in tree["nodes"]:
            if node["type"] == "split":
                total += len(node["val"]) + 1
    l = evaluator_dict["l"]
    total += len(evaluator_dict["functions"]) * (l + 1)
    for region in evaluator_dict["regions"]:
        for row in region["H"]:
            total += sum(1 for v in row if v != 0.0) + 1
    if evaluator_dict.get("control_laws"):
        for law in evaluator_dict["control_laws"]:
            total += sum(len(r) for r in law["F"]) + len(law["g"])
    return total


def merged_to_solution_dict(s: MergedSolution) -> dict:
    """Serialize a merged (lifted, affine) solution in the solution schema
    with dim = l; quadratic blocks are zero and the affine data sits in B/C."""
    return {
        "n": s.l,
        "regions": [{"H": p.H.tolist(), "K": p.K.tolist()} for p in s.regions],
        "functions": [{"A": np.zeros((s.l, s.l)).tolist(), "B": f.D.tolist(), "C": f.E}
                      for f in s.functions],
        "partition": list(s.partition),
        "control_laws": None,
    }
