"""Benchmark harness: compile sweeps, oracle-verified query sets, reports.

Every benchmark run draws one set of covered query points, computes their
ground-truth values once with the sequential-scan oracle, then compiles the
instance at each requested merge depth and checks every query against the
oracle before any number is recorded.  A value disagreement above the
verification tolerance aborts the run with the witness point.

Reports are written as a CSV and a JSON file whose bytes depend only on the
instance, the sweep list, the query count and the seed.  Wall-clock stage
timings are informational and therefore live in a separate sidecar file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .errors import InputError, OracleMismatchError
from .pipeline import MergeDepth, compile_solution
from .serialize import count_stored_reals, evaluator_to_dict
from .solution import PwqSolution, SequentialEvaluator
from .trees import evaluate, predict_ops

REPORT_SCHEMA = "pwqlift-bench-v1"
CSV_COLUMNS = [
    "schema", "nm", "n_t", "n_p", "n_store", "depth_max", "depths",
    "predicted_worst_ops", "measured_max_ops", "measured_mean_ops",
    "queries", "seed",
]
VERIFY_TOL = 1e-8
N_STORE_CONVENTION = (
    "n_store counts every floating-point value in the serialized evaluator: "
    "sparse tree-node hyperplanes (support + 1 each), affine functions "
    "(l + 1 each), and region rows used for leaf containment (support + 1 each)."
)


@dataclass
class BenchRow:
    nm: str
    n_t: int
    n_p: int
    n_store: int
    depths: List[int]
    predicted_worst_ops: int
    measured_max_ops: int
    measured_mean_ops: float
    merge_time_ms: float
    tree_time_ms: float

    @property
    def depth_max(self) -> int:
        return max(self.depths) if self.depths else 0


@dataclass
class BenchReport:
    rows: List[BenchRow]
    queries: int
    seed: int
    meta: dict = field(default_factory=dict)

    def row_for(self, nm) -> BenchRow:
        key = str(nm)
        for row in self.rows:
            if row.nm == key:
                return row
        raise KeyError(f"no bench row for nm={key}")


def sample_covered_points(solution: PwqSolution, count: int, seed: int,
                          max_tries: Optional[int] = None) -> np.ndarray:
    """Uniform points over the regions' bounding box, rejected to covered ones."""
    lo = np.full(solution.n, np.inf)
    hi = np.full(solution.n, -np.inf)
    for p in solution.regions:
        for j in range(solution.n):
            b = p.coordinate_bounds(j)
            lo[j] = min(lo[j], b[0])
            hi[j] = max(hi[j], b[1])
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise InputError("cannot sample queries: solution domain is unbounded")
    rng = np.random.default_rng(seed)
    oracle = SequentialEvaluator(solution)
    points = np.empty((count, solution.n))
    got = 0
    tries = 0
    cap = max_tries if max_tries is not None else 1000 * count + 1000
    while got < count:
        if tries >= cap:
            raise InputError("rejection sampling exhausted: domain coverage too sparse")
        x = rng.uniform(lo, hi)
        tries += 1
        if oracle(x) is not None:
            points[got] = x
            got += 1
    return points


def run_bench(solution: PwqSolution,
              nm_list: Sequence[MergeDepth],
              queries: int,
              seed: int,
              prune: bool = True,
              workers: int = 1) -> BenchReport:
    """Compile once per merge depth and verify every query against the oracle."""
    solution.validate_partition_geometry()
    points = sample_covered_points(solution, queries, seed)
    oracle = SequentialEvaluator(solution)
    oracle_values = np.array([oracle(x)[1] for x in points])

    rows: List[BenchRow] = []
    for nm in nm_list:
        evaluator, log = compile_solution(
            solution, merge_depth=nm, prune=prune, workers=workers,
            validate_geometry=False)
        prediction = predict_ops(evaluator)
        ops = np.empty(points.shape[0], dtype=np.int64)
        for qi, x in enumerate(points):
            outcome = evaluate(evaluator, x)
            if not outcome.covered:
                raise OracleMismatchError(
                    f"nm={nm}: evaluator reported NotCovered at covered point "
                    f"{x.tolist()}")
            if abs(outcome.value - oracle_values[qi]) > VERIFY_TOL:
                raise OracleMismatchError(
                    f"nm={nm}: value {outcome.value!r} != oracle "
                    f"{oracle_values[qi]!r} at {x.tolist()}")
            ops[qi] = outcome.ops_used
        stage_ms = {s.stage: s.ms for s in log.stages}
        rows.append(BenchRow(
            nm=str(nm),
            n_t=evaluator.n_trees,
            n_p=evaluator.n_regions,
            n_store=count_stored_reals(evaluator_to_dict(evaluator)),
            depths=[t.depth for t in evaluator.trees],
            predicted_worst_ops=prediction.worst_case,
            measured_max_ops=int(ops.max()),
            measured_mean_ops=float(ops.mean()),
            merge_time_ms=stage_ms.get("merge", 0.0),
            tree_time_ms=stage_ms.get("trees", 0.0),
        ))
    meta = {
        "schema": REPORT_SCHEMA,
        "n": solution.n,
        "n_regions": solution.n_regions,
        "n_partitions": solution.n_partitions,
        "queries": queries,
        "seed": seed,
        "prune": prune,
        "verify_tolerance": VERIFY_TOL,
        "n_store_convention": N_STORE_CONVENTION,
    }
    return BenchReport(rows=rows, queries=queries, seed=seed, meta=meta)


def report_to_csv(report: BenchReport) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for row in report.rows:
        lines.append(",".join([
            REPORT_SCHEMA,
            row.nm,
            str(row.n_t),
            str(row.n_p),
            str(row.n_store),
            str(row.depth_max),
            ";".join(str(d) for d in row.depths),
            str(row.predicted_worst_ops),
            str(row.measured_max_ops),
            f"{row.measured_mean_ops:.6f}",
            str(report.queries),
            str(report.seed),
        ]))
    return "\n".join(lines) + "\n"


def report_to_dict(report: BenchReport) -> dict:
    """Deterministic report body; timings are deliberately excluded."""
    return {
        "meta": report.meta,
        "rows": [{
            "nm": row.nm,
            "n_t": row.n_t,
            "n_p": row.n_p,
            "n_store": row.n_store,
            "depths": row.depths,
            "depth_max": row.depth_max,
            "predicted_worst_ops": row.predicted_worst_ops,
            "measured_max_ops": row.measured_max_ops,
            "measured_mean_ops": row.measured_mean_ops,
        } for row in report.rows],
    }


def timings_to_dict(report: BenchReport) -> dict:
    return {
        "note": "wall-clock stage times in milliseconds; informational only",
        "rows": [{
            "nm": row.nm,
            "merge_time_ms": row.merge_time_ms,
            "tree_time_ms": row.tree_time_ms,
        } for row in report.rows],
    }


def write_report(report: BenchReport, base_path: str) -> List[str]:
    """Write ``<base>.csv``, ``<base>.json`` and ``<base>.timings.json``."""
    paths = []
    csv_path = base_path + ".csv"
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write(report_to_csv(report))
    paths.append(csv_path)
    json_path = base_path + ".json"
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(report_to_dict(report), fh, indent=1)
        fh.write("\n")
    paths.append(json_path)
    timing_path = base_path + ".timings.json"
    with open(timing_path, "w", encoding="utf-8") as fh:
        json.dump(timings_to_dict(report), fh, indent=1)
        fh.write("\n")
    paths.append(timing_path)
    return paths
