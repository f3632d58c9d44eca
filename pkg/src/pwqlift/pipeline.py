"""Offline compilation pipeline: prune, lift, merge, build trees.

This is the orchestration used by the CLI, the benchmark harness and the
estimator wrapper.  Each stage is timed and its region/partition counts are
logged; timings are informational only and never gate any check.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field as dc_field
from typing import List, Union

from .errors import InputError
from .merging import (MergedSolution, merge, merge_pairwise,
                      merge_with_permutations)
from .solution import PwqSolution, lift_solution, prune_dominated
from .trees import CompiledEvaluator, OpCountModel, multi_tree

MergeDepth = Union[int, str]


@dataclass
class StageLog:
    stage: str
    regions_in: int
    regions_out: int
    partitions_out: int
    ms: float


@dataclass
class CompileLog:
    stages: List[StageLog] = dc_field(default_factory=list)
    sweeps: List[dict] = dc_field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "stages": [vars(s) for s in self.stages],
            "sweeps": list(self.sweeps),
        }


def parse_merge_depth(raw: str) -> MergeDepth:
    if raw == "full":
        return "full"
    try:
        value = int(raw)
    except ValueError as exc:
        raise InputError(f"merge depth must be an integer or 'full', got '{raw}'") from exc
    if value < 0:
        raise InputError("merge depth must be nonnegative")
    return value


def compile_solution(solution: PwqSolution,
                     merge_depth: MergeDepth = "full",
                     prune: bool = True,
                     greedy_permutations: int = 0,
                     seed: int = 0,
                     workers: int = 1,
                     validate_geometry: bool = True):
    """Run the offline pipeline and return ``(evaluator, log)``.

    ``merge_depth`` is either ``"full"`` (merge everything into a single
    partition in one pass) or a number of pairwise sweeps; 0 keeps the
    original partitions and yields one tree per partition.
    """
    log = CompileLog()
    if validate_geometry:
        t0 = time.monotonic()
        solution.validate_partition_geometry()
        log.stages.append(StageLog("validate", solution.n_regions, solution.n_regions,
                                   solution.n_partitions, _ms(t0)))

    kept = list(range(solution.n_regions))
    if prune:
        t0 = time.monotonic()
        before = solution.n_regions
        solution, kept = prune_dominated(solution)
        log.stages.append(StageLog("prune", before, solution.n_regions,
                                   solution.n_partitions, _ms(t0)))

    t0 = time.monotonic()
    lifted = lift_solution(solution)
    log.stages.append(StageLog("lift", solution.n_regions, lifted.n_regions,
                               lifted.n_partitions, _ms(t0)))

    t0 = time.monotonic()
    if merge_depth == "full":
        merged = merge(lifted.regions, lifted.functions,
                       partition=lifted.partition, n=lifted.n, workers=workers)
        log.sweeps.append({"sweep": "full", "n_t": merged.n_partitions,
                           "n_p": merged.n_regions})
    else:
        def record(sweep: int, state: MergedSolution) -> None:
            log.sweeps.append({"sweep": sweep, "n_t": state.n_partitions,
                               "n_p": state.n_regions})

        if greedy_permutations > 0 and merge_depth > 0:
            merged = merge_with_permutations(lifted, merge_depth,
                                             tries=greedy_permutations,
                                             seed=seed, workers=workers)
            log.sweeps.append({"sweep": f"best-of-{greedy_permutations + 1}",
                               "n_t": merged.n_partitions, "n_p": merged.n_regions})
        else:
            merged = merge_pairwise(lifted, merge_depth, workers=workers,
                                    on_sweep=record)
    merge_ms = _ms(t0)
    log.stages.append(StageLog("merge", lifted.n_regions, merged.n_regions,
                               merged.n_partitions, merge_ms))

    t0 = time.monotonic()
    trees = multi_tree(merged) if merged.n_regions else []
    tree_ms = _ms(t0)
    log.stages.append(StageLog("trees", merged.n_regions, merged.n_regions,
                               merged.n_partitions, tree_ms))

    laws = None
    if solution.control_laws is not None:
        laws = [solution.control_laws[i] for i in merged.provenance]

    evaluator = CompiledEvaluator(
        trees=trees,
        regions=list(merged.regions),
        functions=list(merged.functions),
        partition=list(merged.partition),
        provenance=[kept[i] for i in merged.provenance],
        n=lifted.n,
        l=lifted.l,
        op_model=OpCountModel(n=lifted.n, l=lifted.l),
        control_laws=laws,
    )
    return evaluator, log


def _ms(t0: float) -> float:
    return (time.monotonic() - t0) * 1000.0
