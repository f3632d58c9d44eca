"""Overlap elimination for lifted solutions.

:func:`merge` rebuilds a set of overlapping regions with affine values as a
single partition: each region keeps exactly the part where its function is
the pointwise minimizer, computed as a polyhedral set difference against
the overlap pieces where some other function wins.  :func:`merge_pairwise`
applies the same operation to pairs of partitions for a tunable number of
sweeps, trading offline work for online speed.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from .errors import InputError
from .geometry import (Polyhedron, check_same_dim, intersect, is_full_dim,
                       overlaps, region_diff, remove_redundant)
from .solution import (AffineFunction, LiftedSolution, lifted_dim,
                       validate_partition)

_IDENTICAL_FN_TOL = 1e-12


@dataclass
class MergedSolution:
    """Affine pieces over one or more non-overlapping partitions.

    ``provenance[i]`` is the index of the input region whose function piece
    ``i`` carries, threaded through any number of merge sweeps.
    """

    regions: List[Polyhedron]
    functions: List[AffineFunction]
    partition: List[int]
    provenance: List[int]
    n: int
    l: int

    def __post_init__(self):
        if not (len(self.regions) == len(self.functions) == len(self.provenance)):
            raise InputError("merged solution field lengths differ")
        self.partition = validate_partition(self.partition, len(self.regions))
        if self.l != lifted_dim(self.n):
            raise InputError(f"lifted dimension {self.l} does not match n={self.n}")
        if self.regions:
            check_same_dim(self.regions, self.l)

    @property
    def n_regions(self) -> int:
        return len(self.regions)

    @property
    def n_partitions(self) -> int:
        return max(self.partition) if self.partition else 0

    def partition_indices(self, k: int) -> List[int]:
        return [i for i, v in enumerate(self.partition) if v == k]


def as_merged(s) -> MergedSolution:
    """View a lifted solution as a merged one with identity provenance."""
    if isinstance(s, MergedSolution):
        return s
    if isinstance(s, LiftedSolution):
        return MergedSolution(
            regions=list(s.regions),
            functions=list(s.functions),
            partition=list(s.partition),
            provenance=list(range(s.n_regions)),
            n=s.n,
            l=s.l,
        )
    raise InputError(f"cannot merge object of type {type(s).__name__}")


def _functions_identical(f: AffineFunction, g: AffineFunction) -> bool:
    return (np.max(np.abs(f.D - g.D), initial=0.0) <= _IDENTICAL_FN_TOL
            and abs(f.E - g.E) <= _IDENTICAL_FN_TOL)


def _winning_pieces(i: int,
                    regions: Sequence[Polyhedron],
                    functions: Sequence[AffineFunction],
                    partition: Optional[Sequence[int]]) -> List[Polyhedron]:
    """Pieces of region i where function i is the pointwise minimizer.

    Builds the subtractor set Q: for every overlapping region j, the part of
    the pairwise intersection where ``J_i >= J_j``.  Exact coefficient ties
    contribute to Q only for lower-indexed j, so exactly one copy of a tied
    function survives.  Regions sharing a partition label never overlap by
    invariant and are skipped outright.
    """
    p = regions[i]
    subtractors: List[Polyhedron] = []
    for j in range(len(regions)):
        if j == i:
            continue
        if partition is not None and partition[j] == partition[i]:
            continue
        if not overlaps(p, regions[j]):
            continue
        gap = functions[i].D - functions[j].D
        offset = functions[j].E - functions[i].E
        if _functions_identical(functions[i], functions[j]):
            if j > i:
                continue
            piece = intersect(p, regions[j])
        else:
            # J_i(y) >= J_j(y)  <=>  (D_j - D_i) @ y <= E_i - E_j
            piece = intersect(p, regions[j]).with_rows(-gap, -offset)
        if is_full_dim(piece):
            subtractors.append(remove_redundant(piece))
    if not subtractors:
        return [p]
    return region_diff(p, subtractors)


def merge(regions: Sequence[Polyhedron],
          functions: Sequence[AffineFunction],
          partition: Optional[Sequence[int]] = None,
          n: Optional[int] = None,
          provenance: Optional[Sequence[int]] = None,
          workers: int = 1) -> MergedSolution:
    """Merge overlapping regions into a single partition (pointwise minimum).

    ``partition`` is an optional hint marking groups that are known to be
    non-overlapping (it does not group the output, which is always one
    partition).  The loop over regions is embarrassingly parallel; with
    ``workers > 1`` it fans out over processes with output order fixed by
    region index.
    """
    regions = list(regions)
    functions = list(functions)
    if len(regions) != len(functions):
        raise InputError("region and function counts differ")
    if not regions:
        return MergedSolution([], [], [], [], n=n or 1, l=lifted_dim(n or 1))
    l = check_same_dim(regions)
    if n is None:
        n = _infer_n(l)
    if provenance is None:
        provenance = list(range(len(regions)))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            piece_lists = list(pool.map(
                _winning_pieces_task,
                [(i, regions, functions, partition) for i in range(len(regions))],
            ))
    else:
        piece_lists = [_winning_pieces(i, regions, functions, partition)
                       for i in range(len(regions))]

    out_regions: List[Polyhedron] = []
    out_functions: List[AffineFunction] = []
    out_provenance: List[int] = []
    for i, pieces in enumerate(piece_lists):
        for piece in pieces:
            out_regions.append(piece)
            out_functions.append(functions[i])
            out_provenance.append(int(provenance[i]))
    return MergedSolution(
        regions=out_regions,
        functions=out_functions,
        partition=[1] * len(out_regions),
        provenance=out_provenance,
        n=n,
        l=l,
    )


def _winning_pieces_task(args):
    return _winning_pieces(*args)


def _infer_n(l: int) -> int:
    for n in range(1, 64):
        if lifted_dim(n) == l:
            return n
    raise InputError(f"{l} is not a valid lifted dimension")


def merge_pairwise(s, n_m: int,
                   workers: int = 1,
                   on_sweep: Optional[Callable[[int, "MergedSolution"], None]] = None) -> MergedSolution:
    """Run ``n_m`` sweeps, each merging partitions (2k-1, 2k) into partition k.

    An unpaired trailing partition passes through unchanged with the next
    label, so every sweep maps a cover to a cover and the partition count
    goes from ``p`` to ``ceil(p / 2)``.  ``n_m = 0`` returns the input
    (viewed as a merged solution) unchanged.
    """
    if n_m < 0:
        raise InputError("number of merge sweeps must be nonnegative")
    current = as_merged(s)
    for sweep in range(n_m):
        if current.n_partitions <= 1:
            break
        current = _one_sweep(current, workers)
        if on_sweep is not None:
            on_sweep(sweep + 1, current)
    return current


def _one_sweep(s: MergedSolution, workers: int) -> MergedSolution:
    top = s.n_partitions
    pairs = top // 2
    out_regions: List[Polyhedron] = []
    out_functions: List[AffineFunction] = []
    out_partition: List[int] = []
    out_provenance: List[int] = []
    for k in range(1, pairs + 1):
        idx = s.partition_indices(2 * k - 1) + s.partition_indices(2 * k)
        sub_partition = [s.partition[i] for i in idx]
        merged = merge(
            [s.regions[i] for i in idx],
            [s.functions[i] for i in idx],
            partition=sub_partition,
            n=s.n,
            provenance=[s.provenance[i] for i in idx],
            workers=workers,
        )
        out_regions.extend(merged.regions)
        out_functions.extend(merged.functions)
        out_partition.extend([k] * merged.n_regions)
        out_provenance.extend(merged.provenance)
    if top % 2 == 1:
        idx = s.partition_indices(top)
        out_regions.extend(s.regions[i] for i in idx)
        out_functions.extend(s.functions[i] for i in idx)
        out_partition.extend([pairs + 1] * len(idx))
        out_provenance.extend(s.provenance[i] for i in idx)
    return MergedSolution(
        regions=out_regions,
        functions=out_functions,
        partition=out_partition,
        provenance=out_provenance,
        n=s.n,
        l=s.l,
    )


def merge_with_permutations(s, n_m: int, tries: int, seed: int,
                            workers: int = 1) -> MergedSolution:
    """Greedy pairing heuristic: try random partition relabelings, keep the
    result with the fewest regions (ties go to the earliest try)."""
    base = as_merged(s)
    best = merge_pairwise(base, n_m, workers=workers)
    if tries <= 0 or base.n_partitions <= 2:
        return best
    rng = np.random.default_rng(seed)
    for _ in range(tries):
        perm = rng.permutation(base.n_partitions) + 1
        relabeled = MergedSolution(
            regions=list(base.regions),
            functions=list(base.functions),
            partition=[int(perm[v - 1]) for v in base.partition],
            provenance=list(base.provenance),
            n=base.n,
            l=base.l,
        )
        candidate = merge_pairwise(relabeled, n_m, workers=workers)
        if candidate.n_regions < best.n_regions:
            best = candidate
    return best
