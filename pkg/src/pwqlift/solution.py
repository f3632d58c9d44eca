"""Piecewise quadratic solution model, the lifting map, and the scan oracle.

A solution is a list of possibly overlapping regions, one quadratic per
region, and a partition label per region; its value at a point is the
minimum over the functions whose regions contain the point.  The lifting
map sends ``x`` to ``(x, all monomials x_i x_j)``; under it every quadratic
becomes affine and every region extends unchanged along the new
coordinates, so the lifted solution evaluates identically along the lifted
manifold.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import lp
from .config import TOLERANCES
from .errors import InputError
from .geometry import Polyhedron, check_same_dim, overlaps


def lifted_dim(n: int) -> int:
    return (n * n + 3 * n) // 2


def lift_point(x) -> np.ndarray:
    """Map ``x`` to ``[x, x1^2, x1 x2, ..., x1 xn, x2^2, ..., xn^2]``."""
    x = np.asarray(x, dtype=float).ravel()
    iu, ju = np.triu_indices(x.size)
    return np.concatenate([x, x[iu] * x[ju]])


@dataclass(frozen=True)
class QuadraticFunction:
    """``x -> x @ A @ x + B @ x + C`` with A symmetrized on construction."""

    A: np.ndarray
    B: np.ndarray
    C: float

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.asarray(self.B, dtype=float).ravel()
        if A.shape[0] != A.shape[1]:
            raise InputError(f"quadratic matrix must be square, got {A.shape}")
        if B.size != A.shape[0]:
            raise InputError(f"linear term length {B.size} does not match matrix size {A.shape[0]}")
        A = 0.5 * (A + A.T)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B.copy())
        object.__setattr__(self, "C", float(self.C))

    @property
    def n(self) -> int:
        return self.B.size

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float).ravel()
        return float(x @ self.A @ x + self.B @ x + self.C)


@dataclass(frozen=True)
class AffineFunction:
    """``y -> D @ y + E`` over the lifted space."""

    D: np.ndarray
    E: float

    def __post_init__(self):
        D = np.asarray(self.D, dtype=float).ravel().copy()
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "E", float(self.E))

    def __call__(self, y) -> float:
        return float(self.D @ np.asarray(y, dtype=float).ravel() + self.E)


def validate_partition(partition: Sequence[int], count: int) -> List[int]:
    """Check 1-based partition labels covering {1..max} with no gaps."""
    part = [int(v) for v in partition]
    if len(part) != count:
        raise InputError(f"partition length {len(part)} does not match region count {count}")
    if not part:
        return part
    top = max(part)
    if min(part) < 1:
        raise InputError("partition values must be positive")
    present = set(part)
    missing = [k for k in range(1, top + 1) if k not in present]
    if missing:
        raise InputError(f"partition values {missing} are missing")
    return part


ControlLaw = Tuple[np.ndarray, np.ndarray]


@dataclass
class PwqSolution:
    """Overlapping regions + quadratics + partition labels (+ optional laws)."""

    regions: List[Polyhedron]
    functions: List[QuadraticFunction]
    partition: List[int]
    control_laws: Optional[List[ControlLaw]] = None

    def __post_init__(self):
        if len(self.regions) != len(self.functions):
            raise InputError("region and function counts differ")
        self.partition = validate_partition(self.partition, len(self.regions))
        self.n = check_same_dim(self.regions)
        for f in self.functions:
            if f.n != self.n:
                raise InputError(f"function dimension {f.n} does not match regions ({self.n})")
        if self.control_laws is not None and len(self.control_laws) != len(self.regions):
            raise InputError("control law count does not match region count")

    @property
    def n_regions(self) -> int:
        return len(self.regions)

    @property
    def n_partitions(self) -> int:
        return max(self.partition) if self.partition else 0

    def partition_indices(self, k: int) -> List[int]:
        return [i for i, v in enumerate(self.partition) if v == k]

    def validate_partition_geometry(self) -> None:
        """Reject regions that overlap inside one declared partition."""
        for k in range(1, self.n_partitions + 1):
            idx = self.partition_indices(k)
            for a in range(len(idx)):
                for b in range(a + 1, len(idx)):
                    if overlaps(self.regions[idx[a]], self.regions[idx[b]]):
                        raise InputError(
                            f"regions {idx[a]} and {idx[b]} overlap within partition {k}"
                        )


@dataclass
class LiftedSolution:
    """The same solution after lifting: affine pieces over zero-padded regions."""

    regions: List[Polyhedron]
    functions: List[AffineFunction]
    partition: List[int]
    n: int
    l: int

    def __post_init__(self):
        if len(self.regions) != len(self.functions):
            raise InputError("region and function counts differ")
        self.partition = validate_partition(self.partition, len(self.regions))
        if self.l != lifted_dim(self.n):
            raise InputError(f"lifted dimension {self.l} does not match n={self.n}")
        check_same_dim(self.regions, self.l)

    @property
    def n_regions(self) -> int:
        return len(self.regions)

    @property
    def n_partitions(self) -> int:
        return max(self.partition) if self.partition else 0


def lift_regions(polys: Sequence[Polyhedron]) -> List[Polyhedron]:
    """Zero-pad every region along the bilinear coordinates (order preserved)."""
    n = check_same_dim(polys)
    l = lifted_dim(n)
    out = []
    for p in polys:
        H = np.hstack([p.H, np.zeros((p.n_rows, l - n))])
        out.append(Polyhedron(H, p.K.copy(), dim=l, validate=False))
    return out


def lift_functions(fs: Sequence[QuadraticFunction]) -> List[AffineFunction]:
    """Rearrange quadratic coefficients into affine ones over the lifted space.

    Off-diagonal curvature entries are doubled (they appear once per ordered
    monomial in the lifted basis); no other arithmetic is performed.
    """
    if not fs:
        return []
    n = fs[0].n
    iu, ju = np.triu_indices(n)
    weights = np.where(iu == ju, 1.0, 2.0)
    out = []
    for f in fs:
        if f.n != n:
            raise InputError("all quadratics must share one dimension")
        D = np.concatenate([f.B, f.A[iu, ju] * weights])
        out.append(AffineFunction(D, f.C))
    return out


def lift_solution(s: PwqSolution) -> LiftedSolution:
    return LiftedSolution(
        regions=lift_regions(s.regions),
        functions=lift_functions(s.functions),
        partition=list(s.partition),
        n=s.n,
        l=lifted_dim(s.n),
    )


def evaluate_sequential(s, x) -> Optional[Tuple[int, float]]:
    """Ground-truth scan: minimum function value over all regions containing x.

    Works for both quadratic and lifted solutions.  Ties break toward the
    lowest region index; returns ``None`` when no region contains ``x``.
    """
    x = np.asarray(x, dtype=float).ravel()
    best: Optional[Tuple[int, float]] = None
    for i, (p, f) in enumerate(zip(s.regions, s.functions)):
        if p.contains(x):
            v = f(x)
            if best is None or v < best[1]:
                best = (i, v)
    return best


class SequentialEvaluator:
    """Vectorized form of :func:`evaluate_sequential` for bulk queries.

    Containment for all regions is resolved with one stacked matrix product;
    semantics (closed tolerance, lowest-index ties) are identical.
    """

    def __init__(self, s):
        self.solution = s
        rows = [p.H for p in s.regions]
        self._H = np.vstack(rows) if rows else np.zeros((0, 0))
        self._K = np.concatenate([p.K for p in s.regions]) if rows else np.zeros(0)
        counts = [p.n_rows for p in s.regions]
        self._slices = np.concatenate([[0], np.cumsum(counts)])

    def __call__(self, x) -> Optional[Tuple[int, float]]:
        x = np.asarray(x, dtype=float).ravel()
        sat = self._H @ x <= self._K + TOLERANCES.feas
        best: Optional[Tuple[int, float]] = None
        for i, f in enumerate(self.solution.functions):
            lo, hi = self._slices[i], self._slices[i + 1]
            if np.all(sat[lo:hi]):
                v = f(x)
                if best is None or v < best[1]:
                    best = (i, v)
        return best


def _monomial_interval(lo_i, hi_i, lo_j, hi_j, square: bool):
    if square:
        hi = max(lo_i * lo_i, hi_i * hi_i)
        lo = 0.0 if lo_i <= 0.0 <= hi_i else min(lo_i * lo_i, hi_i * hi_i)
        return lo, hi
    prods = (lo_i * lo_j, lo_i * hi_j, hi_i * lo_j, hi_i * hi_j)
    return min(prods), max(prods)


def _contains_region(inner: Polyhedron, outer: Polyhedron) -> bool:
    """Certified ``inner <= outer`` via one LP (or cached bounds) per outer row."""
    for r in range(outer.n_rows):
        row = outer.H[r]
        nz = np.flatnonzero(row)
        if nz.size == 1:
            j = int(nz[0])
            lo, hi = inner.coordinate_bounds(j)
            worst = row[j] * (hi if row[j] > 0 else lo)
            if not np.isfinite(worst) or worst > outer.K[r] + TOLERANCES.feas:
                return False
            continue
        res = lp.minimize(-row, inner.H, inner.K)
        if res.status != lp.LpStatus.OPTIMAL or -res.value > outer.K[r] + TOLERANCES.feas:
            return False
    return True


def prune_dominated(s: PwqSolution) -> Tuple[PwqSolution, List[int]]:
    """Drop regions whose function provably never attains the minimum there.

    Region i is removed only on a certificate: some surviving region j
    contains it and ``J_j <= J_i`` holds on all of region i.  The dominance
    side is shown by minimizing the lifted affine gap over region i's lift
    intersected with interval boxes on the bilinear coordinates (the boxes
    come from 2n coordinate-bound LPs per region).  Anything uncertified
    survives; merging removes whatever this pass misses.  Exact ties keep
    the lower-indexed region.  Returns the pruned solution and the kept
    original indices.
    """
    n = s.n
    N = s.n_regions
    if N <= 1:
        return s, list(range(N))
    lifted_fns = lift_functions(s.functions)
    lifted_regs = lift_regions(s.regions)
    l = lifted_dim(n)
    iu, ju = np.triu_indices(n)

    box_rows: List[Optional[Tuple[np.ndarray, np.ndarray]]] = []
    for p in s.regions:
        coord = [p.coordinate_bounds(j) for j in range(n)]
        if not all(np.isfinite(b).all() for b in coord):
            box_rows.append(None)
            continue
        rows = []
        bounds = []
        for k in range(iu.size):
            i_, j_ = int(iu[k]), int(ju[k])
            lo, hi = _monomial_interval(*coord[i_], *coord[j_], square=i_ == j_)
            e = np.zeros(l)
            e[n + k] = 1.0
            rows.append(e)
            bounds.append(hi)
            rows.append(-e)
            bounds.append(-lo)
        box_rows.append((np.asarray(rows), np.asarray(bounds)))

    removed = set()
    for i in reversed(range(N)):
        if box_rows[i] is None:
            continue
        gap_region_H = np.vstack([lifted_regs[i].H, box_rows[i][0]])
        gap_region_K = np.concatenate([lifted_regs[i].K, box_rows[i][1]])
        for j in range(N):
            if j == i or j in removed:
                continue
            if not _contains_region(s.regions[i], s.regions[j]):
                continue
            gap = lifted_fns[i].D - lifted_fns[j].D
            offset = lifted_fns[i].E - lifted_fns[j].E
            res = lp.minimize(gap, gap_region_H, gap_region_K)
            if res.status == lp.LpStatus.OPTIMAL and res.value + offset >= 0.0:
                removed.add(i)
                break

    kept = [i for i in range(N) if i not in removed]
    if len(kept) == N:
        return s, kept
    labels = sorted({s.partition[i] for i in kept})
    relabel = {old: new for new, old in enumerate(labels, start=1)}
    pruned = PwqSolution(
        regions=[s.regions[i] for i in kept],
        functions=[s.functions[i] for i in kept],
        partition=[relabel[s.partition[i]] for i in kept],
        control_laws=None if s.control_laws is None else [s.control_laws[i] for i in kept],
    )
    return pruned, kept
