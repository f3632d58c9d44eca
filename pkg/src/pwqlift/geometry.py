"""Half-space polyhedra and the set operations behind overlap elimination.

Regions are stored in inequality form ``{x : H @ x <= K}``.  Everything a
region participates in downstream (overlap tests, redundancy pruning, set
difference, facet extraction) is certified through the LP layer with the
shared tolerance ladder from :mod:`pwqlift.config`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import lp
from .config import TOLERANCES
from .errors import InputError

_ROW_MATCH_TOL = 1e-12
_HYPERPLANE_DEDUP_TOL = 1e-8


class Polyhedron:
    """A region ``{x : H @ x <= K}``; treated as immutable after construction.

    Rows that are identically zero are vacuous when their bound is
    nonnegative and are dropped; a zero row with a negative bound marks the
    canonical empty polyhedron.  Per-coordinate interval bounds are computed
    lazily (two LPs each) and cached, since several pipeline stages reuse
    them.
    """

    __slots__ = ("H", "K", "dim", "_bounds", "_row_supports")

    def __init__(self, H, K, dim: Optional[int] = None, validate: bool = True):
        H = np.atleast_2d(np.asarray(H, dtype=float))
        K = np.asarray(K, dtype=float).ravel()
        if H.size == 0:
            if dim is None:
                dim = H.shape[1]
            if dim <= 0:
                raise InputError("polyhedron dimension must be positive")
            H = H.reshape(0, dim)
        if H.shape[0] != K.size:
            raise InputError(f"H has {H.shape[0]} rows but K has {K.size} entries")
        if dim is not None and H.shape[1] != dim and H.shape[0] > 0:
            raise InputError(f"H has {H.shape[1]} columns, expected {dim}")
        if validate and H.shape[0]:
            if not (np.all(np.isfinite(H)) and np.all(np.isfinite(K))):
                raise InputError("polyhedron data must be finite")
            zero = np.all(H == 0.0, axis=1)
            if np.any(zero & (K < 0.0)):
                H = np.zeros((1, H.shape[1]))
                K = np.array([-1.0])
            elif np.any(zero):
                H = H[~zero]
                K = K[~zero]
        self.H = H
        self.K = K
        self.dim = H.shape[1]
        self._bounds: Dict[int, Tuple[float, float]] = {}
        self._row_supports: Optional[np.ndarray] = None

    @classmethod
    def whole_space(cls, dim: int) -> "Polyhedron":
        return cls(np.zeros((0, dim)), np.zeros(0), dim=dim)

    @classmethod
    def empty(cls, dim: int) -> "Polyhedron":
        return cls(np.zeros((1, dim)), np.array([-1.0]), validate=False)

    @classmethod
    def box(cls, lo, hi) -> "Polyhedron":
        lo = np.asarray(lo, dtype=float).ravel()
        hi = np.asarray(hi, dtype=float).ravel()
        d = lo.size
        H = np.vstack([np.eye(d), -np.eye(d)])
        K = np.concatenate([hi, -lo])
        return cls(H, K)

    @property
    def n_rows(self) -> int:
        return self.H.shape[0]

    @property
    def is_marked_empty(self) -> bool:
        return self.n_rows > 0 and bool(
            np.any(np.all(self.H == 0.0, axis=1) & (self.K < 0.0))
        )

    def contains(self, x, tol: Optional[float] = None) -> bool:
        if tol is None:
            tol = TOLERANCES.feas
        if self.n_rows == 0:
            return True
        return bool(np.all(self.H @ np.asarray(x, dtype=float) <= self.K + tol))

    def with_rows(self, rows, bounds) -> "Polyhedron":
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        bounds = np.asarray(bounds, dtype=float).ravel()
        return Polyhedron(np.vstack([self.H, rows]), np.concatenate([self.K, bounds]),
                          validate=False)

    @property
    def row_supports(self) -> np.ndarray:
        """Nonzero count per row; cached because op accounting reuses it."""
        if self._row_supports is None:
            self._row_supports = np.count_nonzero(self.H, axis=1).astype(np.int64)
        return self._row_supports

    def coordinate_bounds(self, j: int) -> Tuple[float, float]:
        """Certified ``[min x_j, max x_j]`` over the region; infinite if unbounded."""
        cached = self._bounds.get(j)
        if cached is not None:
            return cached
        out = []
        for sign in (1.0, -1.0):
            c = np.zeros(self.dim)
            c[j] = sign
            res = lp.minimize(c, self.H, self.K)
            if res.status == lp.LpStatus.UNBOUNDED:
                out.append(-np.inf if sign > 0 else np.inf)
            elif res.status == lp.LpStatus.OPTIMAL:
                out.append(sign * res.value)
            else:
                out.append(np.nan)
        bounds = (out[0], out[1])
        self._bounds[j] = bounds
        return bounds

    def __repr__(self) -> str:
        return f"Polyhedron(dim={self.dim}, rows={self.n_rows})"


def check_same_dim(polys: Sequence[Polyhedron], dim: Optional[int] = None) -> int:
    """Validate that all polyhedra share one ambient dimension; returns it."""
    if not polys and dim is None:
        raise InputError("empty polyhedral set with unknown dimension")
    for p in polys:
        if dim is None:
            dim = p.dim
        elif p.dim != dim:
            raise InputError(f"dimension mismatch: {p.dim} vs {dim}")
    return int(dim)


def interior_certificate(p: Polyhedron):
    """Capped inscribed-ball certificate ``(radius, center)`` or ``None`` if infeasible."""
    return lp.chebyshev_certificate(p.H, p.K, cap=1.0)


def is_full_dim(p: Polyhedron) -> bool:
    cert = interior_certificate(p)
    return cert is not None and cert[0] > TOLERANCES.interior


def intersect(p: Polyhedron, q: Polyhedron) -> Polyhedron:
    if p.dim != q.dim:
        raise InputError(f"dimension mismatch: {p.dim} vs {q.dim}")
    return Polyhedron(np.vstack([p.H, q.H]), np.concatenate([p.K, q.K]), validate=False)


def overlaps(p1: Polyhedron, p2: Polyhedron) -> bool:
    """True iff the two regions share interior points (certified radius)."""
    if p1.dim != p2.dim:
        raise InputError(f"dimension mismatch: {p1.dim} vs {p2.dim}")
    cert = lp.chebyshev_certificate(np.vstack([p1.H, p2.H]),
                                    np.concatenate([p1.K, p2.K]), cap=1.0)
    return cert is not None and cert[0] > TOLERANCES.interior


def remove_redundant(p: Polyhedron) -> Polyhedron:
    """Certified irredundant representation of the same point set.

    One LP per row: row r is dropped when maximizing it over the remaining
    rows (with its own bound relaxed) cannot exceed its bound.  An empty
    input collapses to the canonical empty polyhedron.
    """
    if p.is_marked_empty:
        return Polyhedron.empty(p.dim)
    m = p.n_rows
    if m <= 1:
        return p
    feas = lp.minimize(np.zeros(p.dim), p.H, p.K)
    if feas.status == lp.LpStatus.INFEASIBLE:
        return Polyhedron.empty(p.dim)
    keep = list(range(m))
    for r in range(m):
        others = [i for i in keep if i != r]
        A = np.vstack([p.H[others], p.H[r:r + 1]])
        b = np.append(p.K[others], p.K[r] + 1.0)
        res = lp.minimize(-p.H[r], A, b)
        if res.status == lp.LpStatus.OPTIMAL and -res.value <= p.K[r] + TOLERANCES.feas:
            keep.remove(r)
    if len(keep) == m:
        return p
    if not keep:
        return Polyhedron.whole_space(p.dim)
    return Polyhedron(p.H[keep], p.K[keep], validate=False)


def _row_implied(H: np.ndarray, K: np.ndarray, row: np.ndarray, bound: float) -> bool:
    """True when an identical-direction row with bound <= `bound` is present."""
    if H.shape[0] == 0:
        return False
    close = np.max(np.abs(H - row), axis=1) <= _ROW_MATCH_TOL * max(1.0, float(np.abs(row).max()))
    return bool(np.any(close & (K <= bound + _ROW_MATCH_TOL)))


def region_diff(p: Polyhedron, qs: Sequence[Polyhedron]) -> List[Polyhedron]:
    """Non-overlapping full-dimensional cover of ``closure(p \\ union(qs))``.

    Classic constraint-splitting recursion: the first subtractor with a
    full-dimensional intersection is processed one constraint at a time
    (flip the constraint to step outside, keep it to continue), and each
    surviving piece recurses on the remaining subtractors.  Pieces whose
    certified interior radius falls below the interior tolerance are
    discarded as measure-zero.  Returns ``[]`` when ``p`` is covered.
    """
    check_same_dim(list(qs) + [p], p.dim)
    out: List[Polyhedron] = []
    if not is_full_dim(p):
        return out
    _region_diff_rec(p, list(qs), out)
    return out


def _region_diff_rec(p: Polyhedron, qs: List[Polyhedron], out: List[Polyhedron]) -> None:
    chosen = None
    for idx, q in enumerate(qs):
        if q.is_marked_empty:
            continue
        if is_full_dim(intersect(p, q)):
            chosen = idx
            break
    if chosen is None:
        # Pieces reaching this point were reduced on recursion entry; the
        # untouched top-level region is passed through as given.
        out.append(p)
        return
    q = qs[chosen]
    rest = qs[chosen + 1:]
    current = p
    for j in range(q.n_rows):
        row = q.H[j]
        bound = q.K[j]
        # A flip against a constraint already implied by the current piece
        # can only produce a slab of zero width.
        if not _row_implied(current.H, current.K, row, bound):
            piece = current.with_rows(-row, -bound)
            if is_full_dim(piece):
                _region_diff_rec(remove_redundant(piece), rest, out)
        current = current.with_rows(row, bound)


@dataclass(frozen=True)
class Hyperplane:
    """Canonical unit-normal hyperplane ``{y : a @ y = b}``.

    The representative is normalized to unit norm with the first nonzero
    entry of ``a`` positive, so facets shared by neighboring regions
    deduplicate to a single decision criterion.
    """

    a: np.ndarray
    b: float

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float).ravel()
        nrm = float(np.linalg.norm(a))
        if nrm <= _ROW_MATCH_TOL:
            raise InputError("cannot build a hyperplane from a zero normal")
        a = a / nrm
        b = float(self.b) / nrm
        lead = np.flatnonzero(np.abs(a) > _ROW_MATCH_TOL)
        if lead.size and a[lead[0]] < 0.0:
            a = -a
            b = -b
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def support(self) -> int:
        return int(np.count_nonzero(self.a))

    def side(self, y) -> float:
        return float(self.a @ np.asarray(y, dtype=float) - self.b)


def canonical_facet(row: np.ndarray, bound: float) -> Tuple[Hyperplane, bool]:
    """Hyperplane through a facet row plus whether canonicalization flipped it.

    When not flipped the region satisfies ``a @ y <= b`` (low side); when
    flipped it satisfies ``a @ y >= b`` (high side).
    """
    h = Hyperplane(row, bound)
    flipped = bool(float(h.a @ row) < 0.0)
    return h, flipped


def extract_hyperplanes(polys: Sequence[Polyhedron]) -> List[Hyperplane]:
    """Deduplicated canonical facet hyperplanes across all regions."""
    if not polys:
        raise InputError("cannot extract hyperplanes from an empty set")
    check_same_dim(polys)
    hyps: List[Hyperplane] = []
    a_acc: List[np.ndarray] = []
    b_acc: List[float] = []
    for p in polys:
        for r in range(p.n_rows):
            h, _ = canonical_facet(p.H[r], p.K[r])
            if _find_hyperplane(a_acc, b_acc, h) is None:
                hyps.append(h)
                a_acc.append(h.a)
                b_acc.append(h.b)
    return hyps


def _find_hyperplane(a_acc: List[np.ndarray], b_acc: List[float], h: Hyperplane):
    if not a_acc:
        return None
    A = np.asarray(a_acc)
    b = np.asarray(b_acc)
    d2 = np.sum((A - h.a) ** 2, axis=1)
    hit = np.flatnonzero((d2 <= _HYPERPLANE_DEDUP_TOL ** 2) &
                         (np.abs(b - h.b) <= _HYPERPLANE_DEDUP_TOL))
    return int(hit[0]) if hit.size else None
