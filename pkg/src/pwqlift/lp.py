"""Dense two-phase simplex for the small LPs behind all polyhedral tests.

Every geometric predicate in this package (overlap, redundancy, set
difference, tree preprocessing) reduces to an LP of the form

    min  c @ x   subject to   A @ x <= b,   x free,

with at most a few dozen rows and columns, so a dense tableau is adequate
and fully deterministic.  Degeneracy is handled by switching the pricing
rule to Bland's once the objective stalls; an iteration cap turns any
residual cycling into an explicit :class:`NumericalError` instead of a
silently wrong status.

The pivot loop runs as a numba kernel when numba is importable (it is a
pure-speed concern: pipelines solve tens of thousands of these LPs) and
falls back to a vectorized numpy implementation otherwise.

The module exposes a backend seam: :func:`set_lp_backend` swaps in any
callable with the :func:`solve_lp` contract (used in the test suite to
cross-check against an external solver).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .errors import InputError, NumericalError

_RC_TOL = 1e-10        # reduced-cost threshold for optimality
_PIVOT_TOL = 1e-11     # minimal acceptable pivot magnitude
_RATIO_TIE = 1e-12     # tie window in the ratio test
_STALL_LIMIT = 40      # degenerate pivots before switching to Bland's rule

_OPTIMAL, _INFEASIBLE, _UNBOUNDED, _ITERLIMIT = 0, 1, 2, 3


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LinearProgram:
    """``min objective @ x`` subject to ``constraints_lhs @ x <= constraints_rhs``."""

    objective: np.ndarray
    constraints_lhs: np.ndarray
    constraints_rhs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).ravel()
        A = np.atleast_2d(np.asarray(self.constraints_lhs, dtype=float))
        b = np.asarray(self.constraints_rhs, dtype=float).ravel()
        if A.size == 0:
            A = A.reshape(0, c.size)
        if A.shape[0] != b.size:
            raise InputError(
                f"constraint row count {A.shape[0]} does not match rhs length {b.size}"
            )
        if A.shape[1] != c.size:
            raise InputError(
                f"objective length {c.size} does not match constraint column count {A.shape[1]}"
            )
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise InputError("LP data must be finite")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "constraints_lhs", A)
        object.__setattr__(self, "constraints_rhs", b)


@dataclass(frozen=True)
class LpOutcome:
    status: LpStatus
    argmin: Optional[np.ndarray] = None
    value: Optional[float] = None


# ---------------------------------------------------------------------------
# numpy fallback implementation


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] = T[row] / T[row, col]
    colvals = T[:, col].copy()
    colvals[row] = 0.0
    T -= np.outer(colvals, T[row])
    T[:, col] = 0.0
    T[row, col] = 1.0


def _iterate_numpy(T: np.ndarray, basis: np.ndarray, allowed: np.ndarray,
                   max_iter: int) -> int:
    m = T.shape[0] - 1
    bland = False
    stall = 0
    value = -T[-1, -1]
    for _ in range(max_iter):
        rc = T[-1, :-1]
        if bland:
            cand = np.flatnonzero(allowed & (rc < -_RC_TOL))
            if cand.size == 0:
                return _OPTIMAL
            col = int(cand[0])
        else:
            masked = np.where(allowed, rc, 0.0)
            col = int(np.argmin(masked))
            if masked[col] >= -_RC_TOL:
                return _OPTIMAL
        colvals = T[:m, col]
        pos = colvals > _PIVOT_TOL
        if not np.any(pos):
            return _UNBOUNDED
        ratios = np.full(m, np.inf)
        ratios[pos] = T[:m, -1][pos] / colvals[pos]
        best = ratios.min()
        rows = np.flatnonzero(ratios <= best + _RATIO_TIE)
        row = int(rows[np.argmin(basis[rows])]) if rows.size > 1 else int(rows[0])
        _pivot(T, row, col)
        basis[row] = col
        new_value = -T[-1, -1]
        if new_value >= value - 1e-13:
            stall += 1
            if stall >= _STALL_LIMIT:
                bland = True
        else:
            stall = 0
        value = new_value
    return _ITERLIMIT


def _solve_numpy(c: np.ndarray, A: np.ndarray, b: np.ndarray):
    """Two-phase tableau simplex; returns (code, x)."""
    m, d = A.shape
    scale = 1.0 + float(np.abs(b).max()) if m else 1.0

    neg = b < 0.0
    sign = np.where(neg, -1.0, 1.0)
    body = np.hstack([A, -A, np.eye(m)]) * sign[:, None]
    rhs = b * sign
    art_rows = np.flatnonzero(neg)
    n_art = art_rows.size
    n_real = 2 * d + m
    cols = n_real + n_art

    T = np.zeros((m + 1, cols + 1))
    T[:m, :n_real] = body
    T[:m, -1] = rhs
    for k, r in enumerate(art_rows):
        T[r, n_real + k] = 1.0

    basis = np.arange(2 * d, 2 * d + m, dtype=np.int64)
    basis[art_rows] = n_real + np.arange(n_art)
    allowed = np.ones(cols, dtype=bool)
    allowed[n_real:] = False
    max_iter = 500 + 50 * (m + cols)

    if n_art:
        phase1 = np.zeros(cols + 1)
        phase1[n_real:cols] = 1.0
        for r in art_rows:
            phase1 -= T[r]
        T[-1] = phase1
        code = _iterate_numpy(T, basis, allowed, max_iter)
        if code == _UNBOUNDED:
            return _ITERLIMIT, None
        if code != _OPTIMAL:
            return code, None
        if -T[-1, -1] > 1e-9 * scale:
            return _INFEASIBLE, None
        drop = []
        for r in range(m):
            if basis[r] >= n_real:
                row_vals = np.abs(T[r, :n_real])
                col = int(np.argmax(row_vals))
                if row_vals[col] > _PIVOT_TOL:
                    _pivot(T, r, col)
                    basis[r] = col
                else:
                    drop.append(r)
        if drop:
            keep = np.setdiff1d(np.arange(m), np.array(drop, dtype=int))
            T = T[np.append(keep, m)]
            basis = basis[keep]
            m = keep.size
        T = np.delete(T, np.s_[n_real:cols], axis=1)
        allowed = allowed[:n_real]
        cols = n_real

    full_c = np.zeros(cols + 1)
    full_c[:d] = c
    full_c[d:2 * d] = -c
    obj = full_c.copy()
    for r in range(m):
        cb = full_c[basis[r]]
        if cb != 0.0:
            obj -= cb * T[r]
    obj[basis] = 0.0
    T[-1] = obj

    code = _iterate_numpy(T, basis, allowed, max_iter)
    if code != _OPTIMAL:
        return code, None
    x_std = np.zeros(cols)
    x_std[basis] = T[:m, -1]
    return _OPTIMAL, x_std[:d] - x_std[d:2 * d]


# ---------------------------------------------------------------------------
# numba kernel (same algorithm, explicit loops)

try:
    from numba import njit as _njit

    @_njit(cache=True)
    def _iterate_kernel(T, basis, allowed, max_iter, m):  # pragma: no cover - jit
        ncol = T.shape[1] - 1
        bland = False
        stall = 0
        value = -T[m, ncol]
        for _ in range(max_iter):
            col = -1
            if bland:
                for j in range(ncol):
                    if allowed[j] and T[m, j] < -1e-10:
                        col = j
                        break
                if col == -1:
                    return 0
            else:
                best = -1e-10
                for j in range(ncol):
                    if allowed[j] and T[m, j] < best:
                        best = T[m, j]
                        col = j
                if col == -1:
                    return 0
            brow = -1
            bratio = 0.0
            for i in range(m):
                piv = T[i, col]
                if piv > 1e-11:
                    r = T[i, ncol] / piv
                    if brow == -1 or r < bratio - 1e-12 or (
                            r <= bratio + 1e-12 and basis[i] < basis[brow]):
                        brow = i
                        bratio = r
            if brow == -1:
                return 2
            pv = T[brow, col]
            for j in range(ncol + 1):
                T[brow, j] /= pv
            for i in range(m + 1):
                if i != brow:
                    f = T[i, col]
                    if f != 0.0:
                        for j in range(ncol + 1):
                            T[i, j] -= f * T[brow, j]
            for i in range(m + 1):
                T[i, col] = 0.0
            T[brow, col] = 1.0
            basis[brow] = col
            nv = -T[m, ncol]
            if nv >= value - 1e-13:
                stall += 1
                if stall >= 40:
                    bland = True
            else:
                stall = 0
            value = nv
        return 3

    @_njit(cache=True)
    def _solve_kernel(c, A, b):  # pragma: no cover - jit
        m, d = A.shape
        scale = 1.0
        if m > 0:
            mx = 0.0
            for i in range(m):
                if abs(b[i]) > mx:
                    mx = abs(b[i])
            scale = 1.0 + mx
        n_art = 0
        for i in range(m):
            if b[i] < 0.0:
                n_art += 1
        n_real = 2 * d + m
        cols = n_real + n_art
        T = np.zeros((m + 1, cols + 1))
        basis = np.empty(m, np.int64)
        art_rows = np.empty(n_art, np.int64)
        k = 0
        for i in range(m):
            s = -1.0 if b[i] < 0.0 else 1.0
            for j in range(d):
                T[i, j] = s * A[i, j]
                T[i, d + j] = -s * A[i, j]
            T[i, 2 * d + i] = s
            T[i, cols] = s * b[i]
            basis[i] = 2 * d + i
            if b[i] < 0.0:
                T[i, n_real + k] = 1.0
                basis[i] = n_real + k
                art_rows[k] = i
                k += 1
        allowed = np.ones(cols, np.bool_)
        for j in range(n_real, cols):
            allowed[j] = False
        max_iter = 500 + 50 * (m + cols)

        if n_art > 0:
            for j in range(cols + 1):
                T[m, j] = 0.0
            for j in range(n_real, cols):
                T[m, j] = 1.0
            for kk in range(n_art):
                r = art_rows[kk]
                for j in range(cols + 1):
                    T[m, j] -= T[r, j]
            code = _iterate_kernel(T, basis, allowed, max_iter, m)
            if code == 2 or code == 3:
                return 3, np.zeros(d)
            if -T[m, cols] > 1e-9 * scale:
                return 1, np.zeros(d)
            # pivot leftover artificials out; rows that cannot pivot are redundant
            keep = np.ones(m, np.bool_)
            for r in range(m):
                if basis[r] >= n_real:
                    col = -1
                    best = 1e-11
                    for j in range(n_real):
                        if abs(T[r, j]) > best:
                            best = abs(T[r, j])
                            col = j
                    if col >= 0:
                        pv = T[r, col]
                        for j in range(cols + 1):
                            T[r, j] /= pv
                        for i in range(m + 1):
                            if i != r:
                                f = T[i, col]
                                if f != 0.0:
                                    for j in range(cols + 1):
                                        T[i, j] -= f * T[r, j]
                        for i in range(m + 1):
                            T[i, col] = 0.0
                        T[r, col] = 1.0
                        basis[r] = col
                    else:
                        keep[r] = False
            m2 = 0
            for r in range(m):
                if keep[r]:
                    m2 += 1
            T2 = np.zeros((m2 + 1, n_real + 1))
            basis2 = np.empty(m2, np.int64)
            rr = 0
            for r in range(m):
                if keep[r]:
                    for j in range(n_real):
                        T2[rr, j] = T[r, j]
                    T2[rr, n_real] = T[r, cols]
                    basis2[rr] = basis[r]
                    rr += 1
            T = T2
            basis = basis2
            m = m2
            cols = n_real
            allowed = np.ones(cols, np.bool_)

        # phase II objective row
        for j in range(cols + 1):
            T[m, j] = 0.0
        for j in range(d):
            T[m, j] = c[j]
            T[m, d + j] = -c[j]
        for r in range(m):
            bj = basis[r]
            cb = 0.0
            if bj < d:
                cb = c[bj]
            elif bj < 2 * d:
                cb = -c[bj - d]
            if cb != 0.0:
                for j in range(cols + 1):
                    T[m, j] -= cb * T[r, j]
        for r in range(m):
            T[m, basis[r]] = 0.0

        code = _iterate_kernel(T, basis, allowed, max_iter, m)
        if code == 2:
            return 2, np.zeros(d)
        if code == 3:
            return 3, np.zeros(d)
        x = np.zeros(d)
        for r in range(m):
            bj = basis[r]
            if bj < d:
                x[bj] += T[r, cols]
            elif bj < 2 * d:
                x[bj - d] -= T[r, cols]
        return 0, x

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is normally available
    _HAVE_NUMBA = False


def _solve_arrays(c: np.ndarray, A: np.ndarray, b: np.ndarray) -> LpOutcome:
    m, d = A.shape
    if m == 0:
        if np.any(np.abs(c) > _RC_TOL):
            return LpOutcome(LpStatus.UNBOUNDED)
        return LpOutcome(LpStatus.OPTIMAL, argmin=np.zeros(d), value=0.0)

    if _HAVE_NUMBA:
        code, x = _solve_kernel(np.ascontiguousarray(c), np.ascontiguousarray(A),
                                np.ascontiguousarray(b))
    else:
        code, x = _solve_numpy(c, A, b)

    if code == _INFEASIBLE:
        return LpOutcome(LpStatus.INFEASIBLE)
    if code == _UNBOUNDED:
        return LpOutcome(LpStatus.UNBOUNDED)
    if code == _ITERLIMIT:
        raise NumericalError("simplex iteration limit exceeded (possible cycling)")
    residual = float((A @ x - b).max())
    scale = 1.0 + float(np.abs(b).max())
    if residual > 1e-7 * scale:
        raise NumericalError(
            f"simplex returned an infeasible optimum (residual {residual:.3e})")
    return LpOutcome(LpStatus.OPTIMAL, argmin=x, value=float(c @ x))


LpBackend = Callable[[LinearProgram], LpOutcome]
_backend: Optional[LpBackend] = None


def set_lp_backend(backend: Optional[LpBackend]) -> None:
    """Install a replacement LP engine (``None`` restores the built-in simplex)."""
    global _backend
    _backend = backend


def solve_lp(lp: LinearProgram) -> LpOutcome:
    """Solve a dense LP; statuses are exact up to the configured tolerances."""
    if _backend is not None:
        return _backend(lp)
    return _solve_arrays(lp.objective, lp.constraints_lhs, lp.constraints_rhs)


def minimize(c, A, b) -> LpOutcome:
    """Array-level convenience wrapper around :func:`solve_lp`."""
    return solve_lp(LinearProgram(c, A, b))


def chebyshev_certificate(H: np.ndarray, K: np.ndarray, cap: float = 1.0):
    """Largest inscribed-ball certificate ``max t : H x + t ||H_row|| <= K``.

    ``t`` is capped at ``cap`` so that sets which are unbounded along some
    directions (lifted polyhedra always are) still yield a finite
    certificate.  Returns ``(radius, center)`` or ``None`` when the system
    is infeasible.  A negative radius means the polyhedron itself is empty;
    it is reported as ``None`` as well.
    """
    H = np.atleast_2d(np.asarray(H, dtype=float))
    K = np.asarray(K, dtype=float).ravel()
    m = H.shape[0]
    d = H.shape[1]
    norms = np.linalg.norm(H, axis=1) if m else np.zeros(0)
    A = np.zeros((m + 1, d + 1))
    if m:
        A[:m, :d] = H
        A[:m, d] = norms
    A[m, d] = 1.0
    b = np.append(K, cap)
    c = np.zeros(d + 1)
    c[d] = -1.0
    out = minimize(c, A, b)
    if out.status == LpStatus.INFEASIBLE:
        return None
    if out.status != LpStatus.OPTIMAL:
        raise NumericalError("interior-certificate LP did not reach an optimum")
    radius = float(out.argmin[d])
    if radius < 0.0:
        return None
    return radius, out.argmin[:d].copy()
