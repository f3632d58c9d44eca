"""Synthetic overlapping-partition instances for benchmarks and tests.

Each partition is an axis-aligned grid over a common box, shifted by a
per-partition offset so that partitions overlap without coinciding; every
point of the inner box (the intersection of all shifted boxes) is covered
by one cell of every partition.  Quadratics are drawn independently per
region from the configured ranges, so the same spec and seed always yield
a bit-identical instance.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import InputError
from .geometry import Polyhedron
from .solution import PwqSolution, QuadraticFunction


@dataclass
class GeneratorSpec:
    n: int
    n_part: int
    grid: int
    seed: int
    curvature: float = 0.5
    b_range: Tuple[float, float] = (-1.0, 1.0)
    c_range: Tuple[float, float] = (0.0, 1.0)
    shift: float = 0.35
    half_width: float = 1.0

    def __post_init__(self):
        if self.n < 1 or self.n_part < 1 or self.grid < 1:
            raise InputError("n, n_part and grid must all be positive")
        if not 0.0 <= self.shift < 1.0:
            raise InputError("shift must lie in [0, 1) (fraction of one grid cell)")
        if self.curvature < 0:
            raise InputError("curvature range must be nonnegative")


def generate(spec: GeneratorSpec) -> PwqSolution:
    """Build the overlapping shifted-grid instance described by ``spec``."""
    rng = np.random.default_rng(spec.seed)
    n, g = spec.n, spec.grid
    cell = 2.0 * spec.half_width / g
    regions = []
    functions = []
    partition = []
    for p in range(1, spec.n_part + 1):
        if spec.n_part > 1:
            offset = spec.shift * cell * (p - 1) / (spec.n_part - 1)
        else:
            offset = 0.0
        origin = -spec.half_width + offset
        for cell_idx in itertools.product(range(g), repeat=n):
            lo = np.array([origin + c * cell for c in cell_idx])
            hi = lo + cell
            regions.append(Polyhedron.box(lo, hi))
            M = rng.uniform(-spec.curvature, spec.curvature, size=(n, n))
            A = 0.5 * (M + M.T)
            B = rng.uniform(spec.b_range[0], spec.b_range[1], size=n)
            C = float(rng.uniform(spec.c_range[0], spec.c_range[1]))
            functions.append(QuadraticFunction(A, B, C))
            partition.append(p)
    return PwqSolution(regions=regions, functions=functions, partition=partition)


def inner_box(spec: GeneratorSpec) -> Tuple[np.ndarray, np.ndarray]:
    """The box covered by every partition of the generated instance."""
    cell = 2.0 * spec.half_width / spec.grid
    max_offset = spec.shift * cell if spec.n_part > 1 else 0.0
    lo = np.full(spec.n, -spec.half_width + max_offset)
    hi = np.full(spec.n, spec.half_width)
    return lo, hi


def example_1d() -> PwqSolution:
    """Two overlapping 1-D intervals with intersecting quadratics.

    Region |x| <= 2 carries x^2 + 1 and region |x| <= 3 carries 2 x^2, each
    as its own partition; the pointwise minimum switches at |x| = 1 and the
    first region's domain ends at |x| = 2.
    """
    regions = [
        Polyhedron([[1.0], [-1.0]], [2.0, 2.0]),
        Polyhedron([[1.0], [-1.0]], [3.0, 3.0]),
    ]
    functions = [
        QuadraticFunction([[1.0]], [0.0], 1.0),
        QuadraticFunction([[2.0]], [0.0], 0.0),
    ]
    return PwqSolution(regions=regions, functions=functions, partition=[1, 2])


def minimum_1d(x: float) -> float:
    """Analytic pointwise minimum of the 1-D example (oracle for tests)."""
    vals = []
    if abs(x) <= 2.0:
        vals.append(x * x + 1.0)
    if abs(x) <= 3.0:
        vals.append(2.0 * x * x)
    if not vals:
        raise InputError(f"x={x} lies outside the 1-D example domain")
    return min(vals)
