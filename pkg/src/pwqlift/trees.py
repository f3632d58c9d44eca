"""Binary point-location trees over polyhedral partitions plus op accounting.

Internal nodes test one facet hyperplane; leaves list the candidate regions
that survive the decisions on the path.  Construction precomputes a
region-versus-hyperplane side table (at most two LPs per pair, usually far
fewer thanks to facet matching and cached coordinate bounds) and then
greedily picks the most balancing hyperplane at every node.

The operation-count model prices a node decision at ``support + 1`` (one
multiply-add per nonzero coefficient plus the comparison), an affine
function evaluation at ``l + 1``, a value comparison at ``1``, and the
lifting of a query point at ``n (n + 1) / 2``.  Leaf containment checks are
priced like node decisions, one per region row actually inspected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import lp
from .config import TOLERANCES
from .errors import InputError
from .geometry import Hyperplane, Polyhedron, canonical_facet, _find_hyperplane
from .merging import MergedSolution
from .solution import AffineFunction, ControlLaw, lift_point

LOW, HIGH, BOTH = 0, 1, 2


@dataclass(frozen=True)
class OpCountModel:
    """Scalar-operation prices for online evaluation."""

    n: int
    l: int
    compare_cost: int = 1

    def node_cost(self, support: int) -> int:
        return support + 1

    @property
    def function_eval_cost(self) -> int:
        return self.l + 1

    @property
    def lift_cost(self) -> int:
        return self.n * (self.n + 1) // 2


@dataclass
class SplitNode:
    hyperplane: Hyperplane
    low: int
    high: int
    support_idx: np.ndarray = field(init=False)
    support_val: np.ndarray = field(init=False)

    def __post_init__(self):
        self.support_idx = np.flatnonzero(self.hyperplane.a)
        self.support_val = self.hyperplane.a[self.support_idx].copy()


@dataclass
class Leaf:
    candidates: List[int]


Node = Union[SplitNode, Leaf]


@dataclass
class SearchTree:
    """Hyperplane-decision tree; nodes stored flat, children by index."""

    nodes: List[Node]
    root: int
    depth: int
    n_h: int

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def leaves(self) -> List[Leaf]:
        return [nd for nd in self.nodes if isinstance(nd, Leaf)]

    def balance_ratio(self, n_regions: int) -> float:
        if n_regions <= 1 or self.depth == 0:
            return 1.0
        return self.depth / float(np.ceil(np.log2(n_regions)))


def classify(p: Polyhedron, h: Hyperplane):
    """Side of hyperplane ``h`` that region ``p`` lies in: LOW, HIGH or BOTH.

    LOW means a certified ``max a@y <= b + tol`` over the region (HIGH is
    symmetric); a region touching the hyperplane only at its boundary is
    classified to the side containing it.  Directions in which the region
    is unbounded count against that side's containment.
    """
    if p.dim != h.a.size:
        raise InputError(f"dimension mismatch: region {p.dim} vs hyperplane {h.a.size}")
    tol = TOLERANCES.feas
    nz = np.flatnonzero(h.a)
    if nz.size == 1:
        j = int(nz[0])
        lo, hi = p.coordinate_bounds(j)
        coef = h.a[j]
        top = coef * hi if coef > 0 else coef * lo
        bot = coef * lo if coef > 0 else coef * hi
        if np.isfinite(top) and top <= h.b + tol:
            return LOW
        if np.isfinite(bot) and bot >= h.b - tol:
            return HIGH
        return BOTH
    res = lp.minimize(-h.a, p.H, p.K)
    if res.status == lp.LpStatus.OPTIMAL and -res.value <= h.b + tol:
        return LOW
    res = lp.minimize(h.a, p.H, p.K)
    if res.status == lp.LpStatus.OPTIMAL and res.value >= h.b - tol:
        return HIGH
    return BOTH


def _facet_table(partition: Sequence[Polyhedron]) -> Tuple[List[Hyperplane], np.ndarray]:
    """Hyperplane list plus the classification table, prefilled from facets.

    A region lies on the low side of its own unflipped facet and on the high
    side of a flipped one; only near-exact facet matches are prefilled, the
    rest fall back to :func:`classify` certificates.
    """
    hyps: List[Hyperplane] = []
    a_acc: List[np.ndarray] = []
    b_acc: List[float] = []
    facet_sides: Dict[Tuple[int, int], int] = {}
    for ridx, p in enumerate(partition):
        for r in range(p.n_rows):
            h, flipped = canonical_facet(p.H[r], p.K[r])
            pos = _find_hyperplane(a_acc, b_acc, h)
            if pos is None:
                pos = len(hyps)
                hyps.append(h)
                a_acc.append(h.a)
                b_acc.append(h.b)
            ref = hyps[pos]
            if (np.max(np.abs(ref.a - h.a)) <= 1e-11
                    and abs(ref.b - h.b) <= 1e-11):
                facet_sides[(ridx, pos)] = HIGH if flipped else LOW
    table = np.empty((len(partition), len(hyps)), dtype=np.int8)
    for i, p in enumerate(partition):
        for j, h in enumerate(hyps):
            side = facet_sides.get((i, j))
            table[i, j] = classify(p, h) if side is None else side
    return hyps, table


def build_tree(partition: Sequence[Polyhedron]) -> SearchTree:
    """Greedy balanced tree over a non-overlapping partition.

    At every node the hyperplane minimizing ``max(|R_low|, |R_high|)`` is
    chosen (regions straddling the plane count on both sides), with ties
    broken by the smaller ``|R_low| + |R_high|`` and then the lower
    hyperplane index.  Recursion stops at singleton region sets or when no
    hyperplane separates anything, leaving a multi-candidate leaf.
    Hyperplanes already used on the path are excluded.
    """
    partition = list(partition)
    if not partition:
        raise InputError("cannot build a tree over an empty partition")
    hyps, table = _facet_table(partition)
    nodes: List[Node] = []

    def recurse(active: np.ndarray, available: np.ndarray) -> Tuple[int, int]:
        if active.size == 1:
            nodes.append(Leaf([int(active[0])]))
            return len(nodes) - 1, 0
        sub = table[active]
        n_low = np.sum(sub != HIGH, axis=0)
        n_high = np.sum(sub != LOW, axis=0)
        score = np.maximum(n_low, n_high).astype(np.int64)
        total = (n_low + n_high).astype(np.int64)
        score = np.where(available, score, np.iinfo(np.int64).max)
        best = int(score.min())
        if best >= active.size:
            nodes.append(Leaf([int(i) for i in active]))
            return len(nodes) - 1, 0
        mask = score == best
        tie_total = np.where(mask, total, np.iinfo(np.int64).max)
        col = int(np.argmin(tie_total))  # lowest index wins remaining ties
        side = table[active, col]
        left = active[side != HIGH]
        right = active[side != LOW]
        child_avail = available.copy()
        child_avail[col] = False
        placeholder = len(nodes)
        nodes.append(None)  # reserve slot so parents precede children
        low_idx, low_d = recurse(left, child_avail)
        high_idx, high_d = recurse(right, child_avail)
        nodes[placeholder] = SplitNode(hyps[col], low_idx, high_idx)
        return placeholder, 1 + max(low_d, high_d)

    root, depth = recurse(np.arange(len(partition)), np.ones(len(hyps), dtype=bool))
    return SearchTree(nodes=nodes, root=root, depth=depth, n_h=len(hyps))


def evaluate_tree(tree: SearchTree, y: np.ndarray,
                  regions: Sequence[Polyhedron]) -> Tuple[Optional[int], int]:
    """Walk the tree at ``y``; returns (region index or None, ops used).

    Sign ties descend low.  At the leaf, candidates are checked for closed
    containment in ascending order; rows actually inspected are priced like
    node decisions.
    """
    y = np.asarray(y, dtype=float).ravel()
    tol = TOLERANCES.feas
    ops = 0
    node = tree.nodes[tree.root]
    while isinstance(node, SplitNode):
        ops += node.support_idx.size + 1
        val = float(node.support_val @ y[node.support_idx])
        node = tree.nodes[node.low if val <= node.hyperplane.b else node.high]
    for cand in node.candidates:
        p = regions[cand]
        supports = p.row_supports
        if p.n_rows == 0:
            return cand, ops
        residual = p.H @ y - p.K
        violated = np.flatnonzero(residual > tol)
        if violated.size == 0:
            ops += int(supports.sum()) + p.n_rows
            return cand, ops
        stop = int(violated[0])  # rows are checked in order, stop at the first miss
        ops += int(supports[:stop + 1].sum()) + stop + 1
    return None, ops


def region_check_cost(p: Polyhedron) -> int:
    return int(p.row_supports.sum()) + p.n_rows


def tree_worst_ops(tree: SearchTree, regions: Sequence[Polyhedron]) -> int:
    """Maximum possible ops for one walk: path decisions plus a full scan of
    every candidate at the worst leaf."""

    def visit(idx: int) -> int:
        node = tree.nodes[idx]
        if isinstance(node, Leaf):
            return sum(region_check_cost(regions[c]) for c in node.candidates)
        cost = node.support_idx.size + 1
        return cost + max(visit(node.low), visit(node.high))

    return visit(tree.root)


@dataclass
class CompiledEvaluator:
    """One search tree per partition plus everything needed to answer queries."""

    trees: List[SearchTree]
    regions: List[Polyhedron]
    functions: List[AffineFunction]
    partition: List[int]
    provenance: List[int]
    n: int
    l: int
    op_model: OpCountModel
    control_laws: Optional[List[ControlLaw]] = None

    def __post_init__(self):
        if len(self.trees) != (max(self.partition) if self.partition else 0):
            raise InputError("need exactly one tree per partition value")

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    @property
    def n_regions(self) -> int:
        return len(self.regions)

    def evaluate(self, x) -> "EvalOutcome":
        return evaluate(self, x)

    def predict_ops(self) -> "OpsPrediction":
        return predict_ops(self)


@dataclass
class EvalOutcome:
    """Query result plus the exact op trace used by the accounting checks."""

    covered: bool
    partition_value: Optional[int]
    region_index: Optional[int]
    value: Optional[float]
    ops_used: int
    per_tree_ops: List[int]
    found_regions: List[Optional[int]]


def multi_tree(s: MergedSolution) -> List[SearchTree]:
    """One search tree per partition value, built in label order."""
    trees = []
    for k in range(1, s.n_partitions + 1):
        idx = s.partition_indices(k)
        tree = build_tree([s.regions[i] for i in idx])
        trees.append(_relabel_leaves(tree, idx))
    return trees


def _relabel_leaves(tree: SearchTree, idx: List[int]) -> SearchTree:
    for node in tree.nodes:
        if isinstance(node, Leaf):
            node.candidates = [idx[c] for c in node.candidates]
    return tree


def evaluate(e: CompiledEvaluator, x) -> EvalOutcome:
    """Lift once, walk every tree, return the least value among found regions.

    Trees that fail to locate the point are skipped (the point is outside
    that partition); ties go to the lowest partition label.  The op count is
    ``lift + sum(tree walks) + (function eval + compare) per found region``.
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.size != e.n:
        raise InputError(f"query point has dimension {x.size}, expected {e.n}")
    y = lift_point(x)
    model = e.op_model
    ops = model.lift_cost
    per_tree: List[int] = []
    found: List[Optional[int]] = []
    best_val = None
    best = (None, None)
    for t_i, tree in enumerate(e.trees, start=1):
        idx, t_ops = evaluate_tree(tree, y, e.regions)
        per_tree.append(t_ops)
        found.append(idx)
        ops += t_ops
        if idx is None:
            continue
        val = e.functions[idx](y)
        ops += model.function_eval_cost + model.compare_cost
        if best_val is None or val < best_val:
            best_val = val
            best = (t_i, idx)
    if best_val is None:
        return EvalOutcome(False, None, None, None, ops, per_tree, found)
    return EvalOutcome(True, best[0], best[1], best_val, ops, per_tree, found)


@dataclass
class OpsPrediction:
    worst_case: int
    per_tree: List[int]
    estimates: dict


def predict_ops(e: CompiledEvaluator) -> OpsPrediction:
    """Certified worst-case op count plus coarse log-model estimates.

    The worst case sums the lift, every tree's worst walk, and one function
    evaluation plus comparison per tree; any measured query costs at most
    this.  The estimates mirror the classic ``K * log2(m)`` complexity view:
    ``k1`` prices a decision on an original coordinate, ``k2`` one on a
    lifted coordinate, and merging pays off roughly while the merged region
    count stays below ``m ** n_trees``.
    """
    model = e.op_model
    per_tree = [tree_worst_ops(t, e.regions) for t in e.trees]
    worst = model.lift_cost + sum(per_tree) + e.n_trees * (
        model.function_eval_cost + model.compare_cost)
    sizes = [len(_tree_region_set(t)) for t in e.trees]
    mean_m = float(np.mean(sizes)) if sizes else 0.0
    estimates = {
        "k1": e.n + 1,
        "k2": e.l + 1,
        "regions_per_tree": sizes,
        "log_model_per_tree": [
            (e.l + 1) * float(np.log2(max(m, 2))) for m in sizes
        ],
        "speedup_threshold_regions": (mean_m ** e.n_trees) if sizes else 0.0,
    }
    return OpsPrediction(worst_case=int(worst), per_tree=[int(v) for v in per_tree],
                         estimates=estimates)


def _tree_region_set(tree: SearchTree) -> set:
    out: set = set()
    for node in tree.nodes:
        if isinstance(node, Leaf):
            out.update(node.candidates)
    return out


def compiled_hyperplane_count(e: CompiledEvaluator) -> int:
    return int(sum(t.n_h for t in e.trees))
