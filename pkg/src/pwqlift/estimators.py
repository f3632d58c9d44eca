"""Scikit-learn style wrappers around the compile/evaluate pipeline.

``LiftingTransformer`` exposes the quadratic-monomial lifting as a regular
transformer, and ``PiecewiseQuadraticEvaluator`` wraps the offline pipeline
(fit) and the tree-based online evaluation (predict) so the whole thing
composes with sklearn tooling (``get_params``/``set_params``, ``clone``,
pipelines).
"""

from __future__ import annotations

from typing import Optional, Union

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import InputError, NotCoveredError
from .pipeline import compile_solution
from .serialize import load_solution, solution_from_dict
from .solution import PwqSolution, lift_point, lifted_dim
from .trees import evaluate


def _coerce_solution(solution) -> PwqSolution:
    if isinstance(solution, PwqSolution):
        return solution
    if isinstance(solution, dict):
        return solution_from_dict(solution)
    if isinstance(solution, (str, bytes)) or hasattr(solution, "__fspath__"):
        return load_solution(solution)
    raise InputError(f"cannot interpret {type(solution).__name__} as a solution")


class LiftingTransformer(TransformerMixin, BaseEstimator):
    """Map rows of X to ``[x, x1^2, x1 x2, ..., xn^2]``."""

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        self.n_features_in_ = X.shape[1]
        self.lifted_dim_ = lifted_dim(self.n_features_in_)
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        iu, ju = np.triu_indices(self.n_features_in_)
        return np.hstack([X, X[:, iu] * X[:, ju]])


class PiecewiseQuadraticEvaluator(BaseEstimator):
    """Compile a piecewise quadratic solution, then answer value queries.

    Parameters
    ----------
    merge_depth : "full" or int
        Number of pairwise merge sweeps, or "full" for a single partition.
    prune : bool
        Drop provably never-minimal regions before lifting.
    greedy_permutations : int
        Extra random partition pairings to try, keeping the smallest result.
    seed : int
        Seed for the pairing heuristic.
    workers : int
        Process count for the parallel merge loop.
    on_uncovered : "nan" or "raise"
        What predict does for points outside every region.
    """

    def __init__(self, merge_depth: Union[int, str] = "full", prune: bool = True,
                 greedy_permutations: int = 0, seed: int = 0, workers: int = 1,
                 on_uncovered: str = "nan"):
        self.merge_depth = merge_depth
        self.prune = prune
        self.greedy_permutations = greedy_permutations
        self.seed = seed
        self.workers = workers
        self.on_uncovered = on_uncovered

    def fit(self, solution, y=None):
        sol = _coerce_solution(solution)
        self.evaluator_, self.compile_log_ = compile_solution(
            sol,
            merge_depth=self.merge_depth,
            prune=self.prune,
            greedy_permutations=self.greedy_permutations,
            seed=self.seed,
            workers=self.workers,
        )
        self.n_features_in_ = sol.n
        self.n_trees_ = self.evaluator_.n_trees
        self.n_regions_ = self.evaluator_.n_regions
        return self

    def _check_X(self, X) -> np.ndarray:
        check_is_fitted(self, "evaluator_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return X

    def predict(self, X) -> np.ndarray:
        """Minimum function value at each row of X (NaN when uncovered)."""
        X = self._check_X(X)
        out = np.empty(X.shape[0])
        for i, x in enumerate(X):
            res = evaluate(self.evaluator_, x)
            if res.covered:
                out[i] = res.value
            elif self.on_uncovered == "raise":
                raise NotCoveredError(f"point {x.tolist()} is outside every region")
            else:
                out[i] = np.nan
        return out

    def predict_region(self, X) -> np.ndarray:
        """(partition label, region index) per row; -1 marks uncovered points."""
        X = self._check_X(X)
        out = np.full((X.shape[0], 2), -1, dtype=np.int64)
        for i, x in enumerate(X):
            res = evaluate(self.evaluator_, x)
            if res.covered:
                out[i, 0] = res.partition_value
                out[i, 1] = res.region_index
            elif self.on_uncovered == "raise":
                raise NotCoveredError(f"point {x.tolist()} is outside every region")
        return out

    def predict_control(self, X) -> np.ndarray:
        """Control action ``F @ x + g`` of the optimal region per row."""
        X = self._check_X(X)
        laws = self.evaluator_.control_laws
        if laws is None:
            raise InputError("the fitted solution carries no control laws")
        n_u = laws[0][1].size
        out = np.full((X.shape[0], n_u), np.nan)
        for i, x in enumerate(X):
            res = evaluate(self.evaluator_, x)
            if res.covered:
                F, g = laws[res.region_index]
                out[i] = F @ x + g
            elif self.on_uncovered == "raise":
                raise NotCoveredError(f"point {x.tolist()} is outside every region")
        return out
