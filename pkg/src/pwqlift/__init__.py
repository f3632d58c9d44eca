"""pwqlift: lift, merge and compile piecewise quadratic solutions for fast
point-location evaluation."""

from .config import TOLERANCES, Tolerances
from .errors import (InputError, NotCoveredError, NumericalError,
                     OracleMismatchError, PwqliftError)
from .estimators import LiftingTransformer, PiecewiseQuadraticEvaluator
from .generate import GeneratorSpec, example_1d, generate
from .geometry import (Hyperplane, Polyhedron, extract_hyperplanes,
                       interior_certificate, overlaps, region_diff,
                       remove_redundant)
from .lp import (LinearProgram, LpOutcome, LpStatus, set_lp_backend, solve_lp)
from .merging import MergedSolution, merge, merge_pairwise
from .pipeline import CompileLog, compile_solution
from .serialize import (load_evaluator, load_solution, save_evaluator,
                        save_solution)
from .solution import (AffineFunction, LiftedSolution, PwqSolution,
                       QuadraticFunction, SequentialEvaluator,
                       evaluate_sequential, lift_functions, lift_point,
                       lift_regions, lift_solution, lifted_dim,
                       prune_dominated)
from .trees import (CompiledEvaluator, EvalOutcome, OpCountModel, SearchTree,
                    build_tree, classify, evaluate, evaluate_tree, multi_tree,
                    predict_ops)
from .bench import BenchReport, BenchRow, run_bench, write_report

__version__ = "0.1.0"

__all__ = [
    "TOLERANCES", "Tolerances",
    "PwqliftError", "InputError", "NotCoveredError", "NumericalError",
    "OracleMismatchError",
    "LinearProgram", "LpOutcome", "LpStatus", "solve_lp", "set_lp_backend",
    "Polyhedron", "Hyperplane", "interior_certificate", "overlaps",
    "remove_redundant", "region_diff", "extract_hyperplanes",
    "QuadraticFunction", "AffineFunction", "PwqSolution", "LiftedSolution",
    "lift_point", "lift_regions", "lift_functions", "lift_solution",
    "lifted_dim", "evaluate_sequential", "SequentialEvaluator",
    "prune_dominated",
    "MergedSolution", "merge", "merge_pairwise",
    "SearchTree", "OpCountModel", "CompiledEvaluator", "EvalOutcome",
    "classify", "build_tree", "evaluate_tree", "multi_tree", "evaluate",
    "predict_ops",
    "compile_solution", "CompileLog",
    "GeneratorSpec", "generate", "example_1d",
    "run_bench", "write_report", "BenchReport", "BenchRow",
    "load_solution", "save_solution", "load_evaluator", "save_evaluator",
    "LiftingTransformer", "PiecewiseQuadraticEvaluator",
    "__version__",
]
