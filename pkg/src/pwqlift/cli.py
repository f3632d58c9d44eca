"""Command line front end.

Exit codes: 0 success, 2 input error, 3 query point not covered,
4 numerical failure, 5 oracle mismatch during a benchmark.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

import numpy as np

from . import bench as bench_mod
from .errors import InputError, PwqliftError
from .generate import GeneratorSpec, example_1d, generate
from .pipeline import compile_solution, parse_merge_depth
from .serialize import (load_evaluator, load_solution, save_evaluator,
                        save_solution)
from .trees import evaluate


def _parse_point(raw: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in raw.split(",") if v.strip() != ""])
    except ValueError as exc:
        raise InputError(f"malformed point '{raw}': {exc}") from exc


def _parse_range(raw: str, flag: str):
    parts = raw.split(",")
    if len(parts) != 2:
        raise InputError(f"{flag} expects 'lo,hi', got '{raw}'")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise InputError(f"{flag} expects numbers, got '{raw}'") from exc
    return lo, hi


def cmd_compile(args) -> int:
    solution = load_solution(args.input)
    evaluator, log = compile_solution(
        solution,
        merge_depth=parse_merge_depth(args.nm),
        prune=not args.no_reduce,
        greedy_permutations=args.greedy_permutations,
        seed=args.seed,
        workers=args.workers,
    )
    save_evaluator(evaluator, args.output)
    log_path = args.output + ".log.json"
    with open(log_path, "w", encoding="utf-8") as fh:
        json.dump(log.to_dict(), fh, indent=1)
        fh.write("\n")
    print(f"compiled {solution.n_regions} regions -> {evaluator.n_regions} regions "
          f"in {evaluator.n_trees} tree(s); wrote {args.output} and {log_path}")
    return 0


def cmd_eval(args) -> int:
    evaluator = load_evaluator(args.evaluator)
    x = _parse_point(args.point)
    if x.size != evaluator.n:
        raise InputError(f"point has {x.size} coordinates, expected {evaluator.n}")
    outcome = evaluate(evaluator, x)
    if not outcome.covered:
        print("NotCovered")
        return 3
    print(f"partition {outcome.partition_value}")
    print(f"region {outcome.region_index}")
    print(f"value {outcome.value!r}")
    print(f"ops {outcome.ops_used}")
    if evaluator.control_laws is not None:
        F, g = evaluator.control_laws[outcome.region_index]
        u = F @ x + g
        print("control " + ",".join(repr(float(v)) for v in u))
    return 0


def cmd_bench(args) -> int:
    solution = load_solution(args.input)
    nm_list = [parse_merge_depth(tok) for tok in args.nm_list.split(",") if tok]
    report = bench_mod.run_bench(
        solution, nm_list, queries=args.queries, seed=args.seed,
        prune=not args.no_reduce, workers=args.workers)
    paths = bench_mod.write_report(report, args.output)
    print("wrote " + ", ".join(paths))
    return 0


def cmd_gen(args) -> int:
    if args.spec:
        with open(args.spec, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        try:
            spec = GeneratorSpec(**raw)
        except TypeError as exc:
            raise InputError(f"bad generator spec: {exc}") from exc
    else:
        for flag in ("n", "npart", "grid"):
            if getattr(args, flag) is None:
                raise InputError(f"--{flag} is required when --spec is not given")
        spec = GeneratorSpec(
            n=args.n, n_part=args.npart, grid=args.grid, seed=args.seed,
            curvature=args.curvature,
            b_range=_parse_range(args.b_range, "--b-range"),
            c_range=_parse_range(args.c_range, "--c-range"),
            shift=args.shift,
        )
    solution = generate(spec)
    save_solution(solution, args.output)
    print(f"wrote {args.output} ({solution.n_regions} regions, "
          f"{solution.n_partitions} partitions)")
    return 0


def cmd_example_1d(args) -> int:
    save_solution(example_1d(), args.output)
    print(f"wrote {args.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pwqlift",
        description="Compile piecewise quadratic solutions into lifted, merged "
                    "search-tree evaluators and query them.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile a solution file into an evaluator")
    p.add_argument("input")
    p.add_argument("--nm", default="full", help="pairwise merge sweeps or 'full'")
    p.add_argument("--no-reduce", action="store_true",
                   help="skip the dominated-region preprocessing pass")
    p.add_argument("--greedy-permutations", type=int, default=0, metavar="R",
                   help="try R random partition pairings, keep the smallest result")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("eval", help="evaluate a compiled evaluator at one point")
    p.add_argument("evaluator")
    p.add_argument("--point", required=True, help="comma-separated coordinates")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="compile at several merge depths and "
                                     "report oracle-verified op counts")
    p.add_argument("input")
    p.add_argument("--nm-list", default="0,full")
    p.add_argument("--queries", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-reduce", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-o", "--output", required=True,
                   help="report base path (.csv/.json/.timings.json)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gen", help="generate a synthetic overlapping-grid instance")
    p.add_argument("--spec", help="JSON file with GeneratorSpec fields")
    p.add_argument("--n", type=int)
    p.add_argument("--npart", type=int)
    p.add_argument("--grid", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--curvature", type=float, default=0.5)
    p.add_argument("--b-range", default="-1,1")
    p.add_argument("--c-range", default="0,1")
    p.add_argument("--shift", type=float, default=0.35)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("example-1d", help="write the built-in 1-D example instance")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_example_1d)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PwqliftError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
