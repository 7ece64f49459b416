#!/usr/bin/env python3
"""Benchmark the graph-matching kernels: numba @njit vs the pure NumPy/Python
fallback, on the hill climber and the exhaustive matcher.

Run from the repository root:

    python3 benchmarks/bench_smatch.py [--pairs 200] [--vars 8] [--restarts 8]

The jitted and fallback paths are exercised on identical problems and their
scores are cross-checked, so this doubles as a backend-parity check at scale.
"""

import argparse
import itertools
import math
import time

import numpy as np

from amrkit import _match
from amrkit.graph import AmrGraph, Edge, Node
from amrkit.smatch import _Problem

CONCEPTS = ("want-01", "go-02", "see-01", "boy", "girl", "dog", "cat", "city", "thing")
RELATIONS = (":ARG0", ":ARG1", ":ARG2", ":mod", ":op1", ":time")


def random_graph(rng, n_vars):
    n = int(rng.randint(max(1, n_vars - 2), n_vars + 1))
    ids = [f"x{i}" for i in range(n)]
    nodes = [Node(v, CONCEPTS[rng.randint(len(CONCEPTS))]) for v in ids]
    edges = [
        Edge(ids[int(rng.randint(0, i))], RELATIONS[rng.randint(len(RELATIONS))], ids[i])
        for i in range(1, n)
    ]
    for _ in range(int(rng.randint(0, 3))):
        edges.append(
            Edge(ids[int(rng.randint(0, n))], RELATIONS[rng.randint(len(RELATIONS))],
                 ids[int(rng.randint(0, n))])
        )
    return AmrGraph(tuple(nodes), tuple(edges), ids[0]).check()


def make_problems(n_pairs, n_vars, seed):
    rng = np.random.RandomState(seed)
    problems = []
    for _ in range(n_pairs):
        prob = _Problem(random_graph(rng, n_vars), random_graph(rng, n_vars))
        n1, n2 = prob.unary.shape
        k = min(n1, n2)
        inits = []
        for _ in range(8):
            m = np.full(n1, -1, dtype=np.int64)
            m[rng.permutation(n1)[:k]] = rng.permutation(n2)[:k]
            inits.append(m)
        problems.append((prob, inits))
    return problems


def bench_climb(problems, climb_fn, restarts):
    t0 = time.perf_counter()
    total = 0
    for prob, inits in problems:
        best = -1
        for m in inits[:restarts]:
            s = climb_fn(m.copy(), *prob.kernel_args())
            best = max(best, int(s))
        total += best
    return time.perf_counter() - t0, total


def bench_exact(problems, best_fn):
    t0 = time.perf_counter()
    total = 0
    for prob, _ in problems:
        n1, n2 = prob.unary.shape
        small, big = min(n1, n2), max(n1, n2)
        count = math.perm(big, small)
        if n1 <= n2:
            flat = np.fromiter(
                itertools.chain.from_iterable(itertools.permutations(range(n2), n1)),
                dtype=np.int64, count=count * n1,
            )
            mappings = flat.reshape(count, n1)
        else:
            flat = np.fromiter(
                itertools.chain.from_iterable(itertools.permutations(range(n1), n2)),
                dtype=np.int64, count=count * n2,
            )
            positions = flat.reshape(count, n2)
            mappings = np.full((count, n1), -1, np.int64)
            mappings[np.arange(count)[:, None], positions] = np.arange(n2)[None, :]
        _, score = best_fn(mappings, *prob.kernel_args())
        total += int(score)
    return time.perf_counter() - t0, total


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pairs", type=int, default=200)
    ap.add_argument("--vars", type=int, default=8)
    ap.add_argument("--restarts", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if _match.BACKEND != "numba":
        raise SystemExit(
            "active backend is not numba (AMRKIT_BACKEND=numpy set?); "
            "the benchmark needs both paths importable"
        )

    problems = make_problems(args.pairs, args.vars, args.seed)

    # warm up JIT compilation outside the timed region
    prob, inits = problems[0]
    _match.hill_climb(inits[0].copy(), *prob.kernel_args())
    _match.best_mapping(np.zeros((1, prob.unary.shape[0]), np.int64), *prob.kernel_args())

    rows = []
    t_jit, s_jit = bench_climb(problems, _match.hill_climb, args.restarts)
    t_py, s_py = bench_climb(problems, _match._hill_climb_impl, args.restarts)
    assert s_jit == s_py, "backend scores diverged"
    rows.append(("hill climb", t_jit, t_py))

    t_jit_e, s_jit_e = bench_exact(problems, _match.best_mapping)
    t_vec_e, s_vec_e = bench_exact(problems, _match._best_mapping_vec)
    assert s_jit_e == s_vec_e, "backend scores diverged"
    rows.append(("exhaustive", t_jit_e, t_vec_e))

    print(f"{args.pairs} graph pairs, about {args.vars} variables each, "
          f"{args.restarts} restarts\n")
    print(f"{'kernel':<12}{'numba':>10}{'fallback':>12}{'speedup':>10}")
    for name, tj, tp in rows:
        print(f"{name:<12}{tj:>9.3f}s{tp:>11.3f}s{tp / tj:>9.1f}x")


if __name__ == "__main__":
    main()
