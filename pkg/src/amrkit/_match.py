"""Variable-mapping score kernels for the Smatch matcher.

The matching problem is encoded as integer arrays once per graph pair:

- ``unary[i, j]``: triples matched by mapping pred variable i to gold
  variable j alone (instance concept equality plus multiset-min over
  attribute (label, value) pairs, TOP included);
- pred relation buckets ``rsrc/rtgt/rlab/rcnt``: distinct
  (src, tgt, label) relation patterns with their multiplicities;
- ``grel[j, l, lab]``: gold multiplicity of relation pattern (j, label, l).

A mapping's score is the exact multiset overlap of the two triple sets, so
the hill climber can never report more than the exhaustive matcher.

These loops dominate corpus scoring time.  They are compiled with numba
``@njit`` by default; set ``AMRKIT_BACKEND=numpy`` to select the pure
NumPy/Python fallback (same results, exercised by the benchmark and tests).
"""

from __future__ import annotations

import os

import numpy as np

__all__ = ["BACKEND", "score_mapping", "hill_climb", "best_mapping"]

_requested = os.environ.get("AMRKIT_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ValueError(f"AMRKIT_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

BACKEND = "numpy"
if _requested == "numba":
    try:
        from numba import njit as _njit

        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a declared dependency
        pass


def _score_mapping_impl(mapping, unary, rsrc, rtgt, rlab, rcnt, grel):
    total = 0
    for i in range(mapping.shape[0]):
        j = mapping[i]
        if j >= 0:
            total += unary[i, j]
    for b in range(rsrc.shape[0]):
        j = mapping[rsrc[b]]
        l = mapping[rtgt[b]]
        if j >= 0 and l >= 0:
            g = grel[j, l, rlab[b]]
            c = rcnt[b]
            total += g if g < c else c
    return total


def _hill_climb_impl(mapping, unary, rsrc, rtgt, rlab, rcnt, grel):
    """Steepest-ascent local search over single remaps and pairwise swaps.

    Mutates ``mapping`` in place and returns its final score.  Moves are
    scanned in index order and only strictly improving moves are taken, so
    the result is deterministic given the starting mapping.
    """
    n1, n2 = unary.shape
    nb = rsrc.shape[0]
    used = np.full(n2, False)
    for i in range(n1):
        if mapping[i] >= 0:
            used[mapping[i]] = True

    cur = 0
    for i in range(n1):
        j = mapping[i]
        if j >= 0:
            cur += unary[i, j]
    for b in range(nb):
        j = mapping[rsrc[b]]
        l = mapping[rtgt[b]]
        if j >= 0 and l >= 0:
            g = grel[j, l, rlab[b]]
            c = rcnt[b]
            cur += g if g < c else c

    while True:
        best_gain = 0
        best_i = -1
        best_j = -1
        best_k = -1
        for i in range(n1):
            old = mapping[i]
            for j in range(n2):
                if used[j] or j == old:
                    continue
                mapping[i] = j
                s = 0
                for a in range(n1):
                    t = mapping[a]
                    if t >= 0:
                        s += unary[a, t]
                for b in range(nb):
                    t = mapping[rsrc[b]]
                    u = mapping[rtgt[b]]
                    if t >= 0 and u >= 0:
                        g = grel[t, u, rlab[b]]
                        c = rcnt[b]
                        s += g if g < c else c
                mapping[i] = old
                if s - cur > best_gain:
                    best_gain = s - cur
                    best_i = i
                    best_j = j
                    best_k = -1
        for i in range(n1):
            for k in range(i + 1, n1):
                if mapping[i] == mapping[k]:
                    continue
                tmp = mapping[i]
                mapping[i] = mapping[k]
                mapping[k] = tmp
                s = 0
                for a in range(n1):
                    t = mapping[a]
                    if t >= 0:
                        s += unary[a, t]
                for b in range(nb):
                    t = mapping[rsrc[b]]
                    u = mapping[rtgt[b]]
                    if t >= 0 and u >= 0:
                        g = grel[t, u, rlab[b]]
                        c = rcnt[b]
                        s += g if g < c else c
                tmp = mapping[i]
                mapping[i] = mapping[k]
                mapping[k] = tmp
                if s - cur > best_gain:
                    best_gain = s - cur
                    best_i = i
                    best_k = k
                    best_j = -1
        if best_gain <= 0:
            return cur
        if best_k < 0:
            if mapping[best_i] >= 0:
                used[mapping[best_i]] = False
            mapping[best_i] = best_j
            used[best_j] = True
        else:
            tmp = mapping[best_i]
            mapping[best_i] = mapping[best_k]
            mapping[best_k] = tmp
        cur += best_gain


def _best_mapping_impl(mappings, unary, rsrc, rtgt, rlab, rcnt, grel):
    """Score every candidate mapping row; return (best_row, best_score).
    Ties keep the first row scanned."""
    n1 = unary.shape[0]
    nb = rsrc.shape[0]
    best_row = 0
    best = -1
    for r in range(mappings.shape[0]):
        s = 0
        for i in range(n1):
            j = mappings[r, i]
            if j >= 0:
                s += unary[i, j]
        for b in range(nb):
            j = mappings[r, rsrc[b]]
            l = mappings[r, rtgt[b]]
            if j >= 0 and l >= 0:
                g = grel[j, l, rlab[b]]
                c = rcnt[b]
                s += g if g < c else c
        if s > best:
            best = s
            best_row = r
    return best_row, best


def _best_mapping_vec(mappings, unary, rsrc, rtgt, rlab, rcnt, grel):
    """Vectorized fallback for the exhaustive matcher."""
    n1 = unary.shape[0]
    ok = mappings >= 0
    safe = np.where(ok, mappings, 0)
    scores = np.where(ok, unary[np.arange(n1)[None, :], safe], 0).sum(axis=1)
    for b in range(rsrc.shape[0]):
        j = mappings[:, rsrc[b]]
        l = mappings[:, rtgt[b]]
        valid = (j >= 0) & (l >= 0)
        g = grel[np.where(valid, j, 0), np.where(valid, l, 0), rlab[b]]
        scores += np.where(valid, np.minimum(g, rcnt[b]), 0)
    r = int(np.argmax(scores))
    return r, int(scores[r])


if BACKEND == "numba":
    score_mapping = _njit(cache=True)(_score_mapping_impl)
    hill_climb = _njit(cache=True)(_hill_climb_impl)
    best_mapping = _njit(cache=True)(_best_mapping_impl)
else:
    score_mapping = _score_mapping_impl
    hill_climb = _hill_climb_impl
    best_mapping = _best_mapping_vec
