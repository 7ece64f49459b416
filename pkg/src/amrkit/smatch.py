"""Smatch: best-mapping triple overlap between two AMR graphs.

Scores are computed over the instance/attribute/relation triple
decomposition: the matcher searches for an injective mapping from predicted
variables to gold variables maximizing the multiset overlap of triples,
then reports precision = matched/|pred|, recall = matched/|gold|, and F1.
Relation and attribute labels are case-folded before comparison; constants
are compared with surrounding quotes stripped; concepts compare exactly.

``smatch_hill_climb`` is the restartable local search used in practice;
``smatch_exact`` enumerates every injective mapping and is the testing
oracle (the two share one scoring kernel, so the climber can never exceed
the oracle).
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _match
from .errors import AmrkitError, TooLarge
from .graph import AmrGraph, read_amr_file, to_triples

__all__ = [
    "SmatchResult",
    "CorpusReport",
    "CountMismatch",
    "smatch_hill_climb",
    "smatch_exact",
    "corpus_smatch",
    "align_records",
]

_MAX_ARRANGEMENTS = 2_000_000
_EXACT_VAR_BOUND = 8


class CountMismatch(AmrkitError):
    """Prediction and gold corpora do not align record for record."""


@dataclass(frozen=True)
class SmatchResult:
    precision: float
    recall: float
    f1: float
    matched: int
    n_pred_triples: int
    n_gold_triples: int
    mapping: dict[str, str]


@dataclass(frozen=True)
class CorpusReport:
    """Micro-averaged corpus scores: sums of matched/total triple counts
    across records, then one division."""

    precision: float
    recall: float
    f1: float
    n_records: int
    matched: int
    pred_triples: int
    gold_triples: int
    per_record: tuple[SmatchResult, ...] = field(default=(), repr=False)


def _norm_const(value: str) -> str:
    if len(value) >= 2 and value[0] == '"' and value[-1] == '"':
        return value[1:-1]
    return value


class _Problem:
    """Array encoding of one graph pair for the kernels in ``_match``."""

    def __init__(self, pred: AmrGraph, gold: AmrGraph):
        pt, gt = to_triples(pred), to_triples(gold)
        self.n_pred_triples = len(pt)
        self.n_gold_triples = len(gt)
        self.pred_vars = [t.src for t in pt if t.kind == "instance"]
        self.gold_vars = [t.src for t in gt if t.kind == "instance"]
        pidx = {v: i for i, v in enumerate(self.pred_vars)}
        gidx = {v: j for j, v in enumerate(self.gold_vars)}
        n1, n2 = len(self.pred_vars), len(self.gold_vars)

        concepts: dict[str, int] = {}
        self.pred_concepts = np.zeros(n1, np.int64)
        self.gold_concepts = np.zeros(n2, np.int64)
        p_attr: list[dict] = [dict() for _ in range(n1)]
        g_attr: list[dict] = [dict() for _ in range(n2)]
        labels: dict[str, int] = {}
        p_rel: dict[tuple[int, int, int], int] = {}
        g_rel: dict[tuple[int, int, int], int] = {}

        for triples, idx, conc, attr, rel in (
            (pt, pidx, self.pred_concepts, p_attr, p_rel),
            (gt, gidx, self.gold_concepts, g_attr, g_rel),
        ):
            for t in triples:
                if t.kind == "instance":
                    conc[idx[t.src]] = concepts.setdefault(t.tgt, len(concepts))
                elif t.kind == "attribute":
                    key = (t.label.casefold(), _norm_const(t.tgt))
                    d = attr[idx[t.src]]
                    d[key] = d.get(key, 0) + 1
                else:
                    lab = labels.setdefault(t.label.casefold(), len(labels))
                    key = (idx[t.src], idx[t.tgt], lab)
                    rel[key] = rel.get(key, 0) + 1

        self.unary = np.zeros((n1, n2), np.int64)
        for i in range(n1):
            for j in range(n2):
                u = int(self.pred_concepts[i] == self.gold_concepts[j])
                for key, c in p_attr[i].items():
                    u += min(c, g_attr[j].get(key, 0))
                self.unary[i, j] = u

        nb = len(p_rel)
        self.rsrc = np.zeros(nb, np.int64)
        self.rtgt = np.zeros(nb, np.int64)
        self.rlab = np.zeros(nb, np.int64)
        self.rcnt = np.zeros(nb, np.int64)
        for b, ((i, k, lab), c) in enumerate(p_rel.items()):
            self.rsrc[b], self.rtgt[b], self.rlab[b], self.rcnt[b] = i, k, lab, c
        self.grel = np.zeros((n2, n2, max(len(labels), 1)), np.int64)
        for (j, l, lab), c in g_rel.items():
            self.grel[j, l, lab] = c

    def kernel_args(self):
        return self.unary, self.rsrc, self.rtgt, self.rlab, self.rcnt, self.grel

    def result(self, mapping: np.ndarray, matched: int) -> SmatchResult:
        p = matched / self.n_pred_triples if self.n_pred_triples else 0.0
        r = matched / self.n_gold_triples if self.n_gold_triples else 0.0
        f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
        assign = {
            self.pred_vars[i]: self.gold_vars[j]
            for i, j in enumerate(mapping)
            if j >= 0
        }
        return SmatchResult(
            p, r, f1, int(matched), self.n_pred_triples, self.n_gold_triples, assign
        )


def smatch_exact(pred: AmrGraph, gold: AmrGraph) -> SmatchResult:
    """Globally optimal score by exhaustive enumeration of injective
    mappings.  Raises TooLarge beyond min(|vars|) = 8 or two million
    candidate mappings; intended for tests and small graphs."""
    prob = _Problem(pred, gold)
    n1, n2 = prob.unary.shape
    small, big = min(n1, n2), max(n1, n2)
    if small > _EXACT_VAR_BOUND:
        raise TooLarge(f"{small} variables on the smaller side exceeds {_EXACT_VAR_BOUND}")
    count = math.perm(big, small)
    if count > _MAX_ARRANGEMENTS:
        raise TooLarge(f"{count} candidate mappings exceed {_MAX_ARRANGEMENTS}")

    if n1 <= n2:
        flat = np.fromiter(
            itertools.chain.from_iterable(itertools.permutations(range(n2), n1)),
            dtype=np.int64,
            count=count * n1,
        )
        mappings = flat.reshape(count, n1)
    else:
        flat = np.fromiter(
            itertools.chain.from_iterable(itertools.permutations(range(n1), n2)),
            dtype=np.int64,
            count=count * n2,
        )
        positions = flat.reshape(count, n2)
        mappings = np.full((count, n1), -1, np.int64)
        mappings[np.arange(count)[:, None], positions] = np.arange(n2)[None, :]

    row, matched = _match.best_mapping(mappings, *prob.kernel_args())
    return prob.result(mappings[int(row)], int(matched))


def _smart_init(prob: _Problem, rng: np.random.RandomState) -> np.ndarray:
    n1, n2 = prob.unary.shape
    mapping = np.full(n1, -1, np.int64)
    used = np.zeros(n2, bool)
    for i in range(n1):
        for j in range(n2):
            if not used[j] and prob.pred_concepts[i] == prob.gold_concepts[j]:
                mapping[i] = j
                used[j] = True
                break
    free = np.flatnonzero(~used)
    open_pred = np.flatnonzero(mapping < 0)
    k = min(len(free), len(open_pred))
    if k:
        mapping[open_pred[:k]] = rng.permutation(free)[:k]
    return mapping


def _random_init(prob: _Problem, rng: np.random.RandomState) -> np.ndarray:
    n1, n2 = prob.unary.shape
    mapping = np.full(n1, -1, np.int64)
    k = min(n1, n2)
    mapping[rng.permutation(n1)[:k]] = rng.permutation(n2)[:k]
    return mapping


def smatch_hill_climb(
    pred: AmrGraph, gold: AmrGraph, restarts: int = 4, seed: int = 0
) -> SmatchResult:
    """Best score over ``restarts`` hill-climbing runs: one concept-greedy
    initialization plus restarts-1 seeded random ones.  Deterministic given
    the seed; ties keep the first mapping found."""
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    prob = _Problem(pred, gold)
    rng = np.random.RandomState(seed)
    best_mapping = None
    best = -1
    for r in range(restarts):
        mapping = _smart_init(prob, rng) if r == 0 else _random_init(prob, rng)
        matched = _match.hill_climb(mapping, *prob.kernel_args())
        if matched > best:
            best = int(matched)
            best_mapping = mapping
    return prob.result(best_mapping, best)


def align_records(
    preds: Sequence[AmrGraph], golds: Sequence[AmrGraph]
) -> list[tuple[AmrGraph, AmrGraph]]:
    """Pair up two graph lists positionally, or by ``::id`` metadata when
    every record on both sides carries one."""
    pred_ids = [g.metadata.get("id") for g in preds]
    gold_ids = [g.metadata.get("id") for g in golds]
    if preds and all(pred_ids) and all(gold_ids):
        by_id = {}
        for i, g in zip(gold_ids, golds):
            if i in by_id:
                raise CountMismatch(f"duplicate gold id {i!r}")
            by_id[i] = g
        if len(set(pred_ids)) != len(pred_ids):
            raise CountMismatch("duplicate prediction ids")
        if set(pred_ids) != set(by_id):
            raise CountMismatch("prediction and gold id sets differ")
        return [(p, by_id[i]) for i, p in zip(pred_ids, preds)]
    if len(preds) != len(golds):
        raise CountMismatch(f"{len(preds)} predictions vs {len(golds)} gold records")
    return list(zip(preds, golds))


def corpus_smatch(
    pred: str | Sequence[AmrGraph],
    gold: str | Sequence[AmrGraph],
    restarts: int = 4,
    seed: int = 0,
    jobs: int = 1,
) -> CorpusReport:
    """Micro-averaged Smatch over a corpus (file paths or graph lists).

    Records may be scored in parallel; results are merged by record index,
    and each record derives its own RNG seed, so the report is independent
    of evaluation order.
    """
    preds = read_amr_file(pred) if isinstance(pred, str) else list(pred)
    golds = read_amr_file(gold) if isinstance(gold, str) else list(gold)
    pairs = align_records(preds, golds)

    def score(item):
        i, (p, g) = item
        return smatch_hill_climb(p, g, restarts=restarts, seed=seed + i)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(score, enumerate(pairs)))
    else:
        results = [score(item) for item in enumerate(pairs)]

    matched = sum(r.matched for r in results)
    tp = sum(r.n_pred_triples for r in results)
    tg = sum(r.n_gold_triples for r in results)
    p = matched / tp if tp else 0.0
    r = matched / tg if tg else 0.0
    f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return CorpusReport(p, r, f1, len(results), matched, tp, tg, tuple(results))
