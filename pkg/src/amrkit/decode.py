"""Beam search and exhaustive decoding oracles over SeqModel.

Sequence space and probabilities follow one convention everywhere: a
complete sequence ends with EOS; choosing EOS contributes its model
probability; a hypothesis whose content reaches ``max_len`` is
forced-finished with EOS at probability one (deterministic truncation).
Under this convention the complete sequences up to ``max_len`` form a
proper probability space, so beam search, ``exact_mode``, and the
sequence-level KL in ``distill`` all agree about what is being ranked.

Ties are broken by vocabulary order token by token, which also prefers the
shorter sequence when one is a prefix of the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import TooLarge
from .seqmodel import BOS, EOS, SeqModel

__all__ = ["BeamHypothesis", "beam_search", "exact_mode", "strip_sentinels"]

_ENUMERATION_BOUND = 1_000_000


@dataclass(frozen=True)
class BeamHypothesis:
    """A finished decode: tokens end with EOS; log_prob is the sum of the
    per-step log probabilities under the generating model."""

    tokens: tuple[str, ...]
    log_prob: float
    finished: bool = True


def strip_sentinels(tokens: Sequence[str]) -> list[str]:
    return [t for t in tokens if t not in (BOS, EOS)]


def beam_search(
    model: SeqModel, src: Sequence[str], beam_size: int, max_len: int
) -> list[BeamHypothesis]:
    """Length-unnormalized beam search without early-stop heuristics.

    Each step ranks all expansions of the live beam together; finished
    expansions (chosen EOS, or forced at max_len) retire and permanently
    reserve a slot, shrinking the live width.  Returns up to ``beam_size``
    finished hypotheses, best first.  With ``beam_size >= |vocab|^max_len``
    no live candidate is ever pruned, so the top hypothesis is the exact
    mode; with ``beam_size == 1`` this is greedy decoding.
    """
    if beam_size < 1:
        raise ValueError("beam_size must be >= 1")
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    eos = model.index(EOS)

    # entries: (log_prob, token-id tuple); ids of retired entries end in EOS
    live: list[tuple[float, tuple[int, ...]]] = [(0.0, ())]
    retired: list[tuple[float, tuple[int, ...]]] = []
    while live and len(retired) < beam_size:
        cands: list[tuple[float, tuple[int, ...], bool]] = []
        for lp, ids in live:
            prefix = [model.vocab[i] for i in ids]
            dist = model.next_dist(prefix, src)
            for idx in np.flatnonzero(dist > 0):
                idx = int(idx)
                nlp = lp + math.log(dist[idx])
                if idx == eos:
                    cands.append((nlp, ids + (idx,), True))
                elif len(ids) + 1 == max_len:
                    cands.append((nlp, ids + (idx, eos), True))
                else:
                    cands.append((nlp, ids + (idx,), False))
        cands.sort(key=lambda c: (-c[0], c[1]))
        keep = cands[: beam_size - len(retired)]
        live = [(lp, ids) for lp, ids, done in keep if not done]
        retired.extend((lp, ids) for lp, ids, done in keep if done)

    retired.sort(key=lambda c: (-c[0], c[1]))
    return [
        BeamHypothesis(tuple(model.vocab[i] for i in ids), lp)
        for lp, ids in retired[:beam_size]
    ]


def exact_mode(model: SeqModel, src: Sequence[str], max_len: int) -> list[str]:
    """The most probable complete sequence, by exhaustive enumeration.

    Raises TooLarge when ``|vocab| ** max_len`` exceeds one million states.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    if len(model.vocab) ** max_len > _ENUMERATION_BOUND:
        raise TooLarge(
            f"|vocab|^max_len = {len(model.vocab)}^{max_len} exceeds {_ENUMERATION_BOUND}"
        )
    eos = model.index(EOS)
    best_lp = -math.inf
    best_ids: tuple[int, ...] | None = None

    def consider(lp: float, ids: tuple[int, ...]) -> None:
        nonlocal best_lp, best_ids
        if lp > best_lp or (lp == best_lp and (best_ids is None or ids < best_ids)):
            best_lp = lp
            best_ids = ids

    stack: list[tuple[float, tuple[int, ...]]] = [(0.0, ())]
    while stack:
        lp, ids = stack.pop()
        if len(ids) == max_len:
            consider(lp, ids + (eos,))
            continue
        prefix = [model.vocab[i] for i in ids]
        dist = model.next_dist(prefix, src)
        for idx in np.flatnonzero(dist > 0):
            idx = int(idx)
            nlp = lp + math.log(dist[idx])
            if idx == eos:
                consider(nlp, ids + (idx,))
            else:
                stack.append((nlp, ids + (idx,)))

    assert best_ids is not None  # EOS carries mass or truncation forces it
    return [model.vocab[i] for i in best_ids]
