"""Distillation objectives over SeqModel, plus the KD corpus builder.

Three objectives are supported, all verifiable exactly at toy scale:

- ``mle``: negative log-likelihood of a hard target under teacher forcing;
- ``token_kd``: per-step KL(student || teacher), the student conditioning
  on its own input x and the teacher on x*;
- ``seq_kd``: hard-target training on the teacher's most probable output,
  approximated by beam search; ``tok_plus_seq`` trains on those same
  teacher outputs while also accumulating the teacher's per-step
  distributions as soft counts.

``exact_seq_kl`` enumerates the full (truncated) sequence space and is used
in tests to show seq-KD training actually pulls the student's sequence
distribution toward the teacher's.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .decode import beam_search, strip_sentinels
from .errors import AmrkitError, TooLarge
from .pipeline import AdapterError, CorpusRecord, NoiseSpec, apply_noise, resolve_translator
from .repair import repair
from .seqmodel import EOS, SeqModel, ToyCondModel

__all__ = [
    "ZeroProbability",
    "SupportMismatch",
    "KdRecord",
    "KdBatch",
    "OBJECTIVES",
    "mle_loss",
    "token_kd_loss",
    "exact_seq_kl",
    "seq_kd_build",
    "kd_batches_from_corpus",
    "train",
]

log = logging.getLogger(__name__)

_ENUMERATION_BOUND = 1_000_000

OBJECTIVES = ("mle", "token_kd", "seq_kd", "tok_plus_seq")


class ZeroProbability(AmrkitError):
    """A target token has probability zero: an unsmoothed model or a
    vocabulary mismatch."""


class SupportMismatch(AmrkitError):
    """The teacher assigns zero probability where the student does not, so
    the KL divergence is infinite.  Reported rather than clipped."""


@dataclass(frozen=True)
class KdRecord:
    """One distillation example: the student reads ``x``, the teacher reads
    ``x_star`` (the same content in another language), ``y`` is the hard
    target (ending in EOS) where the objective needs one."""

    x: tuple[str, ...]
    x_star: tuple[str, ...]
    y: tuple[str, ...] | None = None


@dataclass(frozen=True)
class KdBatch:
    records: tuple[KdRecord, ...]


def _check_target(model: SeqModel, target: Sequence[str]) -> None:
    if not target or target[-1] != EOS:
        raise ValueError("target sequence must end with EOS")
    for tok in target:
        model.index(tok)


def mle_loss(model: SeqModel, src: Sequence[str], target: Sequence[str]) -> float:
    """Negative log-likelihood of the target under teacher forcing."""
    if not target or target[-1] != EOS:
        raise ValueError("target sequence must end with EOS")
    total = 0.0
    for t, token in enumerate(target):
        try:
            idx = model.index(token)
        except ValueError as exc:
            raise ZeroProbability(str(exc)) from exc
        p = model.next_dist(target[:t], src)[idx]
        if p <= 0.0:
            raise ZeroProbability(f"p({token!r} | step {t}) = 0")
        total -= math.log(p)
    return total


def token_kd_loss(
    student: SeqModel,
    teacher: SeqModel,
    x: Sequence[str],
    x_star: Sequence[str],
    y: Sequence[str],
) -> float:
    """Sum over target positions of KL(student_t || teacher_t), prefixes
    teacher-forced from y.  Zero iff the step distributions coincide."""
    _check_target(student, y)
    total = 0.0
    for t in range(len(y)):
        ps = student.next_dist(y[:t], x)
        pt = teacher.next_dist(y[:t], x_star)
        live = ps > 0
        if np.any(pt[live] <= 0):
            bad = int(np.flatnonzero(live & (pt <= 0))[0])
            raise SupportMismatch(
                f"teacher gives zero probability to {student.vocab[bad]!r} at step {t}"
            )
        total += float(np.sum(ps[live] * (np.log(ps[live]) - np.log(pt[live]))))
    return max(total, 0.0)


def exact_seq_kl(
    student: SeqModel,
    teacher: SeqModel,
    x: Sequence[str],
    x_star: Sequence[str],
    max_len: int,
) -> float:
    """KL between the two full sequence distributions by enumeration.

    Sequences are the complete ones of ``decode``: EOS-terminated, content
    truncated at max_len with probability one, which makes both sides proper
    distributions over the same space.  Returns inf on support mismatch.
    """
    if len(student.vocab) ** max_len > _ENUMERATION_BOUND:
        raise TooLarge(
            f"|vocab|^max_len = {len(student.vocab)}^{max_len} exceeds {_ENUMERATION_BOUND}"
        )
    eos = student.index(EOS)
    total = 0.0

    stack: list[tuple[tuple[int, ...], float, float]] = [((), 0.0, 0.0)]
    while stack:
        ids, lps, lpt = stack.pop()
        if len(ids) == max_len:
            total += math.exp(lps) * (lps - lpt)
            continue
        prefix = [student.vocab[i] for i in ids]
        ps = student.next_dist(prefix, x)
        pt = teacher.next_dist(prefix, x_star)
        for idx in np.flatnonzero(ps > 0):
            idx = int(idx)
            if pt[idx] <= 0.0:
                return math.inf
            nlps = lps + math.log(ps[idx])
            nlpt = lpt + math.log(pt[idx])
            if idx == eos:
                total += math.exp(nlps) * (nlps - nlpt)
            else:
                stack.append((ids + (idx,), nlps, nlpt))
    return max(total, 0.0)


# ---------------------------------------------------------------------------
# Sequence-level KD data construction

def seq_kd_build(
    teacher: SeqModel,
    english_inputs: Sequence[str],
    noise: NoiseSpec,
    beam_size: int = 5,
    max_len: int = 64,
    translator=None,
    jobs: int = 1,
) -> list[CorpusRecord]:
    """Build a KD corpus: for each English sentence, the target is the
    teacher's beam-search mode (sentinels stripped, then repaired so it
    always delinearizes) and the student input is the noised sentence.

    Adapter failures skip the affected record with a log line; the batch
    never aborts.  Output order equals input order.
    """
    if noise.kind == "mt_adapter":
        translator = translator or resolve_translator(noise.adapter)
    lang = noise.target_lang if noise.kind == "mt_adapter" else "EN"

    def build(item) -> CorpusRecord | None:
        i, sentence = item
        x_star = sentence.split()
        top = beam_search(teacher, x_star, beam_size, max_len)[0]
        target = repair(strip_sentinels(top.tokens))
        try:
            student_src = apply_noise(noise, sentence, translator=translator)
        except AdapterError as exc:
            log.warning("kd input %d: %s; skipped", i, exc)
            return None
        return CorpusRecord(
            id=f"kd-{i:06d}",
            lang=lang,
            split="train",
            src=student_src,
            tgt=tuple(target),
            provenance="seq-kd",
            meta={"src_en": sentence, "noise": noise.kind},
        )

    items = list(enumerate(english_inputs))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            built = list(pool.map(build, items))
    else:
        built = [build(item) for item in items]
    return [rec for rec in built if rec is not None]


def kd_batches_from_corpus(
    records: Iterable[CorpusRecord], batch_size: int = 32
) -> list[KdBatch]:
    """Convert corpus records (as built by seq_kd_build) into KD batches:
    x from the record source, x* from the retained English sentence, and the
    target with EOS appended."""
    out: list[KdRecord] = []
    for rec in records:
        x_star = rec.meta.get("src_en", rec.src)
        y = tuple(rec.tgt) + (EOS,) if rec.tgt is not None else None
        out.append(KdRecord(tuple(rec.src.split()), tuple(x_star.split()), y))
    return [
        KdBatch(tuple(out[i : i + batch_size])) for i in range(0, len(out), batch_size)
    ]


# ---------------------------------------------------------------------------
# Training

def train(
    model: ToyCondModel,
    batches: Iterable[KdBatch],
    objective: str,
    teacher: SeqModel | None = None,
    noise: NoiseSpec | None = None,
    translator=None,
) -> ToyCondModel:
    """One pass over the batches under the chosen objective; returns the
    updated model (counts are mutated in place, single writer).

    mle and seq_kd count the record's hard target (for seq_kd that target is
    teacher-generated upstream); token_kd adds the teacher's per-step
    distributions as fractional counts along the target prefixes;
    tok_plus_seq does both on the teacher-generated target.  Passing a
    ``noise`` spec re-noises each student input from x* on every call
    (resampled noise); by default inputs are used exactly as recorded.
    """
    if objective not in OBJECTIVES:
        raise ValueError(f"objective must be one of {OBJECTIVES}")
    needs_teacher = objective in ("token_kd", "tok_plus_seq")
    if needs_teacher and teacher is None:
        raise ValueError(f"objective {objective!r} requires a teacher model")

    for batch in batches:
        for rec in batch.records:
            if rec.y is None:
                raise ValueError(f"objective {objective!r} requires a target on every record")
            x = rec.x
            if noise is not None:
                x = tuple(
                    apply_noise(noise, " ".join(rec.x_star), translator=translator).split()
                )
            if objective in ("mle", "seq_kd"):
                model.observe(x, rec.y)
            elif objective == "token_kd":
                for t in range(len(rec.y)):
                    dist = teacher.next_dist(rec.y[:t], rec.x_star)
                    model.add_dist_counts(rec.y[:t], x, dist)
            else:  # tok_plus_seq
                model.observe(x, rec.y)
                for t in range(len(rec.y)):
                    dist = teacher.next_dist(rec.y[:t], rec.x_star)
                    model.add_dist_counts(rec.y[:t], x, dist)
    return model
