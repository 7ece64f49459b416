"""Silver-data construction and quality control.

Covers the corpus record model and its JSONL form, word-deletion noise,
machine-translation adapters (an external command hook plus a deterministic
hash-based stub so the whole pipeline runs hermetically), back-translation
consistency filtering with embedding cosine similarity, vocabulary
augmentation from linearized targets, and per-language/split bookkeeping.
"""

from __future__ import annotations

import json
import logging
import os
import random
import shlex
import subprocess
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Protocol, Sequence

import numpy as np

from .errors import AmrkitError
from .linearize import from_line, to_line
from .seqmodel import stable_hash

__all__ = [
    "LANGS",
    "MASK",
    "CorpusRecord",
    "NoiseSpec",
    "AdapterError",
    "Translator",
    "StubTranslator",
    "CommandTranslator",
    "EmbeddingProvider",
    "HashEmbedding",
    "word_delete",
    "apply_noise",
    "bt_filter",
    "cosine",
    "augment_vocab",
    "corpus_stats",
    "CorpusStats",
    "read_corpus_jsonl",
    "write_corpus_jsonl",
    "ADAPTER_CMD_ENV",
]

log = logging.getLogger(__name__)

LANGS = ("EN", "DE", "ES", "IT", "ZH")
PROVENANCES = ("gold", "silver-mt", "seq-kd")
MASK = "<mask>"
ADAPTER_CMD_ENV = "AMRKIT_ADAPTER_CMD"


class AdapterError(AmrkitError):
    """An external translation/embedding adapter failed for one record."""


@dataclass(frozen=True)
class CorpusRecord:
    """One training-corpus row.

    ``tgt`` is a linearized-graph token tuple (or None for unlabeled rows);
    ``quality`` is set only by the consistency filter.  Gold provenance in
    the train split is English-only: foreign-language training data is
    always constructed, never annotated.
    """

    id: str
    lang: str
    split: str
    src: str
    tgt: tuple[str, ...] | None = None
    provenance: str = "gold"
    quality: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.lang not in LANGS:
            raise ValueError(f"unknown language {self.lang!r} (expected one of {LANGS})")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if self.quality is not None and not -1.0 <= self.quality <= 1.0:
            raise ValueError(f"quality {self.quality} outside [-1, 1]")
        if self.provenance == "gold":
            if self.tgt is None:
                raise ValueError("gold records need a target")
            if self.split == "train" and self.lang != "EN":
                raise ValueError("gold training records exist only for EN")


# ---------------------------------------------------------------------------
# Noise

@dataclass(frozen=True)
class NoiseSpec:
    """Student-input noise configuration.

    kind: ``none`` (identity), ``word_delete`` (mask a fraction of words),
    or ``mt_adapter`` (route through a Translator).  The seed is mandatory
    for word deletion.  Noise is fixed per sentence: the same sentence under
    the same spec always yields the same output.
    """

    kind: str
    rate: float = 0.0
    seed: int | None = None
    adapter: "Translator | str | None" = None
    target_lang: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("none", "word_delete", "mt_adapter"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError(f"rate {self.rate} outside [0, 1]")
        if self.kind == "word_delete" and self.seed is None:
            raise ValueError("word_delete noise requires a seed")
        if self.kind == "mt_adapter" and self.target_lang is None:
            raise ValueError("mt_adapter noise requires a target_lang")


def _round_half_up(x: Decimal) -> int:
    return int(x.quantize(Decimal("1"), rounding=ROUND_HALF_UP))


def word_delete(sentence: str, rate: float, seed: int) -> str:
    """Mask exactly round(rate * n) words (half away from zero), positions
    uniform without replacement under the seed.  Word count is preserved;
    masking is substitution, not removal."""
    words = sentence.split()
    k = _round_half_up(Decimal(str(rate)) * len(words))
    if k == 0:
        return sentence
    positions = random.Random(seed).sample(range(len(words)), k)
    for p in positions:
        words[p] = MASK
    return " ".join(words)


def apply_noise(spec: NoiseSpec, sentence: str, translator: "Translator | None" = None) -> str:
    """Apply one noise spec to one sentence, deterministically.

    word_delete derives its per-sentence seed from (spec.seed, sentence) so
    repeated sentences noise identically across calls and epochs.
    """
    if spec.kind == "none":
        return sentence
    if spec.kind == "word_delete":
        return word_delete(sentence, spec.rate, spec.seed + stable_hash(sentence))
    tr = translator or resolve_translator(spec.adapter)
    return tr.translate(sentence, "EN", spec.target_lang)


# ---------------------------------------------------------------------------
# Translation adapters

class Translator(Protocol):
    def translate(self, text: str, src_lang: str, tgt_lang: str) -> str: ...


class StubTranslator:
    """Deterministic pseudo-translator for hermetic runs.

    Forward translation tags each word with the target language; back
    translation strips the tag.  A per-word hash marks ``corrupt_pct`` per
    cent of words as lossy, so back-translations differ from the original
    in a reproducible way and the consistency filter has a real signal.
    """

    def __init__(self, corrupt_pct: int = 10):
        if not 0 <= corrupt_pct <= 100:
            raise ValueError("corrupt_pct must be in [0, 100]")
        self.corrupt_pct = corrupt_pct

    def translate(self, text: str, src_lang: str, tgt_lang: str) -> str:
        out = []
        for word in text.split():
            if src_lang != "EN" and word.endswith(f"~{src_lang.lower()}"):
                word = word[: -(len(src_lang) + 1)]
            if stable_hash(f"{word}|{src_lang}|{tgt_lang}") % 100 < self.corrupt_pct:
                word = word + "'"
            if tgt_lang != "EN":
                word = f"{word}~{tgt_lang.lower()}"
            out.append(word)
        return " ".join(out)


class CommandTranslator:
    """External adapter: runs ``cmd SRC TGT``, one sentence per stdin line,
    one translation per stdout line.  Configure via the AMRKIT_ADAPTER_CMD
    environment variable or a NoiseSpec adapter string."""

    def __init__(self, cmd: str):
        self.cmd = cmd

    def translate(self, text: str, src_lang: str, tgt_lang: str) -> str:
        argv = shlex.split(self.cmd) + [src_lang, tgt_lang]
        try:
            proc = subprocess.run(
                argv, input=text + "\n", capture_output=True, text=True, timeout=60
            )
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise AdapterError(f"adapter {self.cmd!r} failed: {exc}") from exc
        if proc.returncode != 0:
            raise AdapterError(
                f"adapter {self.cmd!r} exited {proc.returncode}: {proc.stderr.strip()}"
            )
        out = proc.stdout.splitlines()
        if not out:
            raise AdapterError(f"adapter {self.cmd!r} produced no output")
        return out[0].strip()


def resolve_translator(adapter: "Translator | str | None" = None) -> Translator:
    """Pick the configured adapter: an explicit object or command string, the
    AMRKIT_ADAPTER_CMD environment command, else the hermetic stub."""
    if adapter is not None and not isinstance(adapter, str):
        return adapter
    cmd = adapter or os.environ.get(ADAPTER_CMD_ENV)
    if cmd:
        return CommandTranslator(cmd)
    return StubTranslator()


# ---------------------------------------------------------------------------
# Embeddings and the back-translation consistency filter

class EmbeddingProvider(Protocol):
    def embed(self, sentence: str, lang: str) -> np.ndarray: ...


class HashEmbedding:
    """Deterministic sentence embeddings: the normalized sum of per-word
    pseudo-random unit vectors, language-agnostic so that a perfect back
    translation embeds identically to its source."""

    def __init__(self, dim: int = 64):
        self.dim = dim
        self._cache: dict[str, np.ndarray] = {}

    def _word_vec(self, word: str) -> np.ndarray:
        vec = self._cache.get(word)
        if vec is None:
            rng = np.random.RandomState(stable_hash(word) & 0x7FFFFFFF)
            vec = rng.standard_normal(self.dim)
            vec /= np.linalg.norm(vec)
            self._cache[word] = vec
        return vec

    def embed(self, sentence: str, lang: str) -> np.ndarray:
        words = sentence.split()
        if not words:
            return np.zeros(self.dim)
        return np.sum([self._word_vec(w) for w in words], axis=0)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def bt_filter(
    records: Sequence[CorpusRecord],
    provider: EmbeddingProvider,
    translator: Translator | None = None,
    threshold: float = 0.85,
    jobs: int = 1,
) -> tuple[list[CorpusRecord], list[CorpusRecord]]:
    """Back-translation consistency check.

    Each record's foreign source is translated back to English and compared
    with the retained original (``meta['src_en']``) by embedding cosine;
    records scoring >= threshold are kept.  Kept and dropped partition the
    input in order; adapter failures drop the record with the reason logged,
    never abort the batch.  ``jobs`` bounds concurrent adapter calls; output
    ordering always equals input ordering.  The shipped default threshold
    (0.85) is a configuration default, not a calibrated value.
    """
    tr = translator or resolve_translator()

    def score(rec: CorpusRecord) -> tuple[CorpusRecord, bool]:
        src_en = rec.meta.get("src_en")
        if src_en is None:
            log.warning("record %s: no src_en metadata; dropped", rec.id)
            return rec, False
        try:
            back = tr.translate(rec.src, rec.lang, "EN")
        except AdapterError as exc:
            log.warning("record %s: %s; dropped", rec.id, exc)
            return rec, False
        quality = cosine(provider.embed(src_en, "EN"), provider.embed(back, "EN"))
        return replace(rec, quality=quality), quality >= threshold

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            scored = list(pool.map(score, records))
    else:
        scored = [score(rec) for rec in records]
    kept = [rec for rec, ok in scored if ok]
    dropped = [rec for rec, ok in scored if not ok]
    return kept, dropped


# ---------------------------------------------------------------------------
# Vocabulary augmentation

def _is_frame(token: str) -> bool:
    # frame names look like want-01: a two-digit sense suffix
    return (
        len(token) > 3
        and token[-3] == "-"
        and token[-2:].isdigit()
        and not token.startswith(":")
        and not token.startswith('"')
    )


def augment_vocab(records: Iterable[CorpusRecord], min_count: int = 5) -> list[str]:
    """Relation labels and frame names occurring at least ``min_count`` times
    in the given records' targets, most frequent first, ties lexicographic."""
    freq: dict[str, int] = {}
    for rec in records:
        for tok in rec.tgt or ():
            if (tok.startswith(":") and len(tok) > 1) or _is_frame(tok):
                freq[tok] = freq.get(tok, 0) + 1
    chosen = [t for t, c in freq.items() if c >= min_count]
    chosen.sort(key=lambda t: (-freq[t], t))
    return chosen


# ---------------------------------------------------------------------------
# Corpus bookkeeping

_SPLITS = ("train", "dev", "test")
_LANG_NAMES = {
    "EN": "English(EN)",
    "DE": "German(DE)",
    "ES": "Spanish(ES)",
    "IT": "Italian(IT)",
    "ZH": "Chinese(ZH)",
}


@dataclass(frozen=True)
class CorpusStats:
    counts: dict[tuple[str, str], int]

    def count(self, lang: str, split: str) -> int:
        return self.counts.get((lang, split), 0)

    def to_dict(self) -> dict:
        return {
            lang: {split: self.count(lang, split) for split in _SPLITS}
            for lang in LANGS
        }

    def cell(self, lang: str, split: str) -> str:
        """Formatted count with the gold-quality marker ``*`` on EN rows and
        on every test column."""
        mark = "*" if lang == "EN" or split == "test" else ""
        return f"{self.count(lang, split):,}{mark}"

    def render(self) -> str:
        header = f"{'Language':<14}{'Train':>10}{'Dev':>9}{'Test':>9}"
        lines = [header]
        for lang in LANGS:
            cells = [self.cell(lang, s) for s in _SPLITS]
            lines.append(
                f"{_LANG_NAMES[lang]:<14}{cells[0]:>10}{cells[1]:>9}{cells[2]:>9}"
            )
        return "\n".join(lines)


def corpus_stats(records: Iterable[CorpusRecord]) -> CorpusStats:
    counts: dict[tuple[str, str], int] = {}
    for rec in records:
        key = (rec.lang, rec.split)
        counts[key] = counts.get(key, 0) + 1
    return CorpusStats(counts)


# ---------------------------------------------------------------------------
# JSONL corpus format

def record_to_json(rec: CorpusRecord) -> dict:
    return {
        "id": rec.id,
        "lang": rec.lang,
        "split": rec.split,
        "src": rec.src,
        "tgt": to_line(list(rec.tgt)) if rec.tgt is not None else None,
        "provenance": rec.provenance,
        "quality": rec.quality,
        "meta": rec.meta,
    }


def record_from_json(obj: dict) -> CorpusRecord:
    tgt = obj.get("tgt")
    return CorpusRecord(
        id=obj["id"],
        lang=obj["lang"],
        split=obj.get("split", "train"),
        src=obj["src"],
        tgt=tuple(from_line(tgt)) if tgt is not None else None,
        provenance=obj.get("provenance", "gold"),
        quality=obj.get("quality"),
        meta=obj.get("meta") or {},
    )


def write_corpus_jsonl(path: str, records: Iterable[CorpusRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(record_to_json(rec), ensure_ascii=False) + "\n")


def read_corpus_jsonl(path: str) -> list[CorpusRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(record_from_json(json.loads(line)))
    return records
