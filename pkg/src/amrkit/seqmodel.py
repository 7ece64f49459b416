"""Next-token sequence models: the abstract interface plus a tractable
trainable count-table model used as teacher/student stand-in.

Conventions shared by every model here: the vocabulary is an ordered token
tuple containing the sentinels ``<s>`` (BOS) and ``</s>`` (EOS); prefixes
passed to ``next_dist`` never include BOS (models pad internally); returned
vectors are nonnegative, sum to one within 1e-9, and depend only on
(prefix, source).  Shipped models assign probability exactly zero to BOS so
decoders never have to special-case it.  Models are safe for concurrent
read-only queries; training mutates under a single-writer contract.
"""

from __future__ import annotations

import copy
import json
import zlib
from abc import ABC, abstractmethod
from typing import Iterable, Sequence

import numpy as np

__all__ = ["BOS", "EOS", "SeqModel", "ToyCondModel", "stable_hash"]

BOS = "<s>"
EOS = "</s>"

_FORMAT = "amrkit-toy-model"
_FORMAT_VERSION = 1


def stable_hash(text: str) -> int:
    """Process-independent 32-bit hash (unlike builtin ``hash``)."""
    return zlib.crc32(text.encode("utf-8"))


class SeqModel(ABC):
    """Conditional next-token distribution p(token | prefix, source)."""

    def __init__(self, vocab: Iterable[str]):
        vocab = tuple(vocab)
        if BOS not in vocab or EOS not in vocab:
            raise ValueError(f"vocabulary must contain {BOS!r} and {EOS!r}")
        if len(set(vocab)) != len(vocab):
            raise ValueError("vocabulary contains duplicates")
        self.vocab = vocab
        self._index = {tok: i for i, tok in enumerate(vocab)}

    def index(self, token: str) -> int:
        try:
            return self._index[token]
        except KeyError:
            raise ValueError(f"token {token!r} not in vocabulary") from None

    def content_tokens(self) -> tuple[str, ...]:
        return tuple(t for t in self.vocab if t not in (BOS, EOS))

    @abstractmethod
    def next_dist(self, prefix: Sequence[str], src: Sequence[str]) -> np.ndarray:
        """Distribution over the full vocabulary for the next position."""


class ToyCondModel(SeqModel):
    """Additively smoothed conditional count table.

    The conditioning key is (hashed bag of source tokens, last ``order - 1``
    prefix tokens, BOS-padded).  ``alpha`` smoothing mass is spread over
    every vocabulary entry except BOS.  Training only ever adds to counts,
    so repeated observation of one pair converges to that pair's empirical
    distribution with an alpha-dependent floor.
    """

    def __init__(
        self,
        vocab: Iterable[str],
        order: int = 2,
        alpha: float = 0.1,
        buckets: int = 64,
    ):
        super().__init__(vocab)
        if order < 1:
            raise ValueError("order must be >= 1")
        if alpha <= 0:
            raise ValueError("alpha must be > 0")
        if buckets < 1:
            raise ValueError("buckets must be >= 1")
        self.order = order
        self.alpha = alpha
        self.buckets = buckets
        self.counts: dict[tuple[int, tuple[int, ...]], np.ndarray] = {}
        v = len(self.vocab)
        self._smooth = np.full(v, alpha)
        self._smooth[self.index(BOS)] = 0.0

    # -- conditioning ------------------------------------------------------

    def bucket(self, src: Sequence[str]) -> int:
        return stable_hash(" ".join(sorted(src))) % self.buckets

    def context(self, prefix: Sequence[str]) -> tuple[int, ...]:
        if self.order == 1:
            return ()
        ids = [self.index(t) for t in prefix][-(self.order - 1) :]
        pad = [self.index(BOS)] * (self.order - 1 - len(ids))
        return tuple(pad + ids)

    def key(self, prefix: Sequence[str], src: Sequence[str]):
        return (self.bucket(src), self.context(prefix))

    # -- queries and updates ------------------------------------------------

    def next_dist(self, prefix: Sequence[str], src: Sequence[str]) -> np.ndarray:
        c = self.counts.get(self.key(prefix, src))
        num = self._smooth if c is None else c + self._smooth
        return num / num.sum()

    def add_count(self, prefix: Sequence[str], src: Sequence[str], token: str, weight: float = 1.0) -> None:
        self.add_dist_counts(prefix, src, _one_hot(len(self.vocab), self.index(token), weight))

    def add_dist_counts(self, prefix: Sequence[str], src: Sequence[str], dist: np.ndarray) -> None:
        """Add fractional counts (e.g. a teacher distribution). Any BOS mass
        is discarded: BOS is never a legal continuation."""
        key = self.key(prefix, src)
        cell = self.counts.get(key)
        if cell is None:
            cell = np.zeros(len(self.vocab))
            self.counts[key] = cell
        cell += dist
        cell[self.index(BOS)] = 0.0

    def observe(self, src: Sequence[str], target: Sequence[str]) -> None:
        """Count one teacher-forced pass over a target ending in EOS."""
        if not target or target[-1] != EOS:
            raise ValueError("target sequence must end with EOS")
        for t, token in enumerate(target):
            if token == BOS:
                raise ValueError("target sequence may not contain BOS")
            self.add_count(target[:t], src, token)

    def clone(self) -> "ToyCondModel":
        return copy.deepcopy(self)

    # -- persistence ---------------------------------------------------------

    def save(self, path: str) -> None:
        payload = {
            "format": _FORMAT,
            "version": _FORMAT_VERSION,
            "vocab": list(self.vocab),
            "order": self.order,
            "alpha": self.alpha,
            "buckets": self.buckets,
            "counts": [
                {"bucket": b, "context": list(ctx), "counts": cell.tolist()}
                for (b, ctx), cell in self.counts.items()
            ],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh)

    @classmethod
    def load(cls, path: str) -> "ToyCondModel":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        if payload.get("format") != _FORMAT:
            raise ValueError(f"{path}: not a {_FORMAT} file")
        if payload.get("version") != _FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported format version {payload.get('version')}")
        model = cls(
            payload["vocab"],
            order=payload["order"],
            alpha=payload["alpha"],
            buckets=payload["buckets"],
        )
        for entry in payload["counts"]:
            model.counts[(entry["bucket"], tuple(entry["context"]))] = np.asarray(
                entry["counts"], dtype=float
            )
        return model


def _one_hot(size: int, index: int, weight: float) -> np.ndarray:
    vec = np.zeros(size)
    vec[index] = weight
    return vec
