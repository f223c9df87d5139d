"""Mask filling with a bidirectional bigram scorer.

A masked position i is filled with the vocabulary token t maximizing

    P(t | left neighbour) * P(right neighbour | t)

under add-``smoothing`` bigram estimates.  Masks are resolved left to right,
so a filled token becomes the left context of the next mask.  A neighbour
that carries no usable information is marginalized out: an unknown left
neighbour (out-of-vocabulary) leaves the smoothed unigram distribution, and an
unknown right neighbour (out-of-vocabulary, or a mask not filled yet)
contributes a constant factor.
"""
from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Protocol

import numpy as np

from .errors import EmptyCorpus
from .text import MASK, MaskedText, Text

FORMAT_VERSION = "maskpure-filler/1"
BOS = "<s>"
EOS = "</s>"


class Filler(Protocol):
    """Anything that deterministically replaces mask sentinels with tokens."""

    def fill(self, masked: MaskedText) -> Text: ...


@dataclass(frozen=True, eq=False)
class FillerModel:
    vocab: tuple[str, ...]
    unigrams: dict[str, int]
    bigrams: dict[str, dict[str, int]]
    starts: dict[str, int]
    ends: dict[str, int]
    smoothing: float = 1
    version: str = field(default=FORMAT_VERSION)

    @property
    def vocabulary(self) -> dict[str, int]:
        return self._index

    @cached_property
    def _index(self) -> dict[str, int]:
        return {t: i for i, t in enumerate(self.vocab)}

    @cached_property
    def _tables(self):
        idx = self._index
        size = len(self.vocab)
        width = size + 1  # next-token outcomes: every word plus end-of-sequence
        uni = np.array([self.unigrams.get(t, 0) for t in self.vocab], dtype=float)
        inv_denom = 1.0 / (uni + self.smoothing * width)
        starts = np.array([self.starts.get(t, 0) for t in self.vocab], dtype=float)
        ends = np.array([self.ends.get(t, 0) for t in self.vocab], dtype=float)
        rows: dict[str, tuple[np.ndarray, np.ndarray]] = {}
        cols_acc: dict[str, tuple[list[int], list[int]]] = defaultdict(lambda: ([], []))
        for left, nexts in self.bigrams.items():
            ids = [idx[t] for t in nexts]
            rows[left] = (np.array(ids, dtype=int), np.array(list(nexts.values()), dtype=float))
            for t, c in nexts.items():
                cols_acc[t][0].append(idx[left])
                cols_acc[t][1].append(c)
        cols = {t: (np.array(i, dtype=int), np.array(c, dtype=float)) for t, (i, c) in cols_acc.items()}
        return size, inv_denom, starts, ends, uni, rows, cols

    def _best(self, left: str | None, right: str | None) -> str:
        size, inv_denom, starts, ends, uni, rows, cols = self._tables
        a = self.smoothing
        if left == BOS:
            score = starts + a
        elif left in self._index:
            score = np.full(size, a, dtype=float)
            ids, counts = rows.get(left, (None, None))
            if ids is not None:
                score[ids] += counts
        else:
            score = uni + a
        if right == EOS:
            score = score * ((ends + a) * inv_denom)
        elif right in self._index:
            r = np.full(size, a, dtype=float)
            ids, counts = cols.get(right, (None, None))
            if ids is not None:
                r[ids] += counts
            score = score * (r * inv_denom)
        # np.argmax returns the first maximum; vocab is sorted, so ties go to the
        # lexicographically smallest token
        return self.vocab[int(np.argmax(score))]

    def fill(self, masked: MaskedText) -> Text:
        toks = list(masked.tokens)
        n = len(toks)
        for i, t in enumerate(toks):
            if t != MASK:
                continue
            left = toks[i - 1] if i > 0 else BOS
            right = toks[i + 1] if i + 1 < n else EOS
            if right == MASK:
                right = None
            toks[i] = self._best(left, right)
        return Text(tuple(toks))

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "smoothing": self.smoothing,
            "vocab": list(self.vocab),
            "unigrams": dict(self.unigrams),
            "bigrams": {k: dict(v) for k, v in self.bigrams.items()},
            "starts": dict(self.starts),
            "ends": dict(self.ends),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1, ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "FillerModel":
        if d.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported filler model version {d.get('version')!r}")
        return cls(
            vocab=tuple(d["vocab"]),
            unigrams={k: int(v) for k, v in d["unigrams"].items()},
            bigrams={k: {t: int(c) for t, c in v.items()} for k, v in d["bigrams"].items()},
            starts={k: int(v) for k, v in d["starts"].items()},
            ends={k: int(v) for k, v in d["ends"].items()},
            smoothing=d["smoothing"],
        )

    @classmethod
    def from_json(cls, s: str) -> "FillerModel":
        return cls.from_dict(json.loads(s))


def train_filler(corpus: Iterable[Text], smoothing: float = 1) -> FillerModel:
    """Count unigram, bigram and sequence-boundary statistics over ``corpus``."""
    unigrams: Counter = Counter()
    bigrams: dict[str, Counter] = defaultdict(Counter)
    starts: Counter = Counter()
    ends: Counter = Counter()
    seen = 0
    for text in corpus:
        toks = text.tokens
        if not toks:
            continue
        seen += 1
        unigrams.update(toks)
        starts[toks[0]] += 1
        ends[toks[-1]] += 1
        for a, b in zip(toks, toks[1:]):
            bigrams[a][b] += 1
    if not seen:
        raise EmptyCorpus("cannot train a filler on an empty corpus")
    return FillerModel(
        vocab=tuple(sorted(unigrams)),
        unigrams=dict(sorted(unigrams.items())),
        bigrams={k: dict(sorted(v.items())) for k, v in sorted(bigrams.items())},
        starts=dict(sorted(starts.items())),
        ends=dict(sorted(ends.items())),
        smoothing=smoothing,
    )


def fill(model: Filler, masked: MaskedText) -> Text:
    return model.fill(masked)
