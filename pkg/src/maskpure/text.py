"""Token sequences, positional diffs and the random masking operation."""
from __future__ import annotations

import math
import random
import re
from itertools import combinations
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import EmptyText, InvalidPlan, LengthMismatch

MASK = "[MASK]"
ESCAPED_MASK = "\\[MASK]"
PUNCTUATION = ".,!?;:'\"()"

_TOKEN_RE = re.compile(r"[{p}]|[^\s{p}]+".format(p=re.escape(PUNCTUATION)))


@dataclass(frozen=True)
class Text:
    """An immutable sequence of nonempty tokens.

    A token that literally equals the mask sentinel is stored escaped so a
    masked copy can never be confused with the original.
    """

    tokens: tuple[str, ...]

    def __post_init__(self):
        toks = tuple(ESCAPED_MASK if t == MASK else t for t in self.tokens)
        if any(not isinstance(t, str) or not t for t in toks):
            raise ValueError("tokens must be nonempty strings")
        object.__setattr__(self, "tokens", toks)

    @classmethod
    def of(cls, tokens: Iterable[str]) -> "Text":
        return cls(tuple(tokens))

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, i):
        return self.tokens[i]

    def __str__(self) -> str:
        return detokenize(self)

    def replace(self, position: int, token: str) -> "Text":
        """Return a copy with the token at 1-based ``position`` swapped out."""
        toks = list(self.tokens)
        toks[position - 1] = token
        return Text(tuple(toks))


@dataclass(frozen=True)
class MaskPlan:
    keep_set: frozenset[int]
    total_len: int

    def __post_init__(self):
        object.__setattr__(self, "keep_set", frozenset(self.keep_set))
        if self.total_len < 0 or any(i < 1 or i > self.total_len for i in self.keep_set):
            raise InvalidPlan(f"keep set {sorted(self.keep_set)} not within 1..{self.total_len}")

    @property
    def keep_count(self) -> int:
        return len(self.keep_set)


@dataclass(frozen=True)
class MaskedText:
    tokens: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.tokens)

    def __str__(self) -> str:
        return " ".join(self.tokens)

    def mask_positions(self) -> list[int]:
        return [i for i, t in enumerate(self.tokens, 1) if t == MASK]


def tokenize(raw: str) -> Text:
    """Split on whitespace, detaching each punctuation character as its own token.

    >>> tokenize("Hello, World").tokens
    ('Hello', ',', 'World')
    """
    tokens = _TOKEN_RE.findall(raw)
    if not tokens:
        raise EmptyText("input has no non-whitespace characters")
    return Text(tuple(tokens))


def detokenize(text: Text) -> str:
    return " ".join(text.tokens)


def hamming_diff(a: Text, b: Text) -> frozenset[int]:
    """1-based positions at which two equal-length texts differ."""
    if len(a) != len(b):
        raise LengthMismatch(f"cannot diff texts of length {len(a)} and {len(b)}")
    return frozenset(i for i, (s, t) in enumerate(zip(a.tokens, b.tokens), 1) if s != t)


def keep_count(j: int, m: float) -> int:
    """Number of tokens left unmasked: round((1 - m) * j), halves rounded up.

    ``m`` is read through its decimal repr so that e.g. ``m=0.3, j=5`` gives
    exactly 3.5 -> 4 rather than suffering binary float error.
    """
    if j < 1:
        raise ValueError("j must be >= 1")
    if not 0.0 <= m <= 1.0:
        raise ValueError("mask rate must be in [0, 1]")
    exact = (1 - Fraction(repr(float(m)))) * j
    k = math.floor(exact + Fraction(1, 2))
    return max(0, min(j, k))


def sample_mask_plan(j: int, k: int, rng: random.Random) -> MaskPlan:
    """Draw a keep set uniformly from all k-subsets of {1..j}."""
    if k < 0 or k > j:
        raise InvalidPlan(f"cannot keep {k} of {j} tokens")
    keep = rng.sample(range(1, j + 1), k)
    return MaskPlan(frozenset(keep), j)


def apply_mask(x: Text, plan: MaskPlan) -> MaskedText:
    if plan.total_len != len(x):
        raise LengthMismatch(f"plan for length {plan.total_len} applied to text of length {len(x)}")
    return MaskedText(tuple(t if i in plan.keep_set else MASK for i, t in enumerate(x.tokens, 1)))


def all_mask_plans(j: int, k: int) -> Sequence[MaskPlan]:
    """Every keep set of size k, in lexicographic order."""
    return [MaskPlan(frozenset(c), j) for c in combinations(range(1, j + 1), k)]
