"""The mask-fill-vote defense and Monte Carlo estimation of class probabilities."""
from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .classifier import Classifier, LogitVector, argmax
from .errors import InvalidArgs, ShapeMismatch
from .filler import Filler
from .streams import rng_stream
from .text import MaskedText, MaskPlan, Text, all_mask_plans, apply_mask, keep_count, sample_mask_plan

AVERAGED = "averaged-logit"
MAJORITY = "majority-vote-logit"
NAIVE_MAX = "naive-max-logit"
VOTING_METHODS = (AVERAGED, MAJORITY, NAIVE_MAX)

ALIASES = {"avg": AVERAGED, "majority": MAJORITY, "naive-max": NAIVE_MAX}


def voting_method(name: str) -> str:
    name = ALIASES.get(name, name)
    if name not in VOTING_METHODS:
        raise InvalidArgs(f"unknown voting method {name!r}")
    return name


@dataclass(frozen=True)
class PurifyConfig:
    mask_rate: float = 0.3
    votes: int = 11
    voting: str = NAIVE_MAX
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.mask_rate <= 1.0:
            raise InvalidArgs(f"mask rate {self.mask_rate} not in [0, 1]")
        if self.votes < 1:
            raise InvalidArgs("votes must be >= 1")
        object.__setattr__(self, "voting", voting_method(self.voting))
        if self.votes % 2 == 0:
            warnings.warn(f"even vote count {self.votes}; majority ties go to the lowest class", stacklevel=3)


@dataclass(frozen=True)
class PurifiedCopy:
    plan: MaskPlan
    masked: MaskedText
    filled: Text
    logits: LogitVector


@dataclass(frozen=True)
class PurifiedEnsemble:
    source: Text
    copies: tuple[PurifiedCopy, ...]

    def __len__(self) -> int:
        return len(self.copies)

    def __getitem__(self, i: int) -> PurifiedCopy:
        """Copy ``i`` for i in 1..v."""
        if i < 1:
            raise IndexError(i)
        return self.copies[i - 1]

    @property
    def logit_vectors(self) -> list[LogitVector]:
        return [c.logits for c in self.copies]


def purify_ensemble(
    x: Text, cfg: PurifyConfig, filler: Filler, classifier: Classifier, key: Sequence[int] = ()
) -> PurifiedEnsemble:
    """Mask, refill and score ``cfg.votes`` copies of ``x``.

    Copy i draws its keep set from the stream (seed, "purify", *key, i), so
    the ensemble is reproducible and independent of evaluation order.
    """
    j = len(x)
    if j < 1:
        raise InvalidArgs("cannot purify an empty text")
    k = keep_count(j, cfg.mask_rate)
    copies = []
    for i in range(cfg.votes):
        plan = sample_mask_plan(j, k, rng_stream(cfg.seed, "purify", *key, i))
        masked = apply_mask(x, plan)
        filled = filler.fill(masked)
        copies.append(PurifiedCopy(plan, masked, filled, classifier.logits(filled)))
    return PurifiedEnsemble(x, tuple(copies))


def vote(vectors: Sequence[LogitVector], method: str) -> LogitVector:
    method = voting_method(method)
    if not vectors:
        raise ShapeMismatch("no logit vectors to vote over")
    c = len(vectors[0])
    if any(len(v) != c for v in vectors):
        raise ShapeMismatch("logit vectors have different lengths")
    v = len(vectors)
    if method == AVERAGED:
        return tuple(math.fsum(vec[i] for vec in vectors) / v for i in range(c))
    tally = Counter(argmax(vec) for vec in vectors)
    counts = [tally.get(i, 0) for i in range(1, c + 1)]
    if method == MAJORITY:
        return tuple(n / v for n in counts)
    winner = argmax(counts)
    return tuple(1.0 if i == winner else 0.0 for i in range(1, c + 1))


def smoothed_classify(
    x: Text, cfg: PurifyConfig, filler: Filler, classifier: Classifier, key: Sequence[int] = ()
) -> tuple[int, LogitVector]:
    ensemble = purify_ensemble(x, cfg, filler, classifier, key)
    combined = vote(ensemble.logit_vectors, cfg.voting)
    return argmax(combined), combined


def sample_class_counts(
    x: Text, n: int, m: float, filler: Filler, classifier: Classifier, seed: int, key: Sequence[int] = ()
) -> list[int]:
    """Hard-label counts per class over ``n`` independent mask-fill-classify trials.

    Filler and classifier are deterministic, so the label is a function of
    the keep set alone and is computed once per distinct keep set.
    """
    if n < 1:
        raise InvalidArgs("need at least one trial")
    j = len(x)
    k = keep_count(j, m)
    cache: dict[frozenset, int] = {}
    counts = [0] * classifier.n_classes
    for t in range(n):
        plan = sample_mask_plan(j, k, rng_stream(seed, "trial", *key, t))
        label = cache.get(plan.keep_set)
        if label is None:
            label = classifier.predict(filler.fill(apply_mask(x, plan)))
            cache[plan.keep_set] = label
        counts[label - 1] += 1
    return counts


def estimate_pc(
    x: Text, c: int, n: int, m: float, filler: Filler, classifier: Classifier, seed: int,
    key: Sequence[int] = (),
) -> tuple[int, float]:
    counts = sample_class_counts(x, n, m, filler, classifier, seed, key)
    return counts[c - 1], counts[c - 1] / n


def enumerate_pc(x: Text, m: float, filler: Filler, classifier: Classifier) -> tuple[Fraction, ...]:
    """Exact class probabilities by running every keep set once."""
    j = len(x)
    plans = all_mask_plans(j, keep_count(j, m))
    counts = [0] * classifier.n_classes
    for plan in plans:
        counts[classifier.predict(filler.fill(apply_mask(x, plan))) - 1] += 1
    return tuple(Fraction(n, len(plans)) for n in counts)


class PlainDefense:
    """The undefended classifier behind the same query interface as MaskPureDefense."""

    name = "none"

    def __init__(self, classifier: Classifier):
        self.classifier = classifier

    def classify(self, x: Text, key: Sequence[int] = ()) -> tuple[int, LogitVector]:
        scores = self.classifier.logits(x)
        return argmax(scores), scores


class MaskPureDefense:
    """Smoothed classification; each distinct ``key`` gets a fresh ensemble."""

    def __init__(self, filler: Filler, classifier: Classifier, cfg: PurifyConfig):
        self.filler = filler
        self.classifier = classifier
        self.cfg = cfg

    @property
    def name(self) -> str:
        return self.cfg.voting

    def classify(self, x: Text, key: Sequence[int] = ()) -> tuple[int, LogitVector]:
        return smoothed_classify(x, self.cfg, self.filler, self.classifier, key)
