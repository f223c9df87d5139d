"""Multinomial naive Bayes over unigram and adjacent-bigram features.

Classes are numbered 1..c.  Features never seen in training are ignored at
inference time, so a text with no known features scores exactly the priors.
"""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Protocol, Sequence

from .errors import IncompleteLabels
from .text import Text

FORMAT_VERSION = "maskpure-classifier/1"

LogitVector = tuple[float, ...]


class Classifier(Protocol):
    n_classes: int

    def logits(self, x: Text) -> LogitVector: ...

    def predict(self, x: Text) -> int: ...


def features(x: Text) -> Counter:
    """Unigrams plus space-joined adjacent bigrams."""
    toks = x.tokens
    feats = Counter(toks)
    feats.update(f"{a} {b}" for a, b in zip(toks, toks[1:]))
    return feats


def argmax(scores: Sequence[float]) -> int:
    """1-based index of the largest score; ties go to the lowest index."""
    best = 0
    for i in range(1, len(scores)):
        if scores[i] > scores[best]:
            best = i
    return best + 1


def softmax(log_scores: Sequence[float]) -> LogitVector:
    top = max(log_scores)
    exps = [math.exp(s - top) for s in log_scores]
    total = math.fsum(exps)
    return tuple(e / total for e in exps)


@dataclass(frozen=True, eq=False)
class ClassifierModel:
    n_classes: int
    log_priors: tuple[float, ...]
    log_likelihoods: dict[str, tuple[float, ...]]

    def logits(self, x: Text) -> LogitVector:
        scores = list(self.log_priors)
        for feat, count in features(x).items():
            ll = self.log_likelihoods.get(feat)
            if ll is None:
                continue
            for c in range(self.n_classes):
                scores[c] += count * ll[c]
        return softmax(scores)

    def predict(self, x: Text) -> int:
        return argmax(self.logits(x))

    @property
    def feature_vocabulary(self) -> list[str]:
        return sorted(self.log_likelihoods)

    def to_dict(self) -> dict:
        return {
            "version": FORMAT_VERSION,
            "n_classes": self.n_classes,
            "log_priors": list(self.log_priors),
            "log_likelihoods": {k: list(v) for k, v in self.log_likelihoods.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1, ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "ClassifierModel":
        if d.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported classifier model version {d.get('version')!r}")
        return cls(
            n_classes=int(d["n_classes"]),
            log_priors=tuple(float(v) for v in d["log_priors"]),
            log_likelihoods={k: tuple(float(x) for x in v) for k, v in d["log_likelihoods"].items()},
        )

    @classmethod
    def from_json(cls, s: str) -> "ClassifierModel":
        return cls.from_dict(json.loads(s))


def train_classifier(
    corpus: Iterable[tuple[Text, int]], n_classes: int | None = None, smoothing: float = 1.0
) -> ClassifierModel:
    """Fit priors and add-``smoothing`` feature likelihoods by counting."""
    docs = list(corpus)
    labels = [y for _, y in docs]
    c = n_classes if n_classes is not None else max(labels, default=0)
    if c < 2:
        raise IncompleteLabels("need at least two classes")
    bad = [y for y in labels if not isinstance(y, int) or y < 1 or y > c]
    if bad:
        raise IncompleteLabels(f"labels outside 1..{c}: {sorted(set(bad))}")
    missing = sorted(set(range(1, c + 1)) - set(labels))
    if missing:
        raise IncompleteLabels(f"no training example for classes {missing}")

    doc_counts = Counter(labels)
    class_feats = [Counter() for _ in range(c)]
    for x, y in docs:
        class_feats[y - 1].update(features(x))
    vocab = sorted(set().union(*class_feats))
    totals = [sum(cf.values()) + smoothing * len(vocab) for cf in class_feats]
    log_likelihoods = {
        f: tuple(math.log((class_feats[k][f] + smoothing) / totals[k]) for k in range(c)) for f in vocab
    }
    n = len(docs)
    log_priors = tuple(math.log(doc_counts[k] / n) for k in range(1, c + 1))
    return ClassifierModel(c, log_priors, log_likelihoods)


def logits(model: Classifier, x: Text) -> LogitVector:
    return model.logits(x)


def predict(model: Classifier, x: Text) -> int:
    return model.predict(x)
