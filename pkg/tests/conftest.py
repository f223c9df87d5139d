import sys

import pytest

from maskpure.classifier import train_classifier
from maskpure.filler import train_filler
from maskpure.text import Text
from maskpure.toy import load_bundled

SENTIMENT_VOCAB = ["bad", "good", "great", "awful", "movie", "plot", "the", "was"]
_POS = ["the movie was good", "the plot was great", "good movie", "great plot", "the movie was great",
        "good plot was great"]
_NEG = ["the movie was bad", "the plot was awful", "bad movie", "awful plot", "the plot was bad",
        "bad movie was awful"]


def T(s: str) -> Text:
    return Text(tuple(s.split()))


@pytest.fixture(scope="session")
def sentiment_corpus():
    """Eight-word, two-class task small enough for exhaustive enumeration."""
    return [(T(s), 1) for s in _POS] + [(T(s), 2) for s in _NEG]


@pytest.fixture(scope="session")
def sentiment_models(sentiment_corpus):
    return train_filler(t for t, _ in sentiment_corpus), train_classifier(sentiment_corpus)


@pytest.fixture(scope="session")
def toy_task():
    return load_bundled()


@pytest.fixture(scope="session")
def toy_models(toy_task):
    train, _, _ = toy_task
    return train_filler(t for t, _ in train), train_classifier(train)


class ConstantClassifier:
    def __init__(self, label: int, n_classes: int = 2):
        self.label = label
        self.n_classes = n_classes

    def logits(self, x):
        return tuple(1.0 if c == self.label else 0.0 for c in range(1, self.n_classes + 1))

    def predict(self, x):
        return self.label


class IdentityFiller:
    """Fills every mask with a fixed token."""

    def __init__(self, token="the"):
        self.token = token

    def fill(self, masked):
        return Text(tuple(self.token if t == "[MASK]" else t for t in masked.tokens))


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("tests.test_acceptance")
    lines = getattr(module, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
