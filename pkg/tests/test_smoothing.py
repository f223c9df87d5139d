import math
import warnings
from collections import Counter
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maskpure.classifier import argmax
from maskpure.errors import InvalidArgs, ShapeMismatch
from maskpure.smoothing import (
    AVERAGED, MAJORITY, NAIVE_MAX, VOTING_METHODS, MaskPureDefense, PurifyConfig, enumerate_pc, estimate_pc,
    purify_ensemble, sample_class_counts, smoothed_classify, vote,
)
from maskpure.text import MASK, MaskedText, Text, keep_count

from .conftest import T, ConstantClassifier, IdentityFiller

EXAMPLE = [(0.9, 0.1), (0.76, 0.24), (1.0, 0.0), (0.81, 0.19), (0.16, 0.84)]


def test_vote_worked_example():
    assert vote(EXAMPLE, AVERAGED) == pytest.approx((0.726, 0.274), abs=1e-9)
    assert vote(EXAMPLE, MAJORITY) == pytest.approx((0.8, 0.2), abs=1e-9)
    assert vote(EXAMPLE, NAIVE_MAX) == (1.0, 0.0)


def test_vote_aliases_and_errors():
    assert vote(EXAMPLE, "avg") == vote(EXAMPLE, AVERAGED)
    with pytest.raises(ShapeMismatch):
        vote([(0.5, 0.5), (0.2, 0.3, 0.5)], AVERAGED)
    with pytest.raises(ShapeMismatch):
        vote([], MAJORITY)
    with pytest.raises(InvalidArgs):
        vote(EXAMPLE, "median")


def test_majority_ties_go_low():
    assert vote([(0.4, 0.6), (0.6, 0.4)], NAIVE_MAX) == (1.0, 0.0)
    assert vote([(0.5, 0.5)], MAJORITY) == (1.0, 0.0)


def simplex(c):
    return st.lists(st.floats(0, 1), min_size=c, max_size=c).filter(lambda v: sum(v) > 0).map(
        lambda v: tuple(x / math.fsum(v) for x in v))


ensembles = st.integers(2, 4).flatmap(lambda c: st.lists(simplex(c), min_size=1, max_size=9))


@given(ensembles, st.sampled_from(VOTING_METHODS))
def test_vote_outputs_valid_logits(vectors, method):
    out = vote(vectors, method)
    assert len(out) == len(vectors[0])
    assert all(x >= 0 for x in out)
    assert math.fsum(out) == pytest.approx(1.0, abs=1e-9)


@given(ensembles)
def test_majority_and_naive_max_share_argmax(vectors):
    assert argmax(vote(vectors, MAJORITY)) == argmax(vote(vectors, NAIVE_MAX))


@given(ensembles, st.sampled_from(VOTING_METHODS), st.randoms(use_true_random=False))
def test_vote_permutation_invariant(vectors, method, rnd):
    shuffled = list(vectors)
    rnd.shuffle(shuffled)
    assert vote(shuffled, method) == vote(vectors, method)


class ScriptedClassifier:
    """Returns the worked-example vectors in turn, one per call."""

    n_classes = 2

    def __init__(self, script):
        self.script = list(script)
        self.calls = 0

    def logits(self, x):
        out = self.script[self.calls % len(self.script)]
        self.calls += 1
        return out

    def predict(self, x):
        return argmax(self.logits(x))


@pytest.mark.parametrize("method", VOTING_METHODS)
def test_smoothed_classify_worked_example(method):
    cfg = PurifyConfig(0.3, 5, method, seed=0)
    cls, combined = smoothed_classify(T("a b c d"), cfg, IdentityFiller(), ScriptedClassifier(EXAMPLE))
    assert cls == 1
    assert combined == pytest.approx(vote(EXAMPLE, method), abs=1e-12)


def test_constant_classifier_wins(toy_models):
    filler, _ = toy_models
    for seed in range(5):
        cls, _ = smoothed_classify(T("the bank cut rates ."), PurifyConfig(0.5, 7, "majority", seed), filler,
                                   ConstantClassifier(2))
        assert cls == 2


def test_smoothed_classify_reproducible(toy_models):
    filler, clf = toy_models
    cfg = PurifyConfig(0.3, 11, AVERAGED, seed=42)
    x = T("the firm won the deal on sunday .")
    assert smoothed_classify(x, cfg, filler, clf) == smoothed_classify(x, cfg, filler, clf)
    e1, e2 = purify_ensemble(x, cfg, filler, clf), purify_ensemble(x, cfg, filler, clf)
    assert e1 == e2
    other = purify_ensemble(x, PurifyConfig(0.3, 11, AVERAGED, seed=43), filler, clf)
    assert [c.plan for c in other.copies] != [c.plan for c in e1.copies]


def test_no_masking_reproduces_input(toy_models):
    filler, clf = toy_models
    x = T("the team won the cup .")
    ens = purify_ensemble(x, PurifyConfig(0.0, 5, AVERAGED, 0), filler, clf)
    assert all(c.filled == x for c in ens.copies)
    assert len({c.logits for c in ens.copies}) == 1


def test_single_vote(toy_models):
    filler, clf = toy_models
    ens = purify_ensemble(T("the team won the cup ."), PurifyConfig(0.3, 1, MAJORITY, 0), filler, clf)
    assert len(ens) == 1
    assert ens[1] is ens.copies[0]
    assert sum(t == MASK for t in ens[1].masked.tokens) == 6 - keep_count(6, 0.3)


def test_even_votes_warn():
    with pytest.warns(UserWarning):
        PurifyConfig(0.3, 4)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        PurifyConfig(0.3, 5)


def test_invalid_config():
    with pytest.raises(InvalidArgs):
        PurifyConfig(1.5, 3)
    with pytest.raises(InvalidArgs):
        PurifyConfig(0.3, 0)


def test_keep_sets_uniform_over_ensemble():
    x = T("a b c")
    cfg = PurifyConfig(0.33, 10_001, MAJORITY, seed=1)
    assert keep_count(3, 0.33) == 2
    ens = purify_ensemble(x, cfg, IdentityFiller(), ConstantClassifier(1))
    freq = Counter(c.plan.keep_set for c in ens.copies)
    assert set(freq) == {frozenset(c) for c in combinations((1, 2, 3), 2)}
    for n in freq.values():
        assert abs(n / len(ens) - 1 / 3) <= 0.02


@settings(max_examples=30, deadline=None)
@given(st.lists(st.sampled_from(["the", "team", "bank", "won", "cut", "rates", "cup", ".", "zz"]),
                min_size=1, max_size=10), st.sampled_from(VOTING_METHODS), st.integers(0, 100))
def test_zero_mask_rate_equals_base_prediction(toy_models, tokens, method, seed):
    filler, clf = toy_models
    x = Text(tuple(tokens))
    assert smoothed_classify(x, PurifyConfig(0.0, 3, method, seed), filler, clf)[0] == clf.predict(x)


def test_estimate_pc_constant_classifier():
    assert estimate_pc(T("a b c d"), 2, 50, 0.5, IdentityFiller(), ConstantClassifier(2), seed=0) == (50, 1.0)
    assert estimate_pc(T("a b c d"), 1, 50, 0.5, IdentityFiller(), ConstantClassifier(2), seed=0) == (0, 0.0)


def test_estimate_pc_no_masking_is_degenerate(toy_models):
    filler, clf = toy_models
    for text in ["the team won the cup .", "the bank cut rates .", "the firm won the deal ."]:
        _, p = estimate_pc(T(text), 1, 200, 0.0, filler, clf, seed=3)
        assert p in (0.0, 1.0)


def test_estimate_pc_rejects_zero_trials():
    with pytest.raises(InvalidArgs):
        estimate_pc(T("a"), 1, 0, 0.5, IdentityFiller(), ConstantClassifier(1), seed=0)


def exact_pc_by_hand(x, k, filler, clf):
    """p_c by running each of the C(j, k) keep sets directly, without the library's enumeration."""
    j = len(x)
    labels = []
    for keep in combinations(range(j), k):
        masked = tuple(t if i in keep else MASK for i, t in enumerate(x.tokens))
        labels.append(clf.predict(filler.fill(MaskedText(masked))))
    n = len(labels)
    return [labels.count(c) / n for c in range(1, clf.n_classes + 1)]


def test_enumerate_pc_matches_hand_enumeration(sentiment_models):
    filler, clf = sentiment_models
    for text in ["the movie was good", "good plot was bad", "bad movie was great awful"]:
        x = T(text)
        for m in (0.3, 0.5, 0.7):
            exact = enumerate_pc(x, m, filler, clf)
            assert [float(p) for p in exact] == pytest.approx(exact_pc_by_hand(x, keep_count(len(x), m), filler, clf))
            assert sum(exact) == 1


def test_monte_carlo_matches_enumeration(sentiment_models):
    filler, clf = sentiment_models
    x = T("good movie was bad")
    m = 0.5
    assert keep_count(4, m) == 2
    exact = exact_pc_by_hand(x, 2, filler, clf)
    assert 0.0 < exact[0] < 1.0
    n_c, p_hat = estimate_pc(x, 1, 100_000, m, filler, clf, seed=0)
    assert abs(p_hat - exact[0]) <= 0.01
    assert n_c == round(p_hat * 100_000)


def test_trial_streams_are_keyed(sentiment_models):
    filler, clf = sentiment_models
    x = T("good movie was bad")
    a = sample_class_counts(x, 500, 0.5, filler, clf, seed=1, key=(3,))
    assert a == sample_class_counts(x, 500, 0.5, filler, clf, seed=1, key=(3,))
    assert sum(a) == 500


def test_defense_keys_give_fresh_ensembles(toy_models):
    filler, clf = toy_models
    defense = MaskPureDefense(filler, clf, PurifyConfig(0.3, 11, NAIVE_MAX, 0))
    x = T("the firm won the deal on sunday .")
    assert defense.classify(x, (0, 1)) == defense.classify(x, (0, 1))
    plans = {tuple(c.plan.keep_set for c in purify_ensemble(x, defense.cfg, filler, clf, (0, q)).copies)
             for q in range(5)}
    assert len(plans) == 5
