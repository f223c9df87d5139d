"""Certified radii for the smoothed classifier and median certified robustness.

For a keep count k out of j tokens, a keep set drawn uniformly hits at least
one of d fixed positions with probability

    delta(j, k, d) = 1 - C(j - d, k) / C(j, k).

An input whose top class has probability lower bound p_lower is certified at
radius d when 0.5 < p_lower * (1 - delta(j, k, d)), i.e. the slack term
beta * delta is taken with beta approximated by p_lower itself.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

from ._special import beta_quantile
from .classifier import Classifier, argmax
from .errors import EmptyDataset, InvalidArgs
from .filler import Filler
from .smoothing import sample_class_counts
from .text import Text, keep_count

DEFAULT_ALPHA = 0.05


def delta(j: int, k: int, d: int) -> float:
    if not (0 <= k <= j and 0 <= d <= j):
        raise InvalidArgs(f"need 0 <= k <= j and 0 <= d <= j, got j={j}, k={k}, d={d}")
    if k > j - d:
        return 1.0
    miss = 1.0
    for i in range(d):
        miss *= (j - k - i) / (j - i)
    return 1.0 - miss


def clopper_pearson_lower(n_c: int, n: int, alpha: float = DEFAULT_ALPHA) -> float:
    """One-sided (1 - alpha) lower confidence bound on a binomial proportion.

    This is the alpha-quantile of Beta(n_c, n - n_c + 1); equivalently the
    p at which P(Binomial(n, p) >= n_c) = alpha.
    """
    if n < 1 or not 0 <= n_c <= n or not 0.0 < alpha < 1.0:
        raise InvalidArgs(f"invalid Clopper-Pearson arguments n_c={n_c}, n={n}, alpha={alpha}")
    if n_c == 0:
        return 0.0
    return beta_quantile(alpha, n_c, n - n_c + 1)


def radius_from_bound(p_lower: float, j: int, k: int) -> int:
    """Largest d with 0.5 < p_lower * (1 - delta(j, k, d)), else 0."""
    radius = 0
    for d in range(1, j + 1):
        if 0.5 < p_lower * (1.0 - delta(j, k, d)):
            radius = d
        else:
            break
    return radius


@dataclass(frozen=True)
class Certificate:
    id: int | str
    j: int
    k: int
    n: int
    n_c: int
    alpha: float
    p_lower: float
    radius: int
    predicted: int
    gold: int | None = None
    deltas: tuple[float, ...] = field(default=(), repr=False)

    @property
    def certified_correct_radius(self) -> int:
        """Radius if the certified class matches the gold label, else -1."""
        if self.gold is not None and self.predicted != self.gold:
            return -1
        return self.radius

    def record(self) -> dict:
        d = asdict(self)
        del d["deltas"], d["alpha"]
        return d


def certify_counts(
    counts: Sequence[int], j: int, k: int, alpha: float = DEFAULT_ALPHA, input_id: int | str = 0,
    gold: int | None = None,
) -> Certificate:
    n = sum(counts)
    predicted = argmax(counts)
    n_c = counts[predicted - 1]
    p_lower = clopper_pearson_lower(n_c, n, alpha)
    return Certificate(
        id=input_id, j=j, k=k, n=n, n_c=n_c, alpha=alpha, p_lower=p_lower,
        radius=radius_from_bound(p_lower, j, k), predicted=predicted, gold=gold,
        deltas=tuple(delta(j, k, d) for d in range(j + 1)),
    )


def certified_radius(
    x: Text, n: int, alpha: float, m: float, filler: Filler, classifier: Classifier, seed: int,
    input_id: int | str = 0, gold: int | None = None, key: Sequence[int] = (),
) -> Certificate:
    """Estimate the smoothed prediction of ``x`` from ``n`` trials and certify it."""
    counts = sample_class_counts(x, n, m, filler, classifier, seed, key)
    j = len(x)
    return certify_counts(counts, j, keep_count(j, m), alpha, input_id, gold)


def mcb_from_radii(radii: Sequence[int]) -> tuple[int, bool]:
    """Median certified robustness from certified-correct radii (-1 = wrong).

    Returns (mcb, below_half) where ``below_half`` flags that no more than half
    of the inputs are even classified correctly, in which case mcb is 0.
    """
    if not radii:
        raise EmptyDataset("no radii")
    n = len(radii)
    ranked = sorted(radii, reverse=True)
    # the (floor(n/2)+1)-th largest radius is the largest d reached by > n/2 inputs
    kth = ranked[n // 2]
    if kth < 0:
        return 0, True
    return kth, False


@dataclass(frozen=True)
class RobustnessReport:
    mcb: int
    accuracy: float
    certificates: tuple[Certificate, ...]
    below_half: bool
    alpha: float
    mask_rate: float
    n: int

    def summary(self) -> dict:
        return {
            "mcb": self.mcb, "accuracy": self.accuracy, "alpha": self.alpha, "m": self.mask_rate,
            "n": self.n, "below_half": self.below_half,
        }


def median_certified_robustness(
    dataset: Sequence[tuple[Text, int]], n: int, alpha: float, m: float, filler: Filler,
    classifier: Classifier, seed: int, workers: int = 1,
) -> RobustnessReport:
    """Certify every input; input i uses the trial streams keyed by i."""
    if not dataset:
        raise EmptyDataset("cannot certify an empty dataset")

    def run(i: int) -> Certificate:
        x, gold = dataset[i]
        return certified_radius(x, n, alpha, m, filler, classifier, seed, input_id=i, gold=gold, key=(i,))

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            certs = tuple(pool.map(run, range(len(dataset))))
    else:
        certs = tuple(run(i) for i in range(len(dataset)))
    mcb, below_half = mcb_from_radii([c.certified_correct_radius for c in certs])
    accuracy = 100.0 * sum(c.predicted == c.gold for c in certs) / len(certs)
    return RobustnessReport(mcb, accuracy, certs, below_half, alpha, m, n)
