"""Greedy black-box attacks and the transfer adversarial evaluation harness.

Both attacks only ever see a victim callable mapping a Text to
(predicted class, logit vector).  Position importance is measured by
replacing a token with the mask sentinel and recording the drop in the
gold-class score.  Edits never change the number of tokens, so the
perturbation size is always the Hamming distance to the original.
"""
from __future__ import annotations

import string
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Protocol, Sequence

from .classifier import LogitVector
from .errors import EmptyDataset
from .streams import rng_stream
from .text import MASK, Text, hamming_diff

Victim = Callable[[Text], "tuple[int, LogitVector]"]

LETTERS = string.ascii_lowercase


class SynonymTable(Mapping[str, tuple[str, ...]]):
    """token -> ordered, deduplicated candidates, never containing the token itself."""

    def __init__(self, table: Mapping[str, Iterable[str]] | None = None):
        self._table: dict[str, tuple[str, ...]] = {}
        for tok, cands in (table or {}).items():
            clean = tuple(dict.fromkeys(c for c in cands if c and c != tok))
            if clean:
                self._table[tok] = clean

    def __getitem__(self, tok: str) -> tuple[str, ...]:
        return self._table[tok]

    def __iter__(self):
        return iter(self._table)

    def __len__(self) -> int:
        return len(self._table)

    def candidates(self, tok: str, limit: int | None = None) -> tuple[str, ...]:
        cands = self._table.get(tok, ())
        return cands if limit is None else cands[:limit]

    @classmethod
    def from_tsv(cls, path: str | Path) -> "SynonymTable":
        """Read ``token<TAB>cand1,cand2,...`` lines; blank lines and ``#`` comments skipped."""
        table: dict[str, list[str]] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line.strip() or line.startswith("#"):
                    continue
                tok, sep, rest = line.partition("\t")
                if not sep or not tok:
                    raise ValueError(f"{path}:{lineno}: expected token<TAB>comma-list")
                table.setdefault(tok, []).extend(c.strip() for c in rest.split(","))
        return cls(table)

    def to_tsv(self) -> str:
        return "".join(f"{tok}\t{','.join(c)}\n" for tok, c in sorted(self._table.items()))


@dataclass(frozen=True)
class AttackResult:
    original: Text
    adversarial: Text
    success: bool
    queries: int
    perturbed: frozenset[int] = frozenset()
    skipped: bool = False

    @property
    def d(self) -> int:
        return len(self.perturbed)


class _BudgetExhausted(Exception):
    pass


class _CountingVictim:
    def __init__(self, victim: Victim, budget: int):
        self.victim = victim
        self.budget = budget
        self.queries = 0

    def __call__(self, x: Text) -> tuple[int, LogitVector]:
        if self.queries >= self.budget:
            raise _BudgetExhausted
        self.queries += 1
        return self.victim(x)


def _rank_positions(x: Text, gold: int, query: _CountingVictim, base: float) -> list[int]:
    drops = []
    for i in range(1, len(x) + 1):
        _, scores = query(x.replace(i, MASK))
        drops.append((base - scores[gold - 1], i))
    return [i for _, i in sorted(drops, key=lambda t: (-t[0], t[1]))]


def _greedy(
    x: Text, gold: int, victim: Victim, query_budget: int,
    candidates: Callable[[int, str], Sequence[str]],
) -> AttackResult:
    if query_budget <= 0:
        return AttackResult(x, x, False, 0)
    query = _CountingVictim(victim, query_budget)
    current, success = x, False
    try:
        pred, scores = query(x)
        if pred != gold:
            return AttackResult(x, x, True, query.queries, skipped=True)
        current_score = scores[gold - 1]
        for pos in _rank_positions(x, gold, query, current_score):
            best_score, best_text = current_score, None
            for cand in candidates(pos, x[pos - 1]):
                trial = current.replace(pos, cand)
                p, s = query(trial)
                if p != gold:
                    current, success = trial, True
                    break
                if s[gold - 1] < best_score:
                    best_score, best_text = s[gold - 1], trial
            if success:
                break
            if best_text is not None:
                current, current_score = best_text, best_score
    except _BudgetExhausted:
        pass
    return AttackResult(x, current, success, query.queries, hamming_diff(x, current))


def word_attack(
    x: Text, gold: int, victim: Victim, syn: SynonymTable, k_syn: int = 50, query_budget: int = 1000
) -> AttackResult:
    """Greedy synonym substitution in order of position importance."""
    return _greedy(x, gold, victim, query_budget, lambda pos, tok: syn.candidates(tok, k_syn))


def char_edits(token: str, n_edits: int, rng) -> list[str]:
    """Up to ``n_edits`` distinct single-character edits of ``token``.

    Operations cycle through adjacent swap, letter substitution, deletion and
    insertion; those that cannot apply to the token (swapping or deleting in a
    one-character token) are skipped.
    """
    ops = []
    if len(token) >= 2:
        ops.append("swap")
    ops.append("sub")
    if len(token) >= 2:
        ops.append("del")
    ops.append("ins")
    out: list[str] = []
    attempts = 0
    while len(out) < n_edits and attempts < 20 * max(n_edits, 1):
        op = ops[attempts % len(ops)]
        attempts += 1
        if op == "swap":
            i = rng.randrange(len(token) - 1)
            cand = token[:i] + token[i + 1] + token[i] + token[i + 2:]
        elif op == "sub":
            i = rng.randrange(len(token))
            cand = token[:i] + rng.choice(LETTERS) + token[i + 1:]
        elif op == "del":
            i = rng.randrange(len(token))
            cand = token[:i] + token[i + 1:]
        else:
            i = rng.randrange(len(token) + 1)
            cand = token[:i] + rng.choice(LETTERS) + token[i:]
        if cand != token and cand != MASK and cand not in out:
            out.append(cand)
    return out


def char_attack(
    x: Text, gold: int, victim: Victim, ops_per_token: int = 4, query_budget: int = 1000, seed: int = 0
) -> AttackResult:
    """Greedy character-level edits inside the most important tokens.

    Each chosen token gets ``ops_per_token`` candidate edits drawn from the
    stream (seed, "char-edit", position); the edit lowering the gold score most
    is kept, so every edited token counts as one perturbed position.
    """
    def cands(pos: int, tok: str) -> list[str]:
        return char_edits(tok, ops_per_token, rng_stream(seed, "char-edit", pos))

    return _greedy(x, gold, victim, query_budget, cands)


class Attack(Protocol):
    name: str

    def run(self, x: Text, gold: int, victim: Victim, index: int) -> AttackResult: ...


@dataclass(frozen=True)
class WordAttack:
    synonyms: SynonymTable
    k_syn: int = 50
    query_budget: int = 1000

    @property
    def name(self) -> str:
        return f"word(k={self.k_syn})"

    def run(self, x: Text, gold: int, victim: Victim, index: int) -> AttackResult:
        return word_attack(x, gold, victim, self.synonyms, self.k_syn, self.query_budget)


@dataclass(frozen=True)
class CharAttack:
    ops_per_token: int = 4
    query_budget: int = 1000
    seed: int = 0

    name = "char"

    def run(self, x: Text, gold: int, victim: Victim, index: int) -> AttackResult:
        seed = rng_stream(self.seed, "char-attack", index).getrandbits(63)
        return char_attack(x, gold, victim, self.ops_per_token, self.query_budget, seed)


class Defense(Protocol):
    name: str

    def classify(self, x: Text, key: Sequence[int] = ()) -> tuple[int, LogitVector]: ...


@dataclass(frozen=True)
class InputRecord:
    id: int
    gold: int
    clean_correct: bool
    result: AttackResult | None

    def record(self) -> dict:
        r = self.result
        return {
            "id": self.id,
            "gold": self.gold,
            "clean_correct": self.clean_correct,
            "success": True if r is None else r.success,
            "d": 0 if r is None else r.d,
            "queries": 0 if r is None else r.queries,
            "original": None if r is None else str(r.original),
            "adversarial": None if r is None else str(r.adversarial),
        }


@dataclass(frozen=True)
class TAEMetrics:
    clean_accuracy: float
    robust_accuracy: float
    avg_queries: float
    avg_d: float
    records: tuple[InputRecord, ...] = field(repr=False)

    def summary(self) -> dict:
        return {
            "cln": self.clean_accuracy, "boa": self.robust_accuracy,
            "avg_queries": self.avg_queries, "avg_d": self.avg_d, "n": len(self.records),
        }


def _victim_for(defense: Defense, index: int) -> Victim:
    # every query gets its own key so a stochastic defense redraws its ensemble
    counter = iter(range(1, 1 << 62))
    return lambda x: defense.classify(x, (index, next(counter)))


def evaluate_tae(
    dataset: Sequence[tuple[Text, int]], defense: Defense, attack: Attack, workers: int = 1
) -> TAEMetrics:
    """Attack ``defense`` itself on every input and report Cln% / Boa%.

    Inputs misclassified before the attack count against robust accuracy.
    """
    if not dataset:
        raise EmptyDataset("cannot evaluate on an empty dataset")

    def run(i: int) -> InputRecord:
        x, gold = dataset[i]
        pred, _ = defense.classify(x, (i, 0))
        if pred != gold:
            return InputRecord(i, gold, False, None)
        return InputRecord(i, gold, True, attack.run(x, gold, _victim_for(defense, i), i))

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            records = tuple(pool.map(run, range(len(dataset))))
    else:
        records = tuple(run(i) for i in range(len(dataset)))

    n = len(records)
    attacked = [r.result for r in records if r.result is not None]
    robust = sum(1 for r in attacked if not r.success)
    flipped = [r for r in attacked if r.success and not r.skipped]
    return TAEMetrics(
        clean_accuracy=100.0 * sum(r.clean_correct for r in records) / n,
        robust_accuracy=100.0 * robust / n,
        avg_queries=sum(r.queries for r in attacked) / len(attacked) if attacked else 0.0,
        avg_d=sum(r.d for r in flipped) / len(flipped) if flipped else 0.0,
        records=records,
    )
