"""A small synthetic news-topic task (1 = sports, 2 = business).

The bundled benchmark files under ``maskpure/data`` were written by
:func:`write_toy_benchmark` with the default seed; ``generate_toy_task``
regenerates them byte for byte.
"""
from __future__ import annotations

import json
import random
from importlib import resources
from pathlib import Path

from .attacks import SynonymTable
from .text import Text, tokenize

SPORTS, BUSINESS = 1, 2

_VOCAB = {
    SPORTS: {
        "subj": ["the team", "the club", "the striker", "the coach", "the champions", "the rookie", "the keeper"],
        "verb": ["won", "lost", "scored in", "clinched", "dominated", "played", "tied"],
        "obj": ["the match", "the game", "the final", "the title", "the cup", "the derby", "the semifinal"],
        "tail": ["on sunday", "at home", "in overtime", "after a penalty", "before the fans", "this season",
                 "on the road"],
    },
    BUSINESS: {
        "subj": ["the company", "the bank", "the firm", "investors", "the retailer", "the insurer", "the lender"],
        "verb": ["reported", "raised", "cut", "posted", "lost", "boosted", "missed"],
        "obj": ["profits", "the forecast", "prices", "earnings", "sales", "the dividend", "revenue"],
        "tail": ["on monday", "in the quarter", "after the merger", "this year", "on wall street",
                 "for the quarter", "amid inflation"],
    },
}

_SYNONYMS = {
    "team": ["side", "squad", "group", "firm"], "club": ["outfit", "side", "company", "group"],
    "striker": ["forward", "player", "scorer"], "coach": ["manager", "boss", "trainer"],
    "champions": ["winners", "holders", "leaders"], "rookie": ["newcomer", "novice", "recruit"],
    "keeper": ["goalie", "guard", "holder"],
    "won": ["secured", "earned", "gained", "took"], "scored": ["netted", "posted", "notched"],
    "clinched": ["secured", "sealed", "grabbed"], "dominated": ["controlled", "led", "ruled"],
    "played": ["contested", "staged", "fought"], "tied": ["drew", "levelled", "matched"],
    "match": ["contest", "bout", "deal", "fixture"], "game": ["contest", "session", "fixture"],
    "final": ["decider", "showdown", "quarter"], "title": ["crown", "trophy", "prize"],
    "cup": ["trophy", "prize", "tournament"], "derby": ["rivalry", "clash", "showdown"],
    "semifinal": ["playoff", "eliminator", "knockout"],
    "sunday": ["saturday", "weekend", "monday"], "home": ["base", "house"], "overtime": ["extra", "injury"],
    "penalty": ["spot", "kick", "fine"], "fans": ["supporters", "crowd", "investors"],
    "season": ["year", "campaign", "term"], "road": ["trip", "away"],
    "company": ["corporation", "group", "club", "outfit"], "bank": ["lender", "institution", "group"],
    "firm": ["business", "group", "team", "outfit"], "investors": ["traders", "shareholders", "fans"],
    "retailer": ["merchant", "seller", "chain"], "insurer": ["underwriter", "carrier", "group"],
    "lender": ["creditor", "bank", "financier"],
    "reported": ["announced", "disclosed", "revealed"], "raised": ["lifted", "increased", "hiked"],
    "cut": ["slashed", "reduced", "trimmed"], "posted": ["recorded", "logged", "scored"],
    "boosted": ["lifted", "increased", "improved"], "missed": ["fell", "trailed", "lost"],
    "profits": ["gains", "returns", "points"], "forecast": ["outlook", "guidance", "projection"],
    "prices": ["costs", "rates", "fees"], "earnings": ["income", "results", "gains"],
    "sales": ["turnover", "receipts", "takings"], "dividend": ["payout", "bonus", "yield"],
    "revenue": ["income", "takings", "turnover"],
    "monday": ["tuesday", "weekday", "sunday"], "quarter": ["period", "term", "final"],
    "merger": ["deal", "takeover", "tie-up"], "year": ["season", "annum", "term"],
    "wall": ["main"], "street": ["market", "exchange"], "inflation": ["rising", "pressure", "costs"],
}


def _sentence(rng: random.Random, label: int) -> str:
    parts = _VOCAB[label]
    words = [rng.choice(parts["subj"]), rng.choice(parts["verb"]), rng.choice(parts["obj"])]
    if rng.random() < 0.7:
        words.append(rng.choice(parts["tail"]))
    return " ".join(words) + " ."


def generate_toy_task(seed: int = 0, n_train: int = 400, n_test: int = 50):
    """Return (train, test, synonyms); train/test are lists of (raw text, label)."""
    rng = random.Random(seed)
    train = []
    for i in range(n_train):
        label = SPORTS if i % 2 == 0 else BUSINESS
        train.append((_sentence(rng, label), label))
    seen = {t for t, _ in train}
    test = []
    while len(test) < n_test:
        label = SPORTS if len(test) % 2 == 0 else BUSINESS
        s = _sentence(rng, label)
        if s not in seen:
            seen.add(s)
            test.append((s, label))
    return train, test, SynonymTable(_SYNONYMS)


def _jsonl(rows) -> str:
    return "".join(json.dumps({"text": t, "label": y}, sort_keys=True) + "\n" for t, y in rows)


def write_toy_benchmark(directory: str | Path, seed: int = 0) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    train, test, syn = generate_toy_task(seed)
    (directory / "toy_train.jsonl").write_text(_jsonl(train), encoding="utf-8")
    (directory / "toy_test.jsonl").write_text(_jsonl(test), encoding="utf-8")
    (directory / "toy_synonyms.tsv").write_text(syn.to_tsv(), encoding="utf-8")


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("maskpure") / "data" / name))


def load_bundled() -> tuple[list[tuple[Text, int]], list[tuple[Text, int]], SynonymTable]:
    """The bundled 50-sample benchmark: (train, test, synonym table)."""
    def rows(name):
        out = []
        for line in bundled_path(name).read_text(encoding="utf-8").splitlines():
            d = json.loads(line)
            out.append((tokenize(d["text"]), d["label"]))
        return out

    return rows("toy_train.jsonl"), rows("toy_test.jsonl"), SynonymTable.from_tsv(bundled_path("toy_synonyms.tsv"))
