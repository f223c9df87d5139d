"""Command-line entry point: ``maskpure <command> [options]``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .attacks import CharAttack, SynonymTable, WordAttack, evaluate_tae
from .certify import DEFAULT_ALPHA, median_certified_robustness
from .classifier import train_classifier
from .errors import MaskPureError
from .filler import train_filler
from .io import FORMATS, dumps, ingest_corpus, load_classifier, load_filler, save_model, write_jsonl
from .smoothing import ALIASES, MaskPureDefense, PlainDefense, PurifyConfig, purify_ensemble, vote
from .text import tokenize
from .toy import bundled_path, write_toy_benchmark

log = logging.getLogger("maskpure")

VOTING_CHOICES = tuple(ALIASES)


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {s}")
    return v


def _rate(s: str) -> float:
    v = float(s)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {s}")
    return v


def _alpha(s: str) -> float:
    v = float(s)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {s}")
    return v


def _add_smoothing(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mask-rate", type=_rate, default=0.3)
    p.add_argument("--votes", type=_positive_int, default=11)
    p.add_argument("--voting", choices=VOTING_CHOICES, default="naive-max")
    p.add_argument("--seed", type=int, default=0)


def _add_models(p: argparse.ArgumentParser, filler_required: bool = True) -> None:
    p.add_argument("--filler", required=filler_required, help="filler model JSON")
    p.add_argument("--classifier", required=True, help="classifier model JSON")


def _add_data(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--data", required=required)
    p.add_argument("--format", choices=FORMATS)


def _add_attack(p: argparse.ArgumentParser) -> None:
    p.add_argument("--synonyms", help="synonym TSV (token<TAB>comma-list)")
    p.add_argument("--k-syn", type=_positive_int, default=50)
    p.add_argument("--ops-per-token", type=_positive_int, default=4)
    p.add_argument("--query-budget", type=int, default=1000)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maskpure", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train-filler", help="count n-gram statistics for the mask filler")
    _add_data(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("train-classifier", help="fit the naive Bayes classifier")
    _add_data(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("classify", help="classify text, defended if --filler is given")
    _add_models(p, filler_required=False)
    _add_smoothing(p)
    p.add_argument("--text", required=True)

    p = sub.add_parser("purify", help="show the purified copies of one text")
    _add_models(p)
    _add_smoothing(p)
    p.add_argument("--text", required=True)

    p = sub.add_parser("attack", help="attack a defense and write per-input results")
    _add_models(p, filler_required=False)
    _add_data(p)
    _add_smoothing(p)
    _add_attack(p)
    p.add_argument("--attack", choices=("word", "char"), default="word")
    p.add_argument("--defense", choices=("none", "maskpure"), default="maskpure")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("certify", help="certified radii and median certified robustness")
    _add_models(p)
    _add_data(p)
    p.add_argument("--mask-rate", type=_rate, default=0.3)
    p.add_argument("--alpha", type=_alpha, default=DEFAULT_ALPHA)
    p.add_argument("--trials", type=_positive_int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("bench", help="clean vs under-attack accuracy for each defense")
    p.add_argument("--train", help="training corpus (default: bundled toy task)")
    p.add_argument("--test", help="evaluation corpus (default: bundled toy task)")
    p.add_argument("--format", choices=FORMATS)
    _add_smoothing(p)
    _add_attack(p)
    p.add_argument("--k-syn-list", default="12,50", help="comma-separated synonym list sizes")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("make-toy", help="write the synthetic toy benchmark files")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    return parser


def _config(args: argparse.Namespace) -> dict:
    # neither the worker count nor the output path changes results, so both are
    # kept out of the embedded config
    return {k: v for k, v in vars(args).items() if k not in ("workers", "verbose", "out")}


def _purify_cfg(args) -> PurifyConfig:
    return PurifyConfig(args.mask_rate, args.votes, args.voting, args.seed)


def _cmd_train_filler(args) -> int:
    corpus = ingest_corpus(args.data, args.format)
    model = train_filler(t for t, _ in corpus)
    save_model(model, args.out, _config(args))
    print(f"filler: {len(model.vocab)} tokens from {len(corpus)} texts -> {args.out}")
    return 0


def _cmd_train_classifier(args) -> int:
    corpus = ingest_corpus(args.data, args.format)
    model = train_classifier(corpus)
    save_model(model, args.out, _config(args))
    print(f"classifier: {model.n_classes} classes, {len(model.log_likelihoods)} features -> {args.out}")
    return 0


def _cmd_classify(args) -> int:
    clf = load_classifier(args.classifier)
    x = tokenize(args.text)
    if args.filler:
        defense = MaskPureDefense(load_filler(args.filler), clf, _purify_cfg(args))
    else:
        defense = PlainDefense(clf)
    cls, scores = defense.classify(x)
    print(dumps({"class": cls, "logits": list(scores), "defense": defense.name, "config": _config(args)}))
    return 0


def _cmd_purify(args) -> int:
    clf = load_classifier(args.classifier)
    cfg = _purify_cfg(args)
    ens = purify_ensemble(tokenize(args.text), cfg, load_filler(args.filler), clf)
    for i, copy in enumerate(ens.copies, 1):
        print(dumps({
            "copy": i, "keep": sorted(copy.plan.keep_set), "masked": str(copy.masked),
            "filled": str(copy.filled), "logits": list(copy.logits),
        }))
    combined = vote(ens.logit_vectors, cfg.voting)
    print(dumps({"vote": list(combined), "voting": cfg.voting, "config": _config(args)}))
    return 0


def _make_attack(args):
    if args.attack == "char":
        return CharAttack(args.ops_per_token, args.query_budget, args.seed)
    return WordAttack(SynonymTable.from_tsv(args.synonyms), args.k_syn, args.query_budget)


def _cmd_attack(args) -> int:
    data = ingest_corpus(args.data, args.format)
    attack = _make_attack(args)
    clf = load_classifier(args.classifier)
    if args.defense == "maskpure":
        defense = MaskPureDefense(load_filler(args.filler), clf, _purify_cfg(args))
    else:
        defense = PlainDefense(clf)
    metrics = evaluate_tae(data, defense, attack, args.workers)
    summary = {"summary": metrics.summary(), "attack": attack.name, "defense": defense.name, "config": _config(args)}
    write_jsonl(args.out, [r.record() for r in metrics.records] + [summary])
    print(f"{defense.name} vs {attack.name}: Cln% {metrics.clean_accuracy:.1f}  Boa% {metrics.robust_accuracy:.1f}"
          f"  avg queries {metrics.avg_queries:.1f}  avg d {metrics.avg_d:.2f}")
    return 0


def _cmd_certify(args) -> int:
    data = ingest_corpus(args.data, args.format)
    report = median_certified_robustness(
        data, args.trials, args.alpha, args.mask_rate, load_filler(args.filler), load_classifier(args.classifier),
        args.seed, args.workers,
    )
    summary = {"summary": report.summary(), "config": _config(args)}
    write_jsonl(args.out, [c.record() for c in report.certificates] + [summary])
    flag = "  (no more than half classified correctly)" if report.below_half else ""
    print(f"m={args.mask_rate}  Acc% {report.accuracy:.1f}  MCB {report.mcb}{flag}")
    return 0


def run_bench(args) -> dict:
    train = ingest_corpus(args.train or bundled_path("toy_train.jsonl"), args.format)
    test = ingest_corpus(args.test or bundled_path("toy_test.jsonl"), args.format)
    syn = SynonymTable.from_tsv(args.synonyms or bundled_path("toy_synonyms.tsv"))
    filler = train_filler(t for t, _ in train)
    clf = train_classifier(train)

    attacks = [CharAttack(args.ops_per_token, args.query_budget, args.seed)]
    attacks += [WordAttack(syn, int(k), args.query_budget) for k in args.k_syn_list.split(",") if k.strip()]
    defenses = [PlainDefense(clf)] + [
        MaskPureDefense(filler, clf, PurifyConfig(args.mask_rate, args.votes, v, args.seed))
        for v in ("avg", "majority", "naive-max")
    ]
    rows = []
    for defense in defenses:
        cells = {}
        for attack in attacks:
            log.info("bench: %s vs %s", defense.name, attack.name)
            cells[attack.name] = evaluate_tae(test, defense, attack, args.workers).summary()
        rows.append({"defense": defense.name, "results": cells})

    chosen = PurifyConfig(args.mask_rate, args.votes, args.voting, args.seed).voting
    undefended = rows[0]["results"]
    margins = {}
    for row in rows[1:]:
        margins[row["defense"]] = {
            a: row["results"][a]["boa"] - undefended[a]["boa"] for a in undefended
        }
    return {
        "config": _config(args),
        "rows": rows,
        "boa_margin_over_undefended": margins,
        "defended_not_worse": all(m >= 0 for m in margins[chosen].values()),
        "selected_voting": chosen,
    }


def format_bench(report: dict) -> str:
    attacks = list(report["rows"][0]["results"])
    head = f"{'Defense':<22}" + "".join(f"{a:>22}" for a in attacks)
    sub = f"{'':<22}" + "".join(f"{'Cln%':>11}{'Boa%':>11}" for _ in attacks)
    lines = [head, sub]
    for row in report["rows"]:
        cells = "".join(f"{row['results'][a]['cln']:>11.1f}{row['results'][a]['boa']:>11.1f}" for a in attacks)
        lines.append(f"{row['defense']:<22}{cells}")
    return "\n".join(lines)


def _cmd_bench(args) -> int:
    report = run_bench(args)
    Path(args.out).write_text(dumps(report, indent=1), encoding="utf-8")
    print(format_bench(report))
    if not report["defended_not_worse"]:
        print(f"note: {report['selected_voting']} did not match the undefended Boa% on every attack")
    return 0


def _cmd_make_toy(args) -> int:
    write_toy_benchmark(args.out, args.seed)
    print(f"toy benchmark written to {args.out}")
    return 0


COMMANDS = {
    "train-filler": _cmd_train_filler,
    "train-classifier": _cmd_train_classifier,
    "classify": _cmd_classify,
    "purify": _cmd_purify,
    "attack": _cmd_attack,
    "certify": _cmd_certify,
    "bench": _cmd_bench,
    "make-toy": _cmd_make_toy,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "attack":
        if args.attack == "word" and not args.synonyms:
            parser.error("--synonyms is required for the word attack")
        if args.defense == "maskpure" and not args.filler:
            parser.error("--filler is required for --defense maskpure")
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except (MaskPureError, OSError, ValueError) as e:
        print(f"maskpure {args.command}: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
