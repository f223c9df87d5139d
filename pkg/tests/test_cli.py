import json

import pytest

from maskpure.cli import main
from maskpure.toy import bundled_path


@pytest.fixture(scope="module")
def models(tmp_path_factory):
    d = tmp_path_factory.mktemp("models")
    data = str(bundled_path("toy_train.jsonl"))
    assert main(["train-filler", "--data", data, "--out", str(d / "filler.json")]) == 0
    assert main(["train-classifier", "--data", data, "--out", str(d / "clf.json")]) == 0
    return d


def test_train_writes_models_with_config(models):
    clf = json.loads((models / "clf.json").read_text())
    assert clf["n_classes"] == 2
    assert clf["config"]["command"] == "train-classifier"
    assert "out" not in clf["config"]


def test_classify_undefended_and_defended(models, capsys):
    assert main(["classify", "--classifier", str(models / "clf.json"), "--text", "the team won the cup ."]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["class"] == 1 and len(out["logits"]) == 2 and out["defense"] == "none"
    assert main(["classify", "--classifier", str(models / "clf.json"), "--filler", str(models / "filler.json"),
                 "--voting", "majority", "--votes", "5", "--text", "the bank cut rates ."]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["class"] == 2 and out["defense"] == "majority-vote-logit"
    assert sum(out["logits"]) == pytest.approx(1.0)


def test_purify_prints_copies(models, capsys):
    assert main(["purify", "--classifier", str(models / "clf.json"), "--filler", str(models / "filler.json"),
                 "--votes", "3", "--text", "the team won the cup ."]) == 0
    lines = [json.loads(s) for s in capsys.readouterr().out.splitlines()]
    assert [r["copy"] for r in lines[:3]] == [1, 2, 3]
    assert all(r["masked"].count("[MASK]") == 2 for r in lines[:3])
    assert lines[3]["voting"] == "naive-max-logit"


def test_certify(models, tmp_path, capsys):
    out = tmp_path / "cert.jsonl"
    assert main(["certify", "--classifier", str(models / "clf.json"), "--filler", str(models / "filler.json"),
                 "--data", str(bundled_path("toy_test.jsonl")), "--trials", "50", "--mask-rate", "0.7",
                 "--out", str(out)]) == 0
    rows = [json.loads(s) for s in out.read_text().splitlines()]
    assert len(rows) == 51
    assert set(rows[-1]["summary"]) == {"mcb", "accuracy", "alpha", "m", "n", "below_half"}
    assert "MCB" in capsys.readouterr().out


def test_certify_zero_trials_is_usage_error(models, tmp_path):
    out = tmp_path / "cert.jsonl"
    with pytest.raises(SystemExit) as err:
        main(["certify", "--classifier", str(models / "clf.json"), "--filler", str(models / "filler.json"),
              "--data", str(bundled_path("toy_test.jsonl")), "--trials", "0", "--out", str(out)])
    assert err.value.code == 2
    assert not out.exists()


def test_attack_cross_checks(models, tmp_path):
    base = ["attack", "--classifier", str(models / "clf.json"), "--data", str(bundled_path("toy_test.jsonl")),
            "--out", str(tmp_path / "a.jsonl")]
    with pytest.raises(SystemExit) as err:
        main(base + ["--attack", "word", "--defense", "none"])
    assert err.value.code == 2
    with pytest.raises(SystemExit):
        main(base + ["--attack", "char", "--defense", "maskpure"])


def test_attack_writes_records(models, tmp_path, capsys):
    out = tmp_path / "a.jsonl"
    assert main(["attack", "--classifier", str(models / "clf.json"), "--data", str(bundled_path("toy_test.jsonl")),
                 "--synonyms", str(bundled_path("toy_synonyms.tsv")), "--defense", "none", "--out", str(out)]) == 0
    rows = [json.loads(s) for s in out.read_text().splitlines()]
    assert len(rows) == 51 and rows[-1]["defense"] == "none"
    assert rows[-1]["summary"]["boa"] <= rows[-1]["summary"]["cln"]
    assert "Boa%" in capsys.readouterr().out


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as err:
        main(["frobnicate"])
    assert err.value.code != 0


def test_missing_file_exits_one(models, tmp_path, capsys):
    code = main(["train-filler", "--data", str(tmp_path / "nope.jsonl"), "--out", str(tmp_path / "f.json")])
    assert code == 1
    assert "error" in capsys.readouterr().err


def test_bench_smoke(tmp_path, capsys):
    out = tmp_path / "bench.json"
    assert main(["bench", "--votes", "3", "--k-syn-list", "12", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert [r["defense"] for r in report["rows"]] == [
        "none", "averaged-logit", "majority-vote-logit", "naive-max-logit"]
    assert set(report["rows"][0]["results"]) == {"char", "word(k=12)"}
    assert "Defense" in capsys.readouterr().out


def test_make_toy(tmp_path):
    assert main(["make-toy", "--out", str(tmp_path / "toy")]) == 0
    assert (tmp_path / "toy" / "toy_test.jsonl").read_bytes() == bundled_path("toy_test.jsonl").read_bytes()
