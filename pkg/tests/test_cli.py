import io
import json
import shutil

import pytest

from fallacy_eval.cli import build_parser, run
from fallacy_eval.fixtures import GenConfig, generate
from fallacy_eval.formats import write_corpus_records

from conftest import DATA


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), out=out)
    return code, out.getvalue()


@pytest.fixture
def corpus_file(tmp_path):
    path = tmp_path / "gold.jsonl"
    c = generate(GenConfig(posts=40, jitter=1.5, confusion=0.3, drop=0.1, insert=0.1, seed=3))
    path.write_text(write_corpus_records(c), encoding="utf-8")
    return path


@pytest.fixture
def pred_file(tmp_path, corpus_file):
    path = tmp_path / "pred.jsonl"
    with open(corpus_file, encoding="utf-8") as src, open(path, "w", encoding="utf-8") as dst:
        for line in src:
            rec = json.loads(line)
            dst.write(json.dumps({"id": rec["id"], "spans": rec["views"]["A2"]}) + "\n")
    return path


def test_score_json_shape(corpus_file, pred_file):
    code, out = call("score", "--gold", str(corpus_file), "--pred", str(pred_file),
                     "--task", "span-f", "--mode", "soft")
    assert code == 0
    rep = json.loads(out)
    assert set(rep["per_view"]) == {"A1", "A2"}
    assert rep["per_view"]["A2"] == {"precision": 1.0, "recall": 1.0, "f1": 1.0}
    assert set(rep["aggregate"]) == {"precision", "recall", "f1"}
    assert rep["config"]["mode"] == "soft" and rep["config"]["cap_per_span"] is False


def test_score_soft_coarse_is_usage_error(capsys):
    with pytest.raises(SystemExit) as err:
        run(["score", "--gold", "nope", "--pred", "nope", "--task", "span-c", "--mode", "soft"])
    assert err.value.code == 2
    assert "span-f" in capsys.readouterr().err


def test_score_tsv_and_folds(tmp_path, corpus_file, pred_file):
    folds = tmp_path / "folds"
    assert call("split", str(corpus_file), "--k", "5", "--seed", "1", "--out", str(folds))[0] == 0
    code, out = call("score", "--gold", str(corpus_file), "--pred", str(pred_file),
                     "--task", "post-c", "--folds", str(folds), "--report", "tsv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "fold\tview\tprecision\trecall\tf1"
    assert lines[-2].startswith("mean\taggregate") and lines[-1].startswith("std\taggregate")
    assert len(lines) == 1 + 5 * 3 + 2


def test_score_missing_prediction(tmp_path, corpus_file, capsys):
    pred = tmp_path / "p.jsonl"
    pred.write_text('{"id": "p00000", "spans": []}\n', encoding="utf-8")
    code, _ = call("score", "--gold", str(corpus_file), "--pred", str(pred), "--task", "span-f")
    assert code == 1
    assert "missing" in capsys.readouterr().err


def test_score_figure(tmp_path, corpus_file, pred_file):
    fig = tmp_path / "scores.png"
    code, _ = call("score", "--gold", str(corpus_file), "--pred", str(pred_file),
                   "--task", "span-c", "--figure", str(fig))
    assert code == 0 and fig.stat().st_size > 0


def test_reports_are_byte_identical(corpus_file, pred_file):
    args = ("score", "--gold", str(corpus_file), "--pred", str(pred_file), "--task", "span-f")
    assert call(*args) == call(*args)
    assert call("agree", str(corpus_file), "--resamples", "3") == \
        call("agree", str(corpus_file), "--resamples", "3")


def test_validate_bad_file(capsys):
    code, out = call("validate", str(DATA / "bad.jsonl"))
    assert code == 1
    kinds = {v["kind"] for v in json.loads(out)["violations"]}
    assert kinds == {"OUT_OF_RANGE", "SAME_LABEL_OVERLAP", "VIEW_MISMATCH", "UNKNOWN_LABEL"}
    err = capsys.readouterr().err
    assert "bad.jsonl" in err and "post range" in err


def test_validate_good_file():
    code, out = call("validate", str(DATA / "two_views.conll"), "--report", "tsv")
    assert code == 0 and out == "post_id\tkind\tmessage\n"


def test_malformed_file_names_line(tmp_path, capsys):
    bad = tmp_path / "x.conll"
    bad.write_text("# post_id = q\n# views = A1\n1\ta\tO\n2\tb\tI-LL\n\n", encoding="utf-8")
    assert call("stats", str(bad))[0] == 1
    err = capsys.readouterr().err
    assert "x.conll" in err and "line 4" in err and "post q" in err


def test_convert_round_trip(tmp_path):
    conll = tmp_path / "c.conll"
    assert call("convert", str(DATA / "two_views.jsonl"), "--to", "conll", "-o", str(conll))[0] == 0
    assert conll.read_bytes() == (DATA / "two_views.conll").read_bytes()
    code, out = call("convert", str(conll), "--to", "records")
    assert code == 0
    back = call("convert", str(DATA / "two_views.jsonl"), "--to", "records")[1]
    assert json.loads(out.splitlines()[1]) == json.loads(back.splitlines()[1])


def test_stats_and_figure(tmp_path, corpus_file):
    fig = tmp_path / "counts.png"
    code, out = call("stats", str(corpus_file), "--figure", str(fig))
    rep = json.loads(out)
    assert code == 0 and rep["combined"]["posts"] == 40 and fig.exists()
    code, out = call("stats", str(corpus_file), "--view", "A1", "--report", "tsv")
    assert code == 0 and out.startswith("views\tlabel\tspans")
    assert call("stats", str(corpus_file), "--view", "ZZ")[0] == 1


def test_overlaps_tsv_and_heatmap(tmp_path, corpus_file):
    fig = tmp_path / "heat.png"
    code, out = call("overlaps", str(corpus_file), "--figure", str(fig))
    lines = out.splitlines()
    assert code == 0 and len(lines) == 21 and lines[0].split("\t")[0] == "label"
    assert fig.stat().st_size > 0
    code, out = call("overlaps", str(corpus_file), "--granularity", "coarse", "--view", "A1")
    assert code == 0 and out.splitlines()[0] == "label\tINS\tSIM\tDIS"


def test_tokens_informative(tmp_path):
    stop = tmp_path / "stop.txt"
    stop.write_text("che\n", encoding="utf-8")
    code, out = call("tokens-informative", str(DATA / "two_views.jsonl"), "--label", "LL",
                     "--k", "3", "--stopwords", str(stop))
    assert code == 0
    rep = json.loads(out)
    # "che" is a stopword, leaving "vergogna" as the only LL token
    assert rep["label"] == "LL" and [t["token"] for t in rep["tokens"]] == ["vergogna"]
    with pytest.raises(SystemExit) as err:
        run(["tokens-informative", "x", "--label", "QQ", "--stopwords", "s"])
    assert err.value.code == 2


def test_split_outputs(tmp_path, corpus_file):
    out_dir = tmp_path / "s"
    code, out = call("split", str(corpus_file), "--k", "4", "--seed", "9", "--stratify", "topic",
                     "--out", str(out_dir))
    assert code == 0
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["k"] == 4 and manifest["stratify"] == "topic"
    assert sorted(p.name for p in out_dir.iterdir())[:3] == [
        "fold1.dev.ids", "fold1.test.ids", "fold1.train.ids"]


def test_agree(corpus_file):
    code, out = call("agree", str(corpus_file), "--views", "A1,A2", "--resamples", "4",
                     "--seed", "2", "--alpha", "1", "--beta", "0.5")
    rep = json.loads(out)
    assert code == 0 and -1 < rep["gamma"] < 1
    assert rep["config"] == {"alpha": 1.0, "beta": 0.5, "delta_empty": 1.0, "resamples": 4, "seed": 2}
    assert rep["gamma_cat_method"] == "aligned-categorical"
    with pytest.raises(SystemExit):
        run(["agree", str(corpus_file), "--views", "A1"])
    with pytest.raises(SystemExit):
        run(["agree", str(corpus_file), "--resamples", "0"])


def test_generate(tmp_path):
    cfg = tmp_path / "gen.json"
    cfg.write_text(json.dumps({"posts": 4, "jitter": 1.0, "seed": 5}), encoding="utf-8")
    code, out = call("generate", "--config", str(cfg))
    assert code == 0 and len(out.splitlines()) == 4
    assert call("generate", "--config", str(cfg)) == (code, out)
    code, out = call("generate", "--config", str(cfg), "--format", "conll")
    assert out.startswith("# post_id = p00000")
    cfg.write_text('{"posts": 4, "drop": 2}', encoding="utf-8")
    assert call("generate", "--config", str(cfg))[0] == 1


def test_every_subcommand_help_lists_flags(capsys):
    parser = build_parser()
    sub = next(a for a in parser._actions if a.__class__.__name__ == "_SubParsersAction")
    for name, p in sub.choices.items():
        text = p.format_help()
        for action in p._actions:
            for opt in action.option_strings:
                assert opt in text, (name, opt)
            if action.default not in (None, False, "==SUPPRESS==") and action.option_strings \
                    and action.help:
                assert "default" in text, (name, action.option_strings)


def test_missing_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as err:
        run([])
    assert err.value.code == 2


def test_module_entry_point():
    import subprocess
    import sys
    res = subprocess.run([sys.executable, "-m", "fallacy_eval.cli", "validate",
                          str(DATA / "two_views.jsonl")], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["valid"] is True
    exe = shutil.which("fallacy-eval")
    if exe:
        assert subprocess.run([exe, "--help"], capture_output=True).returncode == 0
