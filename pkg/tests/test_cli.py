"""End-to-end exercises of the command-line interface."""

import json

import pytest
from click.testing import CliRunner

from adetag.cli import main
from adetag.corpus import load_corpus, write_corpus
from adetag.evaluation import load_predictions
from adetag.synthetic import generate_corpus


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def corpus_file(tmp_path):
    corpus = generate_corpus(60, seed=7)
    path = tmp_path / "corpus.jsonl"
    write_corpus(corpus, path)
    return path


def invoke(runner, args):
    result = runner.invoke(main, args, catch_exceptions=False)
    return result


class TestConvert:
    def test_jsonl_round_trip(self, runner, corpus_file, tmp_path):
        out = tmp_path / "out.jsonl"
        result = invoke(runner, ["convert", str(corpus_file), str(out)])
        assert result.exit_code == 0
        assert "60 samples" in result.output
        assert load_corpus(out, "jsonl").samples[0].text == load_corpus(corpus_file, "jsonl").samples[0].text

    def test_tsv_input(self, runner, tmp_path):
        tsv = tmp_path / "in.tsv"
        tsv.write_text(
            "id\tbegin\tend\ttype\textraction\ttext\n"
            "s1\t7\t12\tADR\tdizzy\tI felt dizzy today\n",
            encoding="utf-8",
        )
        out = tmp_path / "out.jsonl"
        result = invoke(runner, ["convert", str(tsv), str(out), "--format", "tsv"])
        assert result.exit_code == 0
        sample = load_corpus(out, "jsonl").samples[0]
        assert sample.text[sample.spans[0].start : sample.spans[0].end] == "dizzy"

    def test_manifest_written(self, runner, corpus_file, tmp_path):
        out = tmp_path / "out.jsonl"
        invoke(runner, ["convert", str(corpus_file), str(out)])
        manifest = json.loads((tmp_path / "out.jsonl.manifest.json").read_text())
        assert manifest["command"] == "convert"
        assert str(corpus_file) in manifest["input_digests"]
        assert manifest["duration_seconds"] >= 0

    def test_malformed_input_exits_1(self, runner, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text("{not json}\n", encoding="utf-8")
        result = runner.invoke(main, ["convert", str(bad), str(tmp_path / "o.jsonl")])
        assert result.exit_code == 1
        assert "error:" in result.output

    def test_missing_input_exits_2(self, runner, tmp_path):
        result = runner.invoke(main, ["convert", str(tmp_path / "nope.jsonl"), "o.jsonl"])
        assert result.exit_code == 2


class TestSplit:
    def test_sizes_and_determinism(self, runner, corpus_file, tmp_path):
        a, b = tmp_path / "train.jsonl", tmp_path / "val.jsonl"
        result = invoke(runner, ["split", str(corpus_file), str(a), str(b), "--ratio", "0.8", "--seed", "3"])
        assert result.exit_code == 0
        train, val = load_corpus(a, "jsonl"), load_corpus(b, "jsonl")
        assert len(train) + len(val) == 60
        assert all(s.split == "train" for s in train)
        first = a.read_bytes()
        invoke(runner, ["split", str(corpus_file), str(a), str(b), "--ratio", "0.8", "--seed", "3"])
        assert a.read_bytes() == first


class TestTrainPredictEvaluate:
    @pytest.fixture()
    def config_file(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text(
            "train:\n  epochs: 6\n  learning_rate: 0.005\n  batch_size: 16\n"
            "  d_model: 16\n  n_heads: 2\n  ff_dim: 32\n  max_len: 48\n",
            encoding="utf-8",
        )
        return path

    def test_full_pipeline(self, runner, tmp_path, config_file):
        train_path = tmp_path / "train.jsonl"
        write_corpus(generate_corpus(120, seed=11).with_split("train"), train_path)
        test_path = tmp_path / "test.jsonl"
        write_corpus(generate_corpus(30, seed=12, prefix="te"), test_path)
        model_dir = tmp_path / "model"

        result = invoke(runner, ["train", str(train_path), "--config", str(config_file), "--out", str(model_dir)])
        assert result.exit_code == 0, result.output
        assert (model_dir / "crf.json").exists()
        manifest = json.loads((model_dir / "report.json.manifest.json").read_text())
        assert manifest["config"]["epochs"] == 6

        preds = tmp_path / "preds.jsonl"
        result = invoke(runner, ["predict", str(test_path), "--model", str(model_dir), "--out", str(preds)])
        assert result.exit_code == 0, result.output
        assert set(load_predictions(preds)) == {s.id for s in load_corpus(test_path, "jsonl")}

        report = tmp_path / "eval.json"
        result = invoke(runner, ["evaluate", str(test_path), str(preds), "--out", str(report)])
        assert result.exit_code == 0, result.output
        record = json.loads(report.read_text())
        assert 0.0 <= record["strict"]["f1"] <= record["partial"]["f1"] <= 1.0
        assert "strict" in result.output and "partial" in result.output

        out = tmp_path / "stats.json"
        result = invoke(runner, ["analyze", str(preds), "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert "±" in result.output

        cmp_out = tmp_path / "cmp.json"
        result = invoke(
            runner,
            ["compare", str(test_path), str(preds), str(preds), "--mann-whitney", "--out", str(cmp_out)],
        )
        assert result.exit_code == 0, result.output
        record = json.loads(cmp_out.read_text())
        assert record["mcnemar"]["b"] == record["mcnemar"]["c"] == 0
        assert record["mcnemar"]["p_value"] == 1.0

    def test_train_seed_override(self, runner, tmp_path, config_file):
        train_path = tmp_path / "train.jsonl"
        write_corpus(generate_corpus(40, seed=11).with_split("train"), train_path)
        out = tmp_path / "m"
        result = invoke(
            runner, ["train", str(train_path), "--config", str(config_file), "--out", str(out), "--seed", "9"]
        )
        assert result.exit_code == 0, result.output
        config = json.loads((out / "config.json").read_text())
        assert config["seed"] == 9

    def test_unknown_config_key_exits_1(self, runner, tmp_path, corpus_file):
        bad = tmp_path / "bad.yaml"
        bad.write_text("train:\n  learnign_rate: 0.1\n", encoding="utf-8")
        result = runner.invoke(main, ["train", str(corpus_file), "--config", str(bad), "--out", str(tmp_path / "m")])
        assert result.exit_code == 1
        assert "learnign_rate" in result.output

    def test_predict_requires_source(self, runner, corpus_file, tmp_path):
        result = runner.invoke(main, ["predict", str(corpus_file), "--out", str(tmp_path / "p.jsonl")])
        assert result.exit_code == 2


class TestGridSearch:
    def test_small_grid(self, runner, tmp_path):
        train_path, val_path = tmp_path / "tr.jsonl", tmp_path / "va.jsonl"
        write_corpus(generate_corpus(40, seed=1).with_split("train"), train_path)
        write_corpus(generate_corpus(12, seed=2, prefix="v").with_split("val"), val_path)
        cfg = tmp_path / "run.yaml"
        cfg.write_text(
            "train:\n  epochs: 2\n  max_len: 48\n"
            "grid:\n  learning_rates: [0.005, 0.0005]\n  dropouts: [0.0, 0.15]\n",
            encoding="utf-8",
        )
        out = tmp_path / "grid.json"
        result = invoke(
            runner, ["grid-search", str(train_path), str(val_path), "--config", str(cfg), "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        record = json.loads(out.read_text())
        assert len(record["results"]) == 4
        assert record["best"]["learning_rate"] in (0.005, 0.0005)
        assert "4 configurations" in result.output
