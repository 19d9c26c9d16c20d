"""Command-line surface: convert, split, train, grid-search, predict,
evaluate, compare, analyze.

Every command is deterministic given (arguments, config, seed, inputs) and
writes a run manifest (config snapshot, input digests, duration) next to
its primary output. Exit codes: 0 success, 1 operational failure, 2 usage
error.
"""

import hashlib
import json
import sys
import time
from dataclasses import asdict
from pathlib import Path

import click
import yaml

from . import __version__
from .corpus import load_corpus, split_corpus, write_corpus
from .crf import CrfParams
from .errors import AdetagError, ConfigError
from .evaluation import (
    corpus_f1,
    load_familiar_words,
    load_predictions,
    mann_whitney_u,
    match_entities,
    mcnemar,
    prediction_text_stats,
    write_predictions,
)
from .synthetic import corpus_vocabulary
from .tagger import (
    FileBackedProvider,
    GridSpec,
    DEFAULT_GRID,
    TrainConfig,
    grid_search,
    load_artifact,
    multi_seed,
    predict,
    save_artifact,
    train,
)
from .tokenizer import load_vocab

CONFIG_VERSION = 1

CONFIG_KEYS = {"version", "train", "grid", "seeds", "split", "vocab"}


def _fail(message, code=1):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def read_config(path) -> dict:
    """Parse and schema-check the YAML run configuration."""
    try:
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a mapping")
    for key in raw:
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}: unknown config key {key!r}")
    if raw.get("version", CONFIG_VERSION) != CONFIG_VERSION:
        raise ConfigError(f"{path}: unsupported config version {raw['version']!r}")
    train_cfg = raw.get("train", {})
    unknown = set(train_cfg) - set(TrainConfig.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"{path}: unknown train config key {sorted(unknown)[0]!r}")
    for section, keys in (("grid", {"learning_rates", "dropouts", "select_metric"}), ("split", {"ratio", "stratify"})):
        bad = set(raw.get(section, {})) - keys
        if bad:
            raise ConfigError(f"{path}: unknown {section} config key {sorted(bad)[0]!r}")
    return raw


def build_train_config(raw: dict, seed=None) -> TrainConfig:
    config = TrainConfig.from_dict(raw.get("train", {}))
    if seed is not None:
        config.seed = seed
    return config


def build_grid(raw: dict) -> GridSpec:
    grid = raw.get("grid")
    if not grid:
        return DEFAULT_GRID
    return GridSpec(
        learning_rates=tuple(grid.get("learning_rates", DEFAULT_GRID.learning_rates)),
        dropouts=tuple(grid.get("dropouts", DEFAULT_GRID.dropouts)),
        select_metric=grid.get("select_metric", "partial_f1"),
    )


def _digest(path) -> str:
    h = hashlib.sha256()
    path = Path(path)
    if path.is_dir():
        for f in sorted(path.rglob("*")):
            if f.is_file():
                h.update(f.name.encode())
                h.update(f.read_bytes())
    else:
        h.update(path.read_bytes())
    return h.hexdigest()


def write_manifest(out_path, command, inputs, config_snapshot=None, seeds=None, started=None):
    """RunManifest: reproducibility record for one command invocation."""
    manifest = {
        "command": command,
        "toolkit_version": __version__,
        "config": config_snapshot or {},
        "seeds": seeds or [],
        "input_digests": {str(p): _digest(p) for p in inputs},
        "duration_seconds": round(time.monotonic() - started, 3) if started is not None else None,
    }
    path = Path(str(out_path) + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _vocab_for(raw_config, corpora, explicit_path=None):
    path = explicit_path or raw_config.get("vocab")
    if path:
        return load_vocab(path)
    return corpus_vocabulary(*corpora)


@click.group()
@click.version_option(__version__)
def main():
    """Adverse drug event extraction toolkit."""


@main.command()
@click.argument("in_path", type=click.Path(exists=True))
@click.argument("out_path", type=click.Path())
@click.option("--format", "in_format", type=click.Choice(["jsonl", "standoff", "tsv"]), default="jsonl")
@click.option("--annotation-type", default="ADR", help="standoff annotation type to ingest")
def convert(in_path, out_path, in_format, annotation_type):
    """Convert a corpus to canonical jsonl."""
    started = time.monotonic()
    try:
        corpus = load_corpus(in_path, in_format, annotation_type=annotation_type)
        write_corpus(corpus, out_path)
        write_manifest(out_path, "convert", [in_path], started=started)
    except (AdetagError, OSError, ValueError) as exc:
        _fail(exc)
    click.echo(f"wrote {len(corpus)} samples to {out_path}")


@main.command()
@click.argument("in_path", type=click.Path(exists=True))
@click.argument("out_train", type=click.Path())
@click.argument("out_val", type=click.Path())
@click.option("--ratio", type=float, default=0.8, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--stratify/--no-stratify", default=True, show_default=True)
def split(in_path, out_train, out_val, ratio, seed, stratify):
    """Split a jsonl corpus into train and val parts."""
    started = time.monotonic()
    try:
        corpus = load_corpus(in_path, "jsonl")
        train_part, val_part = split_corpus(corpus, ratio, seed, stratify)
        write_corpus(train_part, out_train)
        write_corpus(val_part, out_val)
        write_manifest(out_train, "split", [in_path], {"ratio": ratio, "stratify": stratify}, [seed], started)
    except (AdetagError, OSError, ValueError) as exc:
        _fail(exc)
    click.echo(f"train: {len(train_part)} samples -> {out_train}")
    click.echo(f"val:   {len(val_part)} samples -> {out_val}")


@main.command(name="train")
@click.argument("corpus_path", type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True), help="YAML run configuration")
@click.option("--out", "out_dir", type=click.Path(), required=True, help="model artifact directory")
@click.option("--seed", type=int, default=None, help="override the config seed")
@click.option("--seeds", default=None, help="comma-separated seeds for a multi-seed run")
@click.option("--test", "test_path", type=click.Path(exists=True), help="test corpus for the multi-seed protocol")
@click.option("--vocab", "vocab_path", type=click.Path(exists=True), help="vocabulary file")
@click.option("--threads", type=int, default=1, show_default=True, help="reserved; runs single-threaded for reproducibility")
def cmd_train(corpus_path, config_path, out_dir, seed, seeds, test_path, vocab_path, threads):
    """Train the tagger; with --seeds and --test, run the multi-seed protocol."""
    started = time.monotonic()
    try:
        raw = read_config(config_path) if config_path else {}
        config = build_train_config(raw, seed)
        corpus = load_corpus(corpus_path, "jsonl")
        inputs = [corpus_path] + ([config_path] if config_path else [])
        vocab = _vocab_for(raw, [corpus], vocab_path)
        out_dir = Path(out_dir)
        if seeds:
            seed_list = [int(s) for s in seeds.split(",")]
            if not test_path:
                _fail("--seeds requires --test", 2)
            test_corpus = load_corpus(test_path, "jsonl")
            vocab = _vocab_for(raw, [corpus, test_corpus], vocab_path)
            report = multi_seed(config, seed_list, corpus, test_corpus, vocab)
            out_dir.mkdir(parents=True, exist_ok=True)
            (out_dir / "report.json").write_text(report.to_json() + "\n", encoding="utf-8")
            click.echo(report.table())
            write_manifest(out_dir / "report.json", "train", inputs + [test_path], asdict(config), seed_list, started)
            return
        encoder, crf_params, report = train(corpus, vocab, config)
        save_artifact(out_dir, encoder, crf_params, config)
        (out_dir / "report.json").write_text(report.to_json() + "\n", encoding="utf-8")
        write_manifest(out_dir / "report.json", "train", inputs, asdict(config), [config.seed], started)
        click.echo(f"final train loss {report.epoch_losses[-1]:.4f}; artifact in {out_dir}")
    except (AdetagError, OSError, ValueError) as exc:
        _fail(exc)


@main.command(name="grid-search")
@click.argument("train_path", type=click.Path(exists=True))
@click.argument("val_path", type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--out", "out_path", type=click.Path(), required=True, help="grid report json")
@click.option("--seed", type=int, default=None)
@click.option("--vocab", "vocab_path", type=click.Path(exists=True))
def cmd_grid_search(train_path, val_path, config_path, out_path, seed, vocab_path):
    """Grid-search learning rate and dropout on a train/val pair."""
    started = time.monotonic()
    try:
        raw = read_config(config_path) if config_path else {}
        base = build_train_config(raw, seed)
        grid = build_grid(raw)
        train_part = load_corpus(train_path, "jsonl")
        val_part = load_corpus(val_path, "jsonl")
        vocab = _vocab_for(raw, [train_part, val_part], vocab_path)
        best, results = grid_search(train_part, val_part, grid, base, vocab, log=click.echo)
        record = {"results": results, "best": asdict(best)}
        Path(out_path).write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        inputs = [train_path, val_path] + ([config_path] if config_path else [])
        write_manifest(out_path, "grid-search", inputs, asdict(base), [base.seed], started)
        click.echo(f"{len(results)} configurations trained")
        click.echo(f"best: lr={best.learning_rate:g} dropout={best.dropout:g}")
    except (AdetagError, OSError, ValueError) as exc:
        _fail(exc)


@main.command(name="predict")
@click.argument("corpus_path", type=click.Path(exists=True))
@click.option("--model", "model_dir", type=click.Path(exists=True), help="trained model artifact directory")
@click.option("--emissions", "store_path", type=click.Path(exists=True), help="file-backed emission store")
@click.option("--vocab", "vocab_path", type=click.Path(exists=True), help="vocabulary (required with --emissions)")
@click.option("--crf-params", "crf_path", type=click.Path(exists=True), help="CRF parameter record for store decoding")
@click.option("--no-crf", is_flag=True, help="decode by per-position argmax")
@click.option("--max-len", type=int, default=128, show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--threads", type=int, default=1, show_default=True)
def cmd_predict(corpus_path, model_dir, store_path, vocab_path, crf_path, no_crf, max_len, out_path, threads):
    """Extract entity spans for every corpus sample."""
    started = time.monotonic()
    try:
        corpus = load_corpus(corpus_path, "jsonl")
        inputs = [corpus_path]
        if model_dir:
            provider, crf_params, config = load_artifact(model_dir)
            vocab, max_len = provider.vocab, config.max_len
            with_crf = config.with_crf and not no_crf
            inputs.append(model_dir)
        elif store_path:
            if not vocab_path:
                _fail("--emissions requires --vocab", 2)
            provider = FileBackedProvider.from_path(store_path)
            vocab = load_vocab(vocab_path)
            crf_params = CrfParams.load(crf_path) if crf_path else CrfParams.zeros()
            with_crf = not no_crf
            inputs += [store_path, vocab_path]
        else:
            _fail("one of --model or --emissions is required", 2)
        predictions = {}
        for sample in corpus:
            try:
                predictions[sample.id] = predict(
                    provider, crf_params, sample.text, vocab, max_len=max_len, with_crf=with_crf, sample_id=sample.id
                )
            except KeyError:
                _fail(f"sample id {sample.id!r} missing from the emission store")
        write_predictions(out_path, predictions)
        write_manifest(out_path, "predict", inputs, started=started)
        n_spans = sum(len(v) for v in predictions.values())
        click.echo(f"predicted {n_spans} entities over {len(corpus)} samples -> {out_path}")
    except (AdetagError, OSError, ValueError) as exc:
        _fail(exc)


def _aligned_reports(gold_corpus, predictions, mode):
    gold_ids = {s.id for s in gold_corpus}
    pred_ids = set(predictions)
    if gold_ids != pred_ids:
        missing = sorted(gold_ids ^ pred_ids)
        raise AdetagError(f"gold and predictions do not align on ids: {missing}")
    return [
        match_entities(s.spans, [span for span, _ in predictions[s.id]], mode)
        for s in gold_corpus
    ]


@main.command(name="evaluate")
@click.argument("gold_path", type=click.Path(exists=True))
@click.argument("pred_path", type=click.Path(exists=True))
@click.option("--out", "out_path", type=click.Path(), help="machine-readable report")
def cmd_evaluate(gold_path, pred_path, out_path):
    """Entity-level strict and partial precision/recall/F1."""
    started = time.monotonic()
    try:
        gold = load_corpus(gold_path, "jsonl")
        predictions = load_predictions(pred_path)
        record = {}
        for mode in ("strict", "partial"):
            p, r, f1 = corpus_f1(_aligned_reports(gold, predictions, mode))
            record[mode] = {"precision": p, "recall": r, "f1": f1}
            click.echo(f"{mode:>8}: P={p:.4f} R={r:.4f} F1={f1:.4f}")
        if out_path:
            Path(out_path).write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8")
            write_manifest(out_path, "evaluate", [gold_path, pred_path], started=started)
    except (AdetagError, OSError, ValueError) as exc:
        _fail(exc)


@main.command(name="compare")
@click.argument("gold_path", type=click.Path(exists=True))
@click.argument("pred_a", type=click.Path(exists=True))
@click.argument("pred_b", type=click.Path(exists=True))
@click.option("--mann-whitney", "with_mwu", is_flag=True, help="also compare per-sample strict F1 lists")
@click.option("--out", "out_path", type=click.Path())
def cmd_compare(gold_path, pred_a, pred_b, with_mwu, out_path):
    """McNemar test between two systems' predictions on one gold corpus."""
    started = time.monotonic()
    try:
        gold = load_corpus(gold_path, "jsonl")
        preds = [load_predictions(p) for p in (pred_a, pred_b)]
        correct = []
        for pred in preds:
            reports = _aligned_reports(gold, pred, "strict")
            correct.append([m for r in reports for m in r.per_gold_matched])
        b_count, c_count, p_value = mcnemar(correct[0], correct[1])
        record = {"mcnemar": {"b": b_count, "c": c_count, "p_value": p_value}}
        click.echo(f"McNemar: b={b_count} c={c_count} p={p_value:.4f}")
        if with_mwu:
            per_sample = []
            for pred in preds:
                reports = _aligned_reports(gold, pred, "strict")
                per_sample.append([r.f1 for r in reports])
            u, p_mwu = mann_whitney_u(per_sample[0], per_sample[1])
            record["mann_whitney_u"] = {"u": u, "p_value": p_mwu}
            click.echo(f"Mann-Whitney U: U={u:.1f} p={p_mwu:.4f}")
        if out_path:
            Path(out_path).write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8")
            write_manifest(out_path, "compare", [gold_path, pred_a, pred_b], started=started)
    except (AdetagError, OSError, ValueError) as exc:
        _fail(exc)


@main.command(name="analyze")
@click.argument("pred_path", type=click.Path(exists=True))
@click.option("--familiar-words", "familiar_path", type=click.Path(), help="Dale-Chall familiar-word list")
@click.option("--out", "out_path", type=click.Path())
def cmd_analyze(pred_path, familiar_path, out_path):
    """Mean +/- std text metrics over the predicted entity surfaces."""
    started = time.monotonic()
    try:
        predictions = load_predictions(pred_path)
        surfaces = [surface for entries in predictions.values() for _, surface in entries]
        if not surfaces:
            click.echo("no predicted entities: no data")
            return
        familiar = load_familiar_words(familiar_path)
        stats = prediction_text_stats(surfaces, familiar)
        names = {
            "dale_chall": "Dale Chall Readability",
            "ari": "Automated Readability",
            "flesch": "Flesch Reading Ease",
            "mean_syllables_per_word": "Syllable Count",
            "mean_char_length": "Character Length",
        }
        record = {}
        for key, label in names.items():
            mean, std = stats[key]
            record[key] = {"mean": mean, "std": std}
            click.echo(f"{label:<24} {mean:05.2f} ± {std:.2f}")
        if out_path:
            Path(out_path).write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8")
            write_manifest(out_path, "analyze", [pred_path], started=started)
    except (AdetagError, OSError, ValueError) as exc:
        _fail(exc)


if __name__ == "__main__":
    main()
