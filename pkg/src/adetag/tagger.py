"""Emission providers, training loop, grid search and the predict pipeline.

The desk-scale trainable provider is a small transformer block (token +
position embeddings, one multi-head self-attention layer, a feed-forward
layer and a 3-way output projection) with hand-derived backpropagation.
A file-backed provider serves precomputed emission matrices from an
emission-store file keyed by sample id. Training minimizes the CRF NLL
(or a masked token cross-entropy) with Adam.
"""

import json
import struct
from dataclasses import dataclass, field, asdict, replace
from pathlib import Path

import numpy as np

from . import crf as crf_mod
from .corpus import CharSpan, Corpus
from .crf import CrfParams
from .errors import ValidationError
from .labeling import Label, LabelSequence, aggregate_labels, iob_to_spans, propagate_labels, spans_to_iob, split_words
from .tokenizer import Vocabulary, TokenizedSample, encode, load_vocab, write_vocab

STORE_MAGIC = b"ADEM"
STORE_VERSION = 1
ENCODER_MAGIC = b"TENC"
ENCODER_VERSION = 1

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class TrainConfig:
    epochs: int = 50
    learning_rate: float = 5e-3
    dropout: float = 0.0
    batch_size: int = 16
    seed: int = 0
    with_crf: bool = True
    constrained: bool = False
    max_len: int = 128
    d_model: int = 16
    n_heads: int = 2
    ff_dim: int = 32
    select_metric: str = "partial_f1"

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be positive")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")
        if self.d_model % self.n_heads != 0:
            raise ValueError("d_model must be divisible by n_heads")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in d.items() if k in known})


@dataclass
class GridSpec:
    learning_rates: tuple
    dropouts: tuple
    select_metric: str = "partial_f1"

    def __post_init__(self):
        if not self.learning_rates or not self.dropouts:
            raise ValueError("grid axes must be non-empty")
        if self.select_metric not in ("partial_f1", "strict_f1"):
            raise ValueError(f"unknown selection metric {self.select_metric!r}")

    def configurations(self) -> list[tuple[float, float]]:
        """All (learning rate, dropout) pairs, in ascending search order."""
        return [(lr, d) for lr in sorted(self.learning_rates) for d in sorted(self.dropouts)]


DEFAULT_GRID = GridSpec(learning_rates=(5e-4, 5e-5, 5e-6), dropouts=(0.15, 0.20, 0.25, 0.30))


@dataclass
class RunReport:
    config: dict
    per_seed: dict = field(default_factory=dict)  # seed -> {metric: value}
    mean: dict = field(default_factory=dict)
    std: dict = field(default_factory=dict)  # absent keys when < 2 seeds
    best_epoch: int | None = None
    epoch_losses: list = field(default_factory=list)
    val_curve: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    def table(self) -> str:
        """Human-readable mean +/- std block in the style of the results table."""
        lines = []
        for metric in sorted(self.mean):
            mean = self.mean[metric]
            if metric in self.std:
                lines.append(f"{metric:>12}: {100 * mean:5.1f} ± {100 * self.std[metric]:.1f}")
            else:
                lines.append(f"{metric:>12}: {100 * mean:5.1f}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# emission store


def write_emission_store(path, store: dict) -> None:
    """Write {sample_id: L x 3 float64 log-prob matrix} to a store file."""
    with open(path, "wb") as fh:
        fh.write(STORE_MAGIC)
        fh.write(struct.pack("<III", STORE_VERSION, crf_mod.K, len(store)))
        for sid, matrix in store.items():
            matrix = np.ascontiguousarray(matrix, dtype=np.float64)
            if matrix.ndim != 2 or matrix.shape[1] != crf_mod.K:
                raise ValueError(f"store entry {sid!r} must be L x {crf_mod.K}, got {matrix.shape}")
            sid_bytes = sid.encode("utf-8")
            fh.write(struct.pack("<I", len(sid_bytes)))
            fh.write(sid_bytes)
            fh.write(struct.pack("<I", matrix.shape[0]))
            fh.write(matrix.astype("<f8").tobytes())


def read_emission_store(path) -> dict:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != STORE_MAGIC:
            raise ValidationError(f"{path}: not an emission store (bad magic {magic!r})")
        version, k, count = struct.unpack("<III", fh.read(12))
        if version != STORE_VERSION:
            raise ValidationError(f"{path}: unsupported store version {version}")
        if k != crf_mod.K:
            raise ValidationError(f"{path}: store has K={k}, expected {crf_mod.K}")
        store = {}
        for _ in range(count):
            (sid_len,) = struct.unpack("<I", fh.read(4))
            sid = fh.read(sid_len).decode("utf-8")
            (length,) = struct.unpack("<I", fh.read(4))
            data = np.frombuffer(fh.read(length * k * 8), dtype="<f8").reshape(length, k)
            if sid in store:
                raise ValidationError(f"{path}: duplicate sample id {sid!r}")
            store[sid] = data.copy()
    return store


def validate_emission_store(path, row_tol=1e-6) -> dict:
    """Read a store and verify every row is a finite log-probability vector
    (log-sum-exp 0 within row_tol). Returns the store."""
    store = read_emission_store(path)
    for sid, matrix in store.items():
        if matrix.shape[0] < 1:
            raise ValidationError(f"store entry {sid!r} is empty")
        if not np.all(np.isfinite(matrix)):
            raise ValidationError(f"store entry {sid!r} has non-finite entries")
        lse = np.log(np.exp(matrix).sum(axis=1))
        if np.max(np.abs(lse)) > row_tol:
            raise ValidationError(f"store entry {sid!r} rows are not normalized log-probabilities")
    return store


# ---------------------------------------------------------------------------
# providers


class FileBackedProvider:
    """Serves precomputed emission matrices keyed by sample id."""

    kind = "file_backed"

    def __init__(self, store: dict):
        self.store = store

    @classmethod
    def from_path(cls, path) -> "FileBackedProvider":
        return cls(validate_emission_store(path))

    def emissions(self, sample: TokenizedSample, sample_id=None, train_mode=False, rng=None):
        if sample_id not in self.store:
            raise KeyError(f"sample id {sample_id!r} not present in the emission store")
        matrix = self.store[sample_id]
        if matrix.shape[0] != sample.length:
            raise ValidationError(
                f"sample {sample_id!r}: store has {matrix.shape[0]} rows but the sample has unmasked length {sample.length}"
            )
        return matrix


class ToyEncoder:
    """Single-block transformer encoder with a 3-way output projection.

    Forward/backward are hand-written numpy; emissions() returns log-softmax
    rows over the unmasked positions (cls and sep included).
    """

    kind = "toy_encoder"

    PARAM_NAMES = ("emb", "pos", "wq", "wk", "wv", "wo", "w1", "b1", "w2", "b2", "wp", "bp")

    def __init__(self, vocab: Vocabulary, params: dict, n_heads: int, max_len: int):
        self.vocab = vocab
        self.params = params
        self.n_heads = n_heads
        self.max_len = max_len

    @classmethod
    def init_random(cls, vocab: Vocabulary, config: TrainConfig, rng) -> "ToyEncoder":
        v, d, f = len(vocab), config.d_model, config.ff_dim
        scale = 0.1
        params = {
            "emb": rng.normal(0.0, scale, size=(v, d)),
            "pos": rng.normal(0.0, scale, size=(config.max_len, d)),
            "wq": rng.normal(0.0, scale, size=(d, d)),
            "wk": rng.normal(0.0, scale, size=(d, d)),
            "wv": rng.normal(0.0, scale, size=(d, d)),
            "wo": rng.normal(0.0, scale, size=(d, d)),
            "w1": rng.normal(0.0, scale, size=(d, f)),
            "b1": np.zeros(f),
            "w2": rng.normal(0.0, scale, size=(f, d)),
            "b2": np.zeros(d),
            "wp": rng.normal(0.0, scale, size=(d, 3)),
            "bp": np.zeros(3),
        }
        return cls(vocab, params, config.n_heads, config.max_len)

    def token_ids(self, sample: TokenizedSample) -> np.ndarray:
        return np.array([self.vocab.id_of(t) for t in sample.subwords[: sample.length]], dtype=np.int64)

    def _split_heads(self, x):
        L, d = x.shape
        dh = d // self.n_heads
        return x.reshape(L, self.n_heads, dh).transpose(1, 0, 2)  # (h, L, dh)

    def _merge_heads(self, x):
        h, L, dh = x.shape
        return x.transpose(1, 0, 2).reshape(L, h * dh)

    def forward(self, ids, dropout=0.0, train_mode=False, rng=None):
        """Returns (log_softmax emissions L x 3, cache for backward)."""
        p = self.params
        L = len(ids)
        dh = p["wq"].shape[0] // self.n_heads
        x0 = p["emb"][ids] + p["pos"][:L]
        q = self._split_heads(x0 @ p["wq"])
        k = self._split_heads(x0 @ p["wk"])
        v = self._split_heads(x0 @ p["wv"])
        scores = q @ k.transpose(0, 2, 1) / np.sqrt(dh)
        scores -= scores.max(axis=-1, keepdims=True)
        attn_w = np.exp(scores)
        attn_w /= attn_w.sum(axis=-1, keepdims=True)
        ctx = self._merge_heads(attn_w @ v)
        attn0 = ctx @ p["wo"]
        if train_mode and dropout > 0.0:
            keep = 1.0 - dropout
            mask1 = (rng.random(attn0.shape) < keep) / keep
        else:
            mask1 = None
        attn = attn0 * mask1 if mask1 is not None else attn0
        h1 = x0 + attn
        z1 = h1 @ p["w1"] + p["b1"]
        relu = np.maximum(z1, 0.0)
        ff0 = relu @ p["w2"] + p["b2"]
        if train_mode and dropout > 0.0:
            keep = 1.0 - dropout
            mask2 = (rng.random(ff0.shape) < keep) / keep
        else:
            mask2 = None
        ff = ff0 * mask2 if mask2 is not None else ff0
        h2 = h1 + ff
        logits = h2 @ p["wp"] + p["bp"]
        shifted = logits - logits.max(axis=1, keepdims=True)
        log_norm = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
        emissions = shifted - log_norm
        cache = dict(
            ids=ids, x0=x0, q=q, k=k, v=v, attn_w=attn_w, ctx=ctx, mask1=mask1,
            h1=h1, z1=z1, relu=relu, mask2=mask2, h2=h2, softmax=np.exp(emissions),
        )
        return emissions, cache

    def backward(self, cache, d_emissions) -> dict:
        """Gradients of a scalar loss wrt all parameters, given the loss
        gradient at the log-softmax output."""
        p = self.params
        ids = cache["ids"]
        L = len(ids)
        dh = p["wq"].shape[0] // self.n_heads
        # log-softmax backward
        d_logits = d_emissions - cache["softmax"] * d_emissions.sum(axis=1, keepdims=True)
        g = {}
        g["wp"] = cache["h2"].T @ d_logits
        g["bp"] = d_logits.sum(axis=0)
        d_h2 = d_logits @ p["wp"].T
        d_ff = d_h2 * cache["mask2"] if cache["mask2"] is not None else d_h2
        g["w2"] = cache["relu"].T @ d_ff
        g["b2"] = d_ff.sum(axis=0)
        d_relu = d_ff @ p["w2"].T
        d_z1 = d_relu * (cache["z1"] > 0.0)
        g["w1"] = cache["h1"].T @ d_z1
        g["b1"] = d_z1.sum(axis=0)
        d_h1 = d_h2 + d_z1 @ p["w1"].T
        d_attn0 = d_h1 * cache["mask1"] if cache["mask1"] is not None else d_h1
        g["wo"] = cache["ctx"].T @ d_attn0
        d_ctx = self._split_heads(d_attn0 @ p["wo"].T)
        attn_w, v = cache["attn_w"], cache["v"]
        d_attn_w = d_ctx @ v.transpose(0, 2, 1)
        d_v = attn_w.transpose(0, 2, 1) @ d_ctx
        d_scores = attn_w * (d_attn_w - (d_attn_w * attn_w).sum(axis=-1, keepdims=True))
        d_scores /= np.sqrt(dh)
        d_q = d_scores @ cache["k"]
        d_k = d_scores.transpose(0, 2, 1) @ cache["q"]
        dq, dk, dv = (self._merge_heads(a) for a in (d_q, d_k, d_v))
        x0 = cache["x0"]
        g["wq"] = x0.T @ dq
        g["wk"] = x0.T @ dk
        g["wv"] = x0.T @ dv
        d_x0 = d_h1 + dq @ p["wq"].T + dk @ p["wk"].T + dv @ p["wv"].T
        g["emb"] = np.zeros_like(p["emb"])
        np.add.at(g["emb"], ids, d_x0)
        g["pos"] = np.zeros_like(p["pos"])
        g["pos"][:L] = d_x0
        return g

    def emissions(self, sample: TokenizedSample, sample_id=None, train_mode=False, dropout=0.0, rng=None):
        e, _ = self.forward(self.token_ids(sample), dropout=dropout, train_mode=train_mode, rng=rng)
        return e

    # --- serialization (versioned binary, deterministic bytes) ---

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(ENCODER_MAGIC)
            fh.write(struct.pack("<III", ENCODER_VERSION, self.n_heads, self.max_len))
            fh.write(struct.pack("<I", len(self.PARAM_NAMES)))
            for name in self.PARAM_NAMES:
                arr = np.ascontiguousarray(self.params[name], dtype=np.float64)
                name_b = name.encode()
                fh.write(struct.pack("<I", len(name_b)) + name_b)
                fh.write(struct.pack("<I", arr.ndim) + struct.pack(f"<{arr.ndim}I", *arr.shape))
                fh.write(arr.astype("<f8").tobytes())

    @classmethod
    def load(cls, path, vocab: Vocabulary) -> "ToyEncoder":
        with open(path, "rb") as fh:
            if fh.read(4) != ENCODER_MAGIC:
                raise ValidationError(f"{path}: not an encoder parameter file")
            version, n_heads, max_len = struct.unpack("<III", fh.read(12))
            if version != ENCODER_VERSION:
                raise ValidationError(f"{path}: unsupported encoder format version {version}")
            (count,) = struct.unpack("<I", fh.read(4))
            params = {}
            for _ in range(count):
                (name_len,) = struct.unpack("<I", fh.read(4))
                name = fh.read(name_len).decode()
                (ndim,) = struct.unpack("<I", fh.read(4))
                shape = struct.unpack(f"<{ndim}I", fh.read(4 * ndim))
                n = int(np.prod(shape)) if shape else 1
                params[name] = np.frombuffer(fh.read(8 * n), dtype="<f8").reshape(shape).copy()
        return cls(vocab, params, n_heads, max_len)


def emissions(provider, sample: TokenizedSample, train_mode=False, sample_id=None, dropout=0.0, rng=None):
    """Emission log-probabilities for one tokenized sample."""
    if isinstance(provider, ToyEncoder):
        return provider.emissions(sample, sample_id=sample_id, train_mode=train_mode, dropout=dropout, rng=rng)
    return provider.emissions(sample, sample_id=sample_id, train_mode=train_mode, rng=rng)


# ---------------------------------------------------------------------------
# training


class Adam:
    def __init__(self, lr: float):
        self.lr = lr
        self.t = 0
        self.m: dict = {}
        self.v: dict = {}

    def step(self, params: dict, grads: dict) -> None:
        self.t += 1
        for name, grad in grads.items():
            if name not in self.m:
                self.m[name] = np.zeros_like(grad)
                self.v[name] = np.zeros_like(grad)
            self.m[name] = ADAM_BETA1 * self.m[name] + (1 - ADAM_BETA1) * grad
            self.v[name] = ADAM_BETA2 * self.v[name] + (1 - ADAM_BETA2) * grad**2
            m_hat = self.m[name] / (1 - ADAM_BETA1**self.t)
            v_hat = self.v[name] / (1 - ADAM_BETA2**self.t)
            params[name] -= self.lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)


@dataclass
class PreparedSample:
    id: str
    words: list
    tokenized: TokenizedSample
    ids: np.ndarray
    labels: np.ndarray  # unmasked length, cls/sep labeled O
    gold_spans: tuple


def prepare_sample(sample, vocab: Vocabulary, max_len: int) -> PreparedSample:
    words = split_words(sample.text)
    tok = encode(words, vocab, max_len)
    kept_words = [words[wi] for wi, _ in tok.word_alignment]
    word_labels = spans_to_iob(kept_words, [s for s in sample.spans if s.start < (kept_words[-1].end if kept_words else 0)])
    sub_labels = propagate_labels(word_labels, tok.pieces_per_word)
    full = np.zeros(tok.length, dtype=np.int64)  # cls/sep stay O
    full[1 : 1 + len(sub_labels)] = [int(l) for l in sub_labels]
    ids = np.array([vocab.id_of(t) for t in tok.subwords[: tok.length]], dtype=np.int64)
    return PreparedSample(sample.id, kept_words, tok, ids, full, sample.spans)


def _sample_loss_and_grads(encoder, crf_params, prep, config, rng):
    """Loss and gradients for one sample: CRF NLL or masked cross-entropy."""
    e, cache = encoder.forward(prep.ids, dropout=config.dropout, train_mode=True, rng=rng)
    y = prep.labels
    if config.with_crf:
        loss = crf_mod.nll(e, y, crf_params)
        d_e, d_crf = crf_mod.nll_gradients(e, y, crf_params)
    else:
        L = e.shape[0]
        loss = -float(e[np.arange(L), y].mean())
        d_e = np.zeros_like(e)
        d_e[np.arange(L), y] = -1.0 / L
        d_crf = None
    enc_grads = encoder.backward(cache, d_e)
    return loss, enc_grads, d_crf


def _predict_spans(provider, crf_params, prep, with_crf) -> tuple:
    e = emissions(provider, prep.tokenized, sample_id=prep.id)
    return decode_emissions(np.asarray(e), prep, crf_params, with_crf)


def decode_emissions(e, prep: PreparedSample, crf_params, with_crf) -> tuple:
    """Viterbi (or row-argmax) decode, aggregate to words, return char spans."""
    if with_crf and crf_params is not None:
        decoded, _ = crf_mod.viterbi_decode(e, crf_params)
        seq = [int(l) for l in decoded]
    else:
        seq = [int(i) for i in np.argmax(e, axis=1)]
    content = seq[prep.tokenized.content_slice()]
    sub = LabelSequence(tuple(Label(i) for i in content), "subword")
    words_labels = aggregate_labels(sub, prep.tokenized.pieces_per_word)
    return iob_to_spans(prep.words, words_labels)


def _corpus_metrics(encoder, crf_params, preps, with_crf) -> dict:
    from .evaluation import corpus_f1, match_entities

    reports_s, reports_p = [], []
    for prep in preps:
        pred = _predict_spans(encoder, crf_params, prep, with_crf)
        reports_s.append(match_entities(prep.gold_spans, pred, "strict"))
        reports_p.append(match_entities(prep.gold_spans, pred, "partial"))
    _, _, f1_s = corpus_f1(reports_s)
    _, _, f1_p = corpus_f1(reports_p)
    return {"strict_f1": f1_s, "partial_f1": f1_p}


def train(corpus: Corpus, vocab: Vocabulary, config: TrainConfig):
    """Train the toy encoder (and CRF, when with_crf) on the corpus' train
    split; when a val split exists, the best-epoch parameters by the
    configured validation metric are retained.

    Returns (ToyEncoder, CrfParams, RunReport).
    """
    train_split = corpus.subset("train")
    if len(train_split) == 0:
        raise ValueError("corpus has no train split")
    val_split = corpus.subset("val")
    rng = np.random.default_rng(config.seed)
    encoder = ToyEncoder.init_random(vocab, config, rng)
    crf_params = CrfParams.init_random(config.seed, constrained=config.constrained)
    train_preps = [prepare_sample(s, vocab, config.max_len) for s in train_split]
    val_preps = [prepare_sample(s, vocab, config.max_len) for s in val_split]

    opt_enc = Adam(config.learning_rate)
    opt_crf = Adam(config.learning_rate)
    report = RunReport(config=asdict(config))
    best_metric = -1.0
    best_state = None
    order = np.arange(len(train_preps))
    for epoch in range(config.epochs):
        rng.shuffle(order)
        epoch_loss = 0.0
        for bstart in range(0, len(order), config.batch_size):
            batch = order[bstart : bstart + config.batch_size]
            acc_enc = None
            acc_crf = None
            for idx in batch:
                loss, g_enc, g_crf = _sample_loss_and_grads(encoder, crf_params, train_preps[idx], config, rng)
                epoch_loss += loss
                if acc_enc is None:
                    acc_enc = g_enc
                else:
                    for name in acc_enc:
                        acc_enc[name] += g_enc[name]
                if g_crf is not None:
                    if acc_crf is None:
                        acc_crf = g_crf
                    else:
                        acc_crf.transitions += g_crf.transitions
                        acc_crf.start += g_crf.start
                        acc_crf.stop += g_crf.stop
            scale = 1.0 / len(batch)
            for name in acc_enc:
                acc_enc[name] *= scale
            opt_enc.step(encoder.params, acc_enc)
            if acc_crf is not None:
                crf_grads = {
                    "transitions": acc_crf.transitions * scale,
                    "start": acc_crf.start * scale,
                    "stop": acc_crf.stop * scale,
                }
                crf_arrays = {"transitions": crf_params.transitions, "start": crf_params.start, "stop": crf_params.stop}
                opt_crf.step(crf_arrays, crf_grads)
                crf_params.apply_constraints()
        report.epoch_losses.append(epoch_loss / len(train_preps))
        if val_preps:
            metrics = _corpus_metrics(encoder, crf_params, val_preps, config.with_crf)
            report.val_curve.append(metrics[config.select_metric])
            if metrics[config.select_metric] > best_metric:
                best_metric = metrics[config.select_metric]
                best_state = ({k: v.copy() for k, v in encoder.params.items()}, crf_params.copy(), epoch)
    if best_state is not None:
        encoder.params, crf_params, best_epoch = best_state[0], best_state[1], best_state[2]
        report.best_epoch = best_epoch
    else:
        report.best_epoch = config.epochs - 1
    return encoder, crf_params, report


def grid_search(train_split: Corpus, val_split: Corpus, grid: GridSpec, base: TrainConfig, vocab: Vocabulary, log=None):
    """Train one configuration per (learning rate, dropout) pair and return
    the TrainConfig with the best validation metric (ties: lower lr, then
    lower dropout). Also returns the per-configuration results."""
    merged = Corpus(tuple(s for s in train_split.with_split("train")) + tuple(s for s in val_split.with_split("val")))
    results = []
    for lr, dropout in grid.configurations():
        config = replace(base, learning_rate=lr, dropout=dropout, select_metric=grid.select_metric)
        _, _, report = train(merged, vocab, config)
        metric = max(report.val_curve) if report.val_curve else 0.0
        results.append({"learning_rate": lr, "dropout": dropout, grid.select_metric: metric})
        if log:
            log(f"lr={lr:g} dropout={dropout:g} {grid.select_metric}={metric:.4f}")
    winner = max(results, key=lambda r: (r[grid.select_metric], -r["learning_rate"], -r["dropout"]))
    best = replace(base, learning_rate=winner["learning_rate"], dropout=winner["dropout"], select_metric=grid.select_metric)
    return best, results


def multi_seed(config: TrainConfig, seeds, trainval: Corpus, test: Corpus, vocab: Vocabulary) -> RunReport:
    """Retrain on the whole train+val corpus once per seed and aggregate
    test metrics as mean and sample standard deviation."""
    if not seeds:
        raise ValueError("need at least one seed")
    test_preps = [prepare_sample(s, vocab, config.max_len) for s in test]
    report = RunReport(config=asdict(config))
    for seed in seeds:
        run_config = replace(config, seed=seed)
        encoder, crf_params, _ = train(trainval.with_split("train"), vocab, run_config)
        report.per_seed[seed] = _corpus_metrics(encoder, crf_params, test_preps, config.with_crf)
    metrics = sorted(next(iter(report.per_seed.values())))
    for metric in metrics:
        values = [report.per_seed[s][metric] for s in seeds]
        report.mean[metric] = float(np.mean(values))
        if len(values) >= 2:
            report.std[metric] = float(np.std(values, ddof=1))
    return report


def predict(provider, crf_params, text: str, vocab: Vocabulary, max_len: int = 128, with_crf=True, sample_id=None):
    """Full pipeline: words -> subwords -> emissions -> decode -> spans.

    Returns [(CharSpan, surface string)] into the original text.
    """
    words = split_words(text)
    tok = encode(words, vocab, max_len)
    kept_words = [words[wi] for wi, _ in tok.word_alignment]
    prep = PreparedSample(sample_id or "", kept_words, tok, None, None, ())
    e = emissions(provider, tok, sample_id=sample_id)
    spans = decode_emissions(np.asarray(e), prep, crf_params, with_crf)
    return [(span, text[span.start : span.end]) for span in spans]


# ---------------------------------------------------------------------------
# model artifact


def save_artifact(directory, encoder: ToyEncoder, crf_params: CrfParams, config: TrainConfig) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_vocab(encoder.vocab, directory / "vocab.txt")
    encoder.save(directory / "encoder.bin")
    crf_params.save(directory / "crf.json")
    (directory / "config.json").write_text(config.to_json() + "\n", encoding="utf-8")


def load_artifact(directory):
    directory = Path(directory)
    config = TrainConfig.from_dict(json.loads((directory / "config.json").read_text(encoding="utf-8")))
    vocab = load_vocab(directory / "vocab.txt")
    encoder = ToyEncoder.load(directory / "encoder.bin", vocab)
    crf_params = CrfParams.load(directory / "crf.json")
    return encoder, crf_params, config
