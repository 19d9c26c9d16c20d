"""Run a pretrained encoder over a corpus and write emission
log-probabilities in the core tagger's file-backed store format.

The encoder is frozen; a seeded random (or separately trained) 3-way
linear projection maps hidden states to per-position label
log-probabilities. Tokenization reuses the core's wordpiece rules over
the encoder's own vocabulary, so the exported rows align exactly with
what the tagger reconstructs from the raw text.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from adetag.errors import ConfigError
from adetag.corpus import load_corpus
from adetag.labeling import split_words
from adetag.tagger import write_emission_store
from adetag.tokenizer import Vocabulary, encode, write_vocab

logger = logging.getLogger(__name__)

STORE_NAME = "emissions.bin"
VOCAB_NAME = "vocab.txt"
ALIGNMENT_NAME = "alignment.json"


@dataclass
class ExportJob:
    corpus_path: str
    encoder: str  # model name or local directory, resolved by transformers
    out_dir: str
    max_len: int = 128
    lowercase: bool = False
    seed: int = 0  # projection initialization


def _load_encoder(identifier):
    from transformers import AutoModel, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(identifier)
        model = AutoModel.from_pretrained(identifier)
    except Exception as exc:
        raise ConfigError(f"cannot resolve encoder {identifier!r}: {exc}") from exc
    return tokenizer, model


def _core_vocab(tokenizer, lowercase) -> Vocabulary:
    """Rebuild the encoder's vocabulary as a core Vocabulary with
    identical token ids (line index == encoder id)."""
    by_id = sorted(tokenizer.get_vocab().items(), key=lambda kv: kv[1])
    entries = [tok for tok, _ in by_id]
    specials = {
        "cls": tokenizer.cls_token,
        "sep": tokenizer.sep_token,
        "pad": tokenizer.pad_token,
        "unk": tokenizer.unk_token,
    }
    if any(v is None for v in specials.values()):
        raise ConfigError("encoder tokenizer lacks cls/sep/pad/unk special tokens")
    return Vocabulary(entries, lowercase=lowercase, specials=specials)


def export_emissions(job: ExportJob) -> None:
    """Write emission store + vocabulary + word-alignment record for
    every sample in the corpus. Deterministic for a fixed job."""
    corpus = load_corpus(job.corpus_path, "jsonl")
    tokenizer, model = _load_encoder(job.encoder)
    vocab = _core_vocab(tokenizer, job.lowercase)

    model.eval()
    torch.set_num_threads(1)
    rng = np.random.default_rng(job.seed)
    hidden = model.config.hidden_size
    projection = rng.normal(0.0, 0.02, size=(hidden, 3))
    bias = np.zeros(3)

    store = {}
    alignment = {}
    with torch.no_grad():
        for sample in corpus:
            words = split_words(sample.text)
            tok = encode(words, vocab, job.max_len)
            ids = [vocab.id_of(t) for t in tok.subwords[: tok.length]]
            out = model(
                input_ids=torch.tensor([ids], dtype=torch.long),
                attention_mask=torch.ones(1, len(ids), dtype=torch.long),
            )
            h = out.last_hidden_state[0].double().numpy()
            scores = h @ projection + bias
            e = scores - np.logaddexp.reduce(scores, axis=1, keepdims=True)
            store[sample.id] = e
            alignment[sample.id] = [[wi, n] for wi, n in tok.word_alignment]

    out_dir = Path(job.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_emission_store(out_dir / STORE_NAME, store)
    write_vocab(vocab, out_dir / VOCAB_NAME)
    (out_dir / ALIGNMENT_NAME).write_text(
        json.dumps(alignment, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    logger.info("exported %d samples to %s", len(store), out_dir)
