"""IOB labels at word and subword granularity.

Conversions between character spans, word-level IOB labels and
subword-level IOB labels, including the propagation rule (B -> [B, I, ...])
and the three-rule aggregation back to word level.
"""

import logging
import unicodedata
from dataclasses import dataclass
from enum import IntEnum

from .corpus import CharSpan, normalize_spans

logger = logging.getLogger(__name__)


class Label(IntEnum):
    # Index order O < B < I is the decoding tie-break order.
    O = 0
    B = 1
    I = 2


@dataclass(frozen=True)
class WordToken:
    text: str
    start: int
    end: int


@dataclass(frozen=True)
class LabelSequence:
    labels: tuple[Label, ...]
    granularity: str  # "word" or "subword"

    def __post_init__(self):
        if self.granularity not in ("word", "subword"):
            raise ValueError(f"unknown granularity {self.granularity!r}")

    def __len__(self):
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def split_words(text: str) -> list[WordToken]:
    """Split on unicode whitespace, then peel leading/trailing punctuation
    into standalone tokens. Offsets index into the original text."""
    tokens: list[WordToken] = []
    i = 0
    n = len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        j = i
        while j < n and not text[j].isspace():
            j += 1
        # chunk [i, j): strip punctuation off both ends
        lead = i
        while lead < j and _is_punct(text[lead]):
            tokens.append(WordToken(text[lead], lead, lead + 1))
            lead += 1
        trail = j
        while trail > lead and _is_punct(text[trail - 1]):
            trail -= 1
        if lead < trail:
            tokens.append(WordToken(text[lead:trail], lead, trail))
        for k in range(trail, j):
            tokens.append(WordToken(text[k], k, k + 1))
        i = j
    return tokens


def spans_to_iob(words, spans) -> LabelSequence:
    """Label each word: B on the first word a span touches, I on the rest.

    A word intersecting a span on at least one character counts as inside.
    Spans covering no word are skipped with a warning.
    """
    labels = [Label.O] * len(words)
    for span in spans:
        hit = [i for i, w in enumerate(words) if w.start < span.end and span.start < w.end]
        if not hit:
            logger.warning("span (%d, %d) intersects no word; skipped", span.start, span.end)
            continue
        labels[hit[0]] = Label.B
        for i in hit[1:]:
            labels[i] = Label.I
    return LabelSequence(tuple(labels), "word")


def iob_to_spans(words, labels: LabelSequence) -> tuple[CharSpan, ...]:
    """Decode maximal B/I runs into character spans.

    An orphan I (no preceding B or I) opens a new entity, so every label
    sequence decodes deterministically.
    """
    if len(labels) != len(words):
        raise ValueError(f"got {len(labels)} labels for {len(words)} words")
    spans = []
    run_start = None
    for i, label in enumerate(labels):
        if label == Label.B or (label == Label.I and run_start is None):
            if run_start is not None:
                spans.append(CharSpan(words[run_start].start, words[i - 1].end))
            run_start = i
        elif label == Label.O and run_start is not None:
            spans.append(CharSpan(words[run_start].start, words[i - 1].end))
            run_start = None
    if run_start is not None:
        spans.append(CharSpan(words[run_start].start, words[-1].end))
    return normalize_spans(spans)


def propagate_labels(word_labels: LabelSequence, pieces_per_word) -> LabelSequence:
    """Expand word labels to subword labels: B -> [B, I, ..., I];
    I and O repeat unchanged over the word's pieces."""
    pieces = list(pieces_per_word)
    if len(pieces) != len(word_labels):
        raise ValueError(f"{len(word_labels)} labels but {len(pieces)} piece counts")
    out: list[Label] = []
    for label, k in zip(word_labels, pieces):
        if k < 1:
            raise ValueError(f"piece count must be >= 1, got {k}")
        if label == Label.B:
            out.append(Label.B)
            out.extend([Label.I] * (k - 1))
        else:
            out.extend([label] * k)
    return LabelSequence(tuple(out), "subword")


def aggregate_labels(subword_labels: LabelSequence, pieces_per_word) -> LabelSequence:
    """Collapse each word's subword labels with the first rule that applies:
    all O -> O; any B -> B; any I -> I."""
    pieces = list(pieces_per_word)
    if sum(pieces) != len(subword_labels):
        raise ValueError(f"piece counts sum to {sum(pieces)} but there are {len(subword_labels)} subword labels")
    out = []
    pos = 0
    for k in pieces:
        if k < 1:
            raise ValueError(f"piece count must be >= 1, got {k}")
        group = subword_labels.labels[pos : pos + k]
        pos += k
        if all(l == Label.O for l in group):
            out.append(Label.O)
        elif any(l == Label.B for l in group):
            out.append(Label.B)
        else:
            out.append(Label.I)
    return LabelSequence(tuple(out), "word")
