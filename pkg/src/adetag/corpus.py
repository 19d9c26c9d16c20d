"""Annotated corpora with character-level entity spans.

Loads jsonl / standoff / tsv corpora, normalizes span annotations and
provides deterministic (optionally stratified) train/validation splits.
All character offsets count unicode scalar values.
"""

import csv
import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError, ValidationError

SPLITS = ("train", "val", "test", "unlabeled")

FORMATS = ("jsonl", "standoff", "tsv")


@dataclass(frozen=True, order=True)
class CharSpan:
    """Half-open character interval [start, end) into a sample's text."""

    start: int
    end: int

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise ValidationError(f"invalid span ({self.start}, {self.end}): need 0 <= start < end")

    def overlaps(self, other: "CharSpan") -> bool:
        return self.start < other.end and other.start < self.end


@dataclass(frozen=True)
class AnnotatedSample:
    id: str
    text: str
    spans: tuple[CharSpan, ...] = ()
    split: str = "unlabeled"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.split not in SPLITS:
            raise ValidationError(f"sample {self.id!r}: unknown split {self.split!r}")
        for s in self.spans:
            if s.end > len(self.text):
                raise ValidationError(f"sample {self.id!r}: span ({s.start}, {s.end}) out of bounds for text of length {len(self.text)}")

    @property
    def positive(self) -> bool:
        return len(self.spans) > 0

    def surfaces(self) -> list[str]:
        return [self.text[s.start : s.end] for s in self.spans]


@dataclass(frozen=True)
class Corpus:
    samples: tuple[AnnotatedSample, ...]

    def __post_init__(self):
        seen = set()
        for s in self.samples:
            if s.id in seen:
                raise ValidationError(f"duplicate sample id {s.id!r}")
            seen.add(s.id)

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def by_id(self, sample_id: str) -> AnnotatedSample:
        for s in self.samples:
            if s.id == sample_id:
                return s
        raise KeyError(sample_id)

    def subset(self, split: str) -> "Corpus":
        return Corpus(tuple(s for s in self.samples if s.split == split))

    def with_split(self, split: str) -> "Corpus":
        return Corpus(tuple(AnnotatedSample(s.id, s.text, s.spans, split, dict(s.meta)) for s in self.samples))


def normalize_spans(spans) -> tuple[CharSpan, ...]:
    """Sort spans by start and merge any that overlap or touch."""
    ordered = sorted(spans)
    merged: list[CharSpan] = []
    for span in ordered:
        if merged and span.start <= merged[-1].end:
            last = merged.pop()
            merged.append(CharSpan(last.start, max(last.end, span.end)))
        else:
            merged.append(span)
    return tuple(merged)


def _make_sample(sid, text, raw_spans, split, meta, where) -> AnnotatedSample:
    try:
        spans = normalize_spans(CharSpan(int(a), int(b)) for a, b in raw_spans)
        return AnnotatedSample(str(sid), text, spans, split or "unlabeled", meta or {})
    except ValidationError as exc:
        raise ValidationError(f"{where}: {exc}") from exc


def _load_jsonl(path: Path) -> list[AnnotatedSample]:
    samples = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                sid, text = rec["id"], rec["text"]
                raw_spans = rec.get("spans", [])
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ParseError(f"{path}:{lineno}: malformed jsonl record: {exc}") from exc
            samples.append(_make_sample(sid, text, raw_spans, rec.get("split"), rec.get("meta"), f"{path}:{lineno}"))
    return samples


def _load_standoff(path: Path, annotation_type: str) -> list[AnnotatedSample]:
    # Directory of <doc>.txt files, each with a matching <doc>.ann file holding
    # lines "T<k>\t<TYPE> <start> <end>\t<surface>".
    root = Path(path)
    samples = []
    for txt in sorted(root.glob("*.txt")):
        text = txt.read_text(encoding="utf-8")
        ann = txt.with_suffix(".ann")
        raw_spans = []
        if ann.exists():
            for lineno, line in enumerate(ann.read_text(encoding="utf-8").splitlines(), 1):
                if not line.strip() or not line.startswith("T"):
                    continue
                try:
                    _, body = line.split("\t", 1)
                    anno = body.split("\t")[0]
                    atype, start, end = anno.split()[:3]
                except ValueError as exc:
                    raise ParseError(f"{ann}:{lineno}: malformed standoff annotation: {line!r}") from exc
                if atype == annotation_type:
                    raw_spans.append((int(start), int(end)))
        samples.append(_make_sample(txt.stem, text, raw_spans, None, {"source": "standoff"}, str(txt)))
    return samples


def _load_tsv(path: Path) -> list[AnnotatedSample]:
    # Columns: id, begin, end, type, extraction, text. Several rows may share
    # an id (one per span); empty begin/end marks a negative sample.
    grouped: dict[str, dict] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh, delimiter="\t")
        required = {"id", "begin", "end", "text"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ParseError(f"{path}: tsv header must include columns {sorted(required)}")
        for lineno, row in enumerate(reader, 2):
            sid = row["id"]
            entry = grouped.setdefault(sid, {"text": row["text"], "spans": []})
            if row["text"] != entry["text"]:
                raise ParseError(f"{path}:{lineno}: conflicting text for id {sid!r}")
            if row["begin"].strip() and row["end"].strip():
                try:
                    entry["spans"].append((int(row["begin"]), int(row["end"])))
                except ValueError as exc:
                    raise ParseError(f"{path}:{lineno}: non-integer span bounds") from exc
    return [
        _make_sample(sid, entry["text"], entry["spans"], None, {"source": "tsv"}, f"{path} id={sid}")
        for sid, entry in grouped.items()
    ]


def load_corpus(path, format: str = "jsonl", annotation_type: str = "ADR") -> Corpus:
    """Load a corpus file (or standoff directory) in the given format.

    Spans are normalized on load; samples without spans are kept as
    negative samples.
    """
    path = Path(path)
    if not path.exists():
        raise ParseError(f"no such file: {path}")
    if format == "jsonl":
        return Corpus(tuple(_load_jsonl(path)))
    if format == "standoff":
        return Corpus(tuple(_load_standoff(path, annotation_type)))
    if format == "tsv":
        return Corpus(tuple(_load_tsv(path)))
    raise ValueError(f"unknown corpus format {format!r}")


def write_corpus(corpus: Corpus, path) -> None:
    """Write canonical jsonl; load_corpus() reproduces the corpus exactly."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for s in corpus:
            rec = {
                "id": s.id,
                "text": s.text,
                "spans": [[sp.start, sp.end] for sp in s.spans],
                "split": s.split,
            }
            if s.meta:
                rec["meta"] = s.meta
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=False) + "\n")


def split_corpus(corpus: Corpus, ratio: float, seed: int, stratify: bool = True) -> tuple[Corpus, Corpus]:
    """Deterministically split into (train, val) parts.

    With stratify, positives (>= 1 span) and negatives are split separately
    so both parts keep the corpus' class proportions; the first part gets
    floor(ratio * n) samples per stratum.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"ratio must be in (0, 1), got {ratio}")
    if len(corpus) == 0:
        raise ValueError("cannot split an empty corpus")
    strata: list[list[AnnotatedSample]]
    if stratify:
        strata = [
            [s for s in corpus if s.positive],
            [s for s in corpus if not s.positive],
        ]
    else:
        strata = [list(corpus)]
    rng = random.Random(seed)
    first: list[AnnotatedSample] = []
    second: list[AnnotatedSample] = []
    for stratum in strata:
        shuffled = list(stratum)
        rng.shuffle(shuffled)
        k = int(len(stratum) * ratio)
        first.extend(shuffled[:k])
        second.extend(shuffled[k:])
    order = {s.id: i for i, s in enumerate(corpus)}
    first.sort(key=lambda s: order[s.id])
    second.sort(key=lambda s: order[s.id])
    retag = lambda part, tag: Corpus(tuple(AnnotatedSample(s.id, s.text, s.spans, tag, dict(s.meta)) for s in part))
    return retag(first, "train"), retag(second, "val")
