"""Entity-level scoring, model-comparison statistics and text metrics.

Strict scoring requires exact span boundaries; partial (relaxed) scoring
counts any character overlap as a match. Model comparison uses McNemar on
per-gold-entity correctness and Mann-Whitney-U on per-sample metric lists.
Text metrics cover three readability indices plus length statistics of the
predicted entity surfaces.
"""

import json
import math
import statistics
from dataclasses import dataclass
from importlib import resources
from itertools import combinations
from pathlib import Path

from .corpus import CharSpan
from .errors import ConfigError, ParseError
from .labeling import split_words

VOWELS = set("aeiouy")

MCNEMAR_EXACT_LIMIT = 25  # discordant-pair count below which the exact binomial is used

MWU_EXACT_LIMIT = 12  # pooled size up to which the permutation p-value is exact


@dataclass(frozen=True)
class EntityMatchReport:
    mode: str  # "strict" or "partial"
    tp: int
    fp: int
    fn: int
    per_gold_matched: tuple[bool, ...]

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0


def match_entities(gold, pred, mode: str = "strict") -> EntityMatchReport:
    """Count TP/FP/FN between normalized gold and predicted span sets.

    strict: a pair matches iff (start, end) are identical.
    partial: one-to-one greedy pairing in ascending start order; a pair
    matches iff the spans share at least one character.
    """
    gold = sorted(gold)
    pred = sorted(pred)
    if mode == "strict":
        pred_set = {(s.start, s.end) for s in pred}
        matched = [(g.start, g.end) in pred_set for g in gold]
        tp = sum(matched)
        return EntityMatchReport("strict", tp, len(pred) - tp, len(gold) - tp, tuple(matched))
    if mode == "partial":
        used = [False] * len(pred)
        matched = []
        for g in gold:
            hit = False
            for i, p in enumerate(pred):
                if not used[i] and g.overlaps(p):
                    used[i] = True
                    hit = True
                    break
            matched.append(hit)
        tp = sum(matched)
        return EntityMatchReport("partial", tp, len(pred) - tp, len(gold) - tp, tuple(matched))
    raise ValueError(f"unknown match mode {mode!r}")


def corpus_f1(reports) -> tuple[float, float, float]:
    """Micro-averaged (precision, recall, f1) over per-sample reports."""
    reports = list(reports)
    if not reports:
        raise ValueError("need at least one report")
    total = EntityMatchReport(
        reports[0].mode,
        sum(r.tp for r in reports),
        sum(r.fp for r in reports),
        sum(r.fn for r in reports),
        (),
    )
    return total.precision, total.recall, total.f1


def mcnemar(a_correct, b_correct) -> tuple[int, int, float]:
    """McNemar test on paired correctness vectors.

    Returns (b_count, c_count, two-sided p). Uses the exact binomial tail
    when the discordant count is below 25, a chi-square with continuity
    correction otherwise.
    """
    a_correct = list(a_correct)
    b_correct = list(b_correct)
    if len(a_correct) != len(b_correct):
        raise ValueError(f"paired vectors differ in length: {len(a_correct)} vs {len(b_correct)}")
    b_count = sum(1 for a, b in zip(a_correct, b_correct) if a and not b)
    c_count = sum(1 for a, b in zip(a_correct, b_correct) if not a and b)
    n = b_count + c_count
    if n == 0:
        return 0, 0, 1.0
    if n < MCNEMAR_EXACT_LIMIT:
        tail = sum(math.comb(n, k) for k in range(min(b_count, c_count) + 1))
        p = min(1.0, 2.0 * tail / 2.0**n)
    else:
        stat = (abs(b_count - c_count) - 1) ** 2 / n
        p = math.erfc(math.sqrt(stat / 2.0))  # chi-square sf, 1 dof
    return b_count, c_count, p


def _midranks(values):
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        rank = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = rank
        i = j + 1
    return ranks


def mann_whitney_u(xs, ys) -> tuple[float, float]:
    """Mann-Whitney U (midranks) with a two-sided p-value.

    Small tie-free samples (pooled size <= 12) get an exact permutation p;
    otherwise a normal approximation with tie-corrected variance and 0.5
    continuity correction.
    """
    xs, ys = list(xs), list(ys)
    if not xs or not ys:
        raise ValueError("both samples must be non-empty")
    n, m = len(xs), len(ys)
    pooled = xs + ys
    ranks = _midranks(pooled)
    u = sum(ranks[:n]) - n * (n + 1) / 2.0
    has_ties = len(set(pooled)) < len(pooled)
    if n + m <= MWU_EXACT_LIMIT and not has_ties:
        mid = n * m / 2.0
        observed = abs(u - mid)
        extreme = 0
        total = 0
        for idx in combinations(range(n + m), n):
            u_perm = sum(ranks[i] for i in idx) - n * (n + 1) / 2.0
            total += 1
            if abs(u_perm - mid) >= observed - 1e-12:
                extreme += 1
        return u, extreme / total
    # normal approximation with tie correction
    counts = {}
    for v in pooled:
        counts[v] = counts.get(v, 0) + 1
    tie_term = sum(t**3 - t for t in counts.values())
    nm = n + m
    var = n * m / 12.0 * (nm + 1 - tie_term / (nm * (nm - 1)))
    if var == 0:
        return u, 1.0
    dev = max(0.0, abs(u - n * m / 2.0) - 0.5)
    z = dev / math.sqrt(var)
    p = math.erfc(z / math.sqrt(2.0))
    return u, min(1.0, p)


def syllable_count(word: str) -> int:
    """Heuristic syllable count: maximal vowel groups (y counts), minus a
    terminal silent e not preceded by l, floored at 1."""
    letters = [c for c in word.lower() if c.isalpha()]
    if not letters:
        return 1
    groups = 0
    prev_vowel = False
    for c in letters:
        vowel = c in VOWELS
        if vowel and not prev_vowel:
            groups += 1
        prev_vowel = vowel
    if len(letters) >= 2 and letters[-1] == "e" and letters[-2] not in VOWELS and letters[-2] != "l":
        groups -= 1
    return max(1, groups)


@dataclass(frozen=True)
class TextStats:
    dale_chall: float
    ari: float
    flesch: float
    mean_syllables_per_word: float
    mean_char_length: float

    def as_dict(self) -> dict:
        return {
            "dale_chall": self.dale_chall,
            "ari": self.ari,
            "flesch": self.flesch,
            "mean_syllables_per_word": self.mean_syllables_per_word,
            "mean_char_length": self.mean_char_length,
        }


def load_familiar_words(path=None) -> frozenset:
    """Familiar-word list for Dale-Chall (one lowercase word per line).

    Defaults to the list bundled with the package.
    """
    if path is None:
        text = resources.files("adetag").joinpath("data/familiar_words.txt").read_text(encoding="utf-8")
    else:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"familiar-word list not found: {path}")
        text = path.read_text(encoding="utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


def _sentence_count(text: str) -> int:
    runs = 0
    in_terminator = False
    for c in text:
        if c in ".!?":
            if not in_terminator:
                runs += 1
            in_terminator = True
        else:
            in_terminator = False
    return max(1, runs)


def readability(text: str, familiar_words=None) -> TextStats:
    """Flesch reading ease, automated readability index and Dale-Chall for
    one text, plus mean syllable/character length per word."""
    words = [w.text for w in split_words(text) if any(c.isalpha() for c in w.text)]
    if not words:
        raise ValueError("text contains no words")
    if familiar_words is None:
        familiar_words = load_familiar_words()
    n_words = len(words)
    n_sentences = _sentence_count(text)
    n_syllables = sum(syllable_count(w) for w in words)
    n_letters = sum(sum(c.isalnum() for c in w) for w in words)
    difficult = sum(1 for w in words if w.lower() not in familiar_words)

    flesch = 206.835 - 1.015 * (n_words / n_sentences) - 84.6 * (n_syllables / n_words)
    ari = 4.71 * (n_letters / n_words) + 0.5 * (n_words / n_sentences) - 21.43
    pct_difficult = 100.0 * difficult / n_words
    dale_chall = 0.1579 * pct_difficult + 0.0496 * (n_words / n_sentences)
    if pct_difficult > 5.0:
        dale_chall += 3.6365
    return TextStats(
        dale_chall=dale_chall,
        ari=ari,
        flesch=flesch,
        mean_syllables_per_word=n_syllables / n_words,
        mean_char_length=sum(len(w) for w in words) / n_words,
    )


def prediction_text_stats(surfaces, familiar_words=None) -> dict:
    """Per-entity text metrics aggregated as mean and sample std.

    Returns {metric: (mean, std)}; std is 0.0 for a single entity.
    Entities with no alphabetic word are skipped.
    """
    surfaces = list(surfaces)
    if not surfaces:
        raise ValueError("need at least one predicted entity")
    if familiar_words is None:
        familiar_words = load_familiar_words()
    per_entity = []
    for s in surfaces:
        try:
            per_entity.append(readability(s, familiar_words))
        except ValueError:
            continue
    if not per_entity:
        raise ValueError("no scorable entities (none contain an alphabetic word)")
    out = {}
    for metric in ("dale_chall", "ari", "flesch", "mean_syllables_per_word", "mean_char_length"):
        vals = [getattr(t, metric) for t in per_entity]
        mean = statistics.fmean(vals)
        std = statistics.stdev(vals) if len(vals) > 1 else 0.0
        out[metric] = (mean, std)
    return out


def write_predictions(path, predictions: dict) -> None:
    """Write a predictions jsonl file: {id, spans, surfaces} per line.

    predictions maps sample id -> list of (CharSpan, surface).
    """
    with open(path, "w", encoding="utf-8") as fh:
        for sid, entries in predictions.items():
            rec = {
                "id": sid,
                "spans": [[sp.start, sp.end] for sp, _ in entries],
                "surfaces": [surface for _, surface in entries],
            }
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def load_predictions(path) -> dict:
    """Read a predictions jsonl file into {id: [(CharSpan, surface), ...]}."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                spans = [CharSpan(a, b) for a, b in rec["spans"]]
                surfaces = rec.get("surfaces", [""] * len(spans))
                out[rec["id"]] = list(zip(spans, surfaces))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ParseError(f"{path}:{lineno}: malformed predictions record: {exc}") from exc
    return out
