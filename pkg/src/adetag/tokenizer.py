"""WordPiece-style subword tokenization against a fixed vocabulary.

Greedy longest-match-first segmentation with whole-word UNK fallback,
special-token framing ([CLS] ... [SEP] [PAD]*) and word<->subword
alignment bookkeeping.
"""

import logging
from dataclasses import dataclass
from pathlib import Path

from .errors import ValidationError

logger = logging.getLogger(__name__)

DEFAULT_SPECIALS = {"cls": "[CLS]", "sep": "[SEP]", "pad": "[PAD]", "unk": "[UNK]"}

DEFAULT_MAX_LEN = 128


class Vocabulary:
    """Ordered token vocabulary; line index is the token id."""

    def __init__(self, entries, continuation_prefix="##", lowercase=False, specials=None):
        self.specials = dict(DEFAULT_SPECIALS, **(specials or {}))
        self.continuation_prefix = continuation_prefix
        self.lowercase = lowercase
        self.token_to_id: dict[str, int] = {}
        for tok in entries:
            if tok in self.token_to_id:
                raise ValidationError(f"duplicate vocabulary entry {tok!r}")
            self.token_to_id[tok] = len(self.token_to_id)
        for name, tok in self.specials.items():
            if tok not in self.token_to_id:
                raise ValidationError(f"vocabulary is missing the {name} token {tok!r}")
        self.cls = self.specials["cls"]
        self.sep = self.specials["sep"]
        self.pad = self.specials["pad"]
        self.unk = self.specials["unk"]

    def __len__(self):
        return len(self.token_to_id)

    def __contains__(self, tok):
        return tok in self.token_to_id

    @property
    def tokens(self) -> list[str]:
        return list(self.token_to_id)

    def id_of(self, tok: str) -> int:
        return self.token_to_id[tok]

    def check_alphabet(self, alphabet) -> None:
        """Verify every base-alphabet character has a vocabulary entry
        (guarantees non-UNK coverage for words over that alphabet)."""
        missing = [ch for ch in alphabet if ch not in self.token_to_id]
        if missing:
            raise ValidationError(f"vocabulary is missing base characters: {missing}")


@dataclass(frozen=True)
class TokenizedSample:
    """Subword view of a word sequence: [CLS] pieces... [SEP] [PAD]*."""

    subwords: tuple[str, ...]
    word_alignment: tuple[tuple[int, int], ...]  # (word index, pieces count)
    frame: tuple[int, int]  # positions of cls and sep
    mask: tuple[bool, ...]

    @property
    def length(self) -> int:
        """Unmasked length, cls and sep included."""
        return sum(self.mask)

    @property
    def pieces_per_word(self) -> tuple[int, ...]:
        return tuple(k for _, k in self.word_alignment)

    def content_slice(self) -> slice:
        """Positions of the content pieces (between cls and sep)."""
        return slice(self.frame[0] + 1, self.frame[1])


def wordpiece_tokenize(word: str, vocab: Vocabulary) -> list[str]:
    """Greedy longest-match-first segmentation of one word.

    Continuation pieces (not at the start of the word) must carry the
    vocabulary's continuation prefix. If any position fails to match,
    the whole word becomes a single UNK.
    """
    if not word:
        raise ValueError("cannot tokenize an empty word")
    if vocab.lowercase:
        word = word.lower()
    pieces = []
    start = 0
    while start < len(word):
        end = len(word)
        match = None
        while start < end:
            piece = word[start:end]
            if start > 0:
                piece = vocab.continuation_prefix + piece
            if piece in vocab:
                match = piece
                break
            end -= 1
        if match is None:
            return [vocab.unk]
        pieces.append(match)
        start = end
    return pieces


def encode(words, vocab: Vocabulary, max_len: int = DEFAULT_MAX_LEN) -> TokenizedSample:
    """Tokenize a word sequence into a fixed-length framed subword sample.

    Words that would overflow max_len (cls and sep included) are dropped
    with a warning; the alignment covers only the words kept.
    """
    if max_len < 3:
        raise ValueError(f"max_len must be >= 3, got {max_len}")
    budget = max_len - 2
    subwords = [vocab.cls]
    alignment = []
    used = 0
    for wi, word in enumerate(words):
        pieces = wordpiece_tokenize(word.text, vocab)
        if used + len(pieces) > budget:
            logger.warning("truncating sample at word %d (%r): max_len=%d exceeded", wi, word.text, max_len)
            break
        subwords.extend(pieces)
        alignment.append((wi, len(pieces)))
        used += len(pieces)
    subwords.append(vocab.sep)
    sep_pos = len(subwords) - 1
    n_pad = max_len - len(subwords)
    subwords.extend([vocab.pad] * n_pad)
    mask = [True] * (sep_pos + 1) + [False] * n_pad
    return TokenizedSample(tuple(subwords), tuple(alignment), (0, sep_pos), tuple(mask))


def load_vocab(path, continuation_prefix="##", lowercase=False, specials=None) -> Vocabulary:
    """Read a one-token-per-line UTF-8 vocabulary file."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    entries = [line.rstrip("\n") for line in lines if line.strip()]
    return Vocabulary(entries, continuation_prefix=continuation_prefix, lowercase=lowercase, specials=specials)


def write_vocab(vocab: Vocabulary, path) -> None:
    Path(path).write_text("\n".join(vocab.tokens) + "\n", encoding="utf-8")


def build_fixture_vocab(words, lowercase=False, extra=()) -> Vocabulary:
    """Build a test/desk-scale vocabulary covering the given words.

    Adds every word as a full entry plus single-character fallback pieces,
    so any word over the observed alphabet tokenizes without UNK.
    """
    entries = list(DEFAULT_SPECIALS.values())
    seen = set(entries)
    alphabet = set()
    for word in list(words) + list(extra):
        if lowercase:
            word = word.lower()
        if word not in seen:
            entries.append(word)
            seen.add(word)
        alphabet.update(word)
    for ch in sorted(alphabet):
        for tok in (ch, "##" + ch):
            if tok not in seen:
                entries.append(tok)
                seen.add(tok)
    return Vocabulary(entries, lowercase=lowercase)
