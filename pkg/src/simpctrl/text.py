"""Tokenization, character/syllable counting and sentence segmentation.

Every other module counts characters and n-grams on the token sequences
produced here, so the rules are deliberately small and stable:

* punctuation is split off into separate tokens;
* hyphenated and apostrophized words stay intact (``F-type``, ``don't``);
* numbers keep internal separators (``1,000``, ``3.14``);
* whitespace is collapsed, no empty tokens are ever produced.

Character counts are taken over the space-joined token sequence,
separator spaces included.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = [
    "Sentence",
    "tokenize",
    "detokenize",
    "count_chars",
    "count_syllables",
    "split_sentences",
    "as_sentence",
    "as_tokens",
]

_TOKEN_RE = re.compile(
    r"\d+(?:[.,]\d+)+"               # numbers with internal separators
    r"|[^\W_]+(?:['’\-][^\W_]+)*"    # words, incl. hyphen/apostrophe compounds
    r"|\S"                           # any other character stands alone
)


def tokenize(text: str) -> list[str]:
    """Split ``text`` into tokens; blank input yields an empty list."""
    return _TOKEN_RE.findall(text)


def detokenize(tokens: Iterable[str]) -> str:
    """Join tokens with single spaces (the canonical surface form)."""
    return " ".join(tokens)


@dataclass(frozen=True)
class Sentence:
    """A sentence as raw text plus its token sequence.

    ``char_count`` is the length of the space-joined tokens, which is the
    length measure used by the compression attribute.
    """

    raw: str
    tokens: tuple[str, ...]

    @classmethod
    def from_raw(cls, text: str) -> "Sentence":
        return cls(raw=text, tokens=tuple(tokenize(text)))

    @classmethod
    def from_tokens(cls, tokens: Iterable[str]) -> "Sentence":
        toks = tuple(tokens)
        return cls(raw=detokenize(toks), tokens=toks)

    @property
    def char_count(self) -> int:
        return len(detokenize(self.tokens))

    def detokenized(self) -> str:
        return detokenize(self.tokens)


def as_sentence(value: "Sentence | str | Sequence[str]") -> Sentence:
    """Coerce raw text, a token sequence or a Sentence into a Sentence."""
    if isinstance(value, Sentence):
        return value
    if isinstance(value, str):
        return Sentence.from_raw(value)
    return Sentence.from_tokens(value)


def as_tokens(value: "Sentence | str | Sequence[str]") -> tuple[str, ...]:
    return as_sentence(value).tokens


def count_chars(sentence: "Sentence | str | Sequence[str]") -> int:
    """Characters of the space-joined token sequence, spaces included."""
    return as_sentence(sentence).char_count


_VOWELS = frozenset("aeiouy")
_VOWEL_GROUP_RE = re.compile(r"[aeiouy]+")


def count_syllables(word: str) -> int:
    """Heuristic syllable count for a single token.

    Counts maximal vowel groups (a, e, i, o, u, y), subtracts one for a
    terminal silent "e" unless the word ends in consonant + "le", and
    floors at 1 for any token containing a letter.  Tokens without
    letters (punctuation, digits) count 0.
    """
    lowered = word.lower()
    if not any(ch.isalpha() for ch in lowered):
        return 0
    groups = len(_VOWEL_GROUP_RE.findall(lowered))
    if lowered.endswith("e"):
        keeps_final_e = (
            len(lowered) >= 3
            and lowered.endswith("le")
            and lowered[-3] not in _VOWELS
        )
        if not keeps_final_e:
            groups -= 1
    return max(groups, 1)


# Sentence segmentation: best-effort and abbreviation-safe.  A terminator
# only splits when the following material does not start lowercase and the
# preceding word is neither a single-letter initial nor a known abbreviation.
_ABBREVIATIONS = frozenset(
    "mr mrs ms dr prof sr jr st vs etc e.g i.e cf fig no vol inc ltd co approx".split()
)
_TERMINATOR_RE = re.compile(r"[.!?]+[\"'”’)\]]*(?=\s|$)")
_LAST_WORD_RE = re.compile(r"(\S+)\s*$")


def _splits_here(text: str, match: re.Match) -> bool:
    rest = text[match.end():].lstrip()
    if rest and rest[0].islower():
        return False
    before = _LAST_WORD_RE.search(text[: match.start()])
    if before:
        word = before.group(1).rstrip(".")
        if len(word) == 1 and word.isalpha() and word.isupper():
            return False
        if word.lower() in _ABBREVIATIONS:
            return False
    return True


def split_sentences(text: str) -> list[str]:
    """Partition ``text`` at terminal punctuation (. ! ?).

    The concatenation of the returned segments equals the input up to
    surrounding whitespace; segments are never empty and a non-blank
    input yields at least one segment.
    """
    if not text.strip():
        return []
    cuts = [m.end() for m in _TERMINATOR_RE.finditer(text) if _splits_here(text, m)]
    segments = []
    start = 0
    for cut in cuts:
        piece = text[start:cut].strip()
        if piece:
            segments.append(piece)
        start = cut
    tail = text[start:].strip()
    if tail:
        segments.append(tail)
    return segments if segments else [text.strip()]
