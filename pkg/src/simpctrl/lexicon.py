"""Word-frequency table and the quantile machinery behind lexical complexity.

A sentence's lexical complexity score is the third quartile of the natural
log frequency-ranks of its words (rank 1 = most frequent).  Tokens without
any alphabetic character are excluded so punctuation cannot dominate the
quartile; unknown words fall back to rank ``vocab_size + 1``.
"""

from __future__ import annotations

from typing import IO, Iterable, Sequence

import math

import numpy as np

from .errors import ConfigError, InputError
from .text import Sentence, as_tokens

__all__ = [
    "FrequencyTable",
    "load_frequency_list",
    "log_rank",
    "third_quartile",
    "eligible_tokens",
    "sentence_log_ranks",
    "wordrank_score",
]


class FrequencyTable:
    """Immutable word -> frequency rank map (1 = most frequent).

    Lookups are case-insensitive; ranks form the contiguous range
    ``1..vocab_size``.
    """

    __slots__ = ("_rank_of", "_words")

    def __init__(self, words_in_rank_order: Iterable[str]):
        rank_of: dict[str, int] = {}
        words: list[str] = []
        for word in words_in_rank_order:
            key = word.lower()
            if key in rank_of:
                continue  # duplicates keep their first (best) rank
            rank_of[key] = len(words) + 1
            words.append(key)
        self._rank_of = rank_of
        self._words = tuple(words)

    @property
    def vocab_size(self) -> int:
        return len(self._words)

    @property
    def rank_of(self) -> dict[str, int]:
        return dict(self._rank_of)

    def rank(self, word: str) -> int | None:
        """Rank of ``word`` (case-insensitive), or None if unknown."""
        return self._rank_of.get(word.lower())

    def top_words(self, k: int) -> tuple[str, ...]:
        """The ``k`` most frequent words, in rank order."""
        return self._words[:k]

    def __contains__(self, word: str) -> bool:
        return word.lower() in self._rank_of

    def __len__(self) -> int:
        return len(self._words)

    def __repr__(self) -> str:
        return f"FrequencyTable(vocab_size={self.vocab_size})"


def load_frequency_list(stream: IO[str] | Iterable[str]) -> FrequencyTable:
    """Build a FrequencyTable from a word-per-line stream.

    Each line is either ``word`` (rank = line order) or ``word<TAB>count``
    with lines sorted by descending count (ties broken by line order).
    Blank lines are ignored.  A tab-separated line whose second field is
    not numeric raises InputError naming the line.
    """
    words: list[str] = []
    for lineno, line in enumerate(stream, start=1):
        entry = line.rstrip("\r\n")
        if not entry.strip():
            continue
        if "\t" in entry:
            fields = entry.split("\t")
            word, count = fields[0], fields[1]
            try:
                float(count)
            except ValueError:
                raise InputError(
                    f"frequency list line {lineno}: non-numeric count {count!r}"
                ) from None
        else:
            word = entry.strip()
        if not word:
            raise InputError(f"frequency list line {lineno}: empty word field")
        words.append(word)
    return FrequencyTable(words)


def log_rank(word: str, table: FrequencyTable) -> float:
    """Natural log of the word's rank; unknown words get log(vocab_size + 1)."""
    if table.vocab_size == 0:
        raise ConfigError("frequency table is empty")
    rank = table.rank(word)
    if rank is None:
        rank = table.vocab_size + 1
    return math.log(rank)


def third_quartile(values: Sequence[float]) -> float:
    """Q3 by linear interpolation at position 0.75 * (n - 1) of the sorted values."""
    if len(values) == 0:
        raise ValueError("third_quartile of an empty sequence")
    return float(np.percentile(np.asarray(values, dtype=float), 75))


def eligible_tokens(sentence: "Sentence | str | Sequence[str]") -> list[str]:
    """Tokens that enter the quartile: those containing at least one letter."""
    return [t for t in as_tokens(sentence) if any(ch.isalpha() for ch in t)]


def sentence_log_ranks(
    sentence: "Sentence | str | Sequence[str]", table: FrequencyTable
) -> list[float]:
    return [log_rank(t, table) for t in eligible_tokens(sentence)]


def wordrank_score(
    sentence: "Sentence | str | Sequence[str]", table: FrequencyTable
) -> float:
    """Third quartile of the sentence's log-ranks.

    Raises ValueError when the sentence has no eligible token.
    """
    ranks = sentence_log_ranks(sentence, table)
    if not ranks:
        raise ValueError("no eligible (alphabetic) tokens in sentence")
    return third_quartile(ranks)
