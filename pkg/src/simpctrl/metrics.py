"""Evaluation metrics: SARI, FKGL, BLEU and compression statistics.

SARI here follows the n-gram multiset formulation with fractional
reference counts.  For every sentence and every order n in 1..4, with
``c_I``/``c_O`` the n-gram counts of the input (source) and output
(prediction) and ``c_R(g)`` the reference count of g averaged over the r
references:

* keep: SYS(g) = min(c_I, c_O),        REF(g) = min(c_I, c_R)
* del:  SYS(g) = max(c_I - c_O, 0),    REF(g) = max(c_I - c_R, 0)
* add:  SYS(g) = [c_O > 0 and c_I = 0], REF(g) = [c_R > 0 and c_I = 0]

Precision is |SYS /\\ REF| / |SYS| and recall |SYS /\\ REF| / |REF|, where
the intersection takes elementwise minima and sizes sum the counts; F1 is
the harmonic mean.  Deletion is scored as full F1 (not precision only).
Per-operation scores average f over the four orders, and SARI averages
the three operations, scaled to [0, 100].  Corpus aggregation is the
macro average of sentence scores.

Zero-division convention: when SYS and REF are both empty at some order,
p = r = f = 1 under the default ``"perfect"`` convention ("nothing to do,
nothing done"); the ``"zero"`` compatibility switch scores those cases 0
instead, for cross-checks against implementations that do the same.
"""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .errors import InputError
from .text import as_sentence, as_tokens, count_syllables, split_sentences, tokenize
from .controls import nbchars_ratio

__all__ = [
    "OrderScore",
    "SentenceSari",
    "SariReport",
    "FkglReport",
    "Histogram",
    "sari",
    "sari_sentence",
    "fkgl",
    "bleu",
    "build_histogram",
    "compression_histogram",
    "OPERATIONS",
    "MAX_ORDER",
    "ZERO_DIVISION_MODES",
]

OPERATIONS = ("add", "keep", "del")
MAX_ORDER = 4
ZERO_DIVISION_MODES = ("perfect", "zero")


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(
        tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)
    )


def _prf(
    sys_counts: dict, ref_counts: dict, both_empty_value: float
) -> "OrderScore":
    sys_total = sum(sys_counts.values())
    ref_total = sum(ref_counts.values())
    if sys_total == 0 and ref_total == 0:
        v = both_empty_value
        return OrderScore(v, v, v)
    overlap = sum(
        min(count, ref_counts.get(gram, 0.0)) for gram, count in sys_counts.items()
    )
    p = overlap / sys_total if sys_total > 0 else 0.0
    r = overlap / ref_total if ref_total > 0 else 0.0
    f = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return OrderScore(p, r, f)


@dataclass(frozen=True)
class OrderScore:
    precision: float
    recall: float
    f1: float


@dataclass
class SentenceSari:
    """Per-sentence SARI decomposition."""

    score: float  # in [0, 100]
    per_operation: dict[str, float]  # operation -> F in [0, 100]
    per_order: dict[tuple[str, int], OrderScore]


def _lower_tokens(value) -> list[str]:
    return [t.lower() for t in as_tokens(value)]


def sari_sentence(
    source,
    prediction,
    references: Sequence,
    *,
    zero_division: str = "perfect",
) -> SentenceSari:
    """Score one (source, prediction, references) triple."""
    if zero_division not in ZERO_DIVISION_MODES:
        raise ValueError(f"zero_division must be one of {ZERO_DIVISION_MODES}")
    if not references:
        raise InputError("every sentence needs at least one reference")
    both_empty = 1.0 if zero_division == "perfect" else 0.0

    src = _lower_tokens(source)
    out = _lower_tokens(prediction)
    refs = [_lower_tokens(r) for r in references]
    num_refs = len(refs)

    per_order: dict[tuple[str, int], OrderScore] = {}
    for n in range(1, MAX_ORDER + 1):
        c_in = _ngram_counts(src, n)
        c_out = _ngram_counts(out, n)
        ref_total: Counter = Counter()
        for ref in refs:
            ref_total.update(_ngram_counts(ref, n))
        c_ref = {gram: count / num_refs for gram, count in ref_total.items()}

        keep_sys = {g: min(c, c_out[g]) for g, c in c_in.items() if g in c_out}
        keep_ref = {
            g: min(c, c_ref[g]) for g, c in c_in.items() if c_ref.get(g, 0.0) > 0
        }
        del_sys = {g: c - c_out[g] for g, c in c_in.items() if c > c_out[g]}
        del_ref = {
            g: c - c_ref.get(g, 0.0)
            for g, c in c_in.items()
            if c > c_ref.get(g, 0.0)
        }
        add_sys = {g: 1 for g in c_out if g not in c_in}
        add_ref = {g: 1 for g in c_ref if g not in c_in}

        per_order[("keep", n)] = _prf(keep_sys, keep_ref, both_empty)
        per_order[("del", n)] = _prf(del_sys, del_ref, both_empty)
        per_order[("add", n)] = _prf(add_sys, add_ref, both_empty)

    per_operation = {
        op: 100.0
        * sum(per_order[(op, n)].f1 for n in range(1, MAX_ORDER + 1))
        / MAX_ORDER
        for op in OPERATIONS
    }
    score = sum(per_operation.values()) / len(OPERATIONS)
    return SentenceSari(score=score, per_operation=per_operation, per_order=per_order)


@dataclass
class SariReport:
    """Corpus SARI with its full decomposition.

    ``sari`` is the macro average of ``sentence_scores``; ``per_operation``
    holds macro-averaged per-operation F scores (0..100); ``per_order``
    holds macro-averaged precision/recall/F1 (0..1) per operation and
    order.  The harmonic-mean identity f = 2pr/(p+r) holds within each
    sentence; averaged rows are reported for inspection only.
    """

    sari: float
    per_operation: dict[str, float]
    per_order: dict[tuple[str, int], OrderScore]
    sentence_scores: list[float]
    zero_division: str = "perfect"

    def to_kv_text(self) -> str:
        lines = [
            f"sari\t{self.sari:.6f}",
            f"zero_division\t{self.zero_division}",
            f"sentences\t{len(self.sentence_scores)}",
        ]
        for op in OPERATIONS:
            lines.append(f"F_{op}\t{self.per_operation[op]:.6f}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer)
        writer.writerow(["operation", "n", "precision", "recall", "f1"])
        for op in OPERATIONS:
            for n in range(1, MAX_ORDER + 1):
                score = self.per_order[(op, n)]
                writer.writerow(
                    [op, n, f"{score.precision:.6f}", f"{score.recall:.6f}", f"{score.f1:.6f}"]
                )
        return buffer.getvalue()


def sari(
    sources: Sequence,
    predictions: Sequence,
    references: Sequence[Sequence],
    *,
    zero_division: str = "perfect",
) -> SariReport:
    """Corpus SARI: macro average over per-sentence scores."""
    if not (len(sources) == len(predictions) == len(references)):
        raise InputError(
            f"aligned inputs required: {len(sources)} sources, "
            f"{len(predictions)} predictions, {len(references)} reference lists"
        )
    if len(sources) == 0:
        raise InputError("need at least one sentence to score")

    sentence_results = [
        sari_sentence(s, p, refs, zero_division=zero_division)
        for s, p, refs in zip(sources, predictions, references)
    ]
    count = len(sentence_results)
    scores = [r.score for r in sentence_results]
    per_operation = {
        op: sum(r.per_operation[op] for r in sentence_results) / count
        for op in OPERATIONS
    }
    per_order = {}
    for op in OPERATIONS:
        for n in range(1, MAX_ORDER + 1):
            per_order[(op, n)] = OrderScore(
                precision=sum(r.per_order[(op, n)].precision for r in sentence_results) / count,
                recall=sum(r.per_order[(op, n)].recall for r in sentence_results) / count,
                f1=sum(r.per_order[(op, n)].f1 for r in sentence_results) / count,
            )
    return SariReport(
        sari=sum(scores) / count,
        per_operation=per_operation,
        per_order=per_order,
        sentence_scores=scores,
        zero_division=zero_division,
    )


@dataclass(frozen=True)
class FkglReport:
    """Corpus-total readability report (lower = simpler)."""

    fkgl: float
    nb_words: int
    nb_sentences: int
    nb_syllables: int

    def to_kv_text(self) -> str:
        return (
            f"fkgl\t{self.fkgl:.6f}\n"
            f"nb_words\t{self.nb_words}\n"
            f"nb_sentences\t{self.nb_sentences}\n"
            f"nb_syllables\t{self.nb_syllables}\n"
        )


def fkgl(predictions: Sequence) -> FkglReport:
    """Flesch-Kincaid grade level over corpus-total counts.

    Words are tokens containing a letter; each prediction may contain
    several sentences, counted via sentence splitting.  No per-sentence
    averaging takes place: the formula applies to corpus totals.
    """
    if len(predictions) == 0:
        raise InputError("need at least one prediction")
    nb_words = 0
    nb_sentences = 0
    nb_syllables = 0
    for prediction in predictions:
        raw = as_sentence(prediction).raw
        nb_sentences += max(len(split_sentences(raw)), 0)
        for token in tokenize(raw):
            syllables = count_syllables(token)
            if syllables > 0:
                nb_words += 1
                nb_syllables += syllables
    if nb_words == 0:
        raise ValueError("cannot compute FKGL on a corpus with no words")
    score = 0.39 * (nb_words / nb_sentences) + 11.8 * (nb_syllables / nb_words) - 15.59
    return FkglReport(
        fkgl=score,
        nb_words=nb_words,
        nb_sentences=nb_sentences,
        nb_syllables=nb_syllables,
    )


def bleu(predictions: Sequence, references: Sequence[Sequence]) -> float:
    """Corpus BLEU in [0, 100], kept only as a copy-baseline sanity check.

    Geometric mean of modified n-gram precisions (orders 1..4) with the
    brevity penalty under the closest-reference-length convention.  Orders
    with no candidate n-grams anywhere in the corpus are dropped from the
    mean so that identical prediction/reference pairs score 100 even for
    very short sentences.
    """
    if len(predictions) != len(references):
        raise InputError(
            f"aligned inputs required: {len(predictions)} predictions, "
            f"{len(references)} reference lists"
        )
    if len(predictions) == 0:
        raise InputError("need at least one prediction")

    matched = [0.0] * (MAX_ORDER + 1)
    total = [0.0] * (MAX_ORDER + 1)
    pred_length = 0
    ref_length = 0
    for prediction, refs in zip(predictions, references):
        if not refs:
            raise InputError("every prediction needs at least one reference")
        pred_tokens = _lower_tokens(prediction)
        ref_token_lists = [_lower_tokens(r) for r in refs]
        pred_length += len(pred_tokens)
        # closest reference length; ties prefer the shorter reference
        ref_length += min(
            (abs(len(r) - len(pred_tokens)), len(r)) for r in ref_token_lists
        )[1]
        for n in range(1, MAX_ORDER + 1):
            pred_counts = _ngram_counts(pred_tokens, n)
            if not pred_counts:
                continue
            max_ref: Counter = Counter()
            for ref_tokens in ref_token_lists:
                for gram, count in _ngram_counts(ref_tokens, n).items():
                    if count > max_ref[gram]:
                        max_ref[gram] = count
            total[n] += sum(pred_counts.values())
            matched[n] += sum(
                min(count, max_ref.get(gram, 0)) for gram, count in pred_counts.items()
            )

    orders = [n for n in range(1, MAX_ORDER + 1) if total[n] > 0]
    if not orders or pred_length == 0:
        return 0.0
    if any(matched[n] == 0 for n in orders):
        return 0.0
    log_precision = sum(math.log(matched[n] / total[n]) for n in orders) / len(orders)
    brevity = 1.0 if pred_length > ref_length else math.exp(1 - ref_length / pred_length)
    return 100.0 * brevity * math.exp(log_precision)


@dataclass
class Histogram:
    """Binned ratio counts plus the raw-value mean."""

    bin_width: float
    rows: list[tuple[float, float, int, float]]  # (bin_low, bin_high, count, density)
    mean: float
    total: int

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer)
        writer.writerow(["bin_low", "bin_high", "count", "density"])
        for low, high, count, density in self.rows:
            writer.writerow([f"{low:.6f}", f"{high:.6f}", count, f"{density:.6f}"])
        return buffer.getvalue()


def build_histogram(values: Sequence[float], bin_width: float) -> Histogram:
    """Bin values into [k*w, (k+1)*w) intervals, contiguous from min to max."""
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    if len(values) == 0:
        raise InputError("cannot build a histogram of zero values")
    indexes = [math.floor((v + 1e-9) / bin_width) for v in values]
    counts = Counter(indexes)
    lo, hi = min(indexes), max(indexes)
    total = len(values)
    rows = []
    for k in range(lo, hi + 1):
        count = counts.get(k, 0)
        rows.append(
            (
                round(k * bin_width, 10),
                round((k + 1) * bin_width, 10),
                count,
                count / (total * bin_width),
            )
        )
    return Histogram(
        bin_width=bin_width, rows=rows, mean=sum(values) / total, total=total
    )


def compression_histogram(
    sources: Sequence, targets: Sequence, bin_width: float = 0.05
) -> Histogram:
    """Distribution of character-length ratios over aligned sentence pairs."""
    if len(sources) != len(targets):
        raise InputError(
            f"aligned inputs required: {len(sources)} sources, {len(targets)} targets"
        )
    ratios = [nbchars_ratio(s, t) for s, t in zip(sources, targets)]
    return build_histogram(ratios, bin_width)
