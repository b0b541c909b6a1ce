"""Attribute ratios, bucketing and plain-text control tokens.

Four attributes of a (source, target) sentence pair are expressed as
target/source ratios, discretized into buckets of width 0.05 capped at
2.0 (40 values per attribute), and rendered as plain-text tokens such as
``<NbChars_0.8>`` that are prepended to the source sentence.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .deptree import DepTree, tree_depth
from .errors import ConfigError, InputError
from .lexicon import FrequencyTable, wordrank_score
from .text import Sentence, as_sentence

__all__ = [
    "ControlAttribute",
    "ControlValue",
    "ControlSpec",
    "CANONICAL_ORDER",
    "BUCKET_WIDTH",
    "MIN_BUCKET",
    "MAX_BUCKET",
    "NUM_BUCKETS",
    "all_buckets",
    "bucketize",
    "format_token",
    "parse_token",
    "split_control_prefix",
    "levenshtein_distance",
    "levenshtein_similarity",
    "nbchars_ratio",
    "levsim_ratio",
    "wordrank_ratio",
    "deptreedepth_ratio",
    "control_ratio",
    "annotate_pair",
]


class ControlAttribute(Enum):
    """The four controlled attributes, in their canonical prefix order."""

    NBCHARS = "NbChars"
    LEVSIM = "LevSim"
    WORDRANK = "WordRank"
    DEPTREEDEPTH = "DepTreeDepth"


CANONICAL_ORDER: tuple[ControlAttribute, ...] = (
    ControlAttribute.NBCHARS,
    ControlAttribute.LEVSIM,
    ControlAttribute.WORDRANK,
    ControlAttribute.DEPTREEDEPTH,
)

_ATTRIBUTE_BY_NAME = {attr.value: attr for attr in ControlAttribute}

BUCKET_WIDTH = 0.05
MIN_BUCKET = 0.05
MAX_BUCKET = 2.00
NUM_BUCKETS = 40

_EPS = 1e-9


def bucketize(ratio: float) -> float:
    """Nearest multiple of 0.05 (ties round up), clamped to [0.05, 2.00].

    The lower clamp keeps the image at exactly 40 values; the cap at 2.0
    absorbs arbitrarily large ratios.  Negative ratios are a domain error.
    """
    if ratio < 0:
        raise ValueError(f"ratio must be non-negative, got {ratio}")
    steps = int((ratio / BUCKET_WIDTH) + 0.5 + _EPS)  # half-up with stable ties
    steps = min(max(steps, 1), NUM_BUCKETS)
    return round(steps * BUCKET_WIDTH, 2)


def all_buckets() -> list[float]:
    """The 40 representable bucket values, ascending."""
    return [round(k * BUCKET_WIDTH, 2) for k in range(1, NUM_BUCKETS + 1)]


def _validate_bucket(value: float) -> float:
    steps = round(value / BUCKET_WIDTH)
    if not 1 <= steps <= NUM_BUCKETS or abs(value - steps * BUCKET_WIDTH) > _EPS:
        raise ValueError(
            f"{value} is not a bucket (multiple of {BUCKET_WIDTH} in "
            f"[{MIN_BUCKET}, {MAX_BUCKET}]); bucketize the ratio first"
        )
    return round(steps * BUCKET_WIDTH, 2)


@dataclass(frozen=True)
class ControlValue:
    """One attribute pinned to one bucket."""

    attribute: ControlAttribute
    bucket: float

    def __post_init__(self):
        object.__setattr__(self, "bucket", _validate_bucket(self.bucket))


def _format_bucket(bucket: float) -> str:
    text = f"{bucket:.2f}"
    return text[:-1] if text.endswith("0") else text


def format_token(value: ControlValue) -> str:
    """Render a control value as its wire form, e.g. ``<NbChars_0.3>``."""
    return f"<{value.attribute.value}_{_format_bucket(value.bucket)}>"


_TOKEN_PATTERN = re.compile(r"^<([A-Za-z]+)_(\d+(?:\.\d+)?)>$")


def parse_token(text: str) -> ControlValue:
    """Parse ``<Name_R>``; R is re-bucketized so format∘parse is identity."""
    match = _TOKEN_PATTERN.match(text)
    if not match:
        raise InputError(f"not a control token: {text!r}")
    name, raw_value = match.groups()
    attribute = _ATTRIBUTE_BY_NAME.get(name)
    if attribute is None:
        raise InputError(f"unknown control attribute {name!r} in {text!r}")
    return ControlValue(attribute, bucketize(float(raw_value)))


def split_control_prefix(line: str) -> tuple[list[ControlValue], str]:
    """Split a prepended source line into its control values and the text.

    Leading whitespace-separated fields of the form ``<...>`` are parsed
    as control tokens; the first other field starts the sentence proper.
    """
    fields = line.split()
    values: list[ControlValue] = []
    index = 0
    for index, field in enumerate(fields):
        if field.startswith("<") and field.endswith(">"):
            values.append(parse_token(field))
        else:
            break
    else:
        index = len(fields)
    return values, " ".join(fields[index:])


class ControlSpec:
    """A conditioning request: a set of attributes pinned to buckets.

    Values are kept in canonical attribute order so rendered prefixes and
    tie-breaking are deterministic.
    """

    __slots__ = ("_values",)

    def __init__(self, targets: Mapping[ControlAttribute, float] | Iterable[ControlValue]):
        if isinstance(targets, Mapping):
            pairs = list(targets.items())
        else:
            pairs = [(v.attribute, v.bucket) for v in targets]
        seen: dict[ControlAttribute, float] = {}
        for attribute, bucket in pairs:
            if attribute in seen:
                raise ValueError(f"duplicate attribute {attribute.value} in spec")
            seen[attribute] = bucket
        self._values = tuple(
            ControlValue(attr, seen[attr]) for attr in CANONICAL_ORDER if attr in seen
        )

    @property
    def values(self) -> tuple[ControlValue, ...]:
        return self._values

    def get(self, attribute: ControlAttribute) -> float | None:
        for value in self._values:
            if value.attribute is attribute:
                return value.bucket
        return None

    def prefix(self) -> str:
        """The space-separated token prefix (empty for an empty spec)."""
        return " ".join(format_token(v) for v in self._values)

    def apply(self, line: str) -> str:
        prefix = self.prefix()
        return f"{prefix} {line}" if prefix else line

    def sort_key(self) -> tuple:
        """Lexicographic key over (attribute position, bucket) pairs."""
        return tuple(
            (CANONICAL_ORDER.index(v.attribute), v.bucket) for v in self._values
        )

    def __bool__(self) -> bool:
        return bool(self._values)

    def __eq__(self, other) -> bool:
        return isinstance(other, ControlSpec) and self._values == other._values

    def __hash__(self) -> int:
        return hash(self._values)

    def __repr__(self) -> str:
        inner = ", ".join(f"{v.attribute.value}={v.bucket}" for v in self._values)
        return f"ControlSpec({inner})"

    @classmethod
    def parse(cls, assignments: Iterable[str]) -> "ControlSpec":
        """Build a spec from ``Attr=ratio`` strings; ratios are bucketized."""
        targets: dict[ControlAttribute, float] = {}
        for assignment in assignments:
            name, _, raw = assignment.partition("=")
            attribute = _ATTRIBUTE_BY_NAME.get(name.strip())
            if attribute is None:
                raise ConfigError(f"unknown control attribute {name.strip()!r}")
            try:
                ratio = float(raw)
            except ValueError:
                raise ConfigError(f"bad ratio in {assignment!r}") from None
            if attribute in targets:
                raise ConfigError(f"attribute {attribute.value} set twice")
            targets[attribute] = bucketize(ratio)
        return cls(targets)


def levenshtein_distance(a: str, b: str) -> int:
    """Unit-cost edit distance (insertions, deletions, substitutions)."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        append = current.append
        for j, cb in enumerate(b, start=1):
            cost = previous[j - 1] + (ca != cb)
            up = previous[j] + 1
            if up < cost:
                cost = up
            left = current[j - 1] + 1
            if left < cost:
                cost = left
            append(cost)
        previous = current
    return previous[-1]


def levenshtein_similarity(a: str, b: str) -> float:
    """Normalized character-level similarity in [0, 1].

    Uses the edit distance with substitutions costing 2 (insert/delete 1),
    normalized by the combined length: ``1 - d2 / (|a| + |b|)``.  Equal
    strings score 1.0; strings over disjoint alphabets score 0.0.
    """
    if not a and not b:
        return 1.0
    if a == b:
        return 1.0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return 0.0
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        append = current.append
        for j, cb in enumerate(b, start=1):
            cost = previous[j - 1] + (0 if ca == cb else 2)
            up = previous[j] + 1
            if up < cost:
                cost = up
            left = current[j - 1] + 1
            if left < cost:
                cost = left
            append(cost)
        previous = current
    return 1.0 - previous[-1] / (len(a) + len(b))


SentenceLike = "Sentence | str | Sequence[str]"


def nbchars_ratio(source: SentenceLike, target: SentenceLike) -> float:
    """Character-length ratio target/source on space-joined tokens."""
    src = as_sentence(source)
    tgt = as_sentence(target)
    if src.char_count == 0 or tgt.char_count == 0:
        raise ValueError("nbchars_ratio requires non-empty source and target")
    return tgt.char_count / src.char_count


def levsim_ratio(source: SentenceLike, target: SentenceLike) -> float:
    """Normalized Levenshtein similarity of the space-joined token strings."""
    src = as_sentence(source).detokenized()
    tgt = as_sentence(target).detokenized()
    if not src and not tgt:
        raise ValueError("levsim_ratio requires at least one non-empty side")
    return levenshtein_similarity(src, tgt)


def wordrank_ratio(
    source: SentenceLike, target: SentenceLike, table: FrequencyTable
) -> float:
    """Lexical-complexity ratio: Q3 of target log-ranks over Q3 of source's."""
    source_q3 = wordrank_score(source, table)
    target_q3 = wordrank_score(target, table)
    if source_q3 <= 0:
        raise ValueError(
            "degenerate source: third quartile of log-ranks is zero "
            "(all words at rank 1)"
        )
    return target_q3 / source_q3


def deptreedepth_ratio(source_tree: DepTree, target_trees: Sequence[DepTree]) -> float:
    """Depth ratio target/source; a split target scores its deepest sentence."""
    if isinstance(target_trees, DepTree):
        target_trees = [target_trees]
    if not target_trees:
        raise ValueError("deptreedepth_ratio requires at least one target tree")
    target_depth = max(tree_depth(t) for t in target_trees)
    return target_depth / tree_depth(source_tree)


def control_ratio(
    attribute: ControlAttribute,
    source: SentenceLike,
    target: SentenceLike,
    *,
    freq_table: FrequencyTable | None = None,
    source_tree: DepTree | None = None,
    target_trees: Sequence[DepTree] | None = None,
) -> float:
    """Raw (unbucketed) ratio of one attribute for a (source, target) pair.

    Raises ConfigError when the resource an attribute needs is missing.
    """
    if attribute is ControlAttribute.NBCHARS:
        return nbchars_ratio(source, target)
    if attribute is ControlAttribute.LEVSIM:
        return levsim_ratio(source, target)
    if attribute is ControlAttribute.WORDRANK:
        if freq_table is None:
            raise ConfigError("WordRank requires a frequency table")
        return wordrank_ratio(source, target, freq_table)
    if attribute is ControlAttribute.DEPTREEDEPTH:
        if source_tree is None or not target_trees:
            raise ConfigError("DepTreeDepth requires source and target trees")
        return deptreedepth_ratio(source_tree, target_trees)
    raise ValueError(f"unknown attribute {attribute!r}")


def canonical_attributes(attrs: Iterable[ControlAttribute]) -> list[ControlAttribute]:
    """Deduplicate and order attributes canonically."""
    requested = set(attrs)
    return [attr for attr in CANONICAL_ORDER if attr in requested]


def annotate_pair(
    source: SentenceLike,
    target: SentenceLike,
    attrs: Iterable[ControlAttribute],
    *,
    freq_table: FrequencyTable | None = None,
    source_tree: DepTree | None = None,
    target_trees: Sequence[DepTree] | None = None,
) -> str:
    """Prepend the requested control tokens, computed from this pair.

    Tokens appear in canonical order before the space-joined source
    tokens; an empty attribute list returns the detokenized source.
    """
    src = as_sentence(source)
    values = []
    for attribute in canonical_attributes(attrs):
        ratio = control_ratio(
            attribute,
            src,
            target,
            freq_table=freq_table,
            source_tree=source_tree,
            target_trees=target_trees,
        )
        values.append(ControlValue(attribute, bucketize(ratio)))
    return ControlSpec(values).apply(src.detokenized())
