"""Deterministic rule-based simplifier that honors control-token prefixes.

The oracle stands in for a trained sequence model so that annotation,
search and analysis code can be exercised end to end.  It optimizes
constraint satisfaction, not fluency: outputs are synthetic by design.

Constraint stages run in a fixed order chosen so later stages minimally
perturb earlier-satisfied ratios:

1. depth targets < 1.0 split the sentence at clause boundaries;
2. length targets < 1.0 delete parenthetical and trailing tokens at word
   boundaries, never dropping the ratio below target - tolerance;
3. lexical targets < 1.0 substitute rare words with frequent ones;
4. similarity targets < 1.0 apply surface edits (adjunct moves, filler
   insertion);

and the length constraint is re-checked last, winning conflicts.  A
bucket of 1.0 (or an absent token) imposes no constraint, so all-identity
prefixes reproduce the detokenized input exactly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Iterator

from .controls import (
    ControlAttribute,
    levenshtein_similarity,
    split_control_prefix,
)
from .deptree import estimate_depth_heuristic
from .errors import InputError
from .lexicon import (
    FrequencyTable,
    log_rank,
    sentence_log_ranks,
    third_quartile,
)

__all__ = ["OracleConfig", "oracle_simplify", "oracle_lines"]

_TERMINALS = {".", "!", "?"}
_OPENERS = {"(", "["}
_CLOSERS = {")", "]"}
_SPLIT_CONJUNCTIONS = frozenset(
    "and but or because which who when while that since although".split()
)
_FILLERS = ("indeed", "really", "actually", "certainly", "clearly", "simply")


@dataclass
class OracleConfig:
    """Resources and knobs for the rule-based simplifier.

    ``random_seed`` only drives deterministic pseudo-random tie-breaking
    among equal-cost edits: identical config and input always produce
    identical output.
    """

    table: FrequencyTable
    substitution_map: dict[str, str] | None = None
    tolerance: float = 0.05
    random_seed: int = 0

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")


def _chars(tokens: list[str]) -> int:
    return len(" ".join(tokens))


def _sentence_bounds(tokens: list[str]) -> list[tuple[int, int]]:
    """(start, end) index pairs of sentences within a flat token list."""
    bounds = []
    start = 0
    for i, tok in enumerate(tokens):
        if tok in _TERMINALS:
            bounds.append((start, i + 1))
            start = i + 1
    if start < len(tokens):
        bounds.append((start, len(tokens)))
    return bounds or [(0, len(tokens))]


def _split_for_depth(tokens: list[str], target: float, tolerance: float) -> list[str]:
    source_depth = estimate_depth_heuristic(tokens)
    sentences = [list(tokens)]
    while True:
        depth = max(estimate_depth_heuristic(s) for s in sentences)
        if depth / source_depth <= target + tolerance:
            break
        deepest = max(range(len(sentences)), key=lambda i: estimate_depth_heuristic(sentences[i]))
        replacement = _split_once(sentences[deepest])
        if replacement is None:
            break
        sentences[deepest : deepest + 1] = replacement
    return [tok for sentence in sentences for tok in sentence]


def _split_once(tokens: list[str]) -> list[list[str]] | None:
    """Split one sentence at the clause boundary nearest its middle."""
    candidates = []
    for i, tok in enumerate(tokens):
        if tok in {",", ";"} or tok.lower() in _SPLIT_CONJUNCTIONS:
            candidates.append(i)
    middle = len(tokens) / 2
    for i in sorted(candidates, key=lambda i: (abs(i - middle), i)):
        left = tokens[:i]
        right = tokens[i + 1 :]
        if tokens[i] in {",", ";"} and right and right[0].lower() in _SPLIT_CONJUNCTIONS:
            right = right[1:]
        while left and left[-1] in {",", ";"}:
            left = left[:-1]
        if not any(t.isalnum() for t in left) or not any(t.isalnum() for t in right):
            continue
        if left[-1] not in _TERMINALS:
            left = left + ["."]
        right = list(right)
        for k, tok in enumerate(right):
            if any(ch.isalpha() for ch in tok):
                right[k] = tok[:1].upper() + tok[1:]  # new sentence start
                break
        return [left, right]
    return None


def _deletion_order(tokens: list[str]) -> list[int]:
    """Fixed deletion priority: parenthetical spans first, then trailing tokens."""
    protected = set()
    for start, end in _sentence_bounds(tokens):
        if tokens[end - 1] in _TERMINALS:
            protected.add(end - 1)
    for i, tok in enumerate(tokens):
        if tok not in _TERMINALS:
            protected.add(i)  # first content token stays
            break

    order: list[int] = []
    in_paren: list[int] = []
    depth = 0
    for i, tok in enumerate(tokens):
        if tok in _OPENERS:
            depth += 1
        if depth > 0 and i not in protected:
            in_paren.append(i)
        if tok in _CLOSERS and depth > 0:
            depth -= 1
    order.extend(reversed(in_paren))
    seen = set(order)
    for i in range(len(tokens) - 1, -1, -1):
        if i not in seen and i not in protected:
            order.append(i)
    return order


def _compress(tokens: list[str], source_chars: int, target: float, tolerance: float) -> list[str]:
    """Delete tokens until the char ratio is within tolerance of target.

    Candidates are consumed in a fixed order and deletion stops at the
    first candidate that would undershoot target - tolerance, which makes
    the output length monotone in the requested target.
    """
    deleted: set[int] = set()
    current = _chars(tokens)
    for position in _deletion_order(tokens):
        if current / source_chars <= target + tolerance:
            break
        removed = len(tokens[position]) + (1 if len(tokens) - len(deleted) > 1 else 0)
        tentative = current - removed
        if tentative / source_chars < target - tolerance:
            break
        deleted.add(position)
        current = tentative
    return [t for i, t in enumerate(tokens) if i not in deleted]


def _substitute_rare_words(
    tokens: list[str],
    source_tokens: list[str],
    target: float,
    tolerance: float,
    config: OracleConfig,
) -> list[str]:
    table = config.table
    try:
        source_q3 = third_quartile(sentence_log_ranks(source_tokens, table))
    except ValueError:
        return tokens
    if source_q3 <= 0:
        return tokens

    def ratio(current: list[str]) -> float:
        ranks = sentence_log_ranks(current, table)
        if not ranks:
            return 0.0
        return third_quartile(ranks) / source_q3

    positions = [
        i for i, tok in enumerate(tokens) if any(ch.isalpha() for ch in tok)
    ]
    rng = random.Random(config.random_seed)
    groups: dict[float, list[int]] = {}
    for i in positions:
        groups.setdefault(log_rank(tokens[i], table), []).append(i)
    ordered: list[int] = []
    for cost in sorted(groups, reverse=True):  # rarest first
        group = groups[cost]
        rng.shuffle(group)  # deterministic tie-breaking among equal costs
        ordered.extend(group)

    substitutions = config.substitution_map or {}
    fallback_pool = table.top_words(10)
    result = list(tokens)
    fallback_index = 0
    for position in ordered:
        if ratio(result) <= target + tolerance:
            break
        word = result[position]
        replacement = substitutions.get(word.lower())
        if replacement is None and fallback_pool:
            replacement = fallback_pool[fallback_index % len(fallback_pool)]
            fallback_index += 1
        if replacement is None:
            continue
        if log_rank(replacement, config.table) >= log_rank(word, config.table):
            continue
        result[position] = replacement
    return result


def _degrade_similarity(
    tokens: list[str],
    source_text: str,
    target: float,
    tolerance: float,
    config: OracleConfig,
) -> list[str]:
    rng = random.Random(config.random_seed)
    result = list(tokens)

    def similarity() -> float:
        return levenshtein_similarity(source_text, " ".join(result))

    # first try moving a short leading adjunct behind the clause
    if similarity() > target + tolerance and "," in result[:6]:
        comma = result.index(",")
        if 0 < comma <= 5 and len(result) > comma + 1:
            moved = result[comma + 1 :]
            tail = result[:comma]
            if moved[-1] in _TERMINALS:
                result = moved[:-1] + [","] + tail + [moved[-1]]
            else:
                result = moved + [","] + tail

    steps = 0
    while similarity() > target + tolerance and steps < 200:
        filler = _FILLERS[rng.randrange(len(_FILLERS))]
        position = 1 + (steps * 3) % max(len(result), 1)
        result.insert(min(position, len(result)), filler)
        steps += 1
    return result


def oracle_simplify(prepended_source: str, config: OracleConfig) -> str:
    """Simplify one prepended source line into a prediction line.

    The leading control tokens are parsed off the line; attributes absent
    from the prefix impose no constraint.
    """
    values, remainder = split_control_prefix(prepended_source)
    if not remainder.strip():
        raise InputError("no source text after the control-token prefix")
    targets: dict[ControlAttribute, float] = {}
    for value in values:
        if value.attribute in targets:
            raise InputError(f"duplicate control token for {value.attribute.value}")
        targets[value.attribute] = value.bucket

    tokens = remainder.split()
    source_chars = _chars(tokens)
    source_tokens = list(tokens)
    tolerance = config.tolerance

    depth_target = targets.get(ControlAttribute.DEPTREEDEPTH)
    if depth_target is not None and depth_target < 1.0:
        tokens = _split_for_depth(tokens, depth_target, tolerance)

    length_target = targets.get(ControlAttribute.NBCHARS)
    if length_target is not None and length_target < 1.0:
        tokens = _compress(tokens, source_chars, length_target, tolerance)

    lexical_target = targets.get(ControlAttribute.WORDRANK)
    if lexical_target is not None and lexical_target < 1.0:
        tokens = _substitute_rare_words(
            tokens, source_tokens, lexical_target, tolerance, config
        )

    similarity_target = targets.get(ControlAttribute.LEVSIM)
    if similarity_target is not None and similarity_target < 1.0:
        tokens = _degrade_similarity(
            tokens, " ".join(source_tokens), similarity_target, tolerance, config
        )

    # the length constraint wins conflicts introduced by later stages
    if length_target is not None and length_target < 1.0:
        tokens = _compress(tokens, source_chars, length_target, tolerance)

    return " ".join(tokens)


def oracle_lines(lines: Iterable[str], config: OracleConfig) -> Iterator[str]:
    """Stream predictions for an iterable of prepended source lines."""
    for line in lines:
        yield oracle_simplify(line, config)
