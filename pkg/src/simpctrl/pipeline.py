"""Corpus-level orchestration: annotation, fixed-ratio control, ratio
search and the distributional analyses.

Corpora are plain UTF-8 text files, one sentence per line, aligned by
line number; references come as N parallel files.  Optional CoNLL-U
sidecars supply one tree per line.
"""

from __future__ import annotations

import csv
import io
import statistics
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Generator, Iterable, Iterator, Mapping, Sequence

from .controls import (
    CANONICAL_ORDER,
    ControlAttribute,
    ControlSpec,
    ControlValue,
    bucketize,
    canonical_attributes,
    control_ratio,
    levsim_ratio,
    nbchars_ratio,
    wordrank_ratio,
)
from .deptree import DepTree, estimate_depth_heuristic, tree_depth
from .errors import ConfigError, InputError, SystemRunError
from .lexicon import FrequencyTable
from .metrics import Histogram, build_histogram, fkgl, sari
from .systems import SystemFn
from .text import split_sentences

__all__ = [
    "ParallelCorpus",
    "RatioGrid",
    "AnnotationResult",
    "GridSearchResult",
    "AblationResult",
    "CrossInfluenceResult",
    "RatioDistribution",
    "annotate_lines",
    "annotate_corpus",
    "apply_fixed_ratios",
    "grid_search_ratios",
    "ablation_schedule",
    "run_ablation",
    "cross_influence_analysis",
    "DEFAULT_ANALYSIS_BUCKETS",
]


@dataclass
class ParallelCorpus:
    """Aligned corpus slices; absent parts stay None."""

    sources: list[str]
    targets: list[str] | None = None
    references: list[list[str]] | None = None
    source_trees: list[DepTree] | None = None
    target_trees: list[DepTree] | None = None

    def __post_init__(self):
        n = len(self.sources)
        for name in ("targets", "references", "source_trees", "target_trees"):
            part = getattr(self, name)
            if part is not None and len(part) != n:
                raise InputError(
                    f"{name} has {len(part)} entries for {n} sources"
                )
        if self.references is not None and any(not refs for refs in self.references):
            raise InputError("every sentence needs at least one reference")


def _require_resources(
    attrs: Sequence[ControlAttribute],
    *,
    freq_table: FrequencyTable | None,
    have_trees: bool,
) -> None:
    if ControlAttribute.WORDRANK in attrs and freq_table is None:
        raise ConfigError("WordRank annotation requires a frequency table")
    if ControlAttribute.DEPTREEDEPTH in attrs and not have_trees:
        raise ConfigError("DepTreeDepth annotation requires CoNLL-U trees")


def annotate_lines(
    pairs: Iterable[tuple],
    attrs: Sequence[ControlAttribute],
    *,
    freq_table: FrequencyTable | None = None,
    counts: dict | None = None,
) -> Iterator[str]:
    """Stream annotated source lines for (source, target[, src_tree, tgt_tree]) pairs.

    Per-line attribute failures (degenerate pairs in large auto-aligned
    corpora) fall back to bucket 1.0 instead of aborting; the fallback
    count accumulates in ``counts["fallbacks"]`` when a dict is passed.
    """
    ordered = canonical_attributes(attrs)
    for pair in pairs:
        source, target = pair[0], pair[1]
        source_tree = pair[2] if len(pair) > 2 else None
        target_tree = pair[3] if len(pair) > 3 else None
        values = []
        for attribute in ordered:
            try:
                ratio = control_ratio(
                    attribute,
                    source,
                    target,
                    freq_table=freq_table,
                    source_tree=source_tree,
                    target_trees=[target_tree] if target_tree is not None else None,
                )
                bucket = bucketize(ratio)
            except ValueError:
                bucket = 1.0
                if counts is not None:
                    counts["fallbacks"] = counts.get("fallbacks", 0) + 1
            values.append(ControlValue(attribute, bucket))
        yield ControlSpec(values).apply(" ".join(str(source).split()))


@dataclass
class AnnotationResult:
    lines: list[str]
    fallbacks: int


def annotate_corpus(
    corpus: ParallelCorpus,
    attrs: Sequence[ControlAttribute],
    *,
    freq_table: FrequencyTable | None = None,
) -> AnnotationResult:
    """Annotate a whole corpus in memory (the CLI streams instead)."""
    if corpus.targets is None:
        raise ConfigError("annotation requires a corpus with targets")
    ordered = canonical_attributes(attrs)
    _require_resources(
        ordered,
        freq_table=freq_table,
        have_trees=corpus.source_trees is not None and corpus.target_trees is not None,
    )
    if corpus.source_trees is not None and corpus.target_trees is not None:
        pairs = zip(corpus.sources, corpus.targets, corpus.source_trees, corpus.target_trees)
    else:
        pairs = zip(corpus.sources, corpus.targets)
    counts: dict = {}
    lines = list(annotate_lines(pairs, ordered, freq_table=freq_table, counts=counts))
    return AnnotationResult(lines=lines, fallbacks=counts.get("fallbacks", 0))


def apply_fixed_ratios(sources: Iterable[str], spec: ControlSpec) -> Iterator[str]:
    """Prepend the same control-token prefix to every line."""
    prefix = spec.prefix()
    for line in sources:
        text = " ".join(str(line).split())
        yield f"{prefix} {text}" if prefix else text


@dataclass
class RatioGrid:
    """Candidate buckets per attribute; the search space is their product."""

    candidates: Mapping[ControlAttribute, Sequence[float]]

    def __post_init__(self):
        validated = {}
        for attribute, buckets in self.candidates.items():
            if not buckets:
                raise ValueError(f"empty candidate list for {attribute.value}")
            validated[attribute] = [ControlValue(attribute, b).bucket for b in buckets]
        self.candidates = validated

    def specs(self) -> list[ControlSpec]:
        attrs = [a for a in CANONICAL_ORDER if a in self.candidates]
        combos = product(*(self.candidates[a] for a in attrs))
        return [ControlSpec(dict(zip(attrs, combo))) for combo in combos]

    @classmethod
    def parse(cls, text: str) -> "RatioGrid":
        """Parse ``Attr=0.25,0.5;Attr2=1.0`` grid descriptions."""
        candidates: dict[ControlAttribute, list[float]] = {}
        for part in text.split(";"):
            part = part.strip()
            if not part:
                continue
            name, _, values = part.partition("=")
            attribute = next(
                (a for a in ControlAttribute if a.value == name.strip()), None
            )
            if attribute is None:
                raise ConfigError(f"unknown attribute {name.strip()!r} in grid")
            try:
                buckets = [bucketize(float(v)) for v in values.split(",") if v.strip()]
            except ValueError:
                raise ConfigError(f"bad bucket list in grid part {part!r}") from None
            if not buckets:
                raise ConfigError(f"no buckets given for {attribute.value}")
            candidates[attribute] = buckets
        if not candidates:
            raise ConfigError("empty grid")
        return cls(candidates)


@dataclass
class GridRow:
    spec: ControlSpec
    sari: float
    fkgl: float


@dataclass
class GridSearchResult:
    best_spec: ControlSpec
    best_sari: float
    rows: list[GridRow]

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer)
        writer.writerow(["spec", "sari", "fkgl"])
        for row in self.rows:
            writer.writerow([row.spec.prefix(), f"{row.sari:.6f}", f"{row.fkgl:.6f}"])
        return buffer.getvalue()


def grid_search_ratios(
    system: SystemFn,
    validation: ParallelCorpus,
    grid: RatioGrid,
    *,
    zero_division: str = "perfect",
) -> GridSearchResult:
    """Exhaustively evaluate the grid and return the SARI argmax.

    Ties break deterministically toward the lexicographically smallest
    spec in canonical attribute order, so the result does not depend on
    grid enumeration order.
    """
    if validation.references is None:
        raise ConfigError("grid search requires validation references")
    rows: list[GridRow] = []
    for spec in grid.specs():
        prepped = list(apply_fixed_ratios(validation.sources, spec))
        try:
            predictions = system(prepped)
        except SystemRunError as exc:
            raise SystemRunError(f"system failed on spec {spec!r}: {exc}") from exc
        sari_score = sari(
            validation.sources,
            predictions,
            validation.references,
            zero_division=zero_division,
        ).sari
        try:
            fkgl_score = fkgl(predictions).fkgl
        except ValueError:
            fkgl_score = float("nan")  # degenerate predictions; SARI still ranks
        rows.append(GridRow(spec=spec, sari=sari_score, fkgl=fkgl_score))
    best = min(rows, key=lambda row: (-row.sari, row.spec.sort_key()))
    return GridSearchResult(best_spec=best.spec, best_sari=best.sari, rows=rows)


def ablation_schedule(
    attrs: Sequence[ControlAttribute],
) -> Generator[list[tuple[ControlAttribute, ...]], tuple[ControlAttribute, ...], None]:
    """Greedy forward-selection plan as a coroutine.

    Yields one round of candidate attribute sets at a time (round 1: all
    singletons; round i+1: the winner extended by each remaining
    attribute) and expects the consumer to ``send`` back the winning set
    of the round just yielded.  Over n attributes this emits
    n + (n-1) + ... + 1 candidate sets.
    """
    pool = canonical_attributes(attrs)
    if not pool:
        raise ValueError("attribute pool must be non-empty")
    selected: tuple[ControlAttribute, ...] = ()
    remaining = list(pool)
    while remaining:
        candidates = [selected + (attr,) for attr in remaining]
        winner = yield candidates
        if winner is None or tuple(winner) not in candidates:
            raise ValueError(
                "send(winning_set) with one of the candidate sets just yielded"
            )
        winner = tuple(winner)
        added = next(a for a in winner if a not in selected)
        selected = winner
        remaining.remove(added)


@dataclass
class AblationRound:
    candidates: list[tuple[ControlAttribute, ...]]
    scores: list[float]
    winner: tuple[ControlAttribute, ...]


@dataclass
class AblationResult:
    rounds: list[AblationRound]
    best_set: tuple[ControlAttribute, ...]
    best_score: float

    @property
    def total_candidates(self) -> int:
        return sum(len(r.candidates) for r in self.rounds)


def run_ablation(
    attrs: Sequence[ControlAttribute],
    evaluate: Callable[[tuple[ControlAttribute, ...]], float],
) -> AblationResult:
    """Drive the forward-selection schedule with an evaluation callback.

    ``evaluate`` scores an attribute set (typically via grid search); per
    round the best-scoring candidate wins, ties preferring the earlier
    candidate in canonical order.
    """
    schedule = ablation_schedule(attrs)
    rounds: list[AblationRound] = []
    best_overall: tuple[ControlAttribute, ...] | None = None
    best_score = float("-inf")
    try:
        candidates = next(schedule)
        while True:
            scores = [evaluate(c) for c in candidates]
            winner_index = max(range(len(candidates)), key=lambda i: (scores[i], -i))
            winner = candidates[winner_index]
            rounds.append(AblationRound(candidates, scores, winner))
            if scores[winner_index] > best_score:
                best_score = scores[winner_index]
                best_overall = winner
            candidates = schedule.send(winner)
    except StopIteration:
        pass
    assert best_overall is not None
    return AblationResult(rounds=rounds, best_set=best_overall, best_score=best_score)


DEFAULT_ANALYSIS_BUCKETS = (0.25, 0.50, 0.75, 1.00)

_MEASURED_LABELS = {
    ControlAttribute.NBCHARS: "NbChars",
    ControlAttribute.LEVSIM: "LevSim",
    ControlAttribute.WORDRANK: "WordRank",
    ControlAttribute.DEPTREEDEPTH: "DepTreeDepth",
}


@dataclass
class RatioDistribution:
    """Summary of one measured-attribute distribution."""

    values: list[float]
    mean: float
    median: float
    histogram: Histogram

    @classmethod
    def from_values(cls, values: Sequence[float], bin_width: float) -> "RatioDistribution":
        values = list(values)
        return cls(
            values=values,
            mean=sum(values) / len(values),
            median=statistics.median(values),
            histogram=build_histogram(values, bin_width),
        )


@dataclass
class CrossInfluenceResult:
    """Measured output-attribute distributions per requested target bucket."""

    controlled: ControlAttribute
    buckets: list[float]
    constrained: bool
    # (bucket label, measured attribute) -> distribution; ground-truth rows
    # use the label "ground_truth"
    distributions: dict[tuple[str, ControlAttribute], RatioDistribution]
    metadata: dict = field(default_factory=dict)
    skipped: int = 0

    def distribution(
        self, bucket: "float | str", measured: ControlAttribute
    ) -> RatioDistribution:
        label = bucket if isinstance(bucket, str) else f"{bucket:g}"
        return self.distributions[(label, measured)]

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer)
        writer.writerow(
            ["controlled", "target_bucket", "measured", "bin_low", "bin_high", "count", "density"]
        )
        for (label, measured), dist in sorted(
            self.distributions.items(), key=lambda kv: (kv[0][0], kv[0][1].value)
        ):
            for low, high, count, density in dist.histogram.rows:
                writer.writerow(
                    [
                        self.controlled.value,
                        label,
                        _MEASURED_LABELS[measured],
                        f"{low:.6f}",
                        f"{high:.6f}",
                        count,
                        f"{density:.6f}",
                    ]
                )
        return buffer.getvalue()

    def summary_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer)
        writer.writerow(["controlled", "target_bucket", "measured", "count", "mean", "median"])
        for (label, measured), dist in sorted(
            self.distributions.items(), key=lambda kv: (kv[0][0], kv[0][1].value)
        ):
            writer.writerow(
                [
                    self.controlled.value,
                    label,
                    _MEASURED_LABELS[measured],
                    len(dist.values),
                    f"{dist.mean:.6f}",
                    f"{dist.median:.6f}",
                ]
            )
        return buffer.getvalue()


def _heuristic_depth_ratio(source: str, prediction: str) -> float:
    """Depth ratio with heuristic depths; a split prediction scores its deepest part."""
    source_depth = estimate_depth_heuristic(source)
    parts = split_sentences(prediction) or [prediction]
    prediction_depth = max(estimate_depth_heuristic(p) for p in parts)
    return prediction_depth / source_depth


def _measure_ratios(
    sources: Sequence[str],
    outputs: Sequence[str],
    measured: Sequence[ControlAttribute],
    *,
    freq_table: FrequencyTable | None,
    source_trees: Sequence[DepTree] | None,
) -> tuple[dict[ControlAttribute, list[float]], int]:
    values: dict[ControlAttribute, list[float]] = {attr: [] for attr in measured}
    skipped = 0
    for i, (source, output) in enumerate(zip(sources, outputs)):
        for attr in measured:
            try:
                if attr is ControlAttribute.NBCHARS:
                    ratio = nbchars_ratio(source, output)
                elif attr is ControlAttribute.LEVSIM:
                    ratio = levsim_ratio(source, output)
                elif attr is ControlAttribute.WORDRANK:
                    ratio = wordrank_ratio(source, output, freq_table)
                else:
                    if source_trees is not None:
                        source_depth = tree_depth(source_trees[i])
                        parts = split_sentences(output) or [output]
                        ratio = max(
                            estimate_depth_heuristic(p) for p in parts
                        ) / source_depth
                    else:
                        ratio = _heuristic_depth_ratio(source, output)
                values[attr].append(ratio)
            except ValueError:
                skipped += 1
    return values, skipped


def cross_influence_analysis(
    system: SystemFn,
    corpus: ParallelCorpus,
    controlled_attr: ControlAttribute,
    target_buckets: Sequence[float] | None = None,
    *,
    constrain_nbchars: bool = False,
    freq_table: FrequencyTable | None = None,
    bin_width: float = 0.05,
) -> CrossInfluenceResult:
    """Measure how one control token influences all four output attributes.

    For each target bucket the sources are prepended with the controlled
    attribute at that bucket (plus ``<NbChars_1.0>`` in constrained mode),
    run through the system, and the output attribute ratios of each
    (source, prediction) pair are collected into distributions.  When
    references are present, ground-truth distributions over
    (source, reference) pairs are included under the label
    ``"ground_truth"``.  WordRank is only measured when a frequency table
    is supplied; depths fall back to the heuristic estimator when no
    trees are present, flagged in the metadata.
    """
    buckets = [ControlValue(controlled_attr, b).bucket for b in (
        target_buckets if target_buckets is not None else DEFAULT_ANALYSIS_BUCKETS
    )]
    measured = [
        attr
        for attr in CANONICAL_ORDER
        if attr is not ControlAttribute.WORDRANK or freq_table is not None
    ]
    distributions: dict[tuple[str, ControlAttribute], RatioDistribution] = {}
    skipped = 0
    for bucket in buckets:
        targets = {controlled_attr: bucket}
        if constrain_nbchars and controlled_attr is not ControlAttribute.NBCHARS:
            targets[ControlAttribute.NBCHARS] = 1.0
        spec = ControlSpec(targets)
        prepped = list(apply_fixed_ratios(corpus.sources, spec))
        predictions = system(prepped)
        if len(predictions) != len(corpus.sources):
            raise SystemRunError(
                f"system returned {len(predictions)} predictions for "
                f"{len(corpus.sources)} sources at bucket {bucket:g}"
            )
        values, missed = _measure_ratios(
            corpus.sources,
            predictions,
            measured,
            freq_table=freq_table,
            source_trees=corpus.source_trees,
        )
        skipped += missed
        for attr, ratios in values.items():
            if ratios:
                distributions[(f"{bucket:g}", attr)] = RatioDistribution.from_values(
                    ratios, bin_width
                )
    if corpus.references is not None:
        flat_sources = []
        flat_refs = []
        flat_trees: list[DepTree] | None = [] if corpus.source_trees is not None else None
        for i, (source, refs) in enumerate(zip(corpus.sources, corpus.references)):
            for ref in refs:
                flat_sources.append(source)
                flat_refs.append(ref)
                if flat_trees is not None:
                    flat_trees.append(corpus.source_trees[i])
        values, missed = _measure_ratios(
            flat_sources,
            flat_refs,
            measured,
            freq_table=freq_table,
            source_trees=flat_trees,
        )
        skipped += missed
        for attr, ratios in values.items():
            if ratios:
                distributions[("ground_truth", attr)] = RatioDistribution.from_values(
                    ratios, bin_width
                )
    metadata = {
        "controlled": controlled_attr.value,
        "constrain_nbchars": constrain_nbchars,
        "wordrank_measured": freq_table is not None,
        "depth_source": "conllu" if corpus.source_trees is not None else "heuristic",
        "depth_prediction": "heuristic",
    }
    return CrossInfluenceResult(
        controlled=controlled_attr,
        buckets=buckets,
        constrained=constrain_nbchars,
        distributions=distributions,
        metadata=metadata,
        skipped=skipped,
    )
