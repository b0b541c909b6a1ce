"""Command-line interface binding the toolkit into batch workflows.

Exit codes: 0 success, 1 input/format error, 2 configuration error,
3 external-system failure.  Every run records a JSON manifest (command,
resolved flags, input digests, tool version, metric conventions) next to
its outputs; re-running with identical inputs reproduces byte-identical
outputs and manifest.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from . import __version__
from .controls import ControlAttribute, ControlSpec, canonical_attributes
from .deptree import parse_conllu
from .errors import ConfigError, InputError, SystemRunError
from .lexicon import load_frequency_list
from .metrics import bleu, compression_histogram, fkgl, sari
from .oracle import OracleConfig, oracle_simplify
from .pipeline import (
    DEFAULT_ANALYSIS_BUCKETS,
    ParallelCorpus,
    RatioGrid,
    annotate_lines,
    apply_fixed_ratios,
    cross_influence_analysis,
    grid_search_ratios,
)
from .systems import resolve_system

_CONVENTIONS = {
    "log_base": "e",
    "depth_convention": "root-attached node has depth 1",
    "bucket_width": 0.05,
    "bucket_cap": 2.0,
}


def _read_lines(path: str) -> list[str]:
    try:
        with open(path, encoding="utf-8") as handle:
            return [line.rstrip("\n").rstrip("\r") for line in handle]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _iter_lines(path: str) -> Iterator[str]:
    try:
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                yield line.rstrip("\n").rstrip("\r")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _digest(path: str) -> str:
    sha = hashlib.sha256()
    try:
        with open(path, "rb") as handle:
            for chunk in iter(lambda: handle.read(1 << 16), b""):
                sha.update(chunk)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    return sha.hexdigest()


def _write_manifest(
    destination: Path,
    command: str,
    options: dict,
    inputs: dict[str, "str | list[str] | None"],
    extra: dict | None = None,
) -> None:
    digests = {}
    for name, value in inputs.items():
        if value is None:
            continue
        if isinstance(value, (list, tuple)):
            digests[name] = [{"path": v, "sha256": _digest(v)} for v in value]
        else:
            digests[name] = {"path": value, "sha256": _digest(value)}
    manifest = {
        "tool": "simpctrl",
        "version": __version__,
        "command": command,
        "options": options,
        "inputs": digests,
        "conventions": dict(_CONVENTIONS, **(extra or {})),
    }
    destination.write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _manifest_for_file(out_path: str) -> Path:
    return Path(str(out_path) + ".manifest.json")


def _parse_attrs(text: str) -> list[ControlAttribute]:
    names = [part.strip() for part in text.split(",") if part.strip()]
    attrs = []
    by_name = {a.value: a for a in ControlAttribute}
    for name in names:
        if name not in by_name:
            raise ConfigError(f"unknown attribute {name!r}")
        attrs.append(by_name[name])
    return canonical_attributes(attrs)


def _load_freq(path: str | None):
    if path is None:
        return None
    with open(path, encoding="utf-8") as handle:
        return load_frequency_list(handle)


def _load_trees(path: str | None):
    if path is None:
        return None
    with open(path, encoding="utf-8") as handle:
        return parse_conllu(handle)


def _check_aligned(name_a: str, lines_a: Sequence, name_b: str, lines_b: Sequence):
    if len(lines_a) != len(lines_b):
        raise InputError(
            f"{name_a} has {len(lines_a)} lines but {name_b} has {len(lines_b)}"
        )


def cmd_annotate(args: argparse.Namespace) -> int:
    attrs = _parse_attrs(args.attrs)
    freq_table = _load_freq(args.freq)
    if ControlAttribute.WORDRANK in attrs and freq_table is None:
        raise ConfigError("--attrs WordRank requires --freq")
    source_trees = _load_trees(args.conllu_src)
    target_trees = _load_trees(args.conllu_tgt)
    if ControlAttribute.DEPTREEDEPTH in attrs and (
        source_trees is None or target_trees is None
    ):
        raise ConfigError("--attrs DepTreeDepth requires --conllu-src and --conllu-tgt")

    targets = _read_lines(args.target)
    if source_trees is not None:
        _check_aligned(args.target, targets, args.conllu_src, source_trees)
        _check_aligned(args.target, targets, args.conllu_tgt, target_trees)

    counts: dict = {}

    def pairs() -> Iterator[tuple]:
        seen = 0
        for i, source in enumerate(_iter_lines(args.source)):
            if i >= len(targets):
                raise InputError(
                    f"{args.source} has more lines than {args.target} ({len(targets)})"
                )
            seen = i + 1
            if source_trees is not None:
                yield source, targets[i], source_trees[i], target_trees[i]
            else:
                yield source, targets[i]
        if seen != len(targets):
            raise InputError(
                f"{args.source} has {seen} lines but {args.target} has {len(targets)}"
            )

    out_path = Path(args.out)
    with open(out_path, "w", encoding="utf-8") as out:
        for line in annotate_lines(pairs(), attrs, freq_table=freq_table, counts=counts):
            out.write(line + "\n")
    fallbacks = counts.get("fallbacks", 0)
    if fallbacks:
        print(f"warning: {fallbacks} attribute values fell back to 1.0", file=sys.stderr)
    _write_manifest(
        _manifest_for_file(args.out),
        "annotate",
        {
            "attrs": [a.value for a in attrs],
            "out": str(args.out),
        },
        {
            "source": args.source,
            "target": args.target,
            "freq": args.freq,
            "conllu_src": args.conllu_src,
            "conllu_tgt": args.conllu_tgt,
        },
        {"fallbacks": fallbacks},
    )
    return 0


def cmd_prepend(args: argparse.Namespace) -> int:
    if not args.set:
        raise ConfigError("at least one --set Attr=ratio is required")
    spec = ControlSpec.parse(args.set)
    with open(args.out, "w", encoding="utf-8") as out:
        for line in apply_fixed_ratios(_iter_lines(args.source), spec):
            out.write(line + "\n")
    _write_manifest(
        _manifest_for_file(args.out),
        "prepend",
        {"set": list(args.set), "prefix": spec.prefix(), "out": str(args.out)},
        {"source": args.source},
    )
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    predictions = _read_lines(args.pred)
    wanted = args.metric
    needs_refs = wanted in ("sari", "bleu", "all")
    needs_source = wanted in ("sari", "all")
    sources = _read_lines(args.source) if args.source else None
    if needs_source and sources is None:
        raise ConfigError(f"--metric {wanted} requires --source")
    if needs_refs and not args.refs:
        raise ConfigError(f"--metric {wanted} requires --refs")
    references = None
    if args.refs:
        ref_files = [_read_lines(path) for path in args.refs]
        for path, lines in zip(args.refs, ref_files):
            _check_aligned(args.pred, predictions, path, lines)
        references = [list(row) for row in zip(*ref_files)]
    if sources is not None:
        _check_aligned(args.source, sources, args.pred, predictions)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    report_lines = []
    sari_report = None
    if wanted in ("sari", "all"):
        sari_report = sari(
            sources, predictions, references, zero_division=args.zero_division
        )
        report_lines.append(sari_report.to_kv_text())
    if wanted in ("fkgl", "all"):
        report_lines.append(fkgl(predictions).to_kv_text())
    if wanted in ("bleu", "all"):
        score = bleu(predictions, references)
        report_lines.append(f"bleu\t{score:.6f}\n")
    report = "".join(report_lines)
    (out_dir / "report.txt").write_text(report, encoding="utf-8")
    if sari_report is not None:
        (out_dir / "sari_per_order.csv").write_text(
            sari_report.to_csv(), encoding="utf-8"
        )
    _write_manifest(
        out_dir / "manifest.json",
        "evaluate",
        {
            "metric": wanted,
            "zero_division": args.zero_division,
            "out": str(args.out),
        },
        {"source": args.source, "pred": args.pred, "refs": list(args.refs or [])},
        {"sari_zero_division": args.zero_division},
    )
    sys.stdout.write(report)
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    sources = _read_lines(args.source)
    targets = _read_lines(args.target)
    _check_aligned(args.source, sources, args.target, targets)
    histogram = compression_histogram(sources, targets, args.bin)
    Path(args.out).write_text(histogram.to_csv(), encoding="utf-8")
    _write_manifest(
        _manifest_for_file(args.out),
        "stats",
        {"bin": args.bin, "out": str(args.out)},
        {"source": args.source, "target": args.target},
        {"mean_ratio": round(histogram.mean, 6)},
    )
    print(f"mean_ratio\t{histogram.mean:.6f}")
    return 0


def cmd_search(args: argparse.Namespace) -> int:
    system = resolve_system(args.system)
    sources = _read_lines(args.valid_source)
    ref_files = [_read_lines(path) for path in args.refs]
    for path, lines in zip(args.refs, ref_files):
        _check_aligned(args.valid_source, sources, path, lines)
    corpus = ParallelCorpus(
        sources=sources, references=[list(row) for row in zip(*ref_files)]
    )
    grid = RatioGrid.parse(args.grid)
    result = grid_search_ratios(
        system, corpus, grid, zero_division=args.zero_division
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "grid.csv").write_text(result.to_csv(), encoding="utf-8")
    best = {
        "spec": result.best_spec.prefix(),
        "targets": {
            v.attribute.value: v.bucket for v in result.best_spec.values
        },
        "sari": round(result.best_sari, 6),
    }
    (out_dir / "best.json").write_text(
        json.dumps(best, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    _write_manifest(
        out_dir / "manifest.json",
        "search",
        {
            "system": args.system,
            "grid": args.grid,
            "zero_division": args.zero_division,
            "out": str(args.out),
        },
        {"valid_source": args.valid_source, "refs": list(args.refs)},
        {"sari_zero_division": args.zero_division},
    )
    print(f"best\t{best['spec']}\tsari\t{best['sari']}")
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    system = resolve_system(args.system)
    sources = _read_lines(args.source)
    references = None
    if args.refs:
        ref_files = [_read_lines(path) for path in args.refs]
        for path, lines in zip(args.refs, ref_files):
            _check_aligned(args.source, sources, path, lines)
        references = [list(row) for row in zip(*ref_files)]
    source_trees = _load_trees(args.conllu_src)
    if source_trees is not None:
        _check_aligned(args.source, sources, args.conllu_src, source_trees)
    freq_table = _load_freq(args.freq)
    attribute = next((a for a in ControlAttribute if a.value == args.attr), None)
    if attribute is None:
        raise ConfigError(f"unknown attribute {args.attr!r}")
    try:
        buckets = [float(b) for b in args.buckets.split(",") if b.strip()]
    except ValueError:
        raise ConfigError(f"bad bucket list {args.buckets!r}") from None
    corpus = ParallelCorpus(
        sources=sources, references=references, source_trees=source_trees
    )
    result = cross_influence_analysis(
        system,
        corpus,
        attribute,
        buckets,
        constrain_nbchars=args.constrain_nbchars,
        freq_table=freq_table,
        bin_width=args.bin,
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "histograms.csv").write_text(result.to_csv(), encoding="utf-8")
    (out_dir / "summary.csv").write_text(result.summary_csv(), encoding="utf-8")
    _write_manifest(
        out_dir / "manifest.json",
        "analyze",
        {
            "system": args.system,
            "attr": attribute.value,
            "buckets": buckets,
            "constrain_nbchars": args.constrain_nbchars,
            "bin": args.bin,
            "out": str(args.out),
        },
        {
            "source": args.source,
            "refs": list(args.refs or []),
            "freq": args.freq,
            "conllu_src": args.conllu_src,
        },
        dict(result.metadata, skipped=result.skipped),
    )
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    with open(args.freq, encoding="utf-8") as handle:
        table = load_frequency_list(handle)
    substitutions = None
    if args.subs:
        substitutions = {}
        for lineno, line in enumerate(_read_lines(args.subs), start=1):
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise InputError(
                    f"substitution file line {lineno}: expected word<TAB>replacement"
                )
            substitutions[fields[0].lower()] = fields[1]
    config = OracleConfig(
        table=table,
        substitution_map=substitutions,
        tolerance=args.tolerance,
        random_seed=args.seed,
    )
    for line in sys.stdin:
        line = line.rstrip("\n").rstrip("\r")
        if not line.strip():
            print()
            continue
        print(oracle_simplify(line, config))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simpctrl",
        description="Control-token tooling for controllable sentence simplification",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        sub = subparsers.add_parser(name, help=help_text, description=help_text)
        sub.add_argument(
            "--version", action="version", version=f"simpctrl {__version__}"
        )
        return sub

    annotate = add("annotate", "annotate a parallel corpus with control tokens")
    annotate.add_argument("--source", required=True, help="source sentences, one per line")
    annotate.add_argument("--target", required=True, help="aligned target sentences")
    annotate.add_argument(
        "--attrs",
        required=True,
        help="comma-separated attribute names (NbChars,LevSim,WordRank,DepTreeDepth)",
    )
    annotate.add_argument("--freq", help="frequency list (needed for WordRank)")
    annotate.add_argument("--conllu-src", help="CoNLL-U for sources (needed for DepTreeDepth)")
    annotate.add_argument("--conllu-tgt", help="CoNLL-U for targets (needed for DepTreeDepth)")
    annotate.add_argument("--out", required=True, help="annotated output file")
    annotate.set_defaults(func=cmd_annotate)

    prepend = add("prepend", "prepend fixed control-token ratios to every line")
    prepend.add_argument("--source", required=True)
    prepend.add_argument(
        "--set",
        action="append",
        metavar="Attr=R",
        help="attribute=ratio assignment (repeatable); ratios are bucketized",
    )
    prepend.add_argument("--out", required=True)
    prepend.set_defaults(func=cmd_prepend)

    evaluate = add("evaluate", "score predictions with SARI / FKGL / BLEU")
    evaluate.add_argument("--source", help="source sentences (needed for SARI)")
    evaluate.add_argument("--pred", required=True, help="prediction file")
    evaluate.add_argument("--refs", nargs="+", help="reference files (one per reference set)")
    evaluate.add_argument(
        "--metric", choices=["sari", "fkgl", "bleu", "all"], default="all"
    )
    evaluate.add_argument(
        "--zero-division",
        choices=["perfect", "zero"],
        default="perfect",
        help="SARI convention when SYS and REF n-gram sets are both empty",
    )
    evaluate.add_argument("--out", required=True, help="output directory")
    evaluate.set_defaults(func=cmd_evaluate)

    stats = add("stats", "export the compression-ratio histogram of a parallel corpus")
    stats.add_argument("--source", required=True)
    stats.add_argument("--target", required=True)
    stats.add_argument("--bin", type=float, default=0.05)
    stats.add_argument("--out", required=True, help="CSV output file")
    stats.set_defaults(func=cmd_stats)

    search = add("search", "grid-search fixed ratios maximizing SARI on a validation set")
    search.add_argument(
        "--system",
        required=True,
        help='shell command reading prepended sources on stdin, or "identity"',
    )
    search.add_argument("--valid-source", required=True)
    search.add_argument("--refs", nargs="+", required=True)
    search.add_argument(
        "--grid",
        required=True,
        help='grid description, e.g. "NbChars=0.25,0.5,1.0;LevSim=0.75,1.0"',
    )
    search.add_argument(
        "--zero-division", choices=["perfect", "zero"], default="perfect"
    )
    search.add_argument("--out", required=True, help="output directory")
    search.set_defaults(func=cmd_search)

    analyze = add("analyze", "measure a control token's influence on output attributes")
    analyze.add_argument("--system", required=True)
    analyze.add_argument("--source", required=True)
    analyze.add_argument("--refs", nargs="+", help="optional references for ground truth")
    analyze.add_argument("--attr", required=True, help="controlled attribute name")
    analyze.add_argument(
        "--constrain-nbchars",
        action="store_true",
        help="additionally pin NbChars to 1.0 while varying the controlled attribute",
    )
    analyze.add_argument("--buckets", default=",".join(str(b) for b in DEFAULT_ANALYSIS_BUCKETS))
    analyze.add_argument("--freq", help="frequency list (enables WordRank measurement)")
    analyze.add_argument("--conllu-src", help="CoNLL-U for sources")
    analyze.add_argument("--bin", type=float, default=0.05)
    analyze.add_argument("--out", required=True, help="output directory")
    analyze.set_defaults(func=cmd_analyze)

    oracle = add("oracle", "run the rule-based oracle simplifier (stdin -> stdout)")
    oracle.add_argument("--freq", required=True, help="frequency list")
    oracle.add_argument("--subs", help="optional word<TAB>replacement substitution file")
    oracle.add_argument("--tolerance", type=float, default=0.05)
    oracle.add_argument("--seed", type=int, default=0)
    oracle.set_defaults(func=cmd_oracle)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SystemRunError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
