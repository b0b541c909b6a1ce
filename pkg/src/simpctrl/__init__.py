"""Control-token machinery, metrics and analysis tooling for controllable
sentence simplification.

The package computes four attribute ratios over (source, target) sentence
pairs (character length, Levenshtein similarity, lexical complexity via
frequency ranks, dependency-tree depth), discretizes them into control
tokens for conditional training, applies fixed ratios at inference time,
scores outputs with SARI/FKGL, searches for score-maximizing ratios, and
analyzes how each token influences the output.  A deterministic
rule-based oracle simplifier stands in for trained models in tests and
end-to-end analyses.
"""

__version__ = "0.1.0"

from .controls import (
    CANONICAL_ORDER,
    ControlAttribute,
    ControlSpec,
    ControlValue,
    all_buckets,
    annotate_pair,
    bucketize,
    deptreedepth_ratio,
    format_token,
    levenshtein_distance,
    levenshtein_similarity,
    levsim_ratio,
    nbchars_ratio,
    parse_token,
    split_control_prefix,
    wordrank_ratio,
)
from .deptree import (
    ROOT,
    DepTree,
    estimate_depth_heuristic,
    parse_conllu,
    serialize_conllu,
    tree_depth,
)
from .errors import ConfigError, InputError, SystemRunError, ToolkitError
from .lexicon import (
    FrequencyTable,
    load_frequency_list,
    log_rank,
    third_quartile,
    wordrank_score,
)
from .metrics import (
    FkglReport,
    Histogram,
    SariReport,
    bleu,
    build_histogram,
    compression_histogram,
    fkgl,
    sari,
    sari_sentence,
)
from .oracle import OracleConfig, oracle_lines, oracle_simplify
from .pipeline import (
    AblationResult,
    CrossInfluenceResult,
    GridSearchResult,
    ParallelCorpus,
    RatioGrid,
    ablation_schedule,
    annotate_corpus,
    annotate_lines,
    apply_fixed_ratios,
    cross_influence_analysis,
    grid_search_ratios,
    run_ablation,
)
from .systems import (
    ExternalCommandSystem,
    OracleSystem,
    identity_system,
    resolve_system,
)
from .text import (
    Sentence,
    count_chars,
    count_syllables,
    detokenize,
    split_sentences,
    tokenize,
)
