"""blanclab: reference-free summary quality measures and their meta-evaluation.

Core surface: BLANC-help / BLANC-tune engines over pluggable model backends,
the max-help measure-selection sweep, restricted-text scoring, and
correlation analysis against human annotations.
"""

__version__ = "0.1.0"

from .backends import (
    MaskedInstance,
    ModelBackend,
    ModelSession,
    ReferenceBackend,
    RemoteBackend,
    SpecialIds,
    make_backend,
)
from .corpus import AnnotatedSample, CorpusFormat, load_corpus, save_corpus
from .engine import (
    BlancResult,
    CountMatrix,
    MeasureConfig,
    MeasureFamily,
    blanc_help,
    blanc_tune,
    evaluate,
    score_from_counts,
)
from .masking import (
    CorruptionAction,
    MaskingPolicy,
    MaskMode,
    MaskSchedule,
    TuningPolicy,
    corruption_plan,
    even_schedule,
    is_eligible,
    random_schedule,
)
from .restriction import (
    Aggregation,
    RestrictionSpec,
    RestrictionStrategy,
    WindowRank,
    correlation_gain,
    per_sentence_blanc,
    restricted_blanc,
    restricted_score,
    select_contiguous,
    select_threshold,
    select_top_n,
)
from .stats import (
    CorrelationResult,
    correlation_table,
    expert_turker_shift,
    pearson,
    spearman,
)
from .sweep import ScoreCache, drop_fraction, evaluate_config, max_help_select
from .tokenization import (
    Token,
    TokenizedText,
    TokenKind,
    segment_sentences,
    tokenize,
    tokenize_text,
)

__all__ = [
    "__version__",
    "AnnotatedSample",
    "Aggregation",
    "BlancResult",
    "CorpusFormat",
    "CorrelationResult",
    "CorruptionAction",
    "CountMatrix",
    "MaskMode",
    "MaskSchedule",
    "MaskedInstance",
    "MaskingPolicy",
    "MeasureConfig",
    "MeasureFamily",
    "ModelBackend",
    "ModelSession",
    "ReferenceBackend",
    "RemoteBackend",
    "RestrictionSpec",
    "RestrictionStrategy",
    "ScoreCache",
    "SpecialIds",
    "Token",
    "TokenKind",
    "TokenizedText",
    "TuningPolicy",
    "WindowRank",
    "blanc_help",
    "blanc_tune",
    "correlation_gain",
    "correlation_table",
    "corruption_plan",
    "drop_fraction",
    "evaluate",
    "evaluate_config",
    "even_schedule",
    "expert_turker_shift",
    "is_eligible",
    "load_corpus",
    "make_backend",
    "max_help_select",
    "pearson",
    "per_sentence_blanc",
    "random_schedule",
    "restricted_blanc",
    "restricted_score",
    "save_corpus",
    "score_from_counts",
    "segment_sentences",
    "select_contiguous",
    "select_threshold",
    "select_top_n",
    "spearman",
    "tokenize",
    "tokenize_text",
]
