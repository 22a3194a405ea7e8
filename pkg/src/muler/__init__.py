"""MuLER: per-feature decomposition of reference-based generation metrics.

Given a parallel corpus of (reference, candidate) pairs annotated with
feature spans (POS tags, entity types, custom word sets), the engine
scores each feature by comparing the plain metric against two masked
variants of the text: an oracle where every span of the feature matches
the reference, and an anti-oracle where none does. The normalized gap

    (oracle - plain) / (oracle - anti_oracle)

says how much of the possible gain on that feature the system leaves on
the table (lower is better).
"""

__version__ = "0.1.0"

from .corpus import (
    AnnotatedSentence,
    Diagnostic,
    ParallelCorpus,
    SentencePair,
    Span,
    Token,
    load_corpus,
    parse_corpus,
    save_corpus,
    serialize_corpus,
    validate_corpus,
)
from .errors import (
    CorpusError,
    EmptyIndexError,
    FeatureError,
    LexiconError,
    MetricError,
    MulerError,
)
from .features import (
    FeatureCategory,
    FeatureSpec,
    FeatureStats,
    FeatureVocabulary,
    Side,
    SplitSpec,
    alphabet_split,
    build_vocabulary,
    builtin_features,
    extract_spans,
    feature_stats,
    synthetic_partition,
)
from .lexicons import Lexicon, ScorerGap, load_lexicon, score_sentence, scorer_gap
from .masking import (
    MaskKind,
    MaskStrategy,
    MaskedPair,
    apply_strategy,
    mask_sentence,
)
from .metrics import (
    BleuSmoothing,
    MetricConfig,
    MetricKind,
    SimilarityMatrix,
    SimMode,
    corpus_mean,
    masked_sim_score,
    rouge,
    sentence_bleu,
)
from .scores import (
    DiscrepancyCounts,
    IndexSet,
    MulerEntry,
    MulerReport,
    compute_extremes,
    discrepancy_breakdown,
    feature_report,
    muler_score,
    select_indices,
)
from .validation import (
    FrequencyResult,
    HybridCurve,
    SpecificityResult,
    run_frequency,
    run_hybrid,
    run_specificity,
)
from .analysis import (
    CorrelationMatrix,
    SystemSeries,
    XMeasure,
    YMeasure,
    correlate,
    pearson,
    serialize_report,
)
