"""Per-feature score decomposition.

For a feature f and a metric, the engine restricts the corpus to pairs
where both sides contain f, then scores three variants of each pair: the
original text (base), oracle masking (max: masked spans always agree),
and anti-oracle masking (min: masked spans never agree). The headline
score is the fraction of the max-min interval left unrealized:

    score = (max - base) / (max - min)

Lower is better; 0 means the feature is already translated as well as the
oracle, 1 means as badly as the anti-oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from . import _parallel
from .corpus import ParallelCorpus, SentencePair
from .errors import EmptyIndexError, MetricError
from .features import (
    FeatureSpec,
    FeatureStats,
    Side,
    extract_spans,
    feature_stats,
)
from .lexicons import Lexicon, ScorerGap, scorer_gap
from .masking import MaskKind, MaskStrategy, mask_side
from .metrics import (
    MetricConfig,
    MetricKind,
    SimilarityMatrix,
    SimMode,
    corpus_mean,
    masked_sim_score,
    pair_scorer,
)

NEGATIVE_NUMERATOR = "NEGATIVE_NUMERATOR"
DEGENERATE_INTERVAL = "DEGENERATE_INTERVAL"

# Interval widths below this are reported as undefined rather than divided.
DEGENERATE_EPS = 1e-9


@dataclass(frozen=True)
class IndexSet:
    """Positions of pairs carrying the feature on both sides."""

    feature_id: str
    indices: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.indices)


class DiscrepancyCounts(NamedTuple):
    """Occurrence-count comparison over all pairs.

    ``add`` counts pairs whose reference holds more feature spans than the
    candidate, ``hit`` counts pairs whose candidate holds more, and
    ``miss`` counts pairs with equal span counts.
    """

    add: int
    hit: int
    miss: int


class ExtremeScores(NamedTuple):
    base: float
    max_score: float
    min_score: float


@dataclass(frozen=True)
class MulerEntry:
    feature_id: str
    index_count: int
    eta: DiscrepancyCounts
    stats: FeatureStats
    base: float | None = None
    max_score: float | None = None
    min_score: float | None = None
    muler: float | None = None
    abl_muler: float | None = None
    flags: frozenset[str] = frozenset()


@dataclass(frozen=True)
class MulerReport:
    metadata: dict
    overall_score: float
    entries: tuple[MulerEntry, ...]
    scorer_gaps: dict = field(default_factory=dict)


def select_indices(corpus: ParallelCorpus, feature: FeatureSpec) -> IndexSet:
    """Pair positions where both the primary reference and the candidate
    contain at least one span of the feature."""
    hits = tuple(
        i
        for i, pair in enumerate(corpus.pairs)
        if extract_spans(pair.reference, feature)
        and extract_spans(pair.candidate, feature)
    )
    return IndexSet(feature.feature_id, hits)


def _masked_token_pair(pair: SentencePair, feature: FeatureSpec, strategy: MaskStrategy):
    refs = [mask_side(r, feature, strategy, False)[0] for r in pair.references]
    cand = mask_side(pair.candidate, feature, strategy, True)[0]
    return refs, cand


def compute_extremes(
    corpus: ParallelCorpus,
    feature: FeatureSpec,
    metric: MetricConfig,
    index_set: IndexSet | None = None,
) -> ExtremeScores:
    """Base, oracle, and anti-oracle corpus means over the index set."""
    idx = index_set if index_set is not None else select_indices(corpus, feature)
    if not idx.indices:
        raise EmptyIndexError(
            f"feature {feature.feature_id} absent from aligned pairs"
        )
    selected = [corpus.pairs[i] for i in idx.indices]
    plain = [([r.surfaces for r in p.references], p.candidate.surfaces) for p in selected]
    oracle = MaskStrategy(MaskKind.ORACLE)
    anti = MaskStrategy(MaskKind.ANTI_ORACLE)
    masked_max = [_masked_token_pair(p, feature, oracle) for p in selected]
    masked_min = [_masked_token_pair(p, feature, anti) for p in selected]
    return ExtremeScores(
        base=corpus_mean(plain, metric),
        max_score=corpus_mean(masked_max, metric),
        min_score=corpus_mean(masked_min, metric),
    )


def muler_score(base: float, max_score: float, min_score: float):
    """Normalized unrealized gain, with edge-case flags.

    Returns ``(score, flags)``. A max below base yields a negative score
    and the NEGATIVE_NUMERATOR flag; an interval narrower than 1e-9
    yields NaN and the DEGENERATE_INTERVAL flag.
    """
    flags = set()
    if max_score < base:
        flags.add(NEGATIVE_NUMERATOR)
    if abs(max_score - min_score) < DEGENERATE_EPS:
        flags.add(DEGENERATE_INTERVAL)
        return math.nan, frozenset(flags)
    return (max_score - base) / (max_score - min_score), frozenset(flags)


def discrepancy_breakdown(
    corpus: ParallelCorpus, feature: FeatureSpec
) -> DiscrepancyCounts:
    """Span-count comparison between reference and candidate over all pairs."""
    add = hit = miss = 0
    for pair in corpus.pairs:
        n_ref = len(extract_spans(pair.reference, feature))
        n_cand = len(extract_spans(pair.candidate, feature))
        if n_ref > n_cand:
            add += 1
        elif n_cand > n_ref:
            hit += 1
        else:
            miss += 1
    return DiscrepancyCounts(add, hit, miss)


def _entry_for_feature(
    corpus: ParallelCorpus,
    feature: FeatureSpec,
    metric: MetricConfig,
    stats_side: Side,
) -> MulerEntry:
    idx = select_indices(corpus, feature)
    eta = discrepancy_breakdown(corpus, feature)
    stats = feature_stats(corpus, feature, stats_side)
    if not idx.indices:
        return MulerEntry(
            feature_id=feature.feature_id, index_count=0, eta=eta, stats=stats
        )
    extremes = compute_extremes(corpus, feature, metric, idx)
    score, flags = muler_score(*extremes)
    return MulerEntry(
        feature_id=feature.feature_id,
        index_count=len(idx),
        eta=eta,
        stats=stats,
        base=extremes.base,
        max_score=extremes.max_score,
        min_score=extremes.min_score,
        muler=score,
        abl_muler=extremes.max_score - extremes.base,
        flags=flags,
    )


_WORKER_STATE: dict = {}


def _init_report_worker(corpus, metric, stats_side):
    _WORKER_STATE["args"] = (corpus, metric, stats_side)


def _report_task(feature: FeatureSpec) -> MulerEntry:
    corpus, metric, stats_side = _WORKER_STATE["args"]
    return _entry_for_feature(corpus, feature, metric, stats_side)


def feature_report(
    corpus: ParallelCorpus,
    features: Sequence[FeatureSpec],
    metric: MetricConfig,
    scorers: Sequence[Lexicon] = (),
    workers: int = 1,
    stats_side: Side = Side.REF,
    metadata: dict | None = None,
) -> MulerReport:
    """One entry per feature plus the whole-corpus score and scorer gaps.

    Features absent from every aligned pair are listed with index_count 0
    and no scores. Output is deterministic and independent of ``workers``.
    """
    all_pairs = [
        ([r.surfaces for r in p.references], p.candidate.surfaces)
        for p in corpus.pairs
    ]
    overall = corpus_mean(all_pairs, metric)
    entries = _parallel.ordered_map(
        _report_task,
        list(features),
        workers=workers,
        initializer=_init_report_worker,
        initargs=(corpus, metric, stats_side),
    )
    gaps: dict[str, ScorerGap] = {}
    for lexicon in scorers:
        gaps[lexicon.name] = scorer_gap(corpus, lexicon)
    meta = dict(metadata if metadata is not None else corpus.metadata)
    meta["metric_config"] = metric.fingerprint()
    return MulerReport(
        metadata=meta,
        overall_score=overall,
        entries=tuple(entries),
        scorer_gaps=gaps,
    )


def similarity_extremes(
    matrices: Sequence[SimilarityMatrix],
) -> tuple[ExtremeScores, tuple[int, ...]]:
    """Base/oracle/anti-oracle means over similarity matrices.

    A matrix joins the index set when both its flag vectors mark at least
    one masked token.
    """
    indices = tuple(
        i
        for i, m in enumerate(matrices)
        if any(m.ref_mask_flags) and any(m.cand_mask_flags)
    )
    if not indices:
        raise EmptyIndexError("no matrix has masked tokens on both sides")
    chosen = [matrices[i] for i in indices]
    base = sum(masked_sim_score(m, SimMode.PLAIN) for m in chosen) / len(chosen)
    mx = sum(masked_sim_score(m, SimMode.ORACLE) for m in chosen) / len(chosen)
    mn = sum(masked_sim_score(m, SimMode.ANTI_ORACLE) for m in chosen) / len(chosen)
    return ExtremeScores(base, mx, mn), indices


def _none_if_nan(value):
    if value is None:
        return None
    return None if isinstance(value, float) and math.isnan(value) else value


def entry_to_dict(entry: MulerEntry) -> dict:
    return {
        "feature": entry.feature_id,
        "base": entry.base,
        "max": entry.max_score,
        "min": entry.min_score,
        "muler": _none_if_nan(entry.muler),
        "abl": entry.abl_muler,
        "n_indices": entry.index_count,
        "eta": list(entry.eta),
        "freq": entry.stats.frequency,
        "uniq": entry.stats.uniqueness,
        "flags": sorted(entry.flags),
    }


def report_to_dict(report: MulerReport) -> dict:
    return {
        "meta": report.metadata,
        "overall": report.overall_score,
        "entries": [entry_to_dict(e) for e in report.entries],
        "scorer_gaps": {
            name: gap.gap for name, gap in sorted(report.scorer_gaps.items())
        },
    }


def entry_from_dict(raw: dict) -> MulerEntry:
    muler = raw.get("muler")
    flags = frozenset(raw.get("flags", ()))
    if muler is None and DEGENERATE_INTERVAL in flags:
        muler = math.nan
    stats = FeatureStats(
        feature_id=raw["feature"],
        frequency=raw.get("freq", 0.0),
        uniqueness=raw.get("uniq", 0.0),
        total_occurrences=raw.get("total_occurrences", 0),
        unique_surface_forms=raw.get("unique_surface_forms", 0),
    )
    return MulerEntry(
        feature_id=raw["feature"],
        index_count=raw["n_indices"],
        eta=DiscrepancyCounts(*raw["eta"]),
        stats=stats,
        base=raw.get("base"),
        max_score=raw.get("max"),
        min_score=raw.get("min"),
        muler=muler,
        abl_muler=raw.get("abl"),
        flags=flags,
    )
