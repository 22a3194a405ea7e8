"""Synthetic validation experiments.

Three checks of the score's behavior:

* hybrid curves: mask a growing fraction of the feature vocabulary
  anti-oracle-style and the rest oracle-style, emulating systems that get
  the feature progressively more wrong; the curve must stay inside the
  oracle/anti-oracle interval and hit both endpoints exactly.
* specificity: random word-set features of matched frequency should score
  close to each other (low variance), unlike real linguistic features.
* frequency robustness: restricting a feature to an alphabet-split head
  changes its frequency but not its per-word quality; the normalized
  score should move far less than its unnormalized numerator.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from . import _parallel
from .corpus import ParallelCorpus
from .errors import EmptyIndexError, FeatureError
from .features import (
    FeatureSpec,
    alphabet_split,
    build_vocabulary,
    corpus_word_universe,
    partition_words,
    Side,
)
from .masking import MaskKind, MaskStrategy
from .metrics import (
    BleuSmoothing,
    MetricConfig,
    MetricKind,
    corpus_mean,
    fold_tokens,
    pair_scorer,
)
from .scores import (
    ExtremeScores,
    IndexSet,
    _masked_token_pair,
    compute_extremes,
    muler_score,
    select_indices,
)


@dataclass(frozen=True)
class HybridCurve:
    feature_id: str
    points: tuple[tuple[float, float], ...]  # (alpha, corpus score)
    endpoints: tuple[float, float]  # (max, min)

    def normalized_positions(self) -> list[float | None]:
        """Where each point sits in the max-min interval (1 = at max)."""
        mx, mn = self.endpoints
        width = mx - mn
        if abs(width) < 1e-12:
            return [None for _ in self.points]
        return [(score - mn) / width for _, score in self.points]


@dataclass(frozen=True)
class SpecificityResult:
    p: int
    repeats: int
    seed: int
    sampled_scores: tuple[float, ...]
    mean: float
    variance: float
    std: float
    mean_ref_proportion: float
    mean_cand_proportion: float


@dataclass(frozen=True)
class FrequencyRow:
    alpha: float
    muler: float | None
    abl_muler: float | None
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class FrequencyResult:
    feature_id: str
    rows: tuple[FrequencyRow, ...]


def run_hybrid(
    corpus: ParallelCorpus,
    feature: FeatureSpec,
    metric: MetricConfig,
    alphas: Sequence[float],
) -> HybridCurve:
    """Corpus score under hybrid masking at each head fraction."""
    idx = select_indices(corpus, feature)
    if not idx.indices:
        raise EmptyIndexError(f"feature {feature.feature_id} absent from aligned pairs")
    vocab = build_vocabulary(corpus, feature, Side.BOTH)
    extremes = compute_extremes(corpus, feature, metric, idx)
    selected = [corpus.pairs[i] for i in idx.indices]
    points = []
    for alpha in alphas:
        strategy = MaskStrategy(MaskKind.HYBRID, alphabet_split(vocab, alpha))
        masked = [_masked_token_pair(p, feature, strategy) for p in selected]
        points.append((alpha, corpus_mean(masked, metric)))
    return HybridCurve(
        feature_id=feature.feature_id,
        points=tuple(points),
        endpoints=(extremes.max_score, extremes.min_score),
    )


def run_frequency(
    corpus: ParallelCorpus,
    feature: FeatureSpec,
    metric: MetricConfig,
    alphas: Sequence[float],
) -> FrequencyResult:
    """Score and numerator after restricting the feature to a head fraction."""
    ordered = list(alphas)
    if any(not 0.0 < a <= 1.0 for a in ordered):
        raise FeatureError("frequency alphas must lie in (0, 1]")
    if ordered != sorted(set(ordered)):
        raise FeatureError("frequency alphas must be strictly increasing")
    vocab = build_vocabulary(corpus, feature, Side.BOTH)
    rows = []
    for alpha in ordered:
        split = alphabet_split(vocab, alpha)
        restricted = feature.restricted_to(split.head, suffix=f"{alpha:g}")
        idx = select_indices(corpus, restricted)
        if not idx.indices:
            rows.append(FrequencyRow(alpha, None, None, flags=("EMPTY_INDEX_SET",)))
            continue
        extremes = compute_extremes(corpus, restricted, metric, idx)
        score, flags = muler_score(*extremes)
        rows.append(
            FrequencyRow(
                alpha,
                None if math.isnan(score) else score,
                extremes.max_score - extremes.base,
                flags=tuple(sorted(flags)),
            )
        )
    return FrequencyResult(feature_id=feature.feature_id, rows=tuple(rows))


# --- specificity ---------------------------------------------------------

# Mask symbol in the int-encoded token space of the fast path.
_MASK_ID = -1

_SPEC_STATE: dict = {}


def _choice_rng(seed: int, repeat: int) -> random.Random:
    # Independent of the partition RNG so the draw never perturbs it.
    return random.Random(f"choice:{seed}:{repeat}")


def _positions_by_word(lower_tokens) -> dict:
    posmap: dict[str, list[int]] = {}
    for j, w in enumerate(lower_tokens):
        posmap.setdefault(w, []).append(j)
    return posmap


def _prepare_pairs(corpus: ParallelCorpus, metric: MetricConfig):
    """Fold and int-encode tokens once; cache unmasked per-pair scores.

    The repeat loop only touches these structures, never the corpus, so a
    single preparation pays for thousands of masked rescorings.
    """
    score = pair_scorer(metric)
    word_ids: dict[str, int] = {}

    def encode(tokens) -> list[int]:
        ids = []
        for t in tokens:
            got = word_ids.get(t)
            if got is None:
                got = len(word_ids)
                word_ids[t] = got
            ids.append(got)
        return ids

    pairs = []
    for pair in corpus.pairs:
        refs_lower = [r.surfaces_lower for r in pair.references]
        cand_lower = pair.candidate.surfaces_lower
        refs_folded = [
            fold_tokens(r.surfaces, metric.case_fold) for r in pair.references
        ]
        cand_folded = fold_tokens(pair.candidate.surfaces, metric.case_fold)
        counts: dict[str, int] = {}
        for w in refs_lower[0]:
            counts[w] = counts.get(w, 0) + 1
        ref0_items = list(counts.items())
        counts = {}
        for w in cand_lower:
            counts[w] = counts.get(w, 0) + 1
        pairs.append(
            {
                "ref_ids": [encode(r) for r in refs_folded],
                "cand_ids": encode(cand_folded),
                "ref_pos": [_positions_by_word(r) for r in refs_lower],
                "cand_pos": _positions_by_word(cand_lower),
                "ref_words": [frozenset(r) for r in refs_lower],
                "cand_words": frozenset(cand_lower),
                "base": score(
                    [r.surfaces for r in pair.references], pair.candidate.surfaces
                ),
                "ref0_items": ref0_items,
                "cand_items": list(counts.items()),
                "ref0_len": len(refs_lower[0]),
                "cand_len": len(cand_lower),
            }
        )
    return pairs


def _mask_ids(ids, posmap, side_words, mask_words):
    hits = mask_words & side_words
    if not hits:
        return ids
    masked = list(ids)
    for word in hits:
        for j in posmap[word]:
            masked[j] = _MASK_ID
    return masked


def _bleu_oracle_anti(ref_profiles, ref_lengths, cand_ids, max_n, add1):
    """Oracle and anti-oracle BLEU from one profile pass.

    ``cand_ids`` carries the shared mask id; anti-oracle matches are
    exactly the oracle matches whose n-grams contain no mask symbol
    (the primed candidate token can never match the reference mask).
    """
    c = len(cand_ids)
    usable = [rl for rl in ref_lengths if rl > 0]
    r = min(usable, key=lambda rl: (abs(rl - c), rl))
    single = ref_profiles[0] if len(ref_profiles) == 1 else None
    log_o = log_a = 0.0
    dead_o = dead_a = False
    for n in range(1, max_n + 1):
        den = c - n + 1
        num_o = num_a = 0
        if den > 0:
            cand_counts = Counter(zip(*(cand_ids[i:] for i in range(n))))
            if single is not None:
                ref_counts = single[n - 1]
                for gram, cnt in cand_counts.items():
                    best = ref_counts.get(gram, 0)
                    if best:
                        matched = cnt if cnt < best else best
                        num_o += matched
                        if _MASK_ID not in gram:
                            num_a += matched
            else:
                for gram, cnt in cand_counts.items():
                    best = 0
                    for profiles in ref_profiles:
                        got = profiles[n - 1].get(gram, 0)
                        if got > best:
                            best = got
                    if best:
                        matched = cnt if cnt < best else best
                        num_o += matched
                        if _MASK_ID not in gram:
                            num_a += matched
        else:
            den = 0
        if num_o == 0:
            if add1:
                log_o += math.log(1.0 / (den + 1))
            else:
                dead_o = True
        else:
            log_o += math.log(num_o / den)
        if num_a == 0:
            if add1:
                log_a += math.log(1.0 / (den + 1))
            else:
                dead_a = True
        else:
            log_a += math.log(num_a / den)
    brevity = math.exp(min(0.0, 1.0 - r / c))
    score_o = 0.0 if dead_o else brevity * math.exp(log_o / max_n)
    score_a = 0.0 if dead_a else brevity * math.exp(log_a / max_n)
    return score_o, score_a


def _wordset_muler_bleu(pairs, words, max_n, add1):
    """Score one word-set feature over its aligned pairs."""
    indices = [
        i
        for i, entry in enumerate(pairs)
        if not words.isdisjoint(entry["ref_words"][0])
        and not words.isdisjoint(entry["cand_words"])
    ]
    if not indices:
        raise EmptyIndexError("sampled word set absent from aligned pairs")
    base = mx = mn = 0.0
    for i in indices:
        entry = pairs[i]
        base += entry["base"]
        masked_refs = [
            _mask_ids(ids, posmap, side_words, words)
            for ids, posmap, side_words in zip(
                entry["ref_ids"], entry["ref_pos"], entry["ref_words"]
            )
        ]
        profiles = [
            [Counter(zip(*(m[i:] for i in range(n)))) for n in range(1, max_n + 1)]
            for m in masked_refs
        ]
        masked_cand = _mask_ids(
            entry["cand_ids"], entry["cand_pos"], entry["cand_words"], words
        )
        score_o, score_a = _bleu_oracle_anti(
            profiles, [len(m) for m in masked_refs], masked_cand, max_n, add1
        )
        mx += score_o
        mn += score_a
    n = len(indices)
    score, _flags = muler_score(base / n, mx / n, mn / n)
    return score


def _wordset_muler_generic(corpus, words, metric):
    spec = FeatureSpec("SYN:sampled", words=frozenset(words))
    extremes = compute_extremes(corpus, spec, metric)
    score, _flags = muler_score(*extremes)
    return score


def _init_spec_worker(pairs, universe, p, seed, metric, corpus):
    _SPEC_STATE["args"] = (pairs, universe, p, seed, metric, corpus)


def _spec_repeat(repeat: int):
    pairs, universe, p, seed, metric, corpus = _SPEC_STATE["args"]
    groups = partition_words(universe, p, seed + repeat)
    chosen = _choice_rng(seed, repeat).randrange(p)
    words = groups[chosen]
    if metric.kind is MetricKind.BLEU:
        score = _wordset_muler_bleu(
            pairs,
            words,
            metric.bleu_max_n,
            metric.bleu_smoothing is BleuSmoothing.ADD1_ON_ZERO,
        )
    else:
        score = _wordset_muler_generic(corpus, words, metric)
    # Coverage proportions average over every group, not only the sampled
    # one: mean_g freq(U_g) equals total grouped coverage divided by p.
    grouped = set().union(*groups)
    ref_sum = cand_sum = 0.0
    for entry in pairs:
        if entry["ref0_len"]:
            covered = sum(c for w, c in entry["ref0_items"] if w in grouped)
            ref_sum += covered / (entry["ref0_len"] * p)
        if entry["cand_len"]:
            covered = sum(c for w, c in entry["cand_items"] if w in grouped)
            cand_sum += covered / (entry["cand_len"] * p)
    n_ref = sum(1 for e in pairs if e["ref0_len"])
    n_cand = sum(1 for e in pairs if e["cand_len"])
    return (
        score,
        ref_sum / n_ref if n_ref else 0.0,
        cand_sum / n_cand if n_cand else 0.0,
    )


def run_specificity(
    corpus: ParallelCorpus,
    p: int,
    repeats: int,
    seed: int,
    metric: MetricConfig,
    workers: int = 1,
) -> SpecificityResult:
    """Score distribution of random word-set features.

    Each repeat partitions the corpus vocabulary into p equal groups with
    seed + repeat, scores one uniformly drawn group, and records it. Mean,
    population variance, and std summarize the sample; proportions average
    token coverage of the groups on each side.
    """
    if p < 2:
        raise FeatureError(f"specificity needs p >= 2, got {p}")
    if repeats < 1:
        raise FeatureError(f"repeats must be >= 1, got {repeats}")
    universe = corpus_word_universe(corpus)
    if len(universe) < p:
        raise FeatureError(
            f"vocabulary of size {len(universe)} cannot be split into {p} groups"
        )
    pairs = _prepare_pairs(corpus, metric)
    results = _parallel.ordered_map(
        _spec_repeat,
        list(range(repeats)),
        workers=workers,
        initializer=_init_spec_worker,
        initargs=(pairs, universe, p, seed, metric, corpus),
    )
    scores = tuple(r[0] for r in results)
    mean = sum(scores) / repeats
    variance = sum((s - mean) ** 2 for s in scores) / repeats
    return SpecificityResult(
        p=p,
        repeats=repeats,
        seed=seed,
        sampled_scores=scores,
        mean=mean,
        variance=variance,
        std=math.sqrt(variance),
        mean_ref_proportion=sum(r[1] for r in results) / repeats,
        mean_cand_proportion=sum(r[2] for r in results) / repeats,
    )


# --- serialization -------------------------------------------------------


def hybrid_to_dict(curve: HybridCurve) -> dict:
    positions = curve.normalized_positions()
    return {
        "feature": curve.feature_id,
        "endpoints": {"max": curve.endpoints[0], "min": curve.endpoints[1]},
        "position_rule": "(score - min) / (max - min)",
        "points": [
            {"alpha": a, "score": s, "position": pos}
            for (a, s), pos in zip(curve.points, positions)
        ],
    }


def specificity_to_dict(result: SpecificityResult) -> dict:
    def clean(x: float):
        return None if math.isnan(x) else x

    return {
        "p": result.p,
        "repeats": result.repeats,
        "seed": result.seed,
        "mean": clean(result.mean),
        "variance": clean(result.variance),
        "std": clean(result.std),
        "mean_ref_proportion": result.mean_ref_proportion,
        "mean_cand_proportion": result.mean_cand_proportion,
        "sampled_scores": [
            None if math.isnan(s) else s for s in result.sampled_scores
        ],
    }


def frequency_to_dict(result: FrequencyResult) -> dict:
    return {
        "feature": result.feature_id,
        "rows": [
            {
                "alpha": row.alpha,
                "muler": row.muler,
                "abl": row.abl_muler,
                "flags": list(row.flags),
            }
            for row in result.rows
        ],
    }
