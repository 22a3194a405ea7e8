import math

import pytest

from muler.corpus import AnnotatedSentence, ParallelCorpus, SentencePair
from muler.errors import FeatureError
from muler.features import FeatureSpec, synthetic_partition
from muler.metrics import MetricConfig
from muler.scores import compute_extremes, muler_score
from muler.validation import (
    _choice_rng,
    run_frequency,
    run_hybrid,
    run_specificity,
)

from conftest import synthetic_corpus

NOUN = FeatureSpec("POS:NOUN")
BLEU = MetricConfig()


class TestHybrid:
    def test_endpoints_exact(self):
        corpus = synthetic_corpus(60, seed=101, corruption=0.5)
        curve = run_hybrid(corpus, NOUN, BLEU, [0.0, 0.5, 1.0])
        mx, mn = curve.endpoints
        assert curve.points[0][1] == mx
        assert curve.points[-1][1] == mn

    def test_scores_stay_inside_interval(self):
        corpus = synthetic_corpus(80, seed=103, corruption=0.5)
        curve = run_hybrid(corpus, NOUN, BLEU, [0.1 * k for k in range(11)])
        mx, mn = curve.endpoints
        for _, score in curve.points:
            assert mn - 1e-12 <= score <= mx + 1e-12

    def test_monotone_on_corruption_corpus(self):
        corpus = synthetic_corpus(200, seed=107, corruption=0.5)
        alphas = [0.1 * k for k in range(11)]
        curve = run_hybrid(corpus, NOUN, BLEU, alphas)
        scores = [s for _, s in curve.points]
        for earlier, later in zip(scores, scores[1:]):
            assert later <= earlier + 0.01

    def test_single_letter_vocabulary_is_step_function(self):
        # all feature words share a first letter, so any positive head
        # fraction swallows the whole vocabulary
        ref = AnnotatedSentence.from_words(
            ["zebra", "runs", "fast"], [(0, 1, "POS:NOUN")]
        )
        cand = AnnotatedSentence.from_words(
            ["zorse", "runs", "fast"], [(0, 1, "POS:NOUN")]
        )
        corpus = ParallelCorpus(
            pairs=(SentencePair(references=(ref,), candidate=cand, pair_id="p1"),)
        )
        curve = run_hybrid(corpus, NOUN, BLEU, [0.0, 0.25, 0.5, 0.75, 1.0])
        mx, mn = curve.endpoints
        assert curve.points[0][1] == mx
        for _, score in curve.points[1:]:
            assert score == mn

    def test_normalized_positions(self):
        corpus = synthetic_corpus(40, seed=109, corruption=0.5)
        curve = run_hybrid(corpus, NOUN, BLEU, [0.0, 1.0])
        positions = curve.normalized_positions()
        assert positions[0] == pytest.approx(1.0)
        assert positions[1] == pytest.approx(0.0)


class TestSpecificity:
    def test_single_repeat_zero_variance(self):
        corpus = synthetic_corpus(30, seed=113, corruption=0.5)
        result = run_specificity(corpus, p=3, repeats=1, seed=1, metric=BLEU)
        assert result.variance == 0.0
        assert result.std == 0.0
        assert len(result.sampled_scores) == 1

    def test_deterministic_for_fixed_seed(self):
        corpus = synthetic_corpus(30, seed=127, corruption=0.5)
        a = run_specificity(corpus, p=3, repeats=5, seed=7, metric=BLEU)
        b = run_specificity(corpus, p=3, repeats=5, seed=7, metric=BLEU)
        assert a == b

    def test_different_seeds_differ(self):
        corpus = synthetic_corpus(30, seed=127, corruption=0.5)
        a = run_specificity(corpus, p=3, repeats=5, seed=7, metric=BLEU)
        b = run_specificity(corpus, p=3, repeats=5, seed=8, metric=BLEU)
        assert a.sampled_scores != b.sampled_scores

    def test_fast_path_matches_public_pipeline(self):
        corpus = synthetic_corpus(25, seed=131, corruption=0.5)
        p, seed = 3, 11
        result = run_specificity(corpus, p=p, repeats=4, seed=seed, metric=BLEU)
        for repeat in range(4):
            groups = synthetic_partition(corpus, p, seed + repeat)
            chosen = _choice_rng(seed, repeat).randrange(p)
            extremes = compute_extremes(corpus, groups[chosen], BLEU)
            want, _flags = muler_score(*extremes)
            assert result.sampled_scores[repeat] == pytest.approx(want, abs=1e-12)

    def test_worker_count_invariant(self):
        corpus = synthetic_corpus(20, seed=137, corruption=0.5)
        serial = run_specificity(corpus, p=2, repeats=6, seed=3, metric=BLEU)
        parallel = run_specificity(
            corpus, p=2, repeats=6, seed=3, metric=BLEU, workers=3
        )
        assert serial == parallel

    def test_statistics_consistent(self):
        corpus = synthetic_corpus(40, seed=139, corruption=0.5)
        result = run_specificity(corpus, p=4, repeats=20, seed=5, metric=BLEU)
        mean = sum(result.sampled_scores) / len(result.sampled_scores)
        assert result.mean == pytest.approx(mean, abs=1e-12)
        assert result.std == pytest.approx(math.sqrt(result.variance), abs=1e-15)
        assert result.variance >= 0.0
        assert 0.0 < result.mean_ref_proportion < 1.0
        assert 0.0 < result.mean_cand_proportion < 1.0

    def test_validates_arguments(self):
        corpus = synthetic_corpus(5, seed=149)
        with pytest.raises(FeatureError):
            run_specificity(corpus, p=1, repeats=2, seed=0, metric=BLEU)
        with pytest.raises(FeatureError):
            run_specificity(corpus, p=2, repeats=0, seed=0, metric=BLEU)


class TestFrequency:
    def test_full_head_matches_standard_computation(self):
        corpus = synthetic_corpus(60, seed=151, corruption=0.5)
        result = run_frequency(corpus, NOUN, BLEU, [0.5, 1.0])
        extremes = compute_extremes(corpus, NOUN, BLEU)
        want, _ = muler_score(*extremes)
        last = result.rows[-1]
        assert last.alpha == 1.0
        assert last.muler == want
        assert last.abl_muler == extremes.max_score - extremes.base

    def test_uniform_corruption_keeps_score_stable(self):
        corpus = synthetic_corpus(300, seed=157, corruption=0.5)
        result = run_frequency(corpus, NOUN, BLEU, [0.5, 1.0])
        half, full = result.rows
        rel_muler = abs(half.muler - full.muler) / full.muler
        rel_abl = abs(half.abl_muler - full.abl_muler) / full.abl_muler
        assert rel_muler < rel_abl

    def test_empty_restricted_index_flags_row(self):
        ref1 = AnnotatedSentence.from_words(
            ["apple", "grows"], [(0, 1, "POS:NOUN")]
        )
        cand1 = AnnotatedSentence.from_words(
            ["zebra", "grows"], [(0, 1, "POS:NOUN")]
        )
        corpus = ParallelCorpus(
            pairs=(
                SentencePair(references=(ref1,), candidate=cand1, pair_id="p1"),
            )
        )
        result = run_frequency(corpus, NOUN, BLEU, [0.5, 1.0])
        flagged = result.rows[0]
        assert flagged.muler is None
        assert "EMPTY_INDEX_SET" in flagged.flags
        assert result.rows[1].muler is not None

    def test_alpha_validation(self):
        corpus = synthetic_corpus(5, seed=163)
        with pytest.raises(FeatureError):
            run_frequency(corpus, NOUN, BLEU, [0.0, 0.5])
        with pytest.raises(FeatureError):
            run_frequency(corpus, NOUN, BLEU, [0.8, 0.5])
