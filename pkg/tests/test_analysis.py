import json
import random

import pytest

from muler.analysis import (
    CorrelationMatrix,
    XMeasure,
    YMeasure,
    correlate,
    matrix_to_dict,
    pearson,
    pearson_with_reason,
    points_long_format,
    serialize_report,
    series_from_report,
)
from muler.errors import MulerError
from muler.metrics import MetricConfig
from muler.scores import feature_report
from muler.features import FeatureSpec

from conftest import synthetic_corpus
from oracles import brute_pearson


class TestPearson:
    def test_identical_series(self):
        assert pearson([1, 2, 3], [1, 2, 3]) == pytest.approx(1.0)

    def test_negated_series(self):
        assert pearson([1, 2, 3], [-1, -2, -3]) == pytest.approx(-1.0)

    def test_outlier_case_pinned_by_textbook_formula(self):
        xs, ys = [1, 2, 3, 4], [1, 2, 3, 100]
        want = brute_pearson(xs, ys)
        assert pearson(xs, ys) == pytest.approx(want, abs=1e-12)
        assert pearson(xs, ys) == pytest.approx(0.78502642096301, abs=1e-12)

    def test_random_sweep_against_oracle(self):
        rng = random.Random(17)
        for _ in range(50):
            n = rng.randint(3, 30)
            xs = [rng.uniform(-5, 5) for _ in range(n)]
            ys = [rng.uniform(-5, 5) for _ in range(n)]
            assert pearson(xs, ys) == pytest.approx(brute_pearson(xs, ys), abs=1e-9)

    def test_scale_shift_invariance(self):
        rng = random.Random(19)
        xs = [rng.uniform(0, 1) for _ in range(20)]
        ys = [rng.uniform(0, 1) for _ in range(20)]
        base = pearson(xs, ys)
        for a, b in ((2.5, 1.0), (-3.0, 0.2), (0.001, -7.0)):
            scaled = pearson([a * x + b for x in xs], ys)
            want = base if a > 0 else -base
            assert scaled == pytest.approx(want, abs=1e-9)

    def test_symmetry(self):
        xs, ys = [1.0, 4.0, 2.0, 8.0], [0.5, 0.25, 0.75, 0.125]
        assert pearson(xs, ys) == pytest.approx(pearson(ys, xs), abs=1e-15)

    def test_absent_cases(self):
        assert pearson_with_reason([1, 2], [1, 2]) == (None, "fewer than 3 points")
        assert pearson_with_reason([1, 1, 1], [1, 2, 3]) == (None, "zero variance")
        assert pearson_with_reason([1, 2, 3], [1, 2]) == (None, "length mismatch")


def make_series(system, langs, year, overall, muler_by_feature, flags=()):
    entries = []
    for feature, muler in muler_by_feature.items():
        entries.append(
            {
                "feature": feature,
                "base": overall,
                "max": min(1.0, overall + 0.2),
                "min": max(0.0, overall - 0.2),
                "muler": muler,
                "abl": 0.1,
                "n_indices": 50,
                "eta": [1, 2, 3],
                "freq": 0.2,
                "uniq": 0.8,
                "flags": list(flags),
            }
        )
    return series_from_report(
        {
            "meta": {"system": system, "langs": langs, "year": year},
            "overall": overall,
            "entries": entries,
            "scorer_gaps": {},
        },
        source=system,
    )


class TestCorrelate:
    def test_perfect_correlation_by_construction(self):
        series = [
            make_series(f"s{i}", "de-en", "2020", b, {"POS:NOUN": -b})
            for i, b in enumerate([0.1, 0.2, 0.3, 0.4])
        ]
        matrix = correlate(series, XMeasure.BLEU, YMeasure.NEG_MULER)
        cell = matrix.cells[("de-en", "POS:NOUN")]
        assert cell.value == pytest.approx(1.0)

    def test_too_few_systems_absent(self):
        series = [
            make_series("a", "de-en", "2020", 0.3, {"POS:NOUN": 0.2}),
            make_series("b", "de-en", "2020", 0.3, {"POS:NOUN": 0.2}),
        ]
        matrix = correlate(series)
        cell = matrix.cells[("de-en", "POS:NOUN")]
        assert cell.value is None
        assert "fewer than 3" in cell.reason

    def test_zero_variance_absent_not_zero(self):
        series = [
            make_series(f"s{i}", "de-en", "2020", 0.3, {"POS:NOUN": 0.25})
            for i in range(4)
        ]
        cell = correlate(series).cells[("de-en", "POS:NOUN")]
        assert cell.value is None
        assert cell.reason == "zero variance"

    def test_flagged_entries_excluded_and_counted(self):
        series = [
            make_series(f"s{i}", "de-en", "2020", 0.1 * (i + 1), {"POS:NOUN": -0.1 * (i + 1)})
            for i in range(4)
        ]
        series.append(
            make_series(
                "bad", "de-en", "2020", 0.9, {"POS:NOUN": -3.0},
                flags=("NEGATIVE_NUMERATOR",),
            )
        )
        cell = correlate(series).cells[("de-en", "POS:NOUN")]
        assert cell.n_systems == 4
        assert cell.n_excluded == 1
        assert cell.value == pytest.approx(1.0)

    def test_permutation_invariance(self):
        series = [
            make_series(f"s{i}", "de-en", "2020", 0.1 * (i + 1), {"POS:NOUN": 0.05 * (7 - i)})
            for i in range(5)
        ]
        rng = random.Random(23)
        shuffled = list(series)
        rng.shuffle(shuffled)
        a = correlate(series).cells[("de-en", "POS:NOUN")].value
        b = correlate(shuffled).cells[("de-en", "POS:NOUN")].value
        assert a == pytest.approx(b, abs=1e-12)

    def test_group_by_year_and_langs(self):
        series = [
            make_series("a", "de-en", "2019", 0.1, {"POS:NOUN": 0.3}),
            make_series("b", "de-en", "2020", 0.2, {"POS:NOUN": 0.2}),
        ]
        matrix = correlate(series, group_by=("year", "langs"))
        assert matrix.row_labels == ("2019/de-en", "2020/de-en")

    def test_measure_variants(self):
        series = [
            make_series(f"s{i}", "zh-en", "2020", 0.2 + 0.1 * i, {"POS:VERB": 0.4 - 0.05 * i})
            for i in range(4)
        ]
        for x in XMeasure:
            for y in YMeasure:
                cell = correlate(series, x, y).cells[("zh-en", "POS:VERB")]
                if cell.value is not None:
                    assert -1.0 - 1e-12 <= cell.value <= 1.0 + 1e-12


class TestSerialization:
    def report(self):
        corpus = synthetic_corpus(10, seed=171)
        return feature_report(
            corpus, [FeatureSpec("POS:NOUN"), FeatureSpec("NER:LOC")], MetricConfig()
        )

    def test_report_json_round_trip(self):
        text = serialize_report(self.report(), "json")
        payload = json.loads(text)
        assert json.loads(serialize_report(self.report(), "json")) == payload
        assert payload["entries"][0]["feature"] == "POS:NOUN"

    def test_report_csv(self):
        text = serialize_report(self.report(), "csv")
        lines = text.strip().split("\n")
        assert lines[0].startswith("feature,base,max,min,muler")
        assert len(lines) == 3  # header + 2 features

    def test_absent_matrix_cells_are_empty_fields(self):
        series = [
            make_series("a", "de-en", "2020", 0.3, {"POS:NOUN": 0.2}),
            make_series("b", "de-en", "2020", 0.35, {"POS:NOUN": 0.25}),
        ]
        matrix = correlate(series)
        csv_text = serialize_report(matrix, "csv")
        rows = csv_text.strip().split("\n")
        assert rows[0] == "group,POS:NOUN"
        assert rows[1] == "de-en,"

    def test_matrix_json(self):
        series = [
            make_series(f"s{i}", "de-en", "2020", 0.1 * (i + 2), {"POS:NOUN": -0.1 * i})
            for i in range(4)
        ]
        matrix = correlate(series)
        payload = json.loads(serialize_report(matrix, "json"))
        assert payload["rows"] == ["de-en"]
        assert "POS:NOUN" in payload["cells"]["de-en"]

    def test_unknown_format_rejected(self):
        with pytest.raises(MulerError):
            serialize_report(self.report(), "xml")

    def test_validation_payload_json_only(self):
        assert json.loads(serialize_report({"a": 1}, "json")) == {"a": 1}
        with pytest.raises(MulerError):
            serialize_report({"a": 1}, "csv")


class TestPoints:
    def test_long_format_rows(self):
        series = [
            make_series("a", "de-en", "2020", 0.3, {"POS:NOUN": 0.2, "POS:VERB": 0.4}),
            make_series("b", "fi-en", "2019", 0.2, {"POS:NOUN": 0.5}),
        ]
        rows = points_long_format(series)
        assert ("de-en", "POS:NOUN", 0.3, -0.2) in rows
        assert rows == sorted(rows, key=lambda r: (r[0], r[1]))
        assert len(rows) == 3
