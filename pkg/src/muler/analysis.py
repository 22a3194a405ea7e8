"""Cross-system aggregation and serialization.

Loads per-system report files, groups them (by language pair, optionally
by year as well), and correlates a chosen x measure (overall score,
restricted base score, or interval width) against the per-feature score
across the systems of each group. Cells with fewer than three usable
systems or zero variance stay absent: absence and no-correlation are
different facts.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import CorpusError, MulerError
from .scores import MulerReport, report_to_dict

MIN_SYSTEMS = 3


class XMeasure(str, Enum):
    BLEU = "BLEU"
    INDICES_BLEU = "INDICES_BLEU"
    MAX_MINUS_MIN = "MAX_MINUS_MIN"


class YMeasure(str, Enum):
    NEG_MULER = "NEG_MULER"
    MULER = "MULER"


@dataclass(frozen=True)
class SystemSeries:
    """One system's report, reduced to what correlation needs."""

    system_id: str
    language_pair: str
    year: str
    overall_bleu: float
    entries: dict  # feature id -> entry dict (report schema)


@dataclass(frozen=True)
class CorrelationCell:
    value: float | None
    reason: str | None
    n_systems: int
    n_excluded: int


@dataclass(frozen=True)
class CorrelationMatrix:
    x_measure: str
    y_measure: str
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    cells: dict


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float | None:
    """Sample Pearson correlation, or None when undefined."""
    value, _reason = pearson_with_reason(xs, ys)
    return value


def pearson_with_reason(
    xs: Sequence[float], ys: Sequence[float]
) -> tuple[float | None, str | None]:
    if len(xs) != len(ys):
        return None, "length mismatch"
    if len(xs) < MIN_SYSTEMS:
        return None, f"fewer than {MIN_SYSTEMS} points"
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    dx = x - x.mean()
    dy = y - y.mean()
    sx = float(np.sqrt((dx * dx).sum()))
    sy = float(np.sqrt((dy * dy).sum()))
    if sx == 0.0 or sy == 0.0:
        return None, "zero variance"
    return float((dx * dy).sum() / (sx * sy)), None


def series_from_report(raw: dict, source: str = "") -> SystemSeries:
    meta = raw.get("meta", {})
    entries = {e["feature"]: e for e in raw.get("entries", [])}
    try:
        overall = float(raw["overall"])
    except (KeyError, TypeError, ValueError):
        raise CorpusError(f"report {source or '<memory>'}: missing overall score")
    return SystemSeries(
        system_id=str(meta.get("system", source or "unknown")),
        language_pair=str(meta.get("langs", "unknown")),
        year=str(meta.get("year", "")),
        overall_bleu=overall,
        entries=entries,
    )


def load_report_dir(directory) -> list[SystemSeries]:
    """Read every *.json report in a directory, sorted by filename."""
    paths = sorted(Path(directory).glob("*.json"))
    if not paths:
        raise CorpusError(f"no report files in {directory}")
    series = []
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}: invalid JSON ({exc.msg})")
        series.append(series_from_report(raw, source=path.stem))
    return series


def _group_label(series: SystemSeries, group_by: Sequence[str]) -> str:
    parts = []
    for key in group_by:
        if key == "langs":
            parts.append(series.language_pair)
        elif key == "year":
            parts.append(series.year)
        else:
            raise MulerError(f"unknown group key {key!r}")
    return "/".join(parts)


def _usable_entry(entry: dict) -> bool:
    return (
        entry.get("muler") is not None
        and entry.get("n_indices", 0) >= 1
        and not entry.get("flags")
    )


def _xy(series: SystemSeries, entry: dict, x: XMeasure, y: YMeasure):
    if x is XMeasure.BLEU:
        xv = series.overall_bleu
    elif x is XMeasure.INDICES_BLEU:
        xv = entry["base"]
    else:
        xv = entry["max"] - entry["min"]
    score = entry["muler"]
    yv = -score if y is YMeasure.NEG_MULER else score
    return xv, yv


def correlate(
    series: Sequence[SystemSeries],
    x_measure: XMeasure = XMeasure.BLEU,
    y_measure: YMeasure = YMeasure.NEG_MULER,
    group_by: Sequence[str] = ("langs",),
) -> CorrelationMatrix:
    """Per-(group, feature) Pearson correlation across systems.

    Flagged or undefined entries are excluded and counted per cell.
    """
    groups: dict[str, list[SystemSeries]] = {}
    features: set[str] = set()
    for s in series:
        groups.setdefault(_group_label(s, group_by), []).append(s)
        features.update(s.entries.keys())
    row_labels = tuple(sorted(groups))
    col_labels = tuple(sorted(features))
    cells = {}
    for row in row_labels:
        for col in col_labels:
            xs, ys = [], []
            excluded = 0
            for s in groups[row]:
                entry = s.entries.get(col)
                if entry is None:
                    continue
                if not _usable_entry(entry):
                    excluded += 1
                    continue
                xv, yv = _xy(s, entry, x_measure, y_measure)
                xs.append(xv)
                ys.append(yv)
            value, reason = pearson_with_reason(xs, ys)
            cells[(row, col)] = CorrelationCell(value, reason, len(xs), excluded)
    return CorrelationMatrix(
        x_measure=x_measure.value,
        y_measure=y_measure.value,
        row_labels=row_labels,
        col_labels=col_labels,
        cells=cells,
    )


def matrix_to_dict(matrix: CorrelationMatrix) -> dict:
    return {
        "x": matrix.x_measure,
        "y": matrix.y_measure,
        "rows": list(matrix.row_labels),
        "cols": list(matrix.col_labels),
        "cells": {
            row: {
                col: {
                    "value": cell.value,
                    "reason": cell.reason,
                    "n": cell.n_systems,
                    "excluded": cell.n_excluded,
                }
                for col in matrix.col_labels
                for cell in [matrix.cells[(row, col)]]
            }
            for row in matrix.row_labels
        },
    }


def points_long_format(
    series: Sequence[SystemSeries],
    x_measure: XMeasure = XMeasure.BLEU,
    y_measure: YMeasure = YMeasure.NEG_MULER,
    group_by: Sequence[str] = ("langs",),
) -> list[tuple[str, str, float, float]]:
    """(group, feature, x, y) rows for external plotting."""
    rows = []
    for s in series:
        label = _group_label(s, group_by)
        for feature in sorted(s.entries):
            entry = s.entries[feature]
            if not _usable_entry(entry):
                continue
            xv, yv = _xy(s, entry, x_measure, y_measure)
            rows.append((label, feature, xv, yv))
    rows.sort(key=lambda r: (r[0], r[1]))
    return rows


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return repr(value)
    return str(value)


def _report_rows(report_dict: dict) -> list[list]:
    header = [
        "feature", "base", "max", "min", "muler", "abl",
        "n_indices", "eta_add", "eta_hit", "eta_miss", "freq", "uniq", "flags",
    ]
    rows = [header]
    for e in report_dict["entries"]:
        rows.append(
            [
                e["feature"], e["base"], e["max"], e["min"], e["muler"], e["abl"],
                e["n_indices"], e["eta"][0], e["eta"][1], e["eta"][2],
                e["freq"], e["uniq"], " ".join(e["flags"]),
            ]
        )
    return rows


def _matrix_rows(matrix: CorrelationMatrix) -> list[list]:
    rows = [["group"] + list(matrix.col_labels)]
    for row in matrix.row_labels:
        rows.append(
            [row] + [matrix.cells[(row, col)].value for col in matrix.col_labels]
        )
    return rows


def _delimited(rows: list[list], delimiter: str) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    for row in rows:
        writer.writerow([_format_cell(v) for v in row])
    return buf.getvalue()


def to_json(payload: dict) -> str:
    """Canonical JSON: sorted keys, NaN-free, trailing newline."""
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def serialize_report(obj, fmt: str = "json") -> str:
    """Render a report, matrix, or validation payload to json/csv/tsv."""
    fmt = fmt.lower()
    if fmt not in ("json", "csv", "tsv"):
        raise MulerError(f"unknown output format {fmt!r}")
    if isinstance(obj, MulerReport):
        payload = report_to_dict(obj)
        if fmt == "json":
            return to_json(payload)
        return _delimited(_report_rows(payload), "," if fmt == "csv" else "\t")
    if isinstance(obj, CorrelationMatrix):
        if fmt == "json":
            return to_json(matrix_to_dict(obj))
        return _delimited(_matrix_rows(obj), "," if fmt == "csv" else "\t")
    if isinstance(obj, dict):
        if fmt == "json":
            return to_json(obj)
        raise MulerError("validation payloads serialize to JSON only")
    raise MulerError(f"cannot serialize {type(obj).__name__}")
