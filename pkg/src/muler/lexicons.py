"""Lexicon-based sentence scorers and the reference-candidate gap.

A lexicon maps lowercased words to real scores (sentiment polarity,
concreteness, valence, arousal, dominance, ...). A sentence scores as the
mean over its in-lexicon tokens; out-of-vocabulary tokens are ignored.
Sentiment lexicons additionally flip a token's sign when a negation word
occurs within a fixed window before it.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

from .corpus import ParallelCorpus
from .errors import LexiconError

logger = logging.getLogger(__name__)

DEFAULT_NEGATION_WORDS = frozenset(
    {"not", "no", "never", "n't", "neither", "nor", "without", "cannot"}
)


@dataclass(frozen=True)
class Lexicon:
    name: str
    entries: dict
    negation_words: frozenset[str] = frozenset()
    negation_window: int = 3

    def __post_init__(self):
        if not self.entries:
            raise LexiconError(f"lexicon {self.name!r} has no entries")
        for word, score in self.entries.items():
            if not math.isfinite(score):
                raise LexiconError(f"non-finite score for {word!r}")

    def fingerprint(self) -> dict:
        return {
            "name": self.name,
            "size": len(self.entries),
            "aggregation": "mean",
            "negation_words": sorted(self.negation_words),
            "negation_window": self.negation_window,
        }


@dataclass(frozen=True)
class ScorerGap:
    scorer_name: str
    gap: float | None
    covered_pairs: int


def load_lexicon(
    path,
    name: str | None = None,
    negation_words: frozenset[str] = frozenset(),
    negation_window: int = 3,
) -> Lexicon:
    """Read a word<TAB>score TSV; an optional header line is skipped.

    Duplicate words keep the last value (with a warning); an unparseable
    score raises with its line number.
    """
    entries: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) < 2:
                raise LexiconError(f"{path}: line {lineno}: expected word<TAB>score")
            word = parts[0].strip().lower()
            raw_score = parts[1].strip()
            if lineno == 1 and not _is_number(raw_score):
                continue  # header
            try:
                score = float(raw_score)
            except ValueError:
                raise LexiconError(
                    f"{path}: line {lineno}: bad score {raw_score!r}"
                )
            if not math.isfinite(score):
                raise LexiconError(
                    f"{path}: line {lineno}: non-finite score {raw_score!r}"
                )
            if word in entries:
                logger.warning("duplicate lexicon word %r, keeping last value", word)
            entries[word] = score
    if not entries:
        raise LexiconError(f"{path}: no lexicon entries")
    return Lexicon(
        name=name or str(path),
        entries=entries,
        negation_words=negation_words,
        negation_window=negation_window,
    )


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def score_sentence(tokens: Sequence[str], lexicon: Lexicon) -> float | None:
    """Mean lexicon score over in-lexicon tokens, or None when all are OOV.

    With negation words configured, a token's score is sign-flipped if a
    negation word occurs within ``negation_window`` tokens before it.
    """
    lowered = [t.lower() for t in tokens]
    scores = []
    for i, word in enumerate(lowered):
        value = lexicon.entries.get(word)
        if value is None:
            continue
        if lexicon.negation_words:
            window = lowered[max(0, i - lexicon.negation_window) : i]
            if any(w in lexicon.negation_words for w in window):
                value = -value
        scores.append(value)
    if not scores:
        return None
    return sum(scores) / len(scores)


def scorer_gap(corpus: ParallelCorpus, lexicon: Lexicon) -> ScorerGap:
    """Mean (reference score - candidate score) over pairs covered on both sides."""
    diffs = []
    for pair in corpus.pairs:
        ref_score = score_sentence(pair.reference.surfaces, lexicon)
        cand_score = score_sentence(pair.candidate.surfaces, lexicon)
        if ref_score is None or cand_score is None:
            continue
        diffs.append(ref_score - cand_score)
    if not diffs:
        return ScorerGap(lexicon.name, None, 0)
    return ScorerGap(lexicon.name, sum(diffs) / len(diffs), len(diffs))
