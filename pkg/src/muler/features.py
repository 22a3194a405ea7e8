"""Feature specs, span extraction, vocabularies, splits, and statistics.

A feature is identified by a namespaced id ("POS:NOUN", "NER:LOC",
"MORPH:GENDER", "SYN:3", ...). Two matcher kinds exist: span-label
matchers select the annotation spans carrying the feature id, word-set
matchers mark every token whose lowercased surface is in an explicit set
(used for synthetic partitions, alphabet-split restrictions, and the
default gender pronoun set).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from enum import Enum

from .corpus import AnnotatedSentence, ParallelCorpus, Span, make_span
from .errors import CorpusError, FeatureError


class FeatureCategory(str, Enum):
    POS = "POS"
    NER = "NER"
    MORPH = "MORPH"
    SYNTHETIC = "SYNTHETIC"
    CUSTOM = "CUSTOM"


class Side(str, Enum):
    REF = "REF"
    CAND = "CAND"
    BOTH = "BOTH"


@dataclass(frozen=True)
class FeatureSpec:
    """A feature and its matching rule.

    ``words`` is None for span-label matchers; a frozenset of lowercased
    words turns the spec into a word-set matcher.
    """

    feature_id: str
    category: FeatureCategory = FeatureCategory.CUSTOM
    words: frozenset[str] | None = None

    def __post_init__(self):
        if not self.feature_id:
            raise FeatureError("empty feature_id")
        if self.words is not None:
            for w in self.words:
                if not w or w != w.lower() or any(ch.isspace() for ch in w):
                    raise FeatureError(
                        f"word-set matcher entries must be lowercased single words: {w!r}"
                    )

    @property
    def is_word_set(self) -> bool:
        return self.words is not None

    def restricted_to(self, words: frozenset[str], suffix: str) -> "FeatureSpec":
        """Derive a word-set feature limited to ``words`` (frequency runs)."""
        return FeatureSpec(
            feature_id=f"{self.feature_id}@{suffix}",
            category=self.category,
            words=words,
        )


@dataclass(frozen=True)
class FeatureVocabulary:
    """Sorted set of lowercased single words observed under a feature."""

    feature_id: str
    words: tuple[str, ...]

    def __post_init__(self):
        if list(self.words) != sorted(set(self.words)):
            raise FeatureError("vocabulary must be sorted and duplicate-free")

    def __len__(self) -> int:
        return len(self.words)


@dataclass(frozen=True)
class SplitSpec:
    """Alphabet partition of a vocabulary at a target head fraction.

    ``head`` holds the words whose first letter sorts at or below the
    boundary letter; it is the smallest such prefix set reaching
    ``alpha * len(vocab)`` words. ``boundary_letter`` is "" when alpha is
    0 (head empty).
    """

    alpha: float
    boundary_letter: str
    head: frozenset[str]
    tail: frozenset[str]


@dataclass(frozen=True)
class FeatureStats:
    feature_id: str
    frequency: float
    uniqueness: float
    total_occurrences: int
    unique_surface_forms: int


def extract_spans(sentence: AnnotatedSentence, feature: FeatureSpec) -> list[Span]:
    """Spans of ``feature`` in ``sentence``, non-overlapping, sorted by start.

    Word-set matchers yield one single-token span per matching token.
    """
    if feature.is_word_set:
        spans = [
            make_span(sentence.tokens, i, i + 1, feature.feature_id)
            for i, w in enumerate(sentence.surfaces_lower)
            if w in feature.words
        ]
        return spans
    return sorted(
        (s for s in sentence.spans if s.feature_id == feature.feature_id),
        key=lambda s: s.start,
    )


def _side_sentences(corpus: ParallelCorpus, side: Side):
    for pair in corpus.pairs:
        if side in (Side.REF, Side.BOTH):
            yield pair.reference
        if side in (Side.CAND, Side.BOTH):
            yield pair.candidate


def build_vocabulary(
    corpus: ParallelCorpus, feature: FeatureSpec, side: Side = Side.BOTH
) -> FeatureVocabulary:
    """Union of lowercased words covered by the feature on the given side(s).

    Multi-token spans contribute each covered token separately.
    """
    words: set[str] = set()
    for sentence in _side_sentences(corpus, side):
        for span in extract_spans(sentence, feature):
            words.update(sentence.surfaces_lower[span.start : span.end])
    return FeatureVocabulary(feature.feature_id, tuple(sorted(words)))


def alphabet_split(vocab: FeatureVocabulary, alpha: float) -> SplitSpec:
    """Split a vocabulary by sorted first letter at the target fraction.

    The boundary letter is the first (by code point) whose cumulative word
    count reaches ``alpha * len(vocab)``; the head is every word starting
    at or below it.
    """
    if not 0.0 <= alpha <= 1.0:
        raise FeatureError(f"alpha must be in [0, 1], got {alpha}")
    if len(vocab) == 0:
        raise FeatureError("cannot split an empty vocabulary")
    if alpha == 0.0:
        return SplitSpec(0.0, "", frozenset(), frozenset(vocab.words))
    by_letter: dict[str, list[str]] = {}
    for word in vocab.words:
        by_letter.setdefault(word[0], []).append(word)
    # 1e-9 guards against float noise in alpha * n (counts are integers).
    threshold = alpha * len(vocab) - 1e-9
    head: list[str] = []
    boundary = ""
    for letter in sorted(by_letter):
        head.extend(by_letter[letter])
        boundary = letter
        if len(head) >= threshold:
            break
    head_set = frozenset(head)
    return SplitSpec(alpha, boundary, head_set, frozenset(vocab.words) - head_set)


def corpus_word_universe(corpus: ParallelCorpus) -> list[str]:
    """Sorted unique lowercased words over all reference and candidate tokens."""
    words: set[str] = set()
    for pair in corpus.pairs:
        for ref in pair.references:
            words.update(ref.surfaces_lower)
        words.update(pair.candidate.surfaces_lower)
    return sorted(words)


def partition_words(words: list[str], p: int, seed: int) -> list[frozenset[str]]:
    """Shuffle ``words`` with the given seed and cut p equal groups.

    The remainder after ``p * (len(words) // p)`` is left unassigned.
    """
    shuffled = list(words)
    random.Random(seed).shuffle(shuffled)
    size = len(words) // p
    return [frozenset(shuffled[i * size : (i + 1) * size]) for i in range(p)]


def synthetic_partition(
    corpus: ParallelCorpus, p: int, seed: int
) -> list[FeatureSpec]:
    """Random word-set features partitioning the corpus vocabulary.

    Deterministic for a given (corpus, p, seed); groups are disjoint and
    equally sized, remainder words belong to no group.
    """
    if p < 2:
        raise FeatureError(f"partition needs p >= 2, got {p}")
    universe = corpus_word_universe(corpus)
    if len(universe) < p:
        raise FeatureError(
            f"vocabulary of size {len(universe)} cannot be split into {p} groups"
        )
    groups = partition_words(universe, p, seed)
    return [
        FeatureSpec(f"SYN:{i}", FeatureCategory.SYNTHETIC, words=group)
        for i, group in enumerate(groups)
    ]


def feature_stats(
    corpus: ParallelCorpus, feature: FeatureSpec, side: Side = Side.REF
) -> FeatureStats:
    """Coverage frequency and surface-form uniqueness of a feature.

    Frequency is the mean per-sentence proportion of tokens covered by the
    feature (zero-length sentences skipped); uniqueness is distinct span
    surface forms over total span occurrences.
    """
    proportions: list[float] = []
    surface_forms: set[str] = set()
    total = 0
    for sentence in _side_sentences(corpus, side):
        if len(sentence) == 0:
            continue
        covered = 0
        for span in extract_spans(sentence, feature):
            covered += span.length
            surface_forms.add(span.surface_form)
            total += 1
        proportions.append(covered / len(sentence))
    frequency = sum(proportions) / len(proportions) if proportions else 0.0
    uniqueness = len(surface_forms) / total if total else 0.0
    return FeatureStats(
        feature_id=feature.feature_id,
        frequency=frequency,
        uniqueness=uniqueness,
        total_occurrences=total,
        unique_surface_forms=len(surface_forms),
    )


# Default pronoun set used when no explicit gender annotation is supplied.
# This is a documented approximation and is echoed in report metadata.
GENDER_PRONOUNS = frozenset({"he", "she", "his", "her", "him", "hers"})

_POS_TAGS = (
    "NOUN VERB PUNCT PROPN INTJ NUM PRON SYM SCONJ ADJ ADP ADV AUX X CCONJ DET"
).split()
_NER_TYPES = (
    "TIME WORK_OF_ART PERSON NORP CARDINAL MONEY EVENT ORDINAL DATE FAC ORG LAW "
    "PRODUCT PERCENT QUANTITY LANGUAGE GPE LOC"
).split()


def builtin_features() -> dict[str, FeatureSpec]:
    """The stock feature inventory keyed by feature id."""
    inventory: dict[str, FeatureSpec] = {}
    for tag in _POS_TAGS:
        fid = f"POS:{tag}"
        inventory[fid] = FeatureSpec(fid, FeatureCategory.POS)
    for kind in _NER_TYPES:
        fid = f"NER:{kind}"
        inventory[fid] = FeatureSpec(fid, FeatureCategory.NER)
    inventory["MORPH:GENDER"] = FeatureSpec(
        "MORPH:GENDER", FeatureCategory.MORPH, words=GENDER_PRONOUNS
    )
    for kind in ("DEFINITE", "NUMBER"):
        fid = f"MORPH:{kind}"
        inventory[fid] = FeatureSpec(fid, FeatureCategory.MORPH)
    return inventory


def load_feature_file(path) -> list[FeatureSpec]:
    """Read feature specs from JSON: one object or a list of objects.

    Schema: {"feature_id": str, "category": str, "words": [str]?}
    """
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    records = raw if isinstance(raw, list) else [raw]
    specs = []
    for rec in records:
        if not isinstance(rec, dict) or "feature_id" not in rec:
            raise CorpusError(f"{path}: feature record must have 'feature_id'")
        category = FeatureCategory(rec.get("category", "CUSTOM"))
        words = rec.get("words")
        specs.append(
            FeatureSpec(
                feature_id=str(rec["feature_id"]),
                category=category,
                words=frozenset(str(w).lower() for w in words)
                if words is not None
                else None,
            )
        )
    return specs


def resolve_features(names: list[str]) -> list[FeatureSpec]:
    """Map feature ids to specs, using the built-in inventory where known.

    Unknown ids become span-label matchers in the CUSTOM category.
    """
    inventory = builtin_features()
    specs = []
    for name in names:
        spec = inventory.get(name)
        if spec is None:
            spec = FeatureSpec(name, FeatureCategory.CUSTOM)
        specs.append(spec)
    return specs
