"""Span masking: oracle, anti-oracle, hybrid, and partial strategies.

Masking collapses each feature span to a single mask token. The oracle
uses one shared token on both sides, so masked spans always agree; the
anti-oracle gives the candidate a distinct primed token, so masked spans
never agree. Hybrid mixes the two by word identity (an alphabet split of
the feature vocabulary), and partial masks only the split head, leaving
the tail untouched.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

from .corpus import AnnotatedSentence, SentencePair, Span, is_reserved_surface
from .errors import CorpusError, FeatureError
from .features import FeatureSpec, SplitSpec, extract_spans

MASK_OPEN = "⟦"  # ⟦
MASK_CLOSE = "⟧"  # ⟧
ANTI_SUFFIX = "'"


def mask_token_for(feature_id: str) -> str:
    return f"{MASK_OPEN}{feature_id}{MASK_CLOSE}"


def anti_mask_token_for(feature_id: str) -> str:
    return mask_token_for(feature_id) + ANTI_SUFFIX


class MaskKind(str, Enum):
    ORACLE = "ORACLE"
    ANTI_ORACLE = "ANTI_ORACLE"
    HYBRID = "HYBRID"
    PARTIAL = "PARTIAL"


@dataclass(frozen=True)
class MaskStrategy:
    kind: MaskKind
    split: SplitSpec | None = None

    def __post_init__(self):
        needs_split = self.kind in (MaskKind.HYBRID, MaskKind.PARTIAL)
        if needs_split and self.split is None:
            raise FeatureError(f"{self.kind.value} masking requires a split")
        if not needs_split and self.split is not None:
            raise FeatureError(f"{self.kind.value} masking takes no split")


@dataclass(frozen=True)
class MaskedPair:
    masked_reference: tuple[str, ...]
    masked_candidate: tuple[str, ...]
    ref_mask_flags: tuple[bool, ...]
    cand_mask_flags: tuple[bool, ...]


def collapse_spans(
    surfaces: Sequence[str],
    spans: Sequence[Span],
    replacement: Callable[[Span], str | None],
) -> tuple[tuple[str, ...], tuple[bool, ...]]:
    """Replace each span with one token (or keep it when replacement is None).

    Spans must be sorted and non-overlapping; output length shrinks by
    span_length - 1 per replaced span.
    """
    out: list[str] = []
    flags: list[bool] = []
    cursor = 0
    last_end = 0
    for span in spans:
        if span.start < last_end:
            raise CorpusError("overlapping spans passed to masking")
        last_end = span.end
        out.extend(surfaces[cursor : span.start])
        flags.extend([False] * (span.start - cursor))
        token = replacement(span)
        if token is None:
            out.extend(surfaces[span.start : span.end])
            flags.extend([False] * span.length)
        else:
            out.append(token)
            flags.append(True)
        cursor = span.end
    out.extend(surfaces[cursor:])
    flags.extend([False] * (len(surfaces) - cursor))
    return tuple(out), tuple(flags)


def mask_sentence(
    sentence: AnnotatedSentence, spans: Sequence[Span], mask_token: str
) -> tuple[tuple[str, ...], tuple[bool, ...]]:
    """Collapse every span to ``mask_token``; tokens outside spans pass through."""
    if mask_token in sentence.surfaces:
        raise CorpusError(f"mask token {mask_token!r} collides with sentence text")
    ordered = sorted(spans, key=lambda s: s.start)
    return collapse_spans(sentence.surfaces, ordered, lambda _span: mask_token)


def _head_member(sentence: AnnotatedSentence, span: Span, split: SplitSpec) -> bool:
    # Split membership of a span follows its first covered token.
    return sentence.surfaces_lower[span.start] in split.head


def _replacement_fn(
    sentence: AnnotatedSentence,
    strategy: MaskStrategy,
    shared: str,
    primed: str,
    candidate_side: bool,
) -> Callable[[Span], str | None]:
    kind = strategy.kind
    if kind is MaskKind.ORACLE:
        return lambda _s: shared
    if kind is MaskKind.ANTI_ORACLE:
        return lambda _s: primed if candidate_side else shared
    split = strategy.split
    assert split is not None
    if kind is MaskKind.HYBRID:
        if not candidate_side:
            return lambda _s: shared
        return lambda s: primed if _head_member(sentence, s, split) else shared
    # PARTIAL: mask the head oracle-style, leave the tail unmasked.
    return lambda s: shared if _head_member(sentence, s, split) else None


def mask_side(
    sentence: AnnotatedSentence,
    feature: FeatureSpec,
    strategy: MaskStrategy,
    candidate_side: bool,
) -> tuple[tuple[str, ...], tuple[bool, ...]]:
    """Mask one side of a pair under the given strategy."""
    for surface in sentence.surfaces:
        if is_reserved_surface(surface):
            raise CorpusError(f"reserved mask token in sentence: {surface!r}")
    spans = extract_spans(sentence, feature)
    repl = _replacement_fn(
        sentence,
        strategy,
        mask_token_for(feature.feature_id),
        anti_mask_token_for(feature.feature_id),
        candidate_side,
    )
    return collapse_spans(sentence.surfaces, spans, repl)


def apply_strategy(
    pair: SentencePair, feature: FeatureSpec, strategy: MaskStrategy
) -> MaskedPair:
    """Mask the primary reference and the candidate of one pair."""
    ref_tokens, ref_flags = mask_side(pair.reference, feature, strategy, False)
    cand_tokens, cand_flags = mask_side(pair.candidate, feature, strategy, True)
    return MaskedPair(
        masked_reference=ref_tokens,
        masked_candidate=cand_tokens,
        ref_mask_flags=ref_flags,
        cand_mask_flags=cand_flags,
    )
