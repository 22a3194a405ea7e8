"""Annotated-corpus data model and JSONL ingestion.

A corpus is an ordered list of aligned pairs. Each side of a pair is a
pre-tokenized sentence plus non-overlapping feature spans; the engine
never re-tokenizes. One pair per JSONL line:

    {"pair_id": "p1",
     "refs": [{"tokens": ["John", "likes", "apples"],
               "spans": [{"start": 2, "end": 3, "feature": "POS:NOUN"}]}],
     "cand": {"tokens": [...], "spans": [...]},
     "meta": {"system": "..."}}

``meta`` is optional and merges into the corpus-level metadata map.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import IO, Iterable, Iterator, Union

from .errors import CorpusError

# Mask tokens are built from these brackets; they must never occur in real
# text, otherwise oracle scoring silently corrupts (hence the hard reject).
RESERVED_MASK_CHARS = ("⟦", "⟧")  # ⟦ ⟧


def is_reserved_surface(surface: str) -> bool:
    return any(ch in surface for ch in RESERVED_MASK_CHARS)


@dataclass(frozen=True)
class Token:
    """A single pre-tokenized word with its 0-based sentence position."""

    surface: str
    index: int

    def __post_init__(self):
        if not self.surface:
            raise CorpusError("empty token surface")
        if any(ch.isspace() for ch in self.surface):
            raise CorpusError(f"token surface contains whitespace: {self.surface!r}")
        if self.index < 0:
            raise CorpusError(f"negative token index: {self.index}")


@dataclass(frozen=True)
class Span:
    """A half-open token range [start, end) carrying one feature label.

    ``surface_form`` is the lowercased, space-joined covered text; it is
    derived at construction and used by vocabulary and uniqueness
    operations, while original casing stays on the tokens.
    """

    start: int
    end: int
    feature_id: str
    surface_form: str

    def __post_init__(self):
        if not self.feature_id:
            raise CorpusError("span with empty feature id")
        if not (0 <= self.start < self.end):
            raise CorpusError(f"bad span bounds [{self.start}, {self.end})")

    @property
    def length(self) -> int:
        return self.end - self.start


def make_span(tokens: tuple[Token, ...], start: int, end: int, feature_id: str) -> Span:
    if end > len(tokens):
        raise CorpusError(
            f"span [{start}, {end}) exceeds sentence length {len(tokens)}"
        )
    surface = " ".join(t.surface.lower() for t in tokens[start:end])
    return Span(start=start, end=end, feature_id=feature_id, surface_form=surface)


@dataclass(frozen=True)
class AnnotatedSentence:
    """Tokens plus non-overlapping feature spans for one sentence."""

    tokens: tuple[Token, ...]
    spans: tuple[Span, ...] = ()
    raw: str | None = None

    def __post_init__(self):
        for pos, tok in enumerate(self.tokens):
            if tok.index != pos:
                raise CorpusError(
                    f"token index {tok.index} at position {pos}: indices must be 0..n-1"
                )
        n = len(self.tokens)
        last_end: dict[str, int] = {}
        for span in sorted(self.spans, key=lambda s: (s.feature_id, s.start)):
            if span.end > n:
                raise CorpusError(
                    f"span [{span.start}, {span.end}) exceeds sentence length {n}"
                )
            if span.start < last_end.get(span.feature_id, 0):
                raise CorpusError(f"overlapping spans for feature {span.feature_id}")
            last_end[span.feature_id] = span.end

    def __len__(self) -> int:
        return len(self.tokens)

    @cached_property
    def surfaces(self) -> tuple[str, ...]:
        return tuple(t.surface for t in self.tokens)

    @cached_property
    def surfaces_lower(self) -> tuple[str, ...]:
        return tuple(t.surface.lower() for t in self.tokens)

    @classmethod
    def from_words(
        cls,
        words: Iterable[str],
        spans: Iterable[tuple[int, int, str]] = (),
        raw: str | None = None,
    ) -> "AnnotatedSentence":
        """Build a sentence from plain strings and (start, end, feature) triples."""
        tokens = tuple(Token(w, i) for i, w in enumerate(words))
        built = tuple(make_span(tokens, s, e, f) for s, e, f in spans)
        return cls(tokens=tokens, spans=built, raw=raw)


@dataclass(frozen=True)
class SentencePair:
    """An aligned (references, candidate) pair; references is non-empty."""

    references: tuple[AnnotatedSentence, ...]
    candidate: AnnotatedSentence
    pair_id: str

    def __post_init__(self):
        if not self.references:
            raise CorpusError(f"pair {self.pair_id}: no references")
        if not self.pair_id:
            raise CorpusError("pair with empty pair_id")

    @property
    def reference(self) -> AnnotatedSentence:
        """Primary reference; extra references only feed multi-reference metrics."""
        return self.references[0]


@dataclass(frozen=True)
class ParallelCorpus:
    """Ordered, immutable collection of pairs plus free-form metadata."""

    pairs: tuple[SentencePair, ...]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.pairs:
            raise CorpusError("empty corpus")
        seen = set()
        for pair in self.pairs:
            if pair.pair_id in seen:
                raise CorpusError(f"duplicate pair_id {pair.pair_id}")
            seen.add(pair.pair_id)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[SentencePair]:
        return iter(self.pairs)


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "warning" | "error"
    pair_id: str
    message: str


def _sentence_from_record(record: dict, where: str) -> AnnotatedSentence:
    try:
        words = record["tokens"]
    except (KeyError, TypeError):
        raise CorpusError(f"{where}: missing 'tokens'")
    if not isinstance(words, list) or not all(isinstance(w, str) for w in words):
        raise CorpusError(f"{where}: 'tokens' must be a list of strings")
    for w in words:
        if is_reserved_surface(w):
            raise CorpusError(f"{where}: reserved mask token in input: {w!r}")
    spans = []
    for raw in record.get("spans", []):
        try:
            spans.append((int(raw["start"]), int(raw["end"]), str(raw["feature"])))
        except (KeyError, TypeError, ValueError):
            raise CorpusError(f"{where}: bad span record {raw!r}")
    try:
        return AnnotatedSentence.from_words(words, spans, raw=record.get("raw"))
    except CorpusError as exc:
        raise CorpusError(f"{where}: {exc}")


def parse_corpus(
    stream: Union[IO[str], Iterable[str]], metadata: dict | None = None
) -> ParallelCorpus:
    """Parse JSONL records into a :class:`ParallelCorpus`, preserving order.

    Raises :class:`CorpusError` with the offending line number for any
    malformed record, overlapping same-feature spans, duplicate pair ids,
    reserved mask characters, or an empty stream.
    """
    pairs = []
    meta: dict = dict(metadata or {})
    seen: set[str] = set()
    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"line {lineno}: invalid JSON ({exc.msg})")
        if not isinstance(record, dict):
            raise CorpusError(f"line {lineno}: record must be an object")
        pair_id = record.get("pair_id")
        if not isinstance(pair_id, str) or not pair_id:
            raise CorpusError(f"line {lineno}: missing or empty 'pair_id'")
        if pair_id in seen:
            raise CorpusError(f"line {lineno}: duplicate pair_id {pair_id}")
        seen.add(pair_id)
        refs_raw = record.get("refs")
        if not isinstance(refs_raw, list) or not refs_raw:
            raise CorpusError(f"line {lineno}: 'refs' must be a non-empty list")
        try:
            refs = tuple(
                _sentence_from_record(r, f"pair {pair_id} ref {i}")
                for i, r in enumerate(refs_raw)
            )
            cand = _sentence_from_record(
                record.get("cand") or {}, f"pair {pair_id} cand"
            )
        except CorpusError as exc:
            raise CorpusError(f"line {lineno}: {exc}")
        pairs.append(SentencePair(references=refs, candidate=cand, pair_id=pair_id))
        line_meta = record.get("meta")
        if isinstance(line_meta, dict):
            meta.update({str(k): str(v) for k, v in line_meta.items()})
    if not pairs:
        raise CorpusError("empty corpus")
    return ParallelCorpus(pairs=tuple(pairs), metadata=meta)


def _sentence_to_record(sentence: AnnotatedSentence) -> dict:
    rec: dict = {
        "tokens": list(sentence.surfaces),
        "spans": [
            {"start": s.start, "end": s.end, "feature": s.feature_id}
            for s in sentence.spans
        ],
    }
    if sentence.raw is not None:
        rec["raw"] = sentence.raw
    return rec


def serialize_corpus(corpus: ParallelCorpus) -> Iterator[str]:
    """Yield one JSONL line per pair; metadata rides on the first line."""
    for i, pair in enumerate(corpus.pairs):
        record = {
            "pair_id": pair.pair_id,
            "refs": [_sentence_to_record(r) for r in pair.references],
            "cand": _sentence_to_record(pair.candidate),
        }
        if i == 0 and corpus.metadata:
            record["meta"] = {str(k): str(v) for k, v in corpus.metadata.items()}
        yield json.dumps(record, ensure_ascii=False)


def load_corpus(path, meta_path=None) -> ParallelCorpus:
    """Read a corpus JSONL file, optionally merging a sidecar metadata JSON."""
    meta = None
    if meta_path is not None:
        with open(meta_path, encoding="utf-8") as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise CorpusError(f"{meta_path}: metadata sidecar must be a JSON object")
        meta = {str(k): str(v) for k, v in raw.items()}
    with open(path, encoding="utf-8") as fh:
        return parse_corpus(fh, metadata=meta)


def save_corpus(corpus: ParallelCorpus, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in serialize_corpus(corpus):
            fh.write(line + "\n")


def parse_tagged_sentences(
    stream: Union[IO[str], Iterable[str]], source: str = "tagged input"
) -> list[AnnotatedSentence]:
    """Parse the vertical tab-separated tagged format.

    One token per line as ``surface<TAB>POS[<TAB>NER]``, blank line
    between sentences. POS tags "_" or "" add no span; NER tags use
    BIO prefixes ("B-LOC"/"I-LOC") or bare types, with "O"/"_"/"" for
    none. Contiguous same-type entity tokens merge into one span unless
    a B- prefix forces a new one.
    """
    sentences: list[AnnotatedSentence] = []
    words: list[str] = []
    pos_tags: list[str] = []
    ner_tags: list[str] = []

    def flush():
        if not words:
            return
        spans: list[tuple[int, int, str]] = []
        for i, tag in enumerate(pos_tags):
            if tag and tag != "_":
                spans.append((i, i + 1, f"POS:{tag}"))
        prev_type = None
        start = 0
        for i, tag in enumerate(ner_tags + [""]):
            if tag in ("", "O", "_"):
                ent_type, fresh = None, False
            elif tag.startswith("B-"):
                ent_type, fresh = tag[2:], True
            elif tag.startswith("I-"):
                ent_type, fresh = tag[2:], False
            else:
                ent_type, fresh = tag, False
            if ent_type != prev_type or fresh:
                if prev_type is not None:
                    spans.append((start, i, f"NER:{prev_type}"))
                start = i
            prev_type = ent_type
        sentences.append(AnnotatedSentence.from_words(words, spans))
        words.clear()
        pos_tags.clear()
        ner_tags.clear()

    for lineno, line in enumerate(stream, start=1):
        line = line.rstrip("\n")
        if not line.strip():
            flush()
            continue
        parts = line.split("\t")
        surface = parts[0].strip()
        if not surface:
            raise CorpusError(f"{source}: line {lineno}: empty token")
        words.append(surface)
        pos_tags.append(parts[1].strip() if len(parts) > 1 else "")
        ner_tags.append(parts[2].strip() if len(parts) > 2 else "")
    flush()
    return sentences


def validate_corpus(corpus: ParallelCorpus) -> list[Diagnostic]:
    """Check a corpus built in memory.

    Corpora from :func:`parse_corpus` are valid by construction, so this
    only reports reserved mask tokens (errors) and empty candidates
    (warnings).
    """
    diags: list[Diagnostic] = []
    for pair in corpus.pairs:
        sides = list(pair.references) + [pair.candidate]
        for sentence in sides:
            for tok in sentence.tokens:
                if is_reserved_surface(tok.surface):
                    diags.append(
                        Diagnostic(
                            "error",
                            pair.pair_id,
                            f"reserved mask token in {pair.pair_id}: {tok.surface!r}",
                        )
                    )
        if len(pair.candidate) == 0:
            diags.append(
                Diagnostic("warning", pair.pair_id, "candidate has no tokens")
            )
    return diags
