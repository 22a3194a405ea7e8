"""Reference-based sentence metrics.

Sentence BLEU (modified n-gram precision, geometric mean, brevity
penalty), ROUGE-1/2 (n-gram F1) and ROUGE-L (LCS F1), and the masked
similarity-matrix score used to plug embedding-based metrics into the
masking pipeline without running any model here.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import IO, Iterable, Sequence, Union

import numpy as np

from .errors import MetricError

logger = logging.getLogger(__name__)

TokenSeq = Sequence[str]


class MetricKind(str, Enum):
    BLEU = "BLEU"
    ROUGE1 = "ROUGE1"
    ROUGE2 = "ROUGE2"
    ROUGE_L = "ROUGE_L"
    MASKED_SIM = "MASKED_SIM"


class BleuSmoothing(str, Enum):
    # ADD1_ON_ZERO replaces a zero n-gram precision with
    # (num + 1) / (den + 1); NONE leaves the whole product at zero.
    ADD1_ON_ZERO = "ADD1_ON_ZERO"
    NONE = "NONE"


class SimMode(str, Enum):
    PLAIN = "PLAIN"
    ORACLE = "ORACLE"
    ANTI_ORACLE = "ANTI_ORACLE"


@dataclass(frozen=True)
class MetricConfig:
    kind: MetricKind = MetricKind.BLEU
    bleu_max_n: int = 4
    bleu_smoothing: BleuSmoothing = BleuSmoothing.ADD1_ON_ZERO
    case_fold: bool = True

    def __post_init__(self):
        if self.bleu_max_n < 1:
            raise MetricError(f"bleu_max_n must be >= 1, got {self.bleu_max_n}")

    def fingerprint(self) -> dict:
        return {
            "metric": self.kind.value,
            "bleu_max_n": self.bleu_max_n,
            "bleu_smoothing": self.bleu_smoothing.value,
            "case_fold": self.case_fold,
        }


def fold_tokens(tokens: TokenSeq, case_fold: bool) -> tuple[str, ...]:
    return tuple(t.lower() for t in tokens) if case_fold else tuple(tokens)


def ngram_profiles(tokens: TokenSeq, max_n: int) -> list[Counter]:
    """Counters of the sequence's n-grams for n = 1..max_n (index n-1)."""
    return [
        Counter(zip(*(tokens[i:] for i in range(n)))) for n in range(1, max_n + 1)
    ]


def bleu_from_profiles(
    ref_profiles: Sequence[Sequence[Counter]],
    ref_lengths: Sequence[int],
    candidate: TokenSeq,
    max_n: int,
    add1_on_zero: bool,
) -> float:
    """Sentence BLEU against precomputed reference n-gram profiles.

    Tokens must already be case-normalized. This is the single scoring
    core; :func:`sentence_bleu` is the folding front end, and corpus-level
    callers reuse reference profiles across masked variants.
    """
    c = len(candidate)
    if c == 0:
        logger.warning("empty candidate scored as 0")
        return 0.0
    usable = [rl for rl in ref_lengths if rl > 0]
    if not usable:
        raise MetricError("all references are empty")
    # Closest reference length; ties go to the shorter reference.
    r = min(usable, key=lambda rl: (abs(rl - c), rl))
    log_sum = 0.0
    for n in range(1, max_n + 1):
        den = c - n + 1
        if den <= 0:
            num, den = 0, 0
        else:
            cand_counts = Counter(zip(*(candidate[i:] for i in range(n))))
            num = 0
            for gram, cnt in cand_counts.items():
                best = 0
                for profiles in ref_profiles:
                    got = profiles[n - 1].get(gram, 0)
                    if got > best:
                        best = got
                if best:
                    num += cnt if cnt < best else best
        if num == 0:
            if not add1_on_zero:
                return 0.0
            log_sum += math.log(1.0 / (den + 1))
        else:
            log_sum += math.log(num / den)
    brevity = math.exp(min(0.0, 1.0 - r / c))
    return brevity * math.exp(log_sum / max_n)


def sentence_bleu(
    references: Sequence[TokenSeq], candidate: TokenSeq, config: MetricConfig
) -> float:
    """Sentence BLEU of a candidate against one or more references.

    Empty candidates score 0 with a warning; an entirely empty reference
    set violates the contract and raises.
    """
    if not references:
        raise MetricError("sentence_bleu needs at least one reference")
    refs = [fold_tokens(ref, config.case_fold) for ref in references]
    cand = fold_tokens(candidate, config.case_fold)
    profiles = [ngram_profiles(ref, config.bleu_max_n) for ref in refs]
    return bleu_from_profiles(
        profiles,
        [len(ref) for ref in refs],
        cand,
        config.bleu_max_n,
        config.bleu_smoothing is BleuSmoothing.ADD1_ON_ZERO,
    )


def _f1(precision: float, recall: float) -> float:
    if precision + recall <= 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _rouge_n(reference: TokenSeq, candidate: TokenSeq, n: int) -> float:
    ref_counts = Counter(zip(*(reference[i:] for i in range(n))))
    cand_counts = Counter(zip(*(candidate[i:] for i in range(n))))
    ref_total = sum(ref_counts.values())
    cand_total = sum(cand_counts.values())
    if ref_total == 0 or cand_total == 0:
        return 0.0
    overlap = sum(min(cnt, ref_counts.get(g, 0)) for g, cnt in cand_counts.items())
    return _f1(overlap / cand_total, overlap / ref_total)


def lcs_length(a: TokenSeq, b: TokenSeq) -> int:
    """Longest common subsequence length, O(len(a) * len(b))."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        curr = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                curr.append(prev[j - 1] + 1)
            else:
                curr.append(max(prev[j], curr[j - 1]))
        prev = curr
    return prev[-1]


def _rouge_l(reference: TokenSeq, candidate: TokenSeq) -> float:
    if not reference or not candidate:
        return 0.0
    lcs = lcs_length(reference, candidate)
    return _f1(lcs / len(candidate), lcs / len(reference))


def rouge(reference: TokenSeq, candidate: TokenSeq, config: MetricConfig) -> float:
    """ROUGE F1 of a candidate against a single reference."""
    ref = fold_tokens(reference, config.case_fold)
    cand = fold_tokens(candidate, config.case_fold)
    if not ref or not cand:
        logger.warning("empty input to rouge scored as 0")
        return 0.0
    if config.kind is MetricKind.ROUGE1:
        return _rouge_n(ref, cand, 1)
    if config.kind is MetricKind.ROUGE2:
        return _rouge_n(ref, cand, 2)
    if config.kind is MetricKind.ROUGE_L:
        return _rouge_l(ref, cand)
    raise MetricError(f"rouge called with metric kind {config.kind.value}")


@dataclass(frozen=True)
class SimilarityMatrix:
    """Token-similarity matrix with per-token mask flags.

    Rows index reference tokens, columns candidate tokens; values are
    cosine-style similarities in [-1, 1] produced by an external model.
    """

    values: np.ndarray
    ref_mask_flags: tuple[bool, ...]
    cand_mask_flags: tuple[bool, ...]

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 2:
            raise MetricError("similarity matrix must be 2-dimensional")
        if vals.shape != (len(self.ref_mask_flags), len(self.cand_mask_flags)):
            raise MetricError(
                f"matrix shape {vals.shape} does not match flag lengths "
                f"({len(self.ref_mask_flags)}, {len(self.cand_mask_flags)})"
            )
        if vals.size and (vals.min() < -1.0 - 1e-9 or vals.max() > 1.0 + 1e-9):
            raise MetricError("similarity values must lie in [-1, 1]")

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]


def masked_sim_score(matrix: SimilarityMatrix, mode: SimMode) -> float:
    """Greedy-matching F1 over a similarity matrix, after mask surgery.

    ORACLE forces entries where both tokens are masked to 1 (masked spans
    agree perfectly); ANTI_ORACLE zeroes masked rows and columns (masked
    spans can never match).
    """
    if matrix.rows == 0 or matrix.cols == 0:
        raise MetricError("zero-dimension similarity matrix")
    vals = matrix.values
    ref_idx = [i for i, f in enumerate(matrix.ref_mask_flags) if f]
    cand_idx = [j for j, f in enumerate(matrix.cand_mask_flags) if f]
    if mode is SimMode.ORACLE:
        if ref_idx and cand_idx:
            vals = vals.copy()
            vals[np.ix_(ref_idx, cand_idx)] = 1.0
    elif mode is SimMode.ANTI_ORACLE:
        if ref_idx or cand_idx:
            vals = vals.copy()
            vals[ref_idx, :] = 0.0
            vals[:, cand_idx] = 0.0
    recall = float(vals.max(axis=1).mean())
    precision = float(vals.max(axis=0).mean())
    return _f1(precision, recall)


def parse_similarity_file(stream: Union[IO[str], Iterable[str]]) -> SimilarityMatrix:
    """Read the line-oriented matrix format.

    Header "rows cols", then one line of reals per row, then two 0/1 flag
    lines (reference, candidate).
    """
    lines = [ln.strip() for ln in stream if ln.strip()]
    if not lines:
        raise MetricError("empty similarity file")
    try:
        rows, cols = (int(x) for x in lines[0].split())
    except ValueError:
        raise MetricError(f"bad similarity header: {lines[0]!r}")
    if len(lines) != 1 + rows + 2:
        raise MetricError(
            f"similarity file needs {1 + rows + 2} lines, found {len(lines)}"
        )
    try:
        values = np.array(
            [[float(x) for x in lines[1 + i].split()] for i in range(rows)],
            dtype=np.float64,
        ).reshape(rows, cols)
        ref_flags = tuple(bool(int(x)) for x in lines[1 + rows].split())
        cand_flags = tuple(bool(int(x)) for x in lines[2 + rows].split())
    except ValueError as exc:
        raise MetricError(f"bad similarity file contents: {exc}")
    if len(ref_flags) != rows or len(cand_flags) != cols:
        raise MetricError("similarity flag lines do not match matrix shape")
    return SimilarityMatrix(values, ref_flags, cand_flags)


def write_similarity_file(matrix: SimilarityMatrix, stream: IO[str]) -> None:
    stream.write(f"{matrix.rows} {matrix.cols}\n")
    for row in matrix.values:
        stream.write(" ".join(repr(float(x)) for x in row) + "\n")
    stream.write(" ".join(str(int(f)) for f in matrix.ref_mask_flags) + "\n")
    stream.write(" ".join(str(int(f)) for f in matrix.cand_mask_flags) + "\n")


def pair_scorer(config: MetricConfig):
    """Per-pair scoring function for token-based metrics."""
    if config.kind is MetricKind.BLEU:
        return lambda refs, cand: sentence_bleu(refs, cand, config)
    if config.kind in (MetricKind.ROUGE1, MetricKind.ROUGE2, MetricKind.ROUGE_L):
        return lambda refs, cand: rouge(refs[0], cand, config)
    raise MetricError(
        f"{config.kind.value} has no token-level scorer; supply similarity matrices"
    )


def corpus_mean(
    pairs: Sequence[tuple[Sequence[TokenSeq], TokenSeq]], config: MetricConfig
) -> float:
    """Arithmetic mean of per-pair sentence scores, summed in pair order."""
    if not pairs:
        raise MetricError("empty index set")
    score = pair_scorer(config)
    total = 0.0
    for refs, cand in pairs:
        total += score(refs, cand)
    return total / len(pairs)
