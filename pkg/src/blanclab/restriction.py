"""Per-sentence scores, text-subset selection, and correlation-gain factors.

Restricting the text to its highest-scoring sentences imitates an annotator
who only reads the most promising part of a document.  Selection operates on
already-computed per-sentence count matrices, so no selection or
re-aggregation ever needs a new backend call: the combined score of a subset
pools the chosen matrices, and the averaged variant takes the unweighted mean
of the chosen per-sentence scores.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .backends.base import ModelBackend
from .engine import BlancResult, CountMatrix, MeasureConfig, evaluate
from .errors import DegenerateInputError
from .manifest import RunManifest
from .stats import SPEARMAN, CorrelationResult, correlation
from .tokenization import TokenizedText


class RestrictionStrategy(str, Enum):
    TOP_N = "top_n"
    CONTIGUOUS_N = "contiguous_n"
    THRESHOLD = "threshold"


class Aggregation(str, Enum):
    RECOMPUTE_COMBINED = "recompute_combined"
    AVERAGE_OF_SENTENCES = "average_of_sentences"


class WindowRank(str, Enum):
    COMBINED = "combined"
    AVERAGE = "average"


@dataclass(frozen=True)
class RestrictionSpec:
    """One restriction recipe; exactly the fields its strategy needs are set."""

    strategy: RestrictionStrategy
    aggregation: Aggregation = Aggregation.RECOMPUTE_COMBINED
    n: int | None = None
    threshold: float | None = None
    window_rank: WindowRank = WindowRank.COMBINED

    def __post_init__(self) -> None:
        if self.strategy in (RestrictionStrategy.TOP_N, RestrictionStrategy.CONTIGUOUS_N):
            if self.n is None or self.n < 1:
                raise ValueError(f"{self.strategy.value} requires n >= 1")
            if self.threshold is not None:
                raise ValueError(f"{self.strategy.value} must not set a threshold")
        else:
            if self.threshold is None:
                raise ValueError("threshold strategy requires a threshold value")
            if self.n is not None:
                raise ValueError("threshold strategy must not set n")


def per_sentence_blanc(
    text: TokenizedText,
    summary: TokenizedText,
    config: MeasureConfig,
    backend: ModelBackend,
) -> list[float]:
    """One score per sentence, computed from each sentence's own count matrix."""
    return evaluate(text, summary, config, backend).sentence_scores()


def select_top_n(scores: Sequence[float], n: int) -> list[int]:
    """Indices of the n largest scores (ties to the lower index), sorted."""
    if n < 1:
        raise ValueError("n must be >= 1")
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    return sorted(order[:n])


def select_contiguous(
    scores: Sequence[float], n: int, window_rank: WindowRank = WindowRank.COMBINED
) -> range:
    """The window of min(n, len) sentences maximizing window sum (COMBINED) or
    mean (AVERAGE); identical argmax at fixed length, both exposed for report
    labeling.  Ties go to the leftmost window."""
    if n < 1:
        raise ValueError("n must be >= 1")
    count = len(scores)
    if count == 0:
        raise ValueError("scores must be non-empty")
    width = min(n, count)
    best_start = 0
    best_sum = sum(scores[:width])
    window = best_sum
    for start in range(1, count - width + 1):
        window += scores[start + width - 1] - scores[start - 1]
        if window > best_sum:
            best_sum = window
            best_start = start
    return range(best_start, best_start + width)


@dataclass(frozen=True)
class ThresholdSelection:
    indices: tuple[int, ...]
    fallback: bool


def select_threshold(scores: Sequence[float], threshold: float) -> ThresholdSelection:
    """Indices scoring strictly above the threshold; if none do, fall back to
    the single argmax sentence (flagged)."""
    if not scores:
        raise ValueError("scores must be non-empty")
    indices = tuple(i for i, s in enumerate(scores) if s > threshold)
    if indices:
        return ThresholdSelection(indices=indices, fallback=False)
    argmax = max(range(len(scores)), key=lambda i: (scores[i], -i))
    return ThresholdSelection(indices=(argmax,), fallback=True)


def restricted_score(
    result: BlancResult, selection: Iterable[int], aggregation: Aggregation
) -> float:
    """Score of a sentence subset from an existing document result."""
    indices = sorted(set(selection))
    if not indices:
        raise ValueError("selection must be non-empty")
    if indices[0] < 0 or indices[-1] >= len(result.per_sentence):
        raise ValueError("selection indices out of range")
    if aggregation is Aggregation.RECOMPUTE_COMBINED:
        pooled = CountMatrix()
        for i in indices:
            pooled = pooled + result.per_sentence[i]
        return pooled.score
    return sum(result.per_sentence[i].score for i in indices) / len(indices)


def restricted_blanc(
    text: TokenizedText,
    summary: TokenizedText,
    selection: Iterable[int],
    aggregation: Aggregation,
    config: MeasureConfig,
    backend: ModelBackend,
) -> float:
    """Evaluate the pair, then score only the selected sentences."""
    result = evaluate(text, summary, config, backend)
    return restricted_score(result, selection, aggregation)


def apply_spec(result: BlancResult, spec: RestrictionSpec) -> tuple[float, bool]:
    """Restricted score for one sample under a spec; second value flags the
    threshold fallback."""
    scores = result.sentence_scores()
    fallback = False
    if spec.strategy is RestrictionStrategy.TOP_N:
        assert spec.n is not None
        indices: Iterable[int] = select_top_n(scores, spec.n)
    elif spec.strategy is RestrictionStrategy.CONTIGUOUS_N:
        assert spec.n is not None
        indices = select_contiguous(scores, spec.n, spec.window_rank)
    else:
        assert spec.threshold is not None
        chosen = select_threshold(scores, spec.threshold)
        indices = chosen.indices
        fallback = chosen.fallback
    return restricted_score(result, indices, spec.aggregation), fallback


# --------------------------------------------------------------------------
# Correlation gain
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GainEntry:
    quality: str
    factor: float | None
    full: CorrelationResult
    restricted: CorrelationResult
    sign_flip: bool
    note: str = ""


def correlation_gain(
    full_scores: Sequence[float],
    restricted_scores: Sequence[float],
    human: Mapping[str, Sequence[float]],
    *,
    kind: str = SPEARMAN,
) -> dict[str, GainEntry]:
    """Factor by which the correlation with each human quality changes when
    the restricted scores replace the full-text scores.

    A zero baseline correlation leaves the factor undefined (reported); a sign
    flip (negative factor) is flagged.
    """
    if len(full_scores) != len(restricted_scores):
        raise ValueError("full and restricted score vectors must be aligned")
    out: dict[str, GainEntry] = {}
    for quality, human_scores in human.items():
        full_corr = correlation(kind, full_scores, human_scores)
        restricted_corr = correlation(kind, restricted_scores, human_scores)
        if full_corr.coefficient == 0.0:
            out[quality] = GainEntry(
                quality=quality, factor=None, full=full_corr,
                restricted=restricted_corr, sign_flip=False,
                note="baseline correlation is zero; factor undefined",
            )
            continue
        factor = restricted_corr.coefficient / full_corr.coefficient
        out[quality] = GainEntry(
            quality=quality, factor=factor, full=full_corr,
            restricted=restricted_corr, sign_flip=factor < 0.0,
            note="sign flip" if factor < 0.0 else "",
        )
    return out


# --------------------------------------------------------------------------
# Curve report (one row per strategy x parameter x quality)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RestrictionRow:
    strategy: str
    aggregation: str
    parameter: float | None
    quality: str
    factor: float | None
    rho_full: float
    p_full: float
    rho_restricted: float
    p_restricted: float
    fallback_count: int
    note: str = ""


def restriction_report(
    results: Sequence[BlancResult],
    human: Mapping[str, Sequence[float]],
    specs: Sequence[RestrictionSpec],
    *,
    kind: str = SPEARMAN,
) -> list[RestrictionRow]:
    """Correlation-gain rows for every spec, plus a full-selection control row
    (factor exactly 1) per quality."""
    full_scores = [r.score for r in results]
    rows: list[RestrictionRow] = []

    def emit(strategy: str, aggregation: str, parameter: float | None,
             restricted: Sequence[float], fallback_count: int) -> None:
        try:
            gains = correlation_gain(full_scores, restricted, human, kind=kind)
        except DegenerateInputError as exc:
            for quality in human:
                rows.append(
                    RestrictionRow(
                        strategy=strategy, aggregation=aggregation,
                        parameter=parameter, quality=quality, factor=None,
                        rho_full=float("nan"), p_full=float("nan"),
                        rho_restricted=float("nan"), p_restricted=float("nan"),
                        fallback_count=fallback_count, note=str(exc),
                    )
                )
            return
        for quality, gain in gains.items():
            rows.append(
                RestrictionRow(
                    strategy=strategy, aggregation=aggregation,
                    parameter=parameter, quality=quality, factor=gain.factor,
                    rho_full=gain.full.coefficient, p_full=gain.full.p_value,
                    rho_restricted=gain.restricted.coefficient,
                    p_restricted=gain.restricted.p_value,
                    fallback_count=fallback_count, note=gain.note,
                )
            )

    emit("full", "recompute_combined", None, full_scores, 0)
    for spec in specs:
        restricted: list[float] = []
        fallback_count = 0
        for result in results:
            value, fellback = apply_spec(result, spec)
            restricted.append(value)
            fallback_count += int(fellback)
        parameter = float(spec.n) if spec.n is not None else spec.threshold
        emit(spec.strategy.value, spec.aggregation.value, parameter,
             restricted, fallback_count)
    return rows


def restriction_csv(rows: Sequence[RestrictionRow], manifest: RunManifest | None = None) -> str:
    buf = io.StringIO()
    if manifest is not None:
        buf.write(manifest.csv_comment() + "\n")
    buf.write(
        "strategy,aggregation,parameter,quality,factor,"
        "rho_full,p_full,rho_restricted,p_restricted,fallback_count,note\n"
    )
    for row in rows:
        parameter = "" if row.parameter is None else repr(row.parameter)
        factor = "" if row.factor is None else repr(row.factor)
        buf.write(
            f"{row.strategy},{row.aggregation},{parameter},{row.quality},{factor},"
            f"{row.rho_full!r},{row.p_full!r},{row.rho_restricted!r},"
            f"{row.p_restricted!r},{row.fallback_count},{row.note}\n"
        )
    return buf.getvalue()
