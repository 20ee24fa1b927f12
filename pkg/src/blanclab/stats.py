"""Correlation machinery: Pearson/Spearman with p-values, quality-by-measure
correlation tables, and the expert/turker ratio-shift analysis.

p-values are two-sided.  The default method is the t-distribution
approximation with n-2 degrees of freedom; a seeded permutation mode is
available for small samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import t as t_dist

from .errors import DegenerateInputError

PEARSON = "pearson"
SPEARMAN = "spearman"

#: Human-scored quality dimensions, in canonical display order.
QUALITY_DIMENSIONS = ("coherence", "consistency", "fluency", "relevance")


@dataclass(frozen=True)
class CorrelationResult:
    coefficient: float
    p_value: float
    n: int
    kind: str


def _as_checked_arrays(x: Sequence[float], y: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    ax = np.asarray(x, dtype=np.float64)
    ay = np.asarray(y, dtype=np.float64)
    if ax.ndim != 1 or ay.ndim != 1 or ax.shape != ay.shape:
        raise ValueError("x and y must be one-dimensional and of equal length")
    if ax.size < 3:
        raise DegenerateInputError(f"need at least 3 points, got {ax.size}")
    return ax, ay


def _pearson_coefficient(ax: np.ndarray, ay: np.ndarray) -> float:
    dx = ax - ax.mean()
    dy = ay - ay.mean()
    vx = float(np.dot(dx, dx))
    vy = float(np.dot(dy, dy))
    if vx == 0.0 or vy == 0.0:
        raise DegenerateInputError("zero variance input: correlation undefined")
    r = float(np.dot(dx, dy)) / math.sqrt(vx * vy)
    return max(-1.0, min(1.0, r))


def _t_p_value(r: float, n: int) -> float:
    if abs(r) >= 1.0:
        return 0.0
    t_stat = abs(r) * math.sqrt((n - 2) / (1.0 - r * r))
    return float(2.0 * t_dist.sf(t_stat, n - 2))


def _permutation_p_value(
    ax: np.ndarray, ay: np.ndarray, r_obs: float, permutations: int, seed: int
) -> float:
    rng = np.random.default_rng(seed)
    hits = 0
    threshold = abs(r_obs) - 1e-12
    for _ in range(permutations):
        perm = rng.permutation(ay)
        try:
            r = _pearson_coefficient(ax, perm)
        except DegenerateInputError:
            continue
        if abs(r) >= threshold:
            hits += 1
    return (hits + 1) / (permutations + 1)


def average_ranks(values: Sequence[float]) -> np.ndarray:
    """Fractional ranks (1-based); tied values share the average of their ranks."""
    arr = np.asarray(values, dtype=np.float64)
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(arr.size, dtype=np.float64)
    i = 0
    while i < arr.size:
        j = i
        while j + 1 < arr.size and arr[order[j + 1]] == arr[order[i]]:
            j += 1
        # positions i..j (0-based) share the mean of ranks i+1..j+1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def pearson(
    x: Sequence[float],
    y: Sequence[float],
    *,
    p_method: str = "t",
    permutations: int = 10_000,
    seed: int = 0,
) -> CorrelationResult:
    """Sample Pearson correlation with a two-sided p-value."""
    ax, ay = _as_checked_arrays(x, y)
    r = _pearson_coefficient(ax, ay)
    if p_method == "t":
        p = _t_p_value(r, ax.size)
    elif p_method == "permutation":
        p = _permutation_p_value(ax, ay, r, permutations, seed)
    else:
        raise ValueError(f"unknown p-value method {p_method!r}")
    return CorrelationResult(coefficient=r, p_value=p, n=int(ax.size), kind=PEARSON)


def spearman(
    x: Sequence[float],
    y: Sequence[float],
    *,
    p_method: str = "t",
    permutations: int = 10_000,
    seed: int = 0,
) -> CorrelationResult:
    """Spearman rank correlation (average ranks for ties), two-sided p-value."""
    ax, ay = _as_checked_arrays(x, y)
    rx, ry = average_ranks(ax), average_ranks(ay)
    r = _pearson_coefficient(rx, ry)
    if p_method == "t":
        p = _t_p_value(r, ax.size)
    elif p_method == "permutation":
        p = _permutation_p_value(rx, ry, r, permutations, seed)
    else:
        raise ValueError(f"unknown p-value method {p_method!r}")
    return CorrelationResult(coefficient=r, p_value=p, n=int(ax.size), kind=SPEARMAN)


def correlation(kind: str, x: Sequence[float], y: Sequence[float], **kwargs) -> CorrelationResult:
    if kind == PEARSON:
        return pearson(x, y, **kwargs)
    if kind == SPEARMAN:
        return spearman(x, y, **kwargs)
    raise ValueError(f"unknown correlation kind {kind!r}")


# --------------------------------------------------------------------------
# Correlation table (quality x {Pearson, Spearman} rows, one column per measure)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CorrelationTable:
    qualities: tuple[str, ...]
    labels: tuple[str, ...]
    cells: Mapping[tuple[str, str, str], CorrelationResult | None]
    warnings: tuple[str, ...]

    def cell(self, quality: str, kind: str, label: str) -> CorrelationResult | None:
        return self.cells.get((quality, kind, label))

    def to_rows(self) -> list[dict[str, object]]:
        rows: list[dict[str, object]] = []
        for quality in self.qualities:
            for kind in (PEARSON, SPEARMAN):
                row: dict[str, object] = {"quality": quality, "correlation": kind}
                for label in self.labels:
                    res = self.cell(quality, kind, label)
                    row[label] = None if res is None else res.coefficient
                    row[f"{label}__p"] = None if res is None else res.p_value
                rows.append(row)
        return rows

    def to_text(self) -> str:
        """Aligned plain-text table mirroring the quality/correlation layout."""
        headers = ["quality", "correlation", *self.labels]
        rows: list[list[str]] = []
        for quality in self.qualities:
            for ki, kind in enumerate((PEARSON, SPEARMAN)):
                cells = []
                for label in self.labels:
                    res = self.cell(quality, kind, label)
                    cells.append("n/a" if res is None else f"{res.coefficient:.3f}")
                rows.append([quality if ki == 0 else "", kind.capitalize(), *cells])
        widths = [
            max(len(headers[c]), *(len(r[c]) for r in rows)) if rows else len(headers[c])
            for c in range(len(headers))
        ]
        lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
        for r in rows:
            lines.append("  ".join(v.ljust(w) for v, w in zip(r, widths)))
        return "\n".join(lines) + "\n"


def correlation_table(
    measures: Mapping[str, Sequence[float]],
    human: Mapping[str, Sequence[float]],
    *,
    qualities: Sequence[str] = QUALITY_DIMENSIONS,
) -> CorrelationTable:
    """Correlate each measure column with each human quality vector.

    Qualities missing from `human` are omitted with a warning; degenerate
    cells (zero variance) are left empty with a warning.
    """
    labels = tuple(measures)
    kept: list[str] = []
    warnings: list[str] = []
    for quality in qualities:
        if quality in human:
            kept.append(quality)
        else:
            warnings.append(f"quality {quality!r} missing from human scores; omitted")
    cells: dict[tuple[str, str, str], CorrelationResult | None] = {}
    for quality in kept:
        for kind in (PEARSON, SPEARMAN):
            for label in labels:
                try:
                    cells[(quality, kind, label)] = correlation(
                        kind, measures[label], human[quality]
                    )
                except DegenerateInputError as exc:
                    cells[(quality, kind, label)] = None
                    warnings.append(f"{quality}/{kind}/{label}: {exc}")
    return CorrelationTable(
        qualities=tuple(kept), labels=labels,
        cells=cells, warnings=tuple(warnings),
    )


# --------------------------------------------------------------------------
# Expert/turker ratio shift
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ShiftEntry:
    """Percent change of corr(expert)/corr(turker) when switching measure a -> b."""

    quality: str
    kind: str
    percent_change: float | None
    ratio_a: float | None
    ratio_b: float | None
    a_expert: CorrelationResult
    a_turker: CorrelationResult
    b_expert: CorrelationResult
    b_turker: CorrelationResult
    note: str = ""


def expert_turker_shift(
    measure_a: Sequence[float],
    measure_b: Sequence[float],
    expert_scores: Mapping[str, Sequence[float]],
    turker_scores: Mapping[str, Sequence[float]],
    *,
    qualities: Sequence[str] = QUALITY_DIMENSIONS,
) -> list[ShiftEntry]:
    """Per quality and correlation kind, how the expert/turker correlation
    ratio moves when replacing measure_a with measure_b."""
    def degenerate(kind: str, n: int) -> CorrelationResult:
        return CorrelationResult(coefficient=0.0, p_value=1.0, n=n, kind=kind)

    entries: list[ShiftEntry] = []
    for quality in qualities:
        if quality not in expert_scores or quality not in turker_scores:
            continue
        for kind in (PEARSON, SPEARMAN):
            undefined = False
            results = []
            for measure, human in (
                (measure_a, expert_scores[quality]),
                (measure_a, turker_scores[quality]),
                (measure_b, expert_scores[quality]),
                (measure_b, turker_scores[quality]),
            ):
                try:
                    results.append(correlation(kind, measure, human))
                except DegenerateInputError:
                    results.append(degenerate(kind, len(measure)))
                    undefined = True
            a_e, a_t, b_e, b_t = results
            if undefined:
                entries.append(
                    ShiftEntry(
                        quality=quality, kind=kind, percent_change=None,
                        ratio_a=None, ratio_b=None,
                        a_expert=a_e, a_turker=a_t, b_expert=b_e, b_turker=b_t,
                        note="degenerate input: correlation undefined, shift undefined",
                    )
                )
                continue
            note = ""
            ratio_a = ratio_b = percent = None
            if a_t.coefficient == 0.0 or b_t.coefficient == 0.0:
                note = "turker correlation is zero; ratio undefined"
            else:
                ratio_a = a_e.coefficient / a_t.coefficient
                ratio_b = b_e.coefficient / b_t.coefficient
                if ratio_a == 0.0:
                    note = "baseline ratio is zero; shift undefined"
                else:
                    percent = (ratio_b / ratio_a - 1.0) * 100.0
            entries.append(
                ShiftEntry(
                    quality=quality, kind=kind, percent_change=percent,
                    ratio_a=ratio_a, ratio_b=ratio_b,
                    a_expert=a_e, a_turker=a_t, b_expert=b_e, b_turker=b_t,
                    note=note,
                )
            )
    return entries
