"""Measure-family sweeps and the max-help selection criterion.

A sweep evaluates every (corpus, config) cell of a family, picks the
argmax-mean config per corpus, and reports each alternative's drop as a
fraction of the optimal mean.  Per-sample scores are cached on disk keyed by
(corpus id, sample id, config hash, backend identity) so repeated sweeps
reuse expensive model calls; reports are a pure function of that score
matrix.
"""

from __future__ import annotations

import hashlib
import io
import json
import logging
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

from .backends.base import ModelBackend
from .corpus import AnnotatedSample
from .engine import MeasureConfig, evaluate
from .errors import AllSamplesSkippedError, DegenerateInputError, SampleSkippedError
from .manifest import RunManifest
from .tokenization import TokenizedText, tokenize_text

logger = logging.getLogger(__name__)


class ScoreCache:
    """Per-sample score store on disk, one JSON file per (corpus, config, backend)."""

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _file_for(self, corpus_id: str, config_hash: str, backend_identity: str) -> Path:
        key = f"{corpus_id}\x00{config_hash}\x00{backend_identity}"
        digest = hashlib.sha256(key.encode()).hexdigest()[:24]
        return self.root / f"scores-{digest}.json"

    def load(self, corpus_id: str, config_hash: str, backend_identity: str) -> dict[str, float]:
        path = self._file_for(corpus_id, config_hash, backend_identity)
        if not path.exists():
            return {}
        with open(path, encoding="utf-8") as handle:
            payload = json.load(handle)
        return {str(k): float(v) for k, v in payload["scores"].items()}

    def store(
        self,
        corpus_id: str,
        config_hash: str,
        backend_identity: str,
        scores: Mapping[str, float],
    ) -> None:
        path = self._file_for(corpus_id, config_hash, backend_identity)
        merged = self.load(corpus_id, config_hash, backend_identity)
        merged.update(scores)
        payload = {
            "key": {
                "corpus_id": corpus_id,
                "config_hash": config_hash,
                "backend_identity": backend_identity,
            },
            "scores": merged,
        }
        fd, tmp_name = tempfile.mkstemp(dir=self.root, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                json.dump(payload, handle, sort_keys=True)
            os.replace(tmp_name, path)
        except BaseException:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise


@dataclass(frozen=True)
class ConfigEvaluation:
    """Mean score of one config over one corpus, with per-sample detail."""

    corpus_id: str
    config_label: str
    config_hash: str
    backend_identity: str
    mean: float
    stderr: float
    scores: Mapping[str, float]
    skipped: tuple[tuple[str, str], ...]

    @property
    def n(self) -> int:
        return len(self.scores)


TokenCache = dict[str, tuple[TokenizedText, TokenizedText]]


def evaluate_config(
    corpus: Sequence[AnnotatedSample],
    config: MeasureConfig,
    backend: ModelBackend,
    *,
    corpus_id: str = "corpus",
    cache: ScoreCache | None = None,
    workers: int = 1,
    token_cache: TokenCache | None = None,
) -> ConfigEvaluation:
    """Score every sample of the corpus under one config.

    Cached samples never touch the backend (not even for tokenization).
    Samples that cannot be evaluated are skipped with a diagnostic; if
    everything is skipped the evaluation fails explicitly.
    """
    if not corpus:
        raise ValueError("corpus must be non-empty")
    config_hash = config.config_hash()
    cached = (
        cache.load(corpus_id, config_hash, backend.identity) if cache is not None else {}
    )
    scores: dict[str, float] = {
        s.sample_id: cached[s.sample_id] for s in corpus if s.sample_id in cached
    }
    todo = [s for s in corpus if s.sample_id not in scores]
    skipped: list[tuple[str, str]] = []
    tokens: TokenCache = token_cache if token_cache is not None else {}

    def run(sample: AnnotatedSample) -> tuple[str, float | None, str | None]:
        try:
            pair = tokens.get(sample.sample_id)
            if pair is None:
                pair = (
                    tokenize_text(sample.text, backend),
                    tokenize_text(sample.summary, backend),
                )
                tokens.setdefault(sample.sample_id, pair)
            result = evaluate(pair[0], pair[1], config, backend)
            return sample.sample_id, result.score, None
        except SampleSkippedError as exc:
            return sample.sample_id, None, str(exc)

    if todo:
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                outcomes = list(pool.map(run, todo))
        else:
            outcomes = [run(s) for s in todo]
        fresh: dict[str, float] = {}
        for sample_id, score, reason in outcomes:
            if reason is None and score is not None:
                fresh[sample_id] = score
            else:
                logger.warning("sample %s skipped: %s", sample_id, reason)
                skipped.append((sample_id, reason or "skipped"))
        scores.update(fresh)
        if cache is not None and fresh:
            cache.store(corpus_id, config_hash, backend.identity, fresh)

    if not scores:
        raise AllSamplesSkippedError(
            f"all {len(corpus)} samples of {corpus_id!r} were skipped under "
            f"{config.label!r}: {skipped[:3]}..."
        )
    ordered = [scores[s.sample_id] for s in corpus if s.sample_id in scores]
    mean = sum(ordered) / len(ordered)
    if len(ordered) > 1:
        var = sum((v - mean) ** 2 for v in ordered) / (len(ordered) - 1)
        stderr = math.sqrt(var / len(ordered))
    else:
        stderr = 0.0
    return ConfigEvaluation(
        corpus_id=corpus_id,
        config_label=config.label,
        config_hash=config_hash,
        backend_identity=backend.identity,
        mean=mean,
        stderr=stderr,
        scores=scores,
        skipped=tuple(skipped),
    )


def drop_fraction(mean_opt: float, mean_alt: float) -> float:
    """(mean_opt - mean_alt) / mean_opt; negative means the alternative is better."""
    if mean_opt == 0.0:
        raise DegenerateInputError("optimal mean is zero; drop fraction undefined")
    return (mean_opt - mean_alt) / mean_opt


@dataclass(frozen=True)
class SweepCell:
    dataset: str
    label: str
    mean: float
    stderr: float
    n_scored: int
    n_skipped: int
    drop: float | None
    is_optimal: bool


@dataclass(frozen=True)
class SweepReport:
    datasets: tuple[str, ...]
    labels: tuple[str, ...]
    cells: Mapping[tuple[str, str], SweepCell]
    optimal: Mapping[str, str]
    universal: bool
    notes: tuple[str, ...] = ()
    evaluations: Mapping[tuple[str, str], ConfigEvaluation] = field(default_factory=dict)

    def to_json_dict(self, manifest: RunManifest | None = None) -> dict[str, Any]:
        out: dict[str, Any] = {
            "datasets": list(self.datasets),
            "configs": list(self.labels),
            "optimal": dict(self.optimal),
            "universal": self.universal,
            "notes": list(self.notes),
            "cells": [
                {
                    "dataset": cell.dataset,
                    "config": cell.label,
                    "mean": cell.mean,
                    "stderr": cell.stderr,
                    "n_scored": cell.n_scored,
                    "n_skipped": cell.n_skipped,
                    "drop_fraction": cell.drop,
                    "is_optimal": cell.is_optimal,
                }
                for dataset in self.datasets
                for cell in (self.cells[(dataset, label)] for label in self.labels)
            ],
        }
        if manifest is not None:
            out["manifest"] = manifest.to_json_dict()
        return out

    def to_csv(self, manifest: RunManifest | None = None) -> str:
        buf = io.StringIO()
        if manifest is not None:
            buf.write(manifest.csv_comment() + "\n")
        buf.write("dataset,config,mean,stderr,n_scored,n_skipped,drop_fraction,is_optimal\n")
        for dataset in self.datasets:
            for label in self.labels:
                cell = self.cells[(dataset, label)]
                drop = "" if cell.drop is None else repr(cell.drop)
                buf.write(
                    f"{dataset},{label},{cell.mean!r},{cell.stderr!r},"
                    f"{cell.n_scored},{cell.n_skipped},{drop},{cell.is_optimal}\n"
                )
        return buf.getvalue()


def max_help_select(
    corpora: Mapping[str, Sequence[AnnotatedSample]],
    family: Sequence[MeasureConfig],
    backend: ModelBackend,
    *,
    cache: ScoreCache | None = None,
    workers: int = 1,
) -> SweepReport:
    """Evaluate the family on every corpus and select the argmax-mean config.

    Ties break toward the earlier config in family order (noted); the
    universality flag is true when every corpus shares one argmax.
    """
    if not corpora:
        raise ValueError("at least one corpus is required")
    if not family:
        raise ValueError("the measure family must not be empty")
    labels = [c.label for c in family]
    if len(set(labels)) != len(labels):
        raise ValueError("config labels within a family must be unique")

    notes: list[str] = []
    cells: dict[tuple[str, str], SweepCell] = {}
    evaluations: dict[tuple[str, str], ConfigEvaluation] = {}
    optimal: dict[str, str] = {}
    datasets = tuple(corpora)

    for dataset in datasets:
        token_cache: TokenCache = {}
        evals: list[ConfigEvaluation] = []
        for config in family:
            evals.append(
                evaluate_config(
                    corpora[dataset], config, backend,
                    corpus_id=dataset, cache=cache, workers=workers,
                    token_cache=token_cache,
                )
            )
        best_index = max(range(len(family)), key=lambda i: (evals[i].mean, -i))
        best_mean = evals[best_index].mean
        if sum(1 for e in evals if e.mean == best_mean) > 1:
            notes.append(
                f"{dataset}: mean tie at {best_mean!r}; "
                f"kept first config {labels[best_index]!r} in family order"
            )
        optimal[dataset] = labels[best_index]
        for i, (config, evaluation) in enumerate(zip(family, evals)):
            if i == best_index:
                drop: float | None = 0.0
            else:
                try:
                    drop = drop_fraction(best_mean, evaluation.mean)
                except DegenerateInputError:
                    drop = None
                    notes.append(
                        f"{dataset}/{config.label}: optimal mean is zero, drop undefined"
                    )
            cells[(dataset, config.label)] = SweepCell(
                dataset=dataset,
                label=config.label,
                mean=evaluation.mean,
                stderr=evaluation.stderr,
                n_scored=evaluation.n,
                n_skipped=len(evaluation.skipped),
                drop=drop,
                is_optimal=(i == best_index),
            )
            evaluations[(dataset, config.label)] = evaluation

    universal = len(set(optimal.values())) == 1
    return SweepReport(
        datasets=datasets,
        labels=tuple(labels),
        cells=cells,
        optimal=optimal,
        universal=universal,
        notes=tuple(notes),
        evaluations=evaluations,
    )
