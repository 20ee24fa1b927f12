"""FastAPI service wrapping the core package.

The service holds the expensive parts behind HTTP: corpora arrive inline in
request bodies, scores are computed against the requested backend (the
in-process reference backend or a remote sidecar), and every response carries
the CSV rendering plus the run manifest.  The on-disk score cache is enabled
by pointing BLANCLAB_CACHE_DIR at a directory.
"""

from __future__ import annotations

import io
import os
from dataclasses import asdict

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..backends import make_backend
from ..corpus import AnnotatedSample, mean_group_scores
from ..engine import MeasureConfig, evaluate
from ..errors import (
    BackendError,
    BlanclabError,
    CapabilityError,
    DegenerateInputError,
    SampleSkippedError,
)
from ..manifest import build_manifest
from ..restriction import (
    Aggregation,
    RestrictionSpec,
    RestrictionStrategy,
    restriction_csv,
    restriction_report,
)
from ..stats import correlation_table, expert_turker_shift
from ..sweep import ScoreCache, max_help_select
from ..presets import named_family
from ..tokenization import tokenize_text
from . import schemas

app = FastAPI(title="blanclab", version=__version__)


def _cache() -> ScoreCache | None:
    cache_dir = os.environ.get("BLANCLAB_CACHE_DIR")
    return ScoreCache(cache_dir) if cache_dir else None


def _samples(models: list[schemas.SampleModel]) -> list[AnnotatedSample]:
    return [
        AnnotatedSample(
            sample_id=m.id,
            text=m.text,
            summary=m.summary,
            human={
                quality: {group: tuple(values) for group, values in groups.items()}
                for quality, groups in (m.scores or {}).items()
            },
            provenance=m.provenance,
        )
        for m in models
    ]


@app.exception_handler(CapabilityError)
async def _capability_error(_: Request, exc: CapabilityError) -> JSONResponse:
    return JSONResponse(status_code=409, content={"detail": f"capability error: {exc}"})


@app.exception_handler(BackendError)
async def _backend_error(_: Request, exc: BackendError) -> JSONResponse:
    return JSONResponse(status_code=502, content={"detail": f"backend error: {exc}"})


@app.exception_handler(BlanclabError)
async def _domain_error(_: Request, exc: BlanclabError) -> JSONResponse:
    return JSONResponse(status_code=400, content={"detail": str(exc)})


@app.exception_handler(ValueError)
async def _value_error(_: Request, exc: ValueError) -> JSONResponse:
    return JSONResponse(status_code=400, content={"detail": str(exc)})


@app.get("/healthz", response_model=schemas.HealthResponse)
def healthz() -> schemas.HealthResponse:
    return schemas.HealthResponse()


@app.post("/score", response_model=schemas.ScoreResponse)
def score(request: schemas.ScoreRequest) -> schemas.ScoreResponse:
    backend = make_backend(request.backend)
    config = request.config.to_config(request.seed)
    samples = _samples(request.samples)
    if not samples:
        raise ValueError("at least one sample is required")
    results: list[schemas.SampleScoreModel] = []
    skipped: list[schemas.SkippedModel] = []
    for sample in samples:
        try:
            text = tokenize_text(sample.text, backend)
            summary = tokenize_text(sample.summary, backend)
            outcome = evaluate(text, summary, config, backend)
        except SampleSkippedError as exc:
            skipped.append(schemas.SkippedModel(sample_id=sample.sample_id, reason=str(exc)))
            continue
        counts = outcome.counts
        results.append(
            schemas.SampleScoreModel(
                sample_id=sample.sample_id,
                score=outcome.score,
                k00=counts.k00, k01=counts.k01, k10=counts.k10, k11=counts.k11,
                n_total=counts.n_total,
            )
        )
    manifest = build_manifest(
        "score",
        backend_identity=backend.identity,
        backend_spec=request.backend,
        seed=request.seed,
        corpus_ids=[request.corpus_id],
        config_hashes=[config.config_hash()],
        extra={"config_label": config.label},
    )
    buf = io.StringIO()
    buf.write(manifest.csv_comment() + "\n")
    buf.write("sample_id,score,k00,k01,k10,k11,n_total\n")
    for r in results:
        buf.write(f"{r.sample_id},{r.score!r},{r.k00},{r.k01},{r.k10},{r.k11},{r.n_total}\n")
    return schemas.ScoreResponse(
        corpus_id=request.corpus_id,
        results=results,
        skipped=skipped,
        csv=buf.getvalue(),
        manifest=manifest.to_json_dict(),
    )


def _resolve_family(request: schemas.SweepRequest) -> list[MeasureConfig]:
    if (request.family is None) == (request.family_name is None):
        raise ValueError("provide exactly one of 'family' or 'family_name'")
    if request.family_name is not None:
        return named_family(request.family_name)
    assert request.family is not None
    return [c.to_config(request.seed) for c in request.family]


@app.post("/sweep", response_model=schemas.SweepResponse)
def sweep(request: schemas.SweepRequest) -> schemas.SweepResponse:
    backend = make_backend(request.backend)
    family = _resolve_family(request)
    corpora = {name: _samples(models) for name, models in request.corpora.items()}
    if not corpora:
        raise ValueError("at least one corpus is required")
    report = max_help_select(
        corpora, family, backend, cache=_cache(), workers=request.workers
    )
    manifest = build_manifest(
        "sweep",
        backend_identity=backend.identity,
        backend_spec=request.backend,
        seed=request.seed,
        corpus_ids=list(corpora),
        config_hashes=[c.config_hash() for c in family],
        extra={"family": [c.label for c in family]},
    )
    return schemas.SweepResponse(
        report=report.to_json_dict(manifest),
        csv=report.to_csv(manifest),
        manifest=manifest.to_json_dict(),
    )


@app.post("/restrict", response_model=schemas.RestrictResponse)
def restrict(request: schemas.RestrictRequest) -> schemas.RestrictResponse:
    backend = make_backend(request.backend)
    config = request.config.to_config(request.seed)
    samples = _samples(request.samples)
    if not samples:
        raise ValueError("at least one sample is required")
    human = mean_group_scores(samples, request.group)
    if not human:
        raise DegenerateInputError(
            f"no quality is scored by group {request.group!r} on every sample"
        )
    results = []
    for sample in samples:
        text = tokenize_text(sample.text, backend)
        summary = tokenize_text(sample.summary, backend)
        results.append(evaluate(text, summary, config, backend))
    specs: list[RestrictionSpec] = []
    for strategy_model in request.strategies:
        strategy = RestrictionStrategy(strategy_model.strategy)
        for value in strategy_model.values:
            for aggregation in Aggregation:
                if strategy is RestrictionStrategy.THRESHOLD:
                    specs.append(
                        RestrictionSpec(
                            strategy=strategy, aggregation=aggregation, threshold=value
                        )
                    )
                else:
                    specs.append(
                        RestrictionSpec(
                            strategy=strategy, aggregation=aggregation, n=int(value)
                        )
                    )
    rows = restriction_report(results, human, specs, kind=request.correlation)
    manifest = build_manifest(
        "restrict",
        backend_identity=backend.identity,
        backend_spec=request.backend,
        seed=request.seed,
        corpus_ids=[request.corpus_id],
        config_hashes=[config.config_hash()],
        extra={"group": request.group, "correlation": request.correlation},
    )
    return schemas.RestrictResponse(
        rows=[asdict(r) for r in rows],
        csv=restriction_csv(rows, manifest),
        manifest=manifest.to_json_dict(),
    )


@app.post("/correlate", response_model=schemas.CorrelateResponse)
def correlate(request: schemas.CorrelateRequest) -> schemas.CorrelateResponse:
    samples = _samples(request.samples)
    if not samples:
        raise ValueError("at least one sample is required")
    warnings: list[str] = []

    aligned_ids = [s.sample_id for s in samples]
    measures: dict[str, list[float]] = {}
    for label, by_sample in request.measures.items():
        missing = [sid for sid in aligned_ids if sid not in by_sample]
        if missing:
            raise ValueError(
                f"measure {label!r} lacks scores for samples {missing[:3]}..."
            )
        measures[label] = [by_sample[sid] for sid in aligned_ids]

    manifest = build_manifest(
        "correlate",
        backend_identity="none",
        backend_spec="none",
        seed=request.seed,
        corpus_ids=[request.corpus_id],
        config_hashes=[],
        extra={"groups": request.groups, "measures": sorted(measures)},
    )
    tables: dict[str, schemas.GroupTableModel] = {}
    group_scores: dict[str, dict[str, list[float]]] = {}
    for group in request.groups:
        human = mean_group_scores(samples, group)
        if not human:
            warnings.append(f"group {group!r} has no fully-scored quality; table omitted")
            continue
        group_scores[group] = human
        table = correlation_table(measures, human)
        warnings.extend(table.warnings)
        buf = io.StringIO()
        buf.write(manifest.csv_comment() + "\n")
        headers = ["quality", "correlation", *table.labels]
        buf.write(",".join(headers) + "\n")
        for row in table.to_rows():
            cells = [str(row["quality"]), str(row["correlation"])]
            for label in table.labels:
                value = row[label]
                cells.append("" if value is None else repr(value))
            buf.write(",".join(cells) + "\n")
        tables[group] = schemas.GroupTableModel(
            csv=buf.getvalue(), text=table.to_text(), rows=table.to_rows()
        )

    shift_rows: list[dict[str, object]] | None = None
    pair = request.shift_pair
    if pair is None and len(measures) >= 2:
        pair = tuple(list(measures)[:2])  # type: ignore[assignment]
    if pair is not None:
        label_a, label_b = pair
        if label_a not in measures or label_b not in measures:
            raise ValueError(f"shift pair {pair!r} not among measures {sorted(measures)}")
        if "expert" in group_scores and "turker" in group_scores:
            entries = expert_turker_shift(
                measures[label_a], measures[label_b],
                group_scores["expert"], group_scores["turker"],
            )
            shift_rows = [
                {
                    "quality": e.quality,
                    "correlation": e.kind,
                    "percent_change": e.percent_change,
                    "ratio_a": e.ratio_a,
                    "ratio_b": e.ratio_b,
                    "p_a_expert": e.a_expert.p_value,
                    "p_a_turker": e.a_turker.p_value,
                    "p_b_expert": e.b_expert.p_value,
                    "p_b_turker": e.b_turker.p_value,
                    "note": e.note,
                }
                for e in entries
            ]
        else:
            warnings.append(
                "shift report needs both 'expert' and 'turker' groups; omitted"
            )
    return schemas.CorrelateResponse(
        tables=tables, shift=shift_rows, warnings=warnings,
        manifest=manifest.to_json_dict(),
    )
