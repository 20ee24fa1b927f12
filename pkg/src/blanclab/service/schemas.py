"""Request/response models for the scoring service."""

from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, Field

from .. import __version__
from ..engine import MeasureConfig, MeasureFamily, Metric
from ..masking import MaskingPolicy, MaskMode, TuningPolicy


class SampleModel(BaseModel):
    id: str
    text: str
    summary: str
    scores: dict[str, dict[str, list[float]]] | None = None
    provenance: str = ""


class MaskingModel(BaseModel):
    gap: int = 2
    gap_mask: int = 1
    l_normal: int = 6
    l_lead: int = 1
    l_follow: int = 1


class TuningModel(BaseModel):
    gap_tune: int = 4
    gap_mask_tune: int = 3
    mode: Literal["even", "random"] = "even"
    seed: int | None = None
    p_replace: float = 0.0
    p_keep: float = 0.1
    l_normal: int = 6
    l_lead: int = 1
    l_follow: int = 1


class ConfigModel(BaseModel):
    family: Literal["help", "tune"]
    label: str = ""
    metric: Literal["accuracy_diff"] = "accuracy_diff"
    masking: MaskingModel = Field(default_factory=MaskingModel)
    tuning: TuningModel | None = None

    def to_config(self, run_seed: int) -> MeasureConfig:
        """Build the core config; a tuning seed left null inherits the run seed."""
        masking = MaskingPolicy(**self.masking.model_dump())
        tuning = None
        if self.tuning is not None:
            data = self.tuning.model_dump()
            mode = MaskMode(data.pop("mode"))
            seed = data.pop("seed")
            tuning = TuningPolicy(
                mode=mode, seed=run_seed if seed is None else seed, **data
            )
        return MeasureConfig(
            family=MeasureFamily(self.family),
            masking=masking,
            tuning=tuning,
            metric=Metric(self.metric),
            label=self.label,
        )


class ScoreRequest(BaseModel):
    corpus_id: str = "corpus"
    samples: list[SampleModel]
    config: ConfigModel
    backend: str = "reference"
    seed: int = 0
    workers: int = 1


class SampleScoreModel(BaseModel):
    sample_id: str
    score: float
    k00: int
    k01: int
    k10: int
    k11: int
    n_total: int


class SkippedModel(BaseModel):
    sample_id: str
    reason: str


class ScoreResponse(BaseModel):
    corpus_id: str
    results: list[SampleScoreModel]
    skipped: list[SkippedModel]
    csv: str
    manifest: dict[str, Any]


class SweepRequest(BaseModel):
    corpora: dict[str, list[SampleModel]]
    family: list[ConfigModel] | None = None
    family_name: str | None = None
    backend: str = "reference"
    seed: int = 0
    workers: int = 1


class SweepResponse(BaseModel):
    report: dict[str, Any]
    csv: str
    manifest: dict[str, Any]


class StrategyModel(BaseModel):
    strategy: Literal["top_n", "contiguous_n", "threshold"]
    values: list[float]


class RestrictRequest(BaseModel):
    corpus_id: str = "corpus"
    samples: list[SampleModel]
    config: ConfigModel
    strategies: list[StrategyModel]
    backend: str = "reference"
    group: str = "expert"
    correlation: Literal["spearman", "pearson"] = "spearman"
    seed: int = 0
    workers: int = 1


class RestrictResponse(BaseModel):
    rows: list[dict[str, Any]]
    csv: str
    manifest: dict[str, Any]


class CorrelateRequest(BaseModel):
    corpus_id: str = "corpus"
    samples: list[SampleModel]
    measures: dict[str, dict[str, float]]
    groups: list[str] = ["expert"]
    shift_pair: tuple[str, str] | None = None
    seed: int = 0


class GroupTableModel(BaseModel):
    csv: str
    text: str
    rows: list[dict[str, Any]]


class CorrelateResponse(BaseModel):
    tables: dict[str, GroupTableModel]
    shift: list[dict[str, Any]] | None
    warnings: list[str]
    manifest: dict[str, Any]


class HealthResponse(BaseModel):
    status: str = "ok"
    version: str = __version__
