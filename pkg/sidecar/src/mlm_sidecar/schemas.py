"""Wire models for the sidecar protocol."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field, model_validator


class TokenOut(BaseModel):
    surface: str
    char_len: int
    kind: Literal["normal", "lead", "follow"]
    vocab_id: int


class TokenizeRequest(BaseModel):
    texts: list[str]


class TokenizeResponse(BaseModel):
    tokens: list[list[TokenOut]]


class InstanceIn(BaseModel):
    input_ids: list[int]
    masked_positions: list[int]
    targets: list[int] = Field(default_factory=list)
    context_len: int = 0


class PredictRequest(BaseModel):
    session_id: str | None = None
    instances: list[InstanceIn]


class PredictResponse(BaseModel):
    predictions: list[list[int]]


class TuningIn(BaseModel):
    gap_tune: int = 4
    gap_mask_tune: int = 3
    mode: Literal["even", "random"] = "even"
    seed: int = 0
    p_replace: float = 0.0
    p_keep: float = 0.1
    l_normal: int = 6
    l_lead: int = 1
    l_follow: int = 1

    @model_validator(mode="after")
    def _bounds(self) -> "TuningIn":
        if self.gap_tune < 1:
            raise ValueError("gap_tune must be >= 1")
        if not 1 <= self.gap_mask_tune <= self.gap_tune:
            raise ValueError("gap_mask_tune must lie in [1, gap_tune]")
        if not 0.0 <= self.p_replace <= 1.0 or not 0.0 <= self.p_keep <= 1.0:
            raise ValueError("p_replace and p_keep must lie in [0, 1]")
        if self.p_replace + self.p_keep > 1.0:
            raise ValueError("p_replace + p_keep must not exceed 1")
        if min(self.l_normal, self.l_lead, self.l_follow) < 1:
            raise ValueError("token-length thresholds must be >= 1")
        return self


class SessionCreateRequest(BaseModel):
    summary_tokens: list[list[TokenOut]]
    tuning: TuningIn
    epochs: int | None = None
    learning_rate: float | None = None


class SessionOut(BaseModel):
    session_id: str
    base_model: str
    created_at: str
    tuned_on: str
    tuning_params: dict
    epochs: int
    learning_rate: float
    n_copies: int


class MetaResponse(BaseModel):
    identity: str
    capabilities: list[str]
    max_input_len: int
    specials: dict[str, int]
    vocab_size: int
    tuning_defaults: dict


class HealthResponse(BaseModel):
    status: str
    model: str
