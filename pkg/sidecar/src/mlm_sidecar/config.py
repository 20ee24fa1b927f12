"""Service configuration from environment variables."""

from __future__ import annotations

import os
from dataclasses import dataclass


@dataclass(frozen=True)
class Settings:
    model_name: str = "bert-base-uncased"
    device: str = "cpu"
    max_input_len: int = 510
    max_batch: int = 64
    max_sessions: int = 8
    deterministic: bool = True
    epochs: int = 3
    learning_rate: float = 5e-5

    @classmethod
    def from_env(cls) -> "Settings":
        env = os.environ
        return cls(
            model_name=env.get("MLM_SIDECAR_MODEL", cls.model_name),
            device=env.get("MLM_SIDECAR_DEVICE", cls.device),
            max_input_len=int(env.get("MLM_SIDECAR_MAX_INPUT_LEN", cls.max_input_len)),
            max_batch=int(env.get("MLM_SIDECAR_MAX_BATCH", cls.max_batch)),
            max_sessions=int(env.get("MLM_SIDECAR_MAX_SESSIONS", cls.max_sessions)),
            deterministic=env.get("MLM_SIDECAR_DETERMINISTIC", "1") not in ("0", "false"),
            epochs=int(env.get("MLM_SIDECAR_EPOCHS", cls.epochs)),
            learning_rate=float(env.get("MLM_SIDECAR_LEARNING_RATE", cls.learning_rate)),
        )
