"""Tuned-session registry: bounded, thread-safe, creation serialized."""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .modeling import TunedModel


class SessionLimitError(Exception):
    """Raised when the session store is full (maps to 507)."""


@dataclass
class SessionRecord:
    session_id: str
    base_model: str
    created_at: str
    tuned: TunedModel


@dataclass
class SessionStore:
    max_sessions: int
    _records: dict[str, SessionRecord] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock)
    # one in-flight tuning job per device
    tuning_lock: threading.Lock = field(default_factory=threading.Lock)

    def add(self, base_model: str, tuned: TunedModel) -> SessionRecord:
        with self._lock:
            if len(self._records) >= self.max_sessions:
                raise SessionLimitError(
                    f"session capacity {self.max_sessions} exhausted"
                )
            record = SessionRecord(
                session_id=uuid.uuid4().hex,
                base_model=base_model,
                created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
                tuned=tuned,
            )
            self._records[record.session_id] = record
            return record

    def get(self, session_id: str) -> SessionRecord | None:
        with self._lock:
            return self._records.get(session_id)

    def delete(self, session_id: str) -> bool:
        with self._lock:
            return self._records.pop(session_id, None) is not None

    def __len__(self) -> int:
        with self._lock:
            return len(self._records)
