"""Run manifests: enough provenance to reproduce any emitted report."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Mapping, Sequence

from . import __version__
from .engine import run_conventions


@dataclass(frozen=True)
class RunManifest:
    command: str
    backend_identity: str
    backend_spec: str
    seed: int
    corpus_ids: tuple[str, ...]
    config_hashes: tuple[str, ...]
    created_at: str
    tool_version: str = __version__
    extra: Mapping[str, Any] = field(default_factory=dict)

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "backend_identity": self.backend_identity,
            "backend_spec": self.backend_spec,
            "seed": self.seed,
            "corpus_ids": list(self.corpus_ids),
            "config_hashes": list(self.config_hashes),
            "created_at": self.created_at,
            "tool_version": self.tool_version,
            "extra": dict(self.extra),
        }

    def canonical_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))

    def csv_comment(self) -> str:
        """Leading comment line embedding the manifest into CSV reports."""
        return f"# manifest: {self.canonical_json()}"


def build_manifest(
    command: str,
    *,
    backend_identity: str,
    backend_spec: str,
    seed: int,
    corpus_ids: Sequence[str],
    config_hashes: Sequence[str],
    extra: Mapping[str, Any] | None = None,
) -> RunManifest:
    merged_extra: dict[str, Any] = dict(run_conventions())
    if extra:
        merged_extra.update(extra)
    return RunManifest(
        command=command,
        backend_identity=backend_identity,
        backend_spec=backend_spec,
        seed=seed,
        corpus_ids=tuple(corpus_ids),
        config_hashes=tuple(config_hashes),
        created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        extra=merged_extra,
    )
