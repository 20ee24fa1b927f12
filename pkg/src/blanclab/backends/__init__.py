"""Model backends: the deterministic reference oracle and the sidecar client."""

from __future__ import annotations

from .base import (
    CAP_PREDICT,
    CAP_TOKENIZE,
    CAP_TUNE,
    CallCounter,
    MaskedInstance,
    ModelBackend,
    ModelSession,
    SpecialIds,
)
from .reference import ReferenceBackend, reference_predict_rule, surface_id
from .remote import RemoteBackend

__all__ = [
    "CAP_PREDICT",
    "CAP_TOKENIZE",
    "CAP_TUNE",
    "CallCounter",
    "MaskedInstance",
    "ModelBackend",
    "ModelSession",
    "ReferenceBackend",
    "RemoteBackend",
    "SpecialIds",
    "make_backend",
    "reference_predict_rule",
    "surface_id",
]


def make_backend(spec: str) -> ModelBackend:
    """Build a backend from its spec string.

    `reference` selects the in-process oracle backend; `reference:no-tune`
    drops the tune capability (useful for exercising capability failures);
    `remote:<base-url>` connects to a sidecar service.
    """
    if spec == "reference":
        return ReferenceBackend()
    if spec.startswith("reference:"):
        options = {opt for opt in spec.split(":", 1)[1].split(",") if opt}
        caps = {CAP_TOKENIZE, CAP_PREDICT, CAP_TUNE}
        if "no-tune" in options:
            caps.discard(CAP_TUNE)
            options.discard("no-tune")
        if options:
            raise ValueError(f"unknown reference backend options: {sorted(options)}")
        return ReferenceBackend(capabilities=frozenset(caps))
    if spec.startswith("remote:"):
        url = spec.split(":", 1)[1]
        if not url:
            raise ValueError("remote backend spec needs a base url: remote:<url>")
        return RemoteBackend(url)
    raise ValueError(f"unknown backend spec {spec!r}; use 'reference' or 'remote:<url>'")
