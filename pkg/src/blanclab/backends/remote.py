"""HTTP client for the masked-LM sidecar wire protocol.

Endpoints spoken (JSON bodies throughout):

    GET  /meta                -> identity, capabilities, max_input_len, specials
    POST /tokenize            {texts: [str]} -> {tokens: [[token]]}
    POST /predict             {session_id?, instances: [instance]} -> {predictions: [[int]]}
    POST /sessions            {summary_tokens, tuning, epochs?, learning_rate?} -> {session_id, ...}
    DELETE /sessions/{id}     -> 204
    GET  /healthz             -> {status}

Token wire form: {surface, char_len, kind, vocab_id}.
Instance wire form: {input_ids, masked_positions, targets, context_len}.
"""

from __future__ import annotations

from typing import Any, Sequence

import httpx

from ..errors import BackendError, CapabilityError, UnknownSessionError
from ..masking import TuningPolicy
from ..tokenization import Token, TokenKind, TokenizedText
from .base import CAP_TUNE, CallCounter, MaskedInstance, ModelSession, SpecialIds


def tuning_policy_wire(policy: TuningPolicy) -> dict[str, Any]:
    return {
        "gap_tune": policy.gap_tune,
        "gap_mask_tune": policy.gap_mask_tune,
        "mode": policy.mode.value,
        "seed": policy.seed,
        "p_replace": policy.p_replace,
        "p_keep": policy.p_keep,
        "l_normal": policy.l_normal,
        "l_lead": policy.l_lead,
        "l_follow": policy.l_follow,
    }


def token_wire(token: Token) -> dict[str, Any]:
    return {
        "surface": token.surface,
        "char_len": token.char_len,
        "kind": token.kind.value,
        "vocab_id": token.vocab_id,
    }


def instance_wire(instance: MaskedInstance) -> dict[str, Any]:
    return {
        "input_ids": list(instance.input_ids),
        "masked_positions": list(instance.masked_positions),
        "targets": list(instance.targets),
        "context_len": instance.context_len,
    }


class RemoteBackend:
    """ModelBackend implementation backed by a sidecar service."""

    def __init__(
        self,
        base_url: str | None = None,
        *,
        client: httpx.Client | None = None,
        epochs: int | None = None,
        learning_rate: float | None = None,
        timeout: float = 120.0,
    ) -> None:
        if client is None:
            if not base_url:
                raise ValueError("either base_url or an explicit client is required")
            client = httpx.Client(base_url=base_url, timeout=timeout)
        self._client = client
        self._epochs = epochs
        self._learning_rate = learning_rate
        self.calls = CallCounter()
        meta = self._request("GET", "/meta")
        self.identity = meta["identity"]
        self.capabilities = frozenset(meta["capabilities"])
        self.max_input_len = int(meta["max_input_len"])
        specials = meta["specials"]
        self.specials = SpecialIds(
            mask=int(specials["mask"]),
            sep=int(specials["sep"]),
            filler=int(specials["filler"]),
        )

    def _request(self, method: str, path: str, json_body: Any | None = None) -> Any:
        try:
            response = self._client.request(method, path, json=json_body)
        except httpx.HTTPError as exc:
            raise BackendError(f"sidecar transport failure on {path}: {exc}") from exc
        if response.status_code == 404:
            raise UnknownSessionError(f"sidecar returned 404 for {path}")
        if response.status_code >= 400:
            raise BackendError(
                f"sidecar error {response.status_code} on {path}: {response.text}"
            )
        if response.status_code == 204:
            return None
        return response.json()

    def tokenize_sentences(self, sentences: Sequence[str]) -> list[list[Token]]:
        self.calls.tokenize += 1
        payload = self._request("POST", "/tokenize", {"texts": list(sentences)})
        out: list[list[Token]] = []
        for sent in payload["tokens"]:
            out.append(
                [
                    Token(
                        surface=t["surface"],
                        char_len=int(t["char_len"]),
                        kind=TokenKind(t["kind"]),
                        vocab_id=int(t["vocab_id"]),
                    )
                    for t in sent
                ]
            )
        return out

    def predict(
        self, batch: Sequence[MaskedInstance], session: ModelSession | None = None
    ) -> list[list[int]]:
        self.calls.predict += 1
        body = {
            "session_id": session.session_id if session is not None else None,
            "instances": [instance_wire(i) for i in batch],
        }
        payload = self._request("POST", "/predict", body)
        return [[int(p) for p in preds] for preds in payload["predictions"]]

    def spawn_tuned(self, summary: TokenizedText, policy: TuningPolicy) -> ModelSession:
        if CAP_TUNE not in self.capabilities:
            raise CapabilityError(f"backend {self.identity} does not support tuning")
        self.calls.tune += 1
        body: dict[str, Any] = {
            "summary_tokens": [
                [token_wire(t) for t in sentence] for sentence in summary.sentences
            ],
            "tuning": tuning_policy_wire(policy),
        }
        if self._epochs is not None:
            body["epochs"] = self._epochs
        if self._learning_rate is not None:
            body["learning_rate"] = self._learning_rate
        payload = self._request("POST", "/sessions", body)
        return ModelSession(
            session_id=str(payload["session_id"]),
            base_identity=self.identity,
            tuned_on=str(payload.get("tuned_on", "")),
        )

    def release(self, session: ModelSession) -> None:
        try:
            self._request("DELETE", f"/sessions/{session.session_id}")
        except UnknownSessionError:
            pass

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "RemoteBackend":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()
