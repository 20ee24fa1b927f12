"""Deterministic in-process backend used as an exact test oracle.

The prediction rule is a copy-from-context frequency model: a masked position
is predicted as the most frequent token among the unmasked tokens of the same
input (prepended context included), ties broken by lowest vocab id.  When an
input has no unmasked tokens at all, the prediction falls back to the argmax
of the backend's base frequency table merged with the session's overlay table
(same tie-break).  Tuning increments the overlay counts with the original
tokens at the positions a tuning schedule would mask, which preserves the
qualitative property that summaries sharing vocabulary with the text increase
unmasking success while keeping every value computable by brute force.

Vocabulary ids are stable content hashes of the surface, so ids, tie-breaks
and therefore predictions can never depend on call order or threading.
"""

from __future__ import annotations

import hashlib
import json
import re
from collections import Counter
from typing import Iterable, Mapping, Sequence

from ..errors import CapabilityError, UnknownSessionError
from ..masking import MaskMode, TuningPolicy, even_schedule, random_schedule
from ..tokenization import Token, TokenKind, TokenizedText, segment_sentences
from .base import (
    CAP_PREDICT,
    CAP_TOKENIZE,
    CAP_TUNE,
    CallCounter,
    MaskedInstance,
    ModelSession,
    SpecialIds,
)

MASK_ID = 0
SEP_ID = 1
_ID_OFFSET = 16

_WORD_RE = re.compile(r"\w+|[^\w\s]")

# Words longer than this are split into fixed-width pieces, giving the
# reference tokenizer Lead/Follow tokens to exercise the kind thresholds.
_MAX_WHOLE = 8


def surface_id(surface: str) -> int:
    """Stable vocabulary id for a surface (reserved ids 0..15 never collide)."""
    digest = hashlib.blake2b(surface.encode("utf-8"), digest_size=8).digest()
    return _ID_OFFSET + int.from_bytes(digest, "big")


def split_word(word: str) -> list[str]:
    if len(word) <= _MAX_WHOLE:
        return [word]
    return [word[i:i + _MAX_WHOLE] for i in range(0, len(word), _MAX_WHOLE)]


def _argmax_id(counts: Mapping[int, int]) -> int:
    """Most frequent id; ties broken by lowest id; empty table -> mask symbol."""
    if not counts:
        return MASK_ID
    return min(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0]


def reference_predict_rule(
    instance: MaskedInstance,
    base_counts: Mapping[int, int],
    overlay_counts: Mapping[int, int] | None = None,
) -> list[int]:
    """Predictions for one instance under the copy-from-context rule."""
    masked = set(instance.masked_positions)
    context: Counter[int] = Counter(
        tok for pos, tok in enumerate(instance.input_ids) if pos not in masked
    )
    if context:
        prediction = _argmax_id(context)
    else:
        merged: Counter[int] = Counter(base_counts)
        if overlay_counts:
            merged.update(overlay_counts)
        prediction = _argmax_id(merged)
    return [prediction] * len(instance.masked_positions)


class ReferenceBackend:
    """In-process backend satisfying the ModelBackend protocol exactly."""

    def __init__(
        self,
        base_texts: Iterable[str] = (),
        *,
        max_input_len: int = 512,
        capabilities: frozenset[str] | None = None,
    ) -> None:
        self.capabilities = (
            frozenset({CAP_TOKENIZE, CAP_PREDICT, CAP_TUNE})
            if capabilities is None
            else frozenset(capabilities)
        )
        self.max_input_len = max_input_len
        self.specials = SpecialIds(mask=MASK_ID, sep=SEP_ID, filler=surface_id("."))
        self.calls = CallCounter()
        self._sessions: dict[str, Counter[int]] = {}
        self._base_counts: Counter[int] = Counter()
        for text in base_texts:
            for sentence in segment_sentences(text):
                for token in self._tokenize_sentence(sentence):
                    self._base_counts[token.vocab_id] += 1
        self.identity = f"reference:v1:{self._counts_fingerprint()}"

    def _counts_fingerprint(self) -> str:
        if not self._base_counts:
            return "empty"
        blob = json.dumps(sorted(self._base_counts.items())).encode()
        return hashlib.blake2b(blob, digest_size=6).hexdigest()

    @property
    def base_counts(self) -> Mapping[int, int]:
        return dict(self._base_counts)

    def overlay_counts(self, session: ModelSession) -> Mapping[int, int]:
        """Session overlay table (exposed for oracle cross-checks)."""
        return dict(self._session_overlay(session))

    # -- tokenize ----------------------------------------------------------

    def _tokenize_sentence(self, sentence: str) -> list[Token]:
        tokens: list[Token] = []
        for word in _WORD_RE.findall(sentence):
            pieces = split_word(word)
            if len(pieces) == 1:
                kinds = [TokenKind.NORMAL]
            else:
                kinds = [TokenKind.LEAD] + [TokenKind.FOLLOW] * (len(pieces) - 1)
            for piece, kind in zip(pieces, kinds):
                tokens.append(Token(piece, len(piece), kind, surface_id(piece)))
        return tokens

    def tokenize_sentences(self, sentences: Sequence[str]) -> list[list[Token]]:
        self.calls.tokenize += 1
        return [self._tokenize_sentence(s) for s in sentences]

    # -- predict -----------------------------------------------------------

    def _session_overlay(self, session: ModelSession) -> Counter[int]:
        try:
            return self._sessions[session.session_id]
        except KeyError:
            raise UnknownSessionError(f"unknown session {session.session_id!r}") from None

    def predict(
        self, batch: Sequence[MaskedInstance], session: ModelSession | None = None
    ) -> list[list[int]]:
        self.calls.predict += 1
        overlay = self._session_overlay(session) if session is not None else None
        return [
            reference_predict_rule(inst, self._base_counts, overlay) for inst in batch
        ]

    # -- tune --------------------------------------------------------------

    def spawn_tuned(self, summary: TokenizedText, policy: TuningPolicy) -> ModelSession:
        if CAP_TUNE not in self.capabilities:
            raise CapabilityError(f"backend {self.identity} does not support tuning")
        self.calls.tune += 1
        overlay: Counter[int] = Counter()
        for sentence in summary.sentences:
            if policy.mode is MaskMode.RANDOM:
                schedule = random_schedule(sentence, policy)
            else:
                schedule = even_schedule(sentence, policy.as_masking_policy())
            for pass_set in schedule.passes:
                for pos in pass_set:
                    overlay[sentence[pos].vocab_id] += 1
        fingerprint = hashlib.blake2b(
            json.dumps(
                {
                    "ids": [t.vocab_id for s in summary.sentences for t in s],
                    "policy": [
                        policy.gap_tune, policy.gap_mask_tune, policy.mode.value,
                        policy.seed, policy.p_replace, policy.p_keep,
                        policy.l_normal, policy.l_lead, policy.l_follow,
                    ],
                }
            ).encode(),
            digest_size=8,
        ).hexdigest()
        session_id = f"ref-{fingerprint}"
        self._sessions[session_id] = overlay
        return ModelSession(
            session_id=session_id, base_identity=self.identity, tuned_on=fingerprint
        )

    def release(self, session: ModelSession) -> None:
        self._sessions.pop(session.session_id, None)
