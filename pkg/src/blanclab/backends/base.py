"""Backend contract: what the engines need from a masked-token model."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence, runtime_checkable

from ..masking import TuningPolicy
from ..tokenization import Token, TokenizedText

CAP_TOKENIZE = "tokenize"
CAP_PREDICT = "predict"
CAP_TUNE = "tune"


@dataclass(frozen=True)
class SpecialIds:
    """Reserved vocabulary ids the engines need: the mask symbol, the
    context/sentence separator, and the neutral filler token."""

    mask: int
    sep: int
    filler: int


@dataclass(frozen=True)
class ModelSession:
    """Handle to an isolated tuned variant of a backend's base model."""

    session_id: str
    base_identity: str
    tuned_on: str


@dataclass(frozen=True)
class MaskedInstance:
    """One model input: ids after corruption, plus where and what to unmask.

    masked_positions index into input_ids, are strictly increasing, and never
    point into the prepended context (positions < context_len are off limits).
    """

    input_ids: tuple[int, ...]
    masked_positions: tuple[int, ...]
    targets: tuple[int, ...]
    context_len: int = 0

    def __post_init__(self) -> None:
        if self.context_len < 0:
            raise ValueError("context_len must be >= 0")
        if len(self.targets) != len(self.masked_positions):
            raise ValueError("one target per masked position is required")
        prev = -1
        for pos in self.masked_positions:
            if pos <= prev:
                raise ValueError("masked_positions must be strictly increasing")
            if pos < self.context_len:
                raise ValueError("context positions are never masked")
            if pos >= len(self.input_ids):
                raise ValueError("masked position outside the input")
            prev = pos


@dataclass
class CallCounter:
    """Per-capability call counts, used to verify cache behaviour."""

    tokenize: int = 0
    predict: int = 0
    tune: int = 0

    @property
    def total(self) -> int:
        return self.tokenize + self.predict + self.tune


@runtime_checkable
class ModelBackend(Protocol):
    """The surface the engines program against.

    predict must be deterministic for a fixed model state and input; every
    call may be slow and remote, so callers batch.
    """

    identity: str
    capabilities: frozenset[str]
    max_input_len: int
    specials: SpecialIds
    calls: CallCounter

    def tokenize_sentences(self, sentences: Sequence[str]) -> list[list[Token]]:
        """Classified tokens for each sentence (may be empty per sentence)."""
        ...

    def predict(
        self, batch: Sequence[MaskedInstance], session: ModelSession | None = None
    ) -> list[list[int]]:
        """Predicted vocab ids, one list per instance, one id per masked position."""
        ...

    def spawn_tuned(self, summary: TokenizedText, policy: TuningPolicy) -> ModelSession:
        """Create an isolated session lightly tuned on the summary."""
        ...

    def release(self, session: ModelSession) -> None:
        """Free a tuned session; never raises for already-released sessions."""
        ...
