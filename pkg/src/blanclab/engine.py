"""BLANC-help and BLANC-tune evaluation of one (text, summary) pair.

Both measures run sentence by sentence.  For every sentence, the even masking
schedule produces gap passes; every pass with at least one masked position is
turned into model inputs whose masked positions carry the mask symbol.

BLANC-help scores each pass twice: once with the summary prepended (assisted)
and once with a neutral filler of the same token length (base); a single
separator token sits between the prepended context and the sentence.
BLANC-tune scores identical context-free inputs through a session lightly
tuned on the summary (assisted) and through the untuned base model (base).

Every masked position lands in a 2x2 success matrix indexed (base success,
assisted success); the score is (k01 - k10) / n_total, identically the
assisted accuracy minus the base accuracy.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Sequence

from .backends.base import CAP_TUNE, MaskedInstance, ModelBackend
from .errors import CapabilityError, SummaryTooLongError
from .masking import MaskingPolicy, MaskMode, TuningPolicy, even_schedule
from .tokenization import TokenizedText

logger = logging.getLogger(__name__)

SEPARATOR_CONVENTION = "single separator token between prepended context and sentence"
FILLER_CONVENTION = "filler repeats the period token, one per summary token"


class MeasureFamily(str, Enum):
    HELP = "help"
    TUNE = "tune"


class Metric(str, Enum):
    ACCURACY_DIFF = "accuracy_diff"


def score_from_counts(k00: int, k01: int, k10: int, k11: int) -> float:
    """(k01 - k10) / n_total, and 0.0 for an empty matrix."""
    if min(k00, k01, k10, k11) < 0:
        raise ValueError("counts must be non-negative")
    n_total = k00 + k01 + k10 + k11
    if n_total == 0:
        return 0.0
    return (k01 - k10) / n_total


@dataclass(frozen=True)
class CountMatrix:
    """Success counts for masked positions: first index base, second assisted."""

    k00: int = 0
    k01: int = 0
    k10: int = 0
    k11: int = 0

    def __add__(self, other: "CountMatrix") -> "CountMatrix":
        return CountMatrix(
            self.k00 + other.k00,
            self.k01 + other.k01,
            self.k10 + other.k10,
            self.k11 + other.k11,
        )

    @property
    def n_total(self) -> int:
        return self.k00 + self.k01 + self.k10 + self.k11

    @property
    def score(self) -> float:
        return score_from_counts(self.k00, self.k01, self.k10, self.k11)

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.k00, self.k01, self.k10, self.k11)


@dataclass(frozen=True)
class BlancResult:
    """Document-level counts plus one matrix per sentence (zeros where skipped)."""

    counts: CountMatrix
    per_sentence: tuple[CountMatrix, ...]

    @property
    def score(self) -> float:
        return self.counts.score

    @property
    def n_total(self) -> int:
        return self.counts.n_total

    def sentence_scores(self) -> list[float]:
        return [m.score for m in self.per_sentence]


@dataclass(frozen=True)
class MeasureConfig:
    """One point of the measure family: family, masking setup, metric, label."""

    family: MeasureFamily
    masking: MaskingPolicy
    tuning: TuningPolicy | None = None
    metric: Metric = Metric.ACCURACY_DIFF
    label: str = ""

    def __post_init__(self) -> None:
        if self.family is MeasureFamily.TUNE and self.tuning is None:
            raise ValueError("Tune family requires a TuningPolicy")
        if self.family is MeasureFamily.HELP and self.tuning is not None:
            raise ValueError("Help family must not carry a TuningPolicy")
        if not self.label:
            object.__setattr__(self, "label", self._auto_label())

    def _auto_label(self) -> str:
        m = self.masking
        label = (
            f"{self.family.value}-gap{m.gap}-{m.gap_mask}"
            f"-L{m.l_normal}.{m.l_lead}.{m.l_follow}"
        )
        if self.tuning is not None:
            t = self.tuning
            label += (
                f"-tune{t.gap_tune}-{t.gap_mask_tune}-{t.mode.value}"
                f"-pr{t.p_replace}-pk{t.p_keep}"
            )
        return label

    def to_json_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "family": self.family.value,
            "label": self.label,
            "metric": self.metric.value,
            "masking": {
                "gap": self.masking.gap,
                "gap_mask": self.masking.gap_mask,
                "l_normal": self.masking.l_normal,
                "l_lead": self.masking.l_lead,
                "l_follow": self.masking.l_follow,
            },
        }
        if self.tuning is not None:
            out["tuning"] = {
                "gap_tune": self.tuning.gap_tune,
                "gap_mask_tune": self.tuning.gap_mask_tune,
                "mode": self.tuning.mode.value,
                "seed": self.tuning.seed,
                "p_replace": self.tuning.p_replace,
                "p_keep": self.tuning.p_keep,
                "l_normal": self.tuning.l_normal,
                "l_lead": self.tuning.l_lead,
                "l_follow": self.tuning.l_follow,
            }
        return out

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "MeasureConfig":
        masking = MaskingPolicy(**data["masking"])
        tuning_data = data.get("tuning")
        tuning = None
        if tuning_data is not None:
            tuning_data = dict(tuning_data)
            mode = tuning_data.pop("mode", MaskMode.EVEN.value)
            tuning = TuningPolicy(mode=MaskMode(mode), **tuning_data)
        return cls(
            family=MeasureFamily(data["family"]),
            masking=masking,
            tuning=tuning,
            metric=Metric(data.get("metric", Metric.ACCURACY_DIFF.value)),
            label=data.get("label", ""),
        )

    def canonical_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:12]

    def with_seed(self, seed: int) -> "MeasureConfig":
        """Copy with the tuning seed replaced (no-op for the Help family)."""
        if self.tuning is None:
            return self
        return replace(self, tuning=replace(self.tuning, seed=seed))


@dataclass(frozen=True)
class _PassSlot:
    sentence_index: int
    targets: tuple[int, ...]


def _sentence_instances(
    text: TokenizedText,
    masking: MaskingPolicy,
    mask_id: int,
    room: int,
) -> tuple[list[tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]], list[_PassSlot]]:
    """Corrupted sentence material per non-empty pass.

    Returns (corrupted ids, relative masked positions, targets) triples plus a
    slot recording which sentence each pass belongs to.  Sentences longer than
    `room` are truncated with a warning.
    """
    triples: list[tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]] = []
    slots: list[_PassSlot] = []
    for si, sentence in enumerate(text.sentences):
        if len(sentence) > room:
            logger.warning(
                "sentence %d truncated from %d to %d tokens to fit the backend input",
                si, len(sentence), room,
            )
            sentence = sentence[:room]
        ids = [t.vocab_id for t in sentence]
        schedule = even_schedule(sentence, masking)
        for pass_set in schedule.passes:
            if not pass_set:
                continue
            positions = tuple(sorted(pass_set))
            corrupted = list(ids)
            for pos in positions:
                corrupted[pos] = mask_id
            targets = tuple(ids[pos] for pos in positions)
            triples.append((tuple(corrupted), positions, targets))
            slots.append(_PassSlot(si, targets))
    return triples, slots


def _accumulate(
    n_sentences: int,
    slots: Sequence[_PassSlot],
    assisted: Sequence[Sequence[int]],
    base: Sequence[Sequence[int]],
) -> BlancResult:
    cells = [[0, 0, 0, 0] for _ in range(n_sentences)]
    for slot, a_preds, b_preds in zip(slots, assisted, base):
        row = cells[slot.sentence_index]
        for target, a_pred, b_pred in zip(slot.targets, a_preds, b_preds):
            row[2 * int(b_pred == target) + int(a_pred == target)] += 1
    matrices = tuple(CountMatrix(*c) for c in cells)
    total = CountMatrix()
    for m in matrices:
        total = total + m
    return BlancResult(counts=total, per_sentence=matrices)


def blanc_help(
    text: TokenizedText,
    summary: TokenizedText,
    config: MeasureConfig,
    backend: ModelBackend,
) -> BlancResult:
    """BLANC-help: reconstruction boost from reading the summary first."""
    if config.family is not MeasureFamily.HELP:
        raise ValueError(f"blanc_help requires a Help config, got {config.family}")
    if not text.sentences:
        raise ValueError("text must contain at least one sentence")
    sp = backend.specials
    summary_ids = summary.all_ids()
    context_len = len(summary_ids) + 1
    if context_len + 1 > backend.max_input_len:
        raise SummaryTooLongError(
            f"summary of {len(summary_ids)} tokens leaves no room for text "
            f"(backend input limit {backend.max_input_len})"
        )
    assisted_ctx = tuple(summary_ids) + (sp.sep,)
    base_ctx = (sp.filler,) * len(summary_ids) + (sp.sep,)
    room = backend.max_input_len - context_len

    triples, slots = _sentence_instances(text, config.masking, sp.mask, room)
    batch: list[MaskedInstance] = []
    for corrupted, positions, targets in triples:
        shifted = tuple(context_len + p for p in positions)
        batch.append(
            MaskedInstance(assisted_ctx + corrupted, shifted, targets, context_len)
        )
        batch.append(
            MaskedInstance(base_ctx + corrupted, shifted, targets, context_len)
        )
    if batch:
        predictions = backend.predict(batch)
        assisted = predictions[0::2]
        base = predictions[1::2]
    else:
        assisted, base = [], []
    return _accumulate(len(text.sentences), slots, assisted, base)


def blanc_tune(
    text: TokenizedText,
    summary: TokenizedText,
    config: MeasureConfig,
    backend: ModelBackend,
) -> BlancResult:
    """BLANC-tune: reconstruction boost from lightly tuning on the summary."""
    if config.family is not MeasureFamily.TUNE:
        raise ValueError(f"blanc_tune requires a Tune config, got {config.family}")
    if not text.sentences:
        raise ValueError("text must contain at least one sentence")
    if CAP_TUNE not in backend.capabilities:
        raise CapabilityError(
            f"backend {backend.identity} does not support tuning"
        )
    assert config.tuning is not None  # guaranteed by MeasureConfig validation
    sp = backend.specials
    triples, slots = _sentence_instances(
        text, config.masking, sp.mask, backend.max_input_len
    )
    batch = [
        MaskedInstance(corrupted, positions, targets)
        for corrupted, positions, targets in triples
    ]
    session = backend.spawn_tuned(summary, config.tuning)
    try:
        if batch:
            assisted = backend.predict(batch, session=session)
            base = backend.predict(batch)
        else:
            assisted, base = [], []
    finally:
        backend.release(session)
    return _accumulate(len(text.sentences), slots, assisted, base)


def evaluate(
    text: TokenizedText,
    summary: TokenizedText,
    config: MeasureConfig,
    backend: ModelBackend,
) -> BlancResult:
    """Dispatch to blanc_help or blanc_tune by config family."""
    if config.family is MeasureFamily.HELP:
        return blanc_help(text, summary, config, backend)
    return blanc_tune(text, summary, config, backend)


def run_conventions() -> dict[str, str]:
    """Fixed conventions recorded in every run manifest."""
    return {
        "separator": SEPARATOR_CONVENTION,
        "filler": FILLER_CONVENTION,
        "p_values": "two-sided, t approximation with n-2 degrees of freedom",
    }
