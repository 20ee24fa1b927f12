"""Masking schedules and tuning-time corruption plans.

A schedule assigns sentence positions to masking passes.  The "even" schedule
used at inference (and optionally at tuning) runs one pass per offset
o = 0..gap-1 and makes position j a candidate in pass o exactly when
(j - o) mod gap < gap_mask, so every eligible position is masked in exactly
gap_mask of the gap passes.  Offsets restart at each sentence: schedules never
leak across sentence boundaries.

Everything here is pure and, where randomness is involved, fully determined
by the policy seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .tokenization import Token, TokenKind

#: Threshold value that encodes "tokens of this kind are never masked".
NEVER_MASKED = 100

# Offset mixed into the policy seed so the corruption stream never reuses the
# random-schedule stream.
_CORRUPTION_STREAM = 0x9E3779B9


@dataclass(frozen=True)
class MaskingPolicy:
    """Inference-time masking parameters.

    gap:      interval between masking locations in the sentence.
    gap_mask: tokens maskable at each masking location (1 <= gap_mask <= gap).
    l_normal / l_lead / l_follow: minimum character lengths for masking
    one-piece words, leading pieces, and continuation pieces; 100 means never.
    """

    gap: int = 2
    gap_mask: int = 1
    l_normal: int = 6
    l_lead: int = 1
    l_follow: int = 1

    def __post_init__(self) -> None:
        if self.gap < 1:
            raise ValueError(f"gap must be >= 1, got {self.gap}")
        if not 1 <= self.gap_mask <= self.gap:
            raise ValueError(
                f"gap_mask must be in [1, gap], got {self.gap_mask} with gap {self.gap}"
            )
        for name in ("l_normal", "l_lead", "l_follow"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    def threshold_for(self, kind: TokenKind) -> int:
        if kind is TokenKind.NORMAL:
            return self.l_normal
        if kind is TokenKind.LEAD:
            return self.l_lead
        return self.l_follow


class MaskMode(str, Enum):
    EVEN = "even"
    RANDOM = "random"


@dataclass(frozen=True)
class TuningPolicy:
    """Tuning-time masking and corruption parameters.

    Masked positions of each tuning copy are corrupted: kept unchanged with
    probability p_keep, replaced by a random vocabulary token with p_replace,
    and otherwise turned into the mask symbol.
    """

    gap_tune: int = 4
    gap_mask_tune: int = 3
    mode: MaskMode = MaskMode.EVEN
    seed: int = 0
    p_replace: float = 0.0
    p_keep: float = 0.1
    l_normal: int = 6
    l_lead: int = 1
    l_follow: int = 1

    def __post_init__(self) -> None:
        if self.gap_tune < 1:
            raise ValueError(f"gap_tune must be >= 1, got {self.gap_tune}")
        if not 1 <= self.gap_mask_tune <= self.gap_tune:
            raise ValueError(
                f"gap_mask_tune must be in [1, gap_tune], got {self.gap_mask_tune}"
            )
        if not 0.0 <= self.p_replace <= 1.0 or not 0.0 <= self.p_keep <= 1.0:
            raise ValueError("p_replace and p_keep must lie in [0, 1]")
        if self.p_replace + self.p_keep > 1.0:
            raise ValueError("p_replace + p_keep must not exceed 1")
        for name in ("l_normal", "l_lead", "l_follow"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    def as_masking_policy(self) -> MaskingPolicy:
        """The even-schedule view of this policy (gap_tune plays the gap role)."""
        return MaskingPolicy(
            gap=self.gap_tune,
            gap_mask=self.gap_mask_tune,
            l_normal=self.l_normal,
            l_lead=self.l_lead,
            l_follow=self.l_follow,
        )


@dataclass(frozen=True)
class MaskSchedule:
    """Masked position sets, one per pass, over a sentence of sentence_len tokens."""

    passes: tuple[frozenset[int], ...]
    sentence_len: int


class CorruptionAction(Enum):
    MASK_SYMBOL = "mask"
    REPLACE_RANDOM = "replace"
    KEEP_ORIGINAL = "keep"


def is_eligible(token: Token, policy: MaskingPolicy | TuningPolicy) -> bool:
    """True when the token is long enough to be masked under the policy."""
    if isinstance(policy, TuningPolicy):
        policy = policy.as_masking_policy()
    return token.char_len >= policy.threshold_for(token.kind)


def even_schedule(sentence: Sequence[Token], policy: MaskingPolicy) -> MaskSchedule:
    """Deterministic even schedule: gap passes, each eligible position in
    exactly gap_mask of them.

    A sentence with no eligible tokens yields empty passes, which the engine
    skips.
    """
    n = len(sentence)
    if n == 0:
        raise ValueError("sentence must be non-empty")
    gap, gap_mask = policy.gap, policy.gap_mask
    l_n, l_l, l_f = policy.l_normal, policy.l_lead, policy.l_follow
    buckets: list[list[int]] = [[] for _ in range(gap)]
    for j, tok in enumerate(sentence):
        kind = tok.kind
        thr = l_n if kind is TokenKind.NORMAL else (l_l if kind is TokenKind.LEAD else l_f)
        if tok.char_len >= thr:
            buckets[j % gap].append(j)
    passes = []
    for o in range(gap):
        chosen: list[int] = []
        for t in range(gap_mask):
            chosen.extend(buckets[(o + t) % gap])
        passes.append(frozenset(chosen))
    return MaskSchedule(passes=tuple(passes), sentence_len=n)


def random_schedule(sentence: Sequence[Token], policy: TuningPolicy) -> MaskSchedule:
    """Seeded random schedule: gap_tune passes (one per tuning copy); each
    eligible position is masked independently with probability
    gap_mask_tune / gap_tune."""
    if policy.mode is not MaskMode.RANDOM:
        raise ValueError("random_schedule requires a policy in Random mode")
    n = len(sentence)
    if n == 0:
        raise ValueError("sentence must be non-empty")
    eligible = [j for j, tok in enumerate(sentence) if is_eligible(tok, policy)]
    p = policy.gap_mask_tune / policy.gap_tune
    rng = random.Random(policy.seed)
    passes = []
    for _ in range(policy.gap_tune):
        passes.append(frozenset(j for j in eligible if rng.random() < p))
    return MaskSchedule(passes=tuple(passes), sentence_len=n)


def corruption_plan(
    schedule: MaskSchedule, policy: TuningPolicy
) -> list[dict[int, CorruptionAction]]:
    """Seeded corruption actions for every masked position of every pass.

    Per position: KEEP_ORIGINAL with p_keep, REPLACE_RANDOM with p_replace,
    MASK_SYMBOL otherwise.  Drawing the actual replacement token id is owned
    by whichever component materializes the corrupted copy.
    """
    rng = random.Random(policy.seed + _CORRUPTION_STREAM)
    plan: list[dict[int, CorruptionAction]] = []
    for pass_set in schedule.passes:
        actions: dict[int, CorruptionAction] = {}
        for pos in sorted(pass_set):
            u = rng.random()
            if u < policy.p_keep:
                actions[pos] = CorruptionAction.KEEP_ORIGINAL
            elif u < policy.p_keep + policy.p_replace:
                actions[pos] = CorruptionAction.REPLACE_RANDOM
            else:
                actions[pos] = CorruptionAction.MASK_SYMBOL
        plan.append(actions)
    return plan
