"""Masking schedules and corruption for tuning copies.

Mirrors the wire protocol's semantics: even schedules run one pass per offset
o in [0, gap_tune) and mask position j when (j - o) mod gap_tune is below
gap_mask_tune; random schedules mask each eligible position independently
with probability gap_mask_tune / gap_tune, one pass per tuning copy.  A token
is eligible when its visible character length reaches the threshold for its
kind.  Masked positions are kept with p_keep, replaced by a random
non-special vocabulary token with p_replace, and otherwise become the mask
symbol.  Everything is driven by the request seed.
"""

from __future__ import annotations

import random
from typing import Sequence

KEEP = "keep"
REPLACE = "replace"
MASK = "mask"

_CORRUPTION_STREAM = 0x9E3779B9


def eligible(token: dict, tuning: dict) -> bool:
    kind = token["kind"]
    if kind == "normal":
        threshold = tuning["l_normal"]
    elif kind == "lead":
        threshold = tuning["l_lead"]
    else:
        threshold = tuning["l_follow"]
    return token["char_len"] >= threshold


def schedule_passes(tokens: Sequence[dict], tuning: dict) -> list[list[int]]:
    """Masked positions per pass for one summary sentence."""
    gap = tuning["gap_tune"]
    gap_mask = tuning["gap_mask_tune"]
    eligible_positions = [j for j, tok in enumerate(tokens) if eligible(tok, tuning)]
    passes: list[list[int]] = []
    if tuning.get("mode", "even") == "random":
        rng = random.Random(tuning["seed"])
        probability = gap_mask / gap
        for _ in range(gap):
            passes.append([j for j in eligible_positions if rng.random() < probability])
    else:
        for offset in range(gap):
            passes.append(
                [j for j in eligible_positions if (j - offset) % gap < gap_mask]
            )
    return passes


def corruption_actions(passes: Sequence[Sequence[int]], tuning: dict) -> list[dict[int, str]]:
    """Seeded per-position corruption action for every pass."""
    rng = random.Random(tuning["seed"] + _CORRUPTION_STREAM)
    p_keep = tuning["p_keep"]
    p_replace = tuning["p_replace"]
    plan: list[dict[int, str]] = []
    for masked in passes:
        actions: dict[int, str] = {}
        for position in sorted(masked):
            u = rng.random()
            if u < p_keep:
                actions[position] = KEEP
            elif u < p_keep + p_replace:
                actions[position] = REPLACE
            else:
                actions[position] = MASK
        plan.append(actions)
    return plan


def random_token_id(rng: random.Random, vocab_size: int, special_ids: set[int]) -> int:
    """Uniform draw over the vocabulary excluding special symbols."""
    while True:
        candidate = rng.randrange(vocab_size)
        if candidate not in special_ids:
            return candidate
