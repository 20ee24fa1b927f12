"""Named measure configurations and the perturbation families around them.

The optima and their perturbations reproduce the published parameter points:
the Help optimum masks every second token one at a time and only masks
one-piece words of six or more characters; the Tune optimum masks at
inference with gap 3/2 and tunes evenly with gap 4/3, keeping 10% of masked
tokens and never replacing them.  The max-human variants differ as noted on
each constant.
"""

from __future__ import annotations

from .engine import MeasureConfig, MeasureFamily
from .masking import MaskingPolicy, MaskMode, TuningPolicy

HELP_OPTIMAL = MeasureConfig(
    family=MeasureFamily.HELP,
    masking=MaskingPolicy(gap=2, gap_mask=1, l_normal=6, l_lead=1, l_follow=1),
    label="help-optimal",
)

#: Help variant maximizing correlation with human scores instead
#: (l_normal drops to 4, continuation pieces are never masked).
HELP_MAX_HUMAN = MeasureConfig(
    family=MeasureFamily.HELP,
    masking=MaskingPolicy(gap=2, gap_mask=1, l_normal=4, l_lead=1, l_follow=100),
    label="help-max-human",
)

TUNE_OPTIMAL = MeasureConfig(
    family=MeasureFamily.TUNE,
    masking=MaskingPolicy(gap=3, gap_mask=2, l_normal=6, l_lead=1, l_follow=1),
    tuning=TuningPolicy(
        gap_tune=4, gap_mask_tune=3, mode=MaskMode.EVEN,
        p_replace=0.0, p_keep=0.1, l_normal=6, l_lead=1, l_follow=1,
    ),
    label="tune-optimal",
)

#: Tune variant maximizing correlation with human scores: less frequent
#: masking at inference and tuning, shorter normal-word threshold, follow-up
#: pieces never masked, and standard replacement probability.
TUNE_MAX_HUMAN = MeasureConfig(
    family=MeasureFamily.TUNE,
    masking=MaskingPolicy(gap=2, gap_mask=1, l_normal=4, l_lead=1, l_follow=100),
    tuning=TuningPolicy(
        gap_tune=2, gap_mask_tune=1, mode=MaskMode.EVEN,
        p_replace=0.1, p_keep=0.1, l_normal=4, l_lead=1, l_follow=100,
    ),
    label="tune-max-human",
)


def _help_variant(label: str, **masking_changes: int) -> MeasureConfig:
    base = HELP_OPTIMAL.masking
    fields = {
        "gap": base.gap, "gap_mask": base.gap_mask,
        "l_normal": base.l_normal, "l_lead": base.l_lead, "l_follow": base.l_follow,
    }
    fields.update(masking_changes)
    return MeasureConfig(
        family=MeasureFamily.HELP, masking=MaskingPolicy(**fields), label=label
    )


def help_family() -> list[MeasureConfig]:
    """The Help optimum plus its five named single-parameter perturbations."""
    return [
        HELP_OPTIMAL,
        _help_variant("help-gap-3-1", gap=3, gap_mask=1),
        _help_variant("help-gap-3-2", gap=3, gap_mask=2),
        _help_variant("help-toks-normal-5", l_normal=5),
        _help_variant("help-toks-lead-2", l_lead=2),
        _help_variant("help-toks-follow-2", l_follow=2),
    ]


def tune_family() -> list[MeasureConfig]:
    """The Tune optimum plus its five named single-parameter perturbations."""
    base_masking = TUNE_OPTIMAL.masking
    base_tuning = TUNE_OPTIMAL.tuning
    assert base_tuning is not None

    def variant(label: str, masking: MaskingPolicy | None = None,
                tuning: TuningPolicy | None = None) -> MeasureConfig:
        return MeasureConfig(
            family=MeasureFamily.TUNE,
            masking=masking or base_masking,
            tuning=tuning or base_tuning,
            label=label,
        )

    return [
        TUNE_OPTIMAL,
        variant(
            "tune-gap-infer-2-1",
            masking=MaskingPolicy(gap=2, gap_mask=1, l_normal=6, l_lead=1, l_follow=1),
        ),
        variant(
            "tune-gap-tune-2-1",
            tuning=TuningPolicy(
                gap_tune=2, gap_mask_tune=1, mode=MaskMode.EVEN,
                p_replace=0.0, p_keep=0.1, l_normal=6, l_lead=1, l_follow=1,
            ),
        ),
        variant(
            "tune-p-replace-0.1",
            tuning=TuningPolicy(
                gap_tune=4, gap_mask_tune=3, mode=MaskMode.EVEN,
                p_replace=0.1, p_keep=0.1, l_normal=6, l_lead=1, l_follow=1,
            ),
        ),
        variant(
            "tune-toks-normal-4",
            masking=MaskingPolicy(gap=3, gap_mask=2, l_normal=4, l_lead=1, l_follow=1),
            tuning=TuningPolicy(
                gap_tune=4, gap_mask_tune=3, mode=MaskMode.EVEN,
                p_replace=0.0, p_keep=0.1, l_normal=4, l_lead=1, l_follow=1,
            ),
        ),
        variant(
            "tune-rand",
            tuning=TuningPolicy(
                gap_tune=4, gap_mask_tune=3, mode=MaskMode.RANDOM,
                p_replace=0.0, p_keep=0.1, l_normal=6, l_lead=1, l_follow=1,
            ),
        ),
    ]


#: Published correlations of the two Tune-family reference points with
#: average expert scores on the 1600-sample annotated benchmark, keyed by
#: (quality, correlation kind).  Used by the real-model acceptance checks.
PUBLISHED_EXPERT_CORRELATIONS = {
    ("coherence", "pearson"): {"max_help": 0.095, "max_human": 0.138},
    ("coherence", "spearman"): {"max_help": 0.074, "max_human": 0.130},
    ("consistency", "pearson"): {"max_help": 0.182, "max_human": 0.205},
    ("consistency", "spearman"): {"max_help": 0.170, "max_human": 0.198},
    ("fluency", "pearson"): {"max_help": 0.149, "max_human": 0.152},
    ("fluency", "spearman"): {"max_help": 0.123, "max_human": 0.130},
    ("relevance", "pearson"): {"max_help": 0.195, "max_human": 0.256},
    ("relevance", "spearman"): {"max_help": 0.171, "max_human": 0.242},
}

#: Families addressable by name from the CLI and the service.
FAMILIES = {
    "help-family": help_family,
    "tune-family": tune_family,
}


def named_family(name: str) -> list[MeasureConfig]:
    try:
        return FAMILIES[name]()
    except KeyError:
        raise ValueError(
            f"unknown family {name!r}; available: {sorted(FAMILIES)}"
        ) from None
