"""Glue between library objects and the plain-data enumerator oracle.

Only translation lives here: tests convert library inputs to the oracle's
tuple/dict form, run both paths, and assert exact equality.
"""

from __future__ import annotations

from blanclab.backends.reference import ReferenceBackend
from blanclab.engine import BlancResult, MeasureConfig, MeasureFamily
from blanclab.tokenization import TokenizedText

import enumerator


def plain(text: TokenizedText):
    return [
        [(t.surface, t.char_len, t.kind.value, t.vocab_id) for t in sentence]
        for sentence in text.sentences
    ]


def thresholds_of(masking) -> dict[str, int]:
    return {
        "normal": masking.l_normal,
        "lead": masking.l_lead,
        "follow": masking.l_follow,
    }


def oracle_result(
    text: TokenizedText,
    summary: TokenizedText,
    config: MeasureConfig,
    backend: ReferenceBackend,
):
    """(doc counts 4-tuple, per-sentence 4-tuples) via the brute-force path."""
    base_counts = dict(backend.base_counts)
    if config.family is MeasureFamily.HELP:
        params = {
            "gap": config.masking.gap,
            "gap_mask": config.masking.gap_mask,
            "thresholds": thresholds_of(config.masking),
        }
        flat_summary = [tok for sent in plain(summary) for tok in sent]
        return enumerator.help_counts(
            plain(text), flat_summary, params, base_counts, backend.specials.filler
        )
    assert config.tuning is not None
    params = {
        "gap": config.masking.gap,
        "gap_mask": config.masking.gap_mask,
        "thresholds": thresholds_of(config.masking),
        "gap_tune": config.tuning.gap_tune,
        "gap_mask_tune": config.tuning.gap_mask_tune,
        "tune_thresholds": thresholds_of(config.tuning),
    }
    return enumerator.tune_counts(plain(text), plain(summary), params, base_counts)


def assert_engine_matches_oracle(
    result: BlancResult,
    text: TokenizedText,
    summary: TokenizedText,
    config: MeasureConfig,
    backend: ReferenceBackend,
) -> None:
    doc, per_sentence = oracle_result(text, summary, config, backend)
    assert result.counts.as_tuple() == doc
    assert [m.as_tuple() for m in result.per_sentence] == per_sentence
    assert result.score == enumerator.score_of(doc)
