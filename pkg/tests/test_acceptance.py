"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest -s tests/test_acceptance.py` to see the per-criterion lines.
The brute-force enumerator (tests/enumerator.py) is the independent oracle
for every derived expectation.  The two heavyweight real-model criteria need
external resources and skip by default with an explicit reason; they run when
BLANCLAB_SIDECAR_URL (plus a corpus path) is exported.
"""

import itertools
import json
import os
import random
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

from blanclab.backends.reference import ReferenceBackend
from blanclab.corpus import AnnotatedSample, CorpusFormat, load_corpus, mean_group_scores
from blanclab.engine import (
    MeasureConfig,
    MeasureFamily,
    blanc_help,
    blanc_tune,
    evaluate,
    score_from_counts,
)
from blanclab.errors import DegenerateInputError
from blanclab.masking import MaskingPolicy, TuningPolicy, even_schedule
from blanclab.presets import HELP_OPTIMAL, help_family, tune_family
from blanclab.restriction import Aggregation, correlation_gain, restricted_score
from blanclab.stats import pearson, spearman
from blanclab.sweep import ScoreCache, max_help_select
from blanclab.tokenization import Token, TokenKind, tokenize_text

import enumerator
from conftest import make_text, random_text
from oracle_bridge import assert_engine_matches_oracle

ROOT = Path(__file__).resolve().parent.parent


@contextmanager
def criterion(name: str):
    started = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"\n[FAIL] {name}")
        raise
    print(f"\n[PASS] {name} ({time.perf_counter() - started:.2f}s)")


# --------------------------------------------------------------------------
# 1. Masking coverage property (exhaustive, < 5 s)
# --------------------------------------------------------------------------

def test_masking_coverage_exhaustive():
    with criterion("masking coverage: lengths 1-64, gap 1-6, thresholds {1,4,5,6,100}"):
        started = time.perf_counter()
        kinds = (TokenKind.NORMAL, TokenKind.LEAD, TokenKind.FOLLOW)
        threshold_values = (1, 4, 5, 6, 100)
        sentences = {}
        kind_index = {}
        char_lens = {}
        for length in range(1, 65):
            toks = tuple(
                Token("x" * (j % 8 + 1), j % 8 + 1, kinds[j % 3], 1000 + j)
                for j in range(length)
            )
            sentences[length] = toks
            kind_index[length] = np.array([j % 3 for j in range(length)])
            char_lens[length] = np.array([j % 8 + 1 for j in range(length)])

        checked = 0
        for l_normal, l_lead, l_follow in itertools.product(
            threshold_values, threshold_values, threshold_values
        ):
            thresholds = np.array([l_normal, l_lead, l_follow])
            for gap in range(1, 7):
                for gap_mask in range(1, gap + 1):
                    policy = MaskingPolicy(
                        gap=gap, gap_mask=gap_mask,
                        l_normal=l_normal, l_lead=l_lead, l_follow=l_follow,
                    )
                    for length in range(1, 65):
                        schedule = even_schedule(sentences[length], policy)
                        assert len(schedule.passes) == gap
                        eligible = char_lens[length] >= thresholds[kind_index[length]]
                        expected = np.where(eligible, gap_mask, 0)
                        flat = np.fromiter(
                            itertools.chain.from_iterable(schedule.passes),
                            dtype=np.int64,
                            count=sum(len(p) for p in schedule.passes),
                        )
                        counts = np.bincount(flat, minlength=length) if flat.size \
                            else np.zeros(length, dtype=np.int64)
                        assert np.array_equal(counts, expected), (
                            length, gap, gap_mask, l_normal, l_lead, l_follow
                        )
                        checked += 1
        elapsed = time.perf_counter() - started
        assert checked == 125 * 21 * 64
        assert elapsed < 5.0, f"exhaustive masking check took {elapsed:.2f}s"


# --------------------------------------------------------------------------
# 2. Metric identity over random count matrices
# --------------------------------------------------------------------------

def test_metric_identity_random_matrices():
    with criterion("metric identity: (k01-k10)/N == assisted minus base accuracy, 1000 matrices"):
        rng = random.Random(20_24)
        tried = 0
        while tried < 1000:
            k00, k01, k10, k11 = (rng.randint(0, 400) for _ in range(4))
            n = k00 + k01 + k10 + k11
            if n == 0:
                continue
            tried += 1
            lhs = score_from_counts(k00, k01, k10, k11)
            rhs = (k01 + k11) / n - (k10 + k11) / n
            assert abs(lhs - rhs) < 1e-12


# --------------------------------------------------------------------------
# 3. Oracle equivalence on the 20-case grid
# --------------------------------------------------------------------------

def _grid_cases():
    """20 cases: texts of <=3 sentences x <=8 tokens, summaries <=6 tokens."""
    pool = ["fox", "hen", "owl", "elm", "granite", "meadow", "lantern",
            "violets", "wheelbarrows", "thunderstorms"]
    rng = random.Random(98)

    def text_spec(n_sentences, max_tokens=8):
        return tuple(
            tuple(rng.choice(pool) for _ in range(rng.randint(1, max_tokens)))
            for _ in range(n_sentences)
        )

    help_configs = [
        MeasureConfig(family=MeasureFamily.HELP,
                      masking=MaskingPolicy(2, 1, 1, 1, 1), label="h-all"),
        MeasureConfig(family=MeasureFamily.HELP,
                      masking=MaskingPolicy(2, 1, 6, 1, 1), label="h-opt"),
        MeasureConfig(family=MeasureFamily.HELP,
                      masking=MaskingPolicy(3, 2, 1, 1, 1), label="h-32"),
        MeasureConfig(family=MeasureFamily.HELP,
                      masking=MaskingPolicy(1, 1, 1, 1, 1), label="h-full-mask"),
        MeasureConfig(family=MeasureFamily.HELP,
                      masking=MaskingPolicy(2, 2, 4, 1, 100), label="h-mixed"),
    ]
    tune_configs = [
        MeasureConfig(family=MeasureFamily.TUNE, masking=MaskingPolicy(2, 1, 1, 1, 1),
                      tuning=TuningPolicy(2, 1, l_normal=1, l_lead=1, l_follow=1),
                      label="t-21"),
        MeasureConfig(family=MeasureFamily.TUNE, masking=MaskingPolicy(3, 2, 1, 1, 1),
                      tuning=TuningPolicy(4, 3, l_normal=1, l_lead=1, l_follow=1),
                      label="t-opt-shape"),
        MeasureConfig(family=MeasureFamily.TUNE, masking=MaskingPolicy(1, 1, 1, 1, 1),
                      tuning=TuningPolicy(1, 1, l_normal=1, l_lead=1, l_follow=1),
                      label="t-full-mask"),
        MeasureConfig(family=MeasureFamily.TUNE, masking=MaskingPolicy(2, 2, 6, 1, 1),
                      tuning=TuningPolicy(3, 1, l_normal=4, l_lead=1, l_follow=1),
                      label="t-mixed"),
    ]

    cases = []
    # handcrafted corners: ties, fallbacks, repeated tokens, empty summary
    cases.append((("alpha", "beta", "alpha", "beta"), ("alpha", "alpha", "alpha"),
                  help_configs[0]))
    cases.append((("epsilon",), ("epsilon", "epsilon"), tune_configs[0]))
    cases.append((("gamma", "delta"), ("gamma", "gamma"), tune_configs[0]))
    cases.append((("fox", "fox", "hen"), (), help_configs[0]))
    cases.append((("wheelbarrows", "granite"), ("wheelbarrows",), help_configs[1]))
    for i in range(8):
        cases.append((text_spec(rng.randint(1, 3)),
                      tuple(rng.choice(pool) for _ in range(rng.randint(0, 6))),
                      help_configs[i % len(help_configs)]))
    for i in range(7):
        cases.append((text_spec(rng.randint(1, 3)),
                      tuple(rng.choice(pool) for _ in range(rng.randint(0, 6))),
                      tune_configs[i % len(tune_configs)]))
    return cases


def test_oracle_equivalence_grid():
    with criterion("oracle equivalence: 20-case grid, help and tune, exact incl. per-sentence"):
        backend = ReferenceBackend()
        cases = _grid_cases()
        assert len(cases) == 20
        for text_words, summary_words, config in cases:
            if isinstance(text_words[0], str):
                text_words = (text_words,)
            text = make_text(*text_words)
            summary = make_text(summary_words) if summary_words else make_text()
            result = evaluate(text, summary, config, backend)
            assert_engine_matches_oracle(result, text, summary, config, backend)


# --------------------------------------------------------------------------
# 4. Empty-summary zero on 100 random texts
# --------------------------------------------------------------------------

def test_empty_summary_scores_zero():
    with criterion("empty-summary zero: BLANC-help exactly 0 on 100 random texts"):
        backend = ReferenceBackend()
        rng = random.Random(7_77)
        empty = make_text()
        config = MeasureConfig(family=MeasureFamily.HELP,
                               masking=MaskingPolicy(2, 1, 1, 1, 1), label="h")
        for _ in range(100):
            text = tokenize_text(random_text(rng, max_sentences=4, max_tokens=8), backend)
            result = blanc_help(text, empty, config, backend)
            assert result.score == 0.0
            assert result.counts.k01 == result.counts.k10 == 0


# --------------------------------------------------------------------------
# 5. Correlation exactness
# --------------------------------------------------------------------------

def test_correlation_exactness():
    with criterion("correlation exactness: Spearman vs rank-formula oracle (n<=6, ties), "
                   "Pearson [1,2,3,4]/[1,3,2,4] == 0.8"):
        assert pearson([1, 2, 3, 4], [1, 3, 2, 4]).coefficient == 0.8
        for n in range(3, 7):
            x = list(range(1, n + 1))
            for y in itertools.product(range(1, n + 1), repeat=n):
                if len(set(y)) == 1:
                    with pytest.raises(DegenerateInputError):
                        spearman(x, list(y))
                    continue
                expected = enumerator.spearman_exact(x, list(y))
                got = spearman(x, list(y)).coefficient
                assert abs(got - expected) <= 1e-12, (x, y)
        # tied x against all permutations of a tied multiset
        x_tied = [1, 2, 2, 3, 3]
        for y in set(itertools.permutations([1, 1, 2, 3, 4])):
            expected = enumerator.spearman_exact(x_tied, list(y))
            assert abs(spearman(x_tied, list(y)).coefficient - expected) <= 1e-12


# --------------------------------------------------------------------------
# 6. Max-help universality at desk scale
# --------------------------------------------------------------------------

def _universality_corpus(n, seed, prefix, anchors, fives, longs, shorts, others):
    """Texts with anchor pairs at token distances 1 and 3.

    At gap 2/1 the paired anchors are never co-masked, so the summary's three
    anchor copies plus the unmasked twin always outnumber the tripled 5-char
    distractor; the gap-3 variants co-mask the pairs and fall to count ties,
    and l_normal=5 makes the unsupported distractors maskable (pure dilution).
    """
    rng = random.Random(seed)
    samples = []
    for i in range(n):
        anchor = rng.choice(anchors)
        five = rng.choice(fives)
        sents = [
            f"{anchor} {anchor} {five} {five} {five}",
            f"{anchor} {rng.choice(shorts)} {rng.choice(shorts)} {anchor} "
            f"{five} {five} {five}",
            f"{rng.choice(others)} holds {rng.choice(longs)} {five}",
        ]
        samples.append(
            AnnotatedSample(f"{prefix}-{i:03d}", "\n".join(sents),
                            " ".join([anchor] * 3))
        )
    return samples


POOL_A = dict(
    anchors=["granite", "lantern", "orchard", "violets", "thunder", "harbors"],
    fives=["crane", "stone", "misty", "plume", "gorse", "brick"],
    longs=["wheelbarrows", "cobblestones", "watermelons"],
    shorts=["an", "of", "to", "by"],
    others=["meadow", "willow", "copper"],
)
POOL_B = dict(
    anchors=["pelican", "foxglove", "mackerel", "juniper", "sycamore", "heather"],
    fives=["quill", "shoal", "frost", "bloom", "crags", "marsh"],
    longs=["thunderstorms", "watercourses", "candlesticks"],
    shorts=["at", "in", "on", "so"],
    others=["osprey", "salmon", "becalm"],
)


def test_max_help_universality_and_cache(tmp_path):
    with criterion("max-help universality: same argmax on two disjoint 200-sample "
                   "corpora; cached re-run issues zero backend calls"):
        corpora = {
            "high-overlap": _universality_corpus(200, 11, "hi", **POOL_A),
            "low-overlap": _universality_corpus(200, 22, "lo", **POOL_B),
        }
        family = help_family()
        cache = ScoreCache(tmp_path / "cache")
        first_backend = ReferenceBackend()
        report = max_help_select(corpora, family, first_backend, cache=cache)
        assert first_backend.calls.total > 0
        assert report.optimal["high-overlap"] == report.optimal["low-overlap"]
        assert report.optimal["high-overlap"] == "help-optimal"
        assert report.universal is True
        # substantive perturbations are strictly worse on both corpora
        for dataset in corpora:
            optimal_mean = report.cells[(dataset, "help-optimal")].mean
            for label in ("help-gap-3-1", "help-gap-3-2", "help-toks-normal-5"):
                assert report.cells[(dataset, label)].mean < optimal_mean

        second_backend = ReferenceBackend()
        rerun = max_help_select(corpora, family, second_backend, cache=cache)
        assert second_backend.calls.total == 0
        assert rerun.to_csv() == report.to_csv()


# --------------------------------------------------------------------------
# 7. Restriction machinery
# --------------------------------------------------------------------------

def test_restriction_machinery():
    with criterion("restriction: full-selection pooling equals document score; "
                   "constructed correlation-gain factor 1.5 within 1e-12"):
        backend = ReferenceBackend()
        rng = random.Random(31_41)
        for _ in range(25):
            text = tokenize_text(random_text(rng), backend)
            summary = tokenize_text(random_text(rng, max_sentences=1), backend)
            result = evaluate(text, summary, HELP_OPTIMAL, backend)
            pooled = restricted_score(
                result, range(len(result.per_sentence)), Aggregation.RECOMPUTE_COMBINED
            )
            assert pooled == result.score

        # Spearman vs [1..5]: full [1,3,4,5,2] -> rho 0.4; restricted
        # [2,1,5,3,4] -> rho 0.6; hand-computed factor 0.6/0.4 = 1.5.
        human = {"coherence": [1.0, 2.0, 3.0, 4.0, 5.0]}
        gains = correlation_gain(
            [1.0, 3.0, 4.0, 5.0, 2.0], [2.0, 1.0, 5.0, 3.0, 4.0], human
        )
        assert abs(gains["coherence"].factor - 1.5) < 1e-12


# --------------------------------------------------------------------------
# Secondary criteria (real model; env-gated, skipped by default)
# --------------------------------------------------------------------------

SIDECAR_URL = os.environ.get("BLANCLAB_SIDECAR_URL")
CNNDM_CORPUS = os.environ.get("BLANCLAB_CNNDM_CORPUS")
SUMMEVAL_CORPUS = os.environ.get("BLANCLAB_SUMMEVAL_CORPUS")


@pytest.mark.skipif(
    not (SIDECAR_URL and CNNDM_CORPUS),
    reason="needs BLANCLAB_SIDECAR_URL and BLANCLAB_CNNDM_CORPUS "
           "(bert-base-class sidecar plus >=100 news (text, summary) pairs)",
)
def test_secondary_real_model_drop_reproduction():
    with criterion("real-model drop: optimum beats gap 3/1 and 3/2 by 5-30%, "
                   "token-threshold drops <= 5%"):
        from blanclab.backends import RemoteBackend
        from blanclab.sweep import evaluate_config

        backend = RemoteBackend(SIDECAR_URL)
        corpus = load_corpus(CNNDM_CORPUS)[:200]
        assert len(corpus) >= 100, "need at least 100 pairs"
        family = {c.label: c for c in help_family()}
        means = {}
        for label in ("help-optimal", "help-gap-3-1", "help-gap-3-2",
                      "help-toks-normal-5", "help-toks-lead-2", "help-toks-follow-2"):
            means[label] = evaluate_config(
                corpus, family[label], backend, corpus_id="cnndm"
            ).mean
        optimal = means["help-optimal"]
        for label in ("help-gap-3-1", "help-gap-3-2"):
            drop = (optimal - means[label]) / optimal
            assert 0.05 <= drop <= 0.30, (label, drop)
        for label in ("help-toks-normal-5", "help-toks-lead-2", "help-toks-follow-2"):
            drop = (optimal - means[label]) / optimal
            assert drop <= 0.05, (label, drop)


@pytest.mark.skipif(
    not (SIDECAR_URL and SUMMEVAL_CORPUS),
    reason="needs BLANCLAB_SIDECAR_URL and BLANCLAB_SUMMEVAL_CORPUS "
           "(full 1600-sample annotated set; hours of compute)",
)
def test_secondary_table1_ballpark():
    with criterion("published-correlation ballpark: tune max-human Pearson vs "
                   "expert relevance ~0.256, consistency ~0.205 (+/-0.05)"):
        from blanclab.backends import RemoteBackend
        from blanclab.presets import PUBLISHED_EXPERT_CORRELATIONS, TUNE_MAX_HUMAN
        from blanclab.sweep import evaluate_config

        backend = RemoteBackend(SIDECAR_URL)
        corpus = load_corpus(SUMMEVAL_CORPUS, CorpusFormat.SUMMEVAL)
        assert len(corpus) >= 1600
        evaluation = evaluate_config(corpus, TUNE_MAX_HUMAN, backend,
                                     corpus_id="summeval")
        scored = [s for s in corpus if s.sample_id in evaluation.scores]
        human = mean_group_scores(scored, "expert")
        measure = [evaluation.scores[s.sample_id] for s in scored]
        relevance = pearson(measure, human["relevance"]).coefficient
        consistency = pearson(measure, human["consistency"]).coefficient
        expected_rel = PUBLISHED_EXPERT_CORRELATIONS[("relevance", "pearson")]["max_human"]
        expected_con = PUBLISHED_EXPERT_CORRELATIONS[("consistency", "pearson")]["max_human"]
        assert abs(relevance - expected_rel) <= 0.05
        assert abs(consistency - expected_con) <= 0.05
