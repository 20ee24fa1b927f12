"""Sweep, cache, and max-help selection tests."""

import random

import pytest

from blanclab.backends.reference import ReferenceBackend
from blanclab.corpus import AnnotatedSample
from blanclab.engine import MeasureConfig, MeasureFamily, evaluate
from blanclab.errors import AllSamplesSkippedError, DegenerateInputError
from blanclab.masking import MaskingPolicy
from blanclab.sweep import ScoreCache, drop_fraction, evaluate_config, max_help_select
from blanclab.tokenization import tokenize_text

from conftest import WORD_POOL
from oracle_bridge import oracle_result
import enumerator

HELP_ALL = MeasureConfig(
    family=MeasureFamily.HELP,
    masking=MaskingPolicy(gap=2, gap_mask=1, l_normal=1, l_lead=1, l_follow=1),
    label="help-all",
)
HELP_NEVER = MeasureConfig(
    family=MeasureFamily.HELP,
    masking=MaskingPolicy(gap=2, gap_mask=1, l_normal=100, l_lead=100, l_follow=100),
    label="help-never",
)


def overlap_corpus(n: int, seed: int, prefix: str) -> list[AnnotatedSample]:
    """Texts whose summaries repeat one of the text's own words.

    No terminator punctuation: at l_normal=1 a trailing period would be
    maskable and systematically favor the period filler of the base input.
    """
    rng = random.Random(seed)
    samples = []
    for i in range(n):
        words = [rng.choice(WORD_POOL) for _ in range(rng.randint(3, 7))]
        summary = " ".join([words[0]] * 3)
        samples.append(AnnotatedSample(f"{prefix}-{i:03d}", " ".join(words), summary))
    return samples


def misleading_corpus(n: int, prefix: str) -> list[AnnotatedSample]:
    """Period-only texts with unrelated summaries: assisted context misleads."""
    return [
        AnnotatedSample(f"{prefix}-{i:03d}", ". . . .", "owl owl owl owl.")
        for i in range(n)
    ]


class TestEvaluateConfig:
    def test_singleton_corpus_mean_and_zero_stderr(self, backend):
        corpus = overlap_corpus(1, seed=1, prefix="one")
        evaluation = evaluate_config(corpus, HELP_ALL, backend, corpus_id="one")
        text = tokenize_text(corpus[0].text, backend)
        summary = tokenize_text(corpus[0].summary, backend)
        single = evaluate(text, summary, HELP_ALL, backend).score
        assert evaluation.mean == single
        assert evaluation.stderr == 0.0
        assert evaluation.n == 1

    def test_two_sample_mean_is_average(self, backend):
        corpus = overlap_corpus(2, seed=2, prefix="two")
        evaluation = evaluate_config(corpus, HELP_ALL, backend, corpus_id="two")
        singles = []
        for sample in corpus:
            text = tokenize_text(sample.text, backend)
            summary = tokenize_text(sample.summary, backend)
            singles.append(evaluate(text, summary, HELP_ALL, backend).score)
        assert evaluation.mean == pytest.approx(sum(singles) / 2, abs=1e-15)

    def test_mean_matches_enumerator_exactly(self, backend):
        corpus = overlap_corpus(50, seed=3, prefix="oracle")
        evaluation = evaluate_config(corpus, HELP_ALL, backend, corpus_id="oracle")
        oracle_scores = []
        for sample in corpus:
            text = tokenize_text(sample.text, backend)
            summary = tokenize_text(sample.summary, backend)
            doc, _ = oracle_result(text, summary, HELP_ALL, backend)
            oracle_scores.append(enumerator.score_of(doc))
        assert evaluation.mean == sum(oracle_scores) / len(oracle_scores)

    def test_workers_do_not_change_result(self, backend):
        corpus = overlap_corpus(12, seed=4, prefix="par")
        serial = evaluate_config(corpus, HELP_ALL, backend, corpus_id="par")
        threaded = evaluate_config(
            corpus, HELP_ALL, ReferenceBackend(), corpus_id="par", workers=4
        )
        assert dict(serial.scores) == dict(threaded.scores)

    def test_skipped_samples_reported(self):
        backend = ReferenceBackend(max_input_len=10)
        corpus = [
            AnnotatedSample("fits", "granite meadow.", "granite."),
            AnnotatedSample("toolong", "granite meadow.",
                            "word " * 30),
        ]
        evaluation = evaluate_config(corpus, HELP_ALL, backend, corpus_id="mix")
        assert evaluation.n == 1
        assert evaluation.skipped[0][0] == "toolong"
        assert "input limit" in evaluation.skipped[0][1]

    def test_all_skipped_fails_explicitly(self):
        backend = ReferenceBackend(max_input_len=6)
        corpus = [AnnotatedSample("x", "granite meadow.", "word " * 30)]
        with pytest.raises(AllSamplesSkippedError):
            evaluate_config(corpus, HELP_ALL, backend, corpus_id="dead")

    def test_empty_corpus_rejected(self, backend):
        with pytest.raises(ValueError):
            evaluate_config([], HELP_ALL, backend)


class TestScoreCache:
    def test_second_run_issues_zero_backend_calls(self, tmp_path):
        cache = ScoreCache(tmp_path / "cache")
        corpus = overlap_corpus(8, seed=5, prefix="cache")
        first_backend = ReferenceBackend()
        first = evaluate_config(corpus, HELP_ALL, first_backend,
                                corpus_id="cached", cache=cache)
        assert first_backend.calls.total > 0
        second_backend = ReferenceBackend()
        second = evaluate_config(corpus, HELP_ALL, second_backend,
                                 corpus_id="cached", cache=cache)
        assert second_backend.calls.total == 0
        assert dict(second.scores) == dict(first.scores)
        assert second.mean == first.mean

    def test_cache_key_includes_config_and_backend(self, tmp_path):
        cache = ScoreCache(tmp_path / "cache")
        corpus = overlap_corpus(3, seed=6, prefix="keys")
        evaluate_config(corpus, HELP_ALL, ReferenceBackend(),
                        corpus_id="keys", cache=cache)
        other_backend = ReferenceBackend()
        evaluate_config(corpus, HELP_NEVER, other_backend,
                        corpus_id="keys", cache=cache)
        assert other_backend.calls.total > 0  # different config hash -> miss


class TestDropFraction:
    def test_basic_arithmetic(self):
        assert drop_fraction(0.10, 0.08) == pytest.approx(0.20)

    def test_identity_is_zero(self):
        assert drop_fraction(0.37, 0.37) == 0.0

    def test_negative_drop_when_alternative_better(self):
        assert drop_fraction(0.10, 0.12) == pytest.approx(-0.20)

    def test_zero_optimal_reported(self):
        with pytest.raises(DegenerateInputError):
            drop_fraction(0.0, 0.1)


class TestMaxHelpSelect:
    def test_singleton_family_is_optimal_with_empty_drop(self, backend):
        corpora = {"only": overlap_corpus(4, seed=7, prefix="single")}
        report = max_help_select(corpora, [HELP_ALL], backend)
        assert report.optimal == {"only": "help-all"}
        assert report.universal is True
        cell = report.cells[("only", "help-all")]
        assert cell.drop == 0.0 and cell.is_optimal

    def test_forced_argmax_universal(self, backend):
        # help-never masks nothing and scores exactly 0 everywhere, while the
        # overlap corpora give help-all a positive mean: argmax forced on both.
        corpora = {
            "first": overlap_corpus(10, seed=8, prefix="f"),
            "second": overlap_corpus(10, seed=9, prefix="s"),
        }
        report = max_help_select(corpora, [HELP_ALL, HELP_NEVER], backend)
        for dataset in corpora:
            assert report.cells[(dataset, "help-all")].mean > 0.0
            assert report.cells[(dataset, "help-never")].mean == 0.0
        assert report.optimal == {"first": "help-all", "second": "help-all"}
        assert report.universal is True
        assert report.cells[("first", "help-never")].drop == 1.0

    def test_universality_flips_false_with_adversarial_corpus(self, backend):
        corpora_true = {"good": overlap_corpus(6, seed=10, prefix="g")}
        family = [HELP_ALL, HELP_NEVER]
        assert max_help_select(corpora_true, family, backend).universal is True
        corpora_mixed = {
            "good": overlap_corpus(6, seed=10, prefix="g"),
            "bad": misleading_corpus(6, prefix="b"),
        }
        report = max_help_select(corpora_mixed, family, backend)
        assert report.cells[("bad", "help-all")].mean < 0.0
        assert report.optimal["bad"] == "help-never"
        assert report.universal is False

    def test_tie_breaks_to_family_order_and_notes(self, backend):
        same_a = MeasureConfig(family=MeasureFamily.HELP,
                               masking=HELP_ALL.masking, label="first-label")
        same_b = MeasureConfig(family=MeasureFamily.HELP,
                               masking=HELP_ALL.masking, label="second-label")
        corpora = {"c": overlap_corpus(3, seed=11, prefix="tie")}
        report = max_help_select(corpora, [same_a, same_b], backend)
        assert report.optimal == {"c": "first-label"}
        assert any("tie" in note for note in report.notes)

    def test_report_pure_function_of_cached_scores(self, tmp_path, backend):
        cache = ScoreCache(tmp_path / "cache")
        corpora = {
            "one": overlap_corpus(5, seed=12, prefix="p1"),
            "two": overlap_corpus(5, seed=13, prefix="p2"),
        }
        family = [HELP_ALL, HELP_NEVER]
        first = max_help_select(corpora, family, backend, cache=cache)
        again = max_help_select(corpora, family, ReferenceBackend(), cache=cache)
        assert again.to_csv() == first.to_csv()
        assert again.to_json_dict() == first.to_json_dict()

    def test_duplicate_labels_rejected(self, backend):
        with pytest.raises(ValueError):
            max_help_select(
                {"c": overlap_corpus(2, seed=14, prefix="dup")},
                [HELP_ALL, HELP_ALL], backend,
            )

    def test_csv_row_count(self, backend):
        corpora = {
            "a": overlap_corpus(2, seed=15, prefix="ca"),
            "b": overlap_corpus(2, seed=16, prefix="cb"),
        }
        report = max_help_select(corpora, [HELP_ALL, HELP_NEVER], backend)
        lines = report.to_csv().strip().splitlines()
        assert len(lines) == 1 + len(corpora) * 2
        assert lines[0].startswith("dataset,config,mean")
