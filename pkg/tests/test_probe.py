"""Dataset-statistics probes on small hand-built corpora."""

import pytest

from sharctool.corpus import ClassLabel
from sharctool.probe import (
    class_distribution,
    followup_rate_by_turn,
    followup_rate_spearman,
    irrelevant_context_stats,
    last_followup_agreement,
    probe_corpus,
)


def test_class_distribution_percentages(make_instance):
    corpus = [
        make_instance(utterance_id="a", gold_answer="Yes"),
        make_instance(utterance_id="b", gold_answer="Yes"),
        make_instance(utterance_id="c", gold_answer="No"),
        make_instance(utterance_id="d", gold_answer="Irrelevant"),
    ]
    distribution = class_distribution(corpus)
    assert distribution[ClassLabel.YES] == 50.0
    assert distribution[ClassLabel.NO] == 25.0
    assert distribution[ClassLabel.IRRELEVANT] == 25.0
    assert distribution[ClassLabel.MORE] == 0.0
    assert sum(distribution.values()) == pytest.approx(100.0)


def test_class_distribution_rejects_empty_corpus():
    with pytest.raises(ValueError):
        class_distribution([])


def test_last_followup_agreement_counts(make_instance, turn):
    corpus = [
        # agrees: gold Yes, last answer Yes
        make_instance(utterance_id="a", history=[turn("q1?", "No"), turn("q2?", "Yes")], gold_answer="Yes"),
        # disagrees: gold No, last answer Yes
        make_instance(utterance_id="b", history=[turn("q1?", "Yes")], gold_answer="No"),
        # out of scope: empty history
        make_instance(utterance_id="c", gold_answer="Yes"),
        # out of scope by default: a follow-up answer
        make_instance(utterance_id="d", history=[turn("q1?", "Yes")], gold_answer="Another question?"),
    ]
    stat = last_followup_agreement(corpus)
    assert (stat.numerator, stat.denominator) == (1, 2)
    assert stat.percent == pytest.approx(50.0)

    stricter = last_followup_agreement(corpus, include_followup_labels=True)
    assert (stricter.numerator, stricter.denominator) == (1, 3)


def test_last_followup_agreement_is_position_sensitive(make_instance, turn):
    history = [turn("q1?", "Yes"), turn("q2?", "No")]
    agree = make_instance(history=history, gold_answer="No")
    disagree = make_instance(history=list(reversed(history)), gold_answer="No")
    assert last_followup_agreement([agree]).percent == pytest.approx(100.0)
    assert last_followup_agreement([disagree]).percent == pytest.approx(0.0)


def test_last_followup_agreement_undefined_when_empty(make_instance):
    stat = last_followup_agreement([make_instance(gold_answer="Yes")])
    assert stat.percent is None
    assert stat.denominator == 0


def test_irrelevant_context_stats(make_instance, turn):
    corpus = [
        make_instance(utterance_id="a", gold_answer="Irrelevant"),  # irrelevant + empty
        make_instance(utterance_id="b", gold_answer="Irrelevant", scenario="I am 70."),
        make_instance(utterance_id="c", gold_answer="Yes"),  # empty but not irrelevant
        make_instance(utterance_id="d", gold_answer="Yes", history=[turn("q?", "Yes")]),
    ]
    stats = irrelevant_context_stats(corpus)
    assert stats.irrelevant_count == 2
    assert stats.empty_context_count == 2
    assert stats.irrelevant_and_empty_context == 1
    assert stats.p_empty_context_given_irrelevant == pytest.approx(0.5)
    assert stats.p_irrelevant_given_empty_context == pytest.approx(0.5)


def test_irrelevant_context_stats_undefined_sides(make_instance):
    stats = irrelevant_context_stats([make_instance(scenario="Context.", gold_answer="Yes")])
    assert stats.p_empty_context_given_irrelevant is None
    assert stats.p_irrelevant_given_empty_context is None


def _rate_corpus(make_instance, turn, spec):
    """spec: {history_length: (followups, total)}."""
    corpus = []
    for k, (more, total) in spec.items():
        history = [turn(f"q{i}?", "Yes") for i in range(k)]
        for i in range(total):
            gold = "What else?" if i < more else "Yes"
            corpus.append(
                make_instance(utterance_id=f"u-{k}-{i}", history=list(history), gold_answer=gold)
            )
    return corpus


def test_followup_rate_by_turn(make_instance, turn):
    corpus = _rate_corpus(make_instance, turn, {0: (8, 10), 1: (5, 10), 2: (1, 10)})
    rates = followup_rate_by_turn(corpus)
    assert sorted(rates) == [0, 1, 2]
    assert rates[0].rate == pytest.approx(0.8)
    assert rates[1].rate == pytest.approx(0.5)
    assert rates[2].rate == pytest.approx(0.1)
    assert rates[2].followups == 1 and rates[2].total == 10


def test_spearman_perfectly_decreasing(make_instance, turn):
    corpus = _rate_corpus(make_instance, turn, {0: (9, 10), 1: (6, 10), 2: (3, 10), 3: (0, 10)})
    rates = followup_rate_by_turn(corpus)
    assert followup_rate_spearman(rates, min_support=10) == pytest.approx(-1.0)


def test_spearman_perfectly_increasing(make_instance, turn):
    corpus = _rate_corpus(make_instance, turn, {0: (1, 10), 1: (5, 10), 2: (9, 10)})
    rates = followup_rate_by_turn(corpus)
    assert followup_rate_spearman(rates, min_support=10) == pytest.approx(1.0)


def test_spearman_ignores_small_buckets(make_instance, turn):
    # the k=3 bucket would flip the sign but has too little support
    spec = {0: (9, 30), 1: (5, 30), 2: (1, 30), 3: (29, 29)}
    rates = followup_rate_by_turn(_rate_corpus(make_instance, turn, spec))
    assert followup_rate_spearman(rates, min_support=30) == pytest.approx(-1.0)
    assert followup_rate_spearman(rates, min_support=29) != pytest.approx(-1.0)


def test_spearman_undefined_cases(make_instance, turn):
    one_bucket = followup_rate_by_turn(_rate_corpus(make_instance, turn, {0: (5, 40)}))
    assert followup_rate_spearman(one_bucket) is None
    constant = followup_rate_by_turn(
        _rate_corpus(make_instance, turn, {0: (20, 40), 1: (20, 40), 2: (20, 40)})
    )
    assert followup_rate_spearman(constant) is None


def test_probe_corpus_assembles_everything(make_instance, turn):
    corpus = _rate_corpus(make_instance, turn, {0: (8, 10), 1: (2, 10)})
    report = probe_corpus(corpus, split_name="toy", min_support=10)
    assert report.split_name == "toy"
    assert report.instance_count == 20
    assert report.class_counts[ClassLabel.MORE] == 10
    assert report.followup_rate_spearman == pytest.approx(-1.0)
    payload = report.to_dict()
    assert payload["class_distribution"]["More"] == pytest.approx(50.0)
    assert payload["followup_rate_by_turn"]["0"]["total"] == 10
    assert payload["last_followup_agreement"]["denominator"] == 8
