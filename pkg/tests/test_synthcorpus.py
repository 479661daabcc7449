"""The bundled replica generator: determinism, exact counts, well-formedness."""

import pytest

from sharctool.corpus import ClassLabel, derive_label, instance_to_record, load_corpus, write_corpus
from sharctool.probe import class_distribution
from sharctool.synthcorpus import DEV_SPEC, TRAIN_SPEC, SplitSpec, generate_split

TOY_SPEC = SplitSpec(
    name="toy",
    seed=99,
    class_counts={
        ClassLabel.IRRELEVANT: 20,
        ClassLabel.YES: 60,
        ClassLabel.NO: 60,
        ClassLabel.MORE: 60,
    },
    tree_count=60,
)


@pytest.fixture(scope="module")
def toy_split():
    return generate_split(TOY_SPEC)


def test_generate_split_is_deterministic(toy_split):
    again = generate_split(TOY_SPEC)
    assert [instance_to_record(i) for i in again] == [instance_to_record(i) for i in toy_split]


def test_generate_split_hits_exact_class_counts(toy_split):
    counts = {label: 0 for label in ClassLabel}
    for instance in toy_split:
        counts[instance.label] += 1
    assert counts == TOY_SPEC.class_counts
    assert len(toy_split) == TOY_SPEC.size == 200


def test_generate_split_ids_are_unique(toy_split):
    ids = [inst.utterance_id for inst in toy_split]
    assert len(set(ids)) == len(ids)


def test_generated_instances_are_well_formed(toy_split):
    for instance in toy_split:
        assert instance.rule_text.strip()
        assert instance.question.strip()
        assert instance.tree_id
        for turn in instance.history + instance.evidence:
            assert turn.follow_up_answer in ("Yes", "No")
            assert turn.follow_up_question.strip()
        if instance.label is ClassLabel.MORE:
            assert instance.gold_answer.endswith("?")
        if instance.label is ClassLabel.IRRELEVANT:
            assert instance.gold_answer == "Irrelevant"


def test_generated_labels_match_derive_label(toy_split):
    for instance in toy_split:
        assert derive_label(instance.gold_answer) is instance.label


def test_generated_split_survives_strict_reload(tmp_path, toy_split):
    path = tmp_path / "toy.jsonl"
    write_corpus(path, toy_split)
    loaded = load_corpus(path, "strict")
    assert [instance_to_record(i) for i in loaded] == [instance_to_record(i) for i in toy_split]


def test_split_specs_are_distinct():
    assert TRAIN_SPEC.seed != DEV_SPEC.seed
    assert TRAIN_SPEC.size == 21890
    assert DEV_SPEC.size == 2270


def test_toy_distribution_tracks_spec(toy_split):
    distribution = class_distribution(toy_split)
    assert distribution[ClassLabel.IRRELEVANT] == pytest.approx(10.0)
    assert distribution[ClassLabel.YES] == pytest.approx(30.0)
