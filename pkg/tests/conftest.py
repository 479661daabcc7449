"""Shared fixtures.

The corpus fixtures are session-scoped because building a split takes a
few seconds and most acceptance checks read the same one. Point
``SHARC_TRAIN_JSON`` / ``SHARC_DEV_JSON`` at real ShARC exports to run
the suite against those instead of the bundled replica.
"""

import os

import pytest

from sharctool.corpus import DialogTurn, Instance, load_corpus
from sharctool.synthcorpus import DEV_SPEC, TRAIN_SPEC, generate_split

TRAIN_ENV = "SHARC_TRAIN_JSON"
DEV_ENV = "SHARC_DEV_JSON"


def _split(env_var, spec):
    override = os.environ.get(env_var)
    if override:
        return load_corpus(override)
    return generate_split(spec)


@pytest.fixture(scope="session")
def train_corpus():
    return _split(TRAIN_ENV, TRAIN_SPEC)


@pytest.fixture(scope="session")
def dev_corpus():
    return _split(DEV_ENV, DEV_SPEC)


@pytest.fixture
def make_instance():
    """Factory for small hand-built instances; override any field."""

    def _make(**overrides):
        fields = dict(
            utterance_id="u-0",
            tree_id="t-0",
            rule_text="You can claim the grant if you are over 60.",
            question="Can I claim the grant?",
            scenario="",
            history=[],
            evidence=[],
            gold_answer="Yes",
        )
        fields.update(overrides)
        return Instance(**fields)

    return _make


@pytest.fixture
def turn():
    def _turn(question, answer):
        return DialogTurn(follow_up_question=question, follow_up_answer=answer)

    return _turn
