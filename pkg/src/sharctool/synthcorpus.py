"""Seeded generator for a ShARC-shaped synthetic corpus.

The real ShARC distribution is not vendored here, so this module fabricates
a stand-in with the same record shape and — more importantly — the same
statistical fingerprints the rest of the toolkit measures and manipulates:
a last-follow-up-answer echo around 84%, empty contexts concentrated on
Irrelevant, a follow-up rate that decays with history length, and enough
multi-turn / scenario-bearing instances for the augmenter's quotas.

Every instance is woven from a rule tree: a markdown rule (header, lead-in,
bullet conditions), a dialog that asks conditions in order, and optional
"evidence folding" that moves answered turns into the scenario text. Class
pools are assembled from named strata (see the ``*_STRATA`` tables) whose
shares were chosen so the corpus-level statistics land in realistic bands;
``generate_split`` then samples exact class counts. Deterministic for a
given (seed, split spec).
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .corpus import ClassLabel, DialogTurn, Instance, content_hash, tokenize
from .markers import lcs_match

__all__ = [
    "DEV_SPEC",
    "TRAIN_SPEC",
    "SplitSpec",
    "generate_split",
]

# --------------------------------------------------------------------------
# Vocabulary
# --------------------------------------------------------------------------

_TOPIC_PREFIXES = (
    "Winter", "Rural", "Family", "Youth", "Senior", "Carer", "Veteran", "Student",
    "Childcare", "Energy", "Transport", "Maternity", "Bereavement", "Jobseeker",
    "Disability", "Heritage", "Coastal", "Island", "Border", "Harvest",
)
_TOPIC_DOMAINS = (
    "Fuel", "Support", "Assistance", "Living", "Income", "Care", "Mobility",
    "Training", "Education", "Housing", "Travel", "Heating", "Relief",
    "Resettlement", "Employment",
)
_TOPIC_KINDS = (
    "Payment", "Allowance", "Grant", "Credit", "Supplement", "Benefit",
    "Scheme", "Fund", "Premium", "Bonus",
)

_PLACES = (
    "England", "Scotland", "Wales", "Northern Ireland", "the pilot area",
    "council housing", "rented accommodation", "a care home", "a rural district",
    "the scheme area",
)
_AGES = (16, 18, 21, 25, 35, 50, 60, 65, 66, 70, 75)
_HOURS = (16, 20, 25, 30, 35)

# Per-kind initial questions. Each template repeats the lead-in's verb so the
# question shares four content words with the rule text (topic + verb); deep
# rules dilute the Jaccard overlap and three shared words is not always enough.
_ON_TOPIC_QUESTIONS = {
    "cconj": ("Can I claim {topic}?", "Does {topic} apply to me?"),
    "cdisj": ("Do I meet the conditions for {topic}?", "Could I meet the rules for {topic}?"),
    "uconj": ("Do I qualify for {topic}?", "Could I qualify for {topic}?"),
    "udisj": ("Am I eligible for {topic}?", "Would I be eligible for {topic}?"),
    "trap": ("Do I qualify for {topic}?", "Could I qualify for {topic}?"),
    "single": ("Can I claim {topic}?", "Could I claim {topic}?", "Can I make a claim for {topic}?"),
}

_OFF_TOPIC_QUESTIONS = (
    "How do I renew my passport?",
    "How do I renew my driving licence?",
    "Where can I register a birth?",
    "How do I book a theory test?",
    "Can I appeal a parking fine?",
    "How do I change the address on my vehicle log book?",
    "Where do I report a lost wallet?",
    "How do I register to vote?",
    "Can I view my state pension forecast online?",
    "How do I replace a damaged birth certificate?",
    "What is the deadline for a self assessment return?",
    "How do I order a new recycling bin?",
    "Where can I pay a court fine?",
    "How do I object to a planning application?",
    "Can I transfer a vehicle registration number?",
    "How do I request my medical records?",
    "Where do I apply for a fishing licence?",
    "How do I report a faulty street light?",
    "Can I check a company's registration details?",
    "How do I cancel a lost bank card?",
    "Where can I find out about jury service dates?",
    "How do I get an EHIC replacement card?",
    "Can I reschedule a hospital appointment online?",
    "How do I report a pothole on a motorway?",
)

_PERSONAS = (
    "I am 52 years old and live with my sister.",
    "My husband retired last spring.",
    "I moved house about two months ago.",
    "I have two grown-up children.",
    "My landlord recently raised the rent.",
    "I used to run a small bakery.",
    "My wife works night shifts.",
    "I volunteer at the local library on weekends.",
    "We recently sold our second car.",
    "My son starts secondary school next year.",
    "I was born abroad but settled here decades ago.",
    "My neighbour helps me with the shopping.",
    "I keep an allotment near the river.",
    "My daughter is training to be a nurse.",
    "We are redecorating the spare room.",
    "I play in a brass band on Thursdays.",
)


# --------------------------------------------------------------------------
# Conditions and trees
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class _Cond:
    """One askable rule condition plus its surface realisations."""

    text: str  # clause text as it appears in the rule bullet
    asks: tuple[str, ...]  # gold follow-up question paraphrases
    fact_yes: str  # scenario sentence when the (positive) question was answered Yes
    fact_no: str  # scenario sentence when it was answered No
    negated: bool = False  # condition holds when the answer is No


def _cond_benefit(name: str) -> _Cond:
    return _Cond(
        text=name,
        asks=(
            f"Do you get {name}?",
            f"Do you receive {name}?",
            f"Are you getting {name}?",
            f"Do you currently get {name}?",
            f"Is {name} something you currently get?",
        ),
        fact_yes=f"I am getting {name}.",
        fact_no=f"I do not get {name}.",
    )


def _cond_getting(name: str, negated: bool = False) -> _Cond:
    return _Cond(
        text=("not getting " if negated else "getting ") + name,
        asks=(
            f"Are you getting {name}?",
            f"Are you currently getting {name}?",
            f"Do you get {name}?",
            f"Have you been getting {name}?",
        ),
        fact_yes=f"I am getting {name}.",
        fact_no=f"I am not getting {name}.",
        negated=negated,
    )


def _cond_living(place: str) -> _Cond:
    return _Cond(
        text=f"living in {place}",
        asks=(
            f"Are you living in {place}?",
            f"Do you live in {place}?",
            f"Do you currently live in {place}?",
            f"Is your home in {place}?",
        ),
        fact_yes=f"I live in {place}.",
        fact_no=f"I am not living in {place}.",
    )


def _cond_age(age: int) -> _Cond:
    return _Cond(
        text=f"be over {age}",
        asks=(
            f"Are you over {age}?",
            f"Are you aged over {age}?",
            f"Are you over {age} years old?",
            f"Are you over the age of {age}?",
        ),
        fact_yes=f"I am over {age}.",
        fact_no=f"I am not over {age}.",
    )


def _cond_hours(hours: int) -> _Cond:
    return _Cond(
        text=f"working at least {hours} hours a week",
        asks=(
            f"Are you working at least {hours} hours a week?",
            f"Do you work at least {hours} hours a week?",
            f"Are you working {hours} or more hours a week?",
        ),
        fact_yes=f"I work at least {hours} hours a week.",
        fact_no=f"I am not working at least {hours} hours a week.",
    )


def _cond_study(kind: str) -> _Cond:
    return _Cond(
        text=f"studying {kind}",
        asks=(
            f"Are you studying {kind}?",
            f"Do you study {kind}?",
            f"Are you currently studying {kind}?",
            f"Do you currently study {kind}?",
        ),
        fact_yes=f"I am studying {kind}.",
        fact_no=f"I am not studying {kind}.",
    )


def _cond_child(age: int) -> _Cond:
    return _Cond(
        text=f"responsible for a child under {age}",
        asks=(
            f"Are you responsible for a child under {age}?",
            f"Are you the person responsible for a child under {age}?",
            f"Do you have responsibility for a child under {age}?",
        ),
        fact_yes=f"I am responsible for a child under {age}.",
        fact_no=f"I am not responsible for any child under {age}.",
    )


def _cond_partner() -> _Cond:
    return _Cond(
        text="living with a partner",
        asks=(
            "Are you living with a partner?",
            "Do you live with a partner?",
            "Are you currently living with a partner?",
            "Do you share your home with a partner?",
        ),
        fact_yes="I live with a partner.",
        fact_no="I am not living with a partner.",
    )


@dataclass
class _Tree:
    tree_id: str
    kind: str  # udisj | uconj | cdisj | cconj | trap | single
    topic: str
    rule_text: str
    conds: list[_Cond]
    questions: tuple[str, ...]  # on-topic initial questions

    @property
    def depth(self) -> int:
        return len(self.conds)


_LEAD_INS = {
    # cued lead-ins carry an explicit quantifier cue; the uncued ones avoid
    # every cue phrase so the structure parser reports Unknown logic
    "cconj": "You can claim {topic} if all of the following apply:",
    "cdisj": "You may get {topic} if you meet any of the following:",
    "uconj": "To qualify for {topic}, every condition in the list below must be met:",
    "udisj": "To be eligible for {topic}, at least one condition listed below must apply:",
    "trap": "To qualify for {topic}, every condition in the list below must be met:",
}

_SINGLE_BODY = "You can claim {topic} if you are over {age} and you live in {place}."


def _draw_topic(rng: random.Random, used: set[str]) -> str:
    while True:
        topic = " ".join(
            (rng.choice(_TOPIC_PREFIXES), rng.choice(_TOPIC_DOMAINS), rng.choice(_TOPIC_KINDS))
        )
        if topic not in used:
            used.add(topic)
            return topic


def _draw_conditions(rng: random.Random, depth: int, kind: str, used_topics: set[str]) -> list[_Cond]:
    """Sample ``depth`` conditions, at most one per surface family."""
    families: list[Callable[[], _Cond]] = [
        lambda: _cond_benefit(_draw_topic(rng, used_topics)),
        lambda: _cond_getting(_draw_topic(rng, used_topics)),
        lambda: _cond_living(rng.choice(_PLACES)),
        lambda: _cond_age(rng.choice(_AGES)),
        lambda: _cond_hours(rng.choice(_HOURS)),
        lambda: _cond_study(rng.choice(("full time", "part time"))),
        lambda: _cond_child(rng.choice((16, 18))),
        _cond_partner,
    ]
    picks = rng.sample(range(len(families)), depth)
    conds = [families[i]() for i in picks]
    if kind == "uconj" and depth >= 3 and rng.random() < 0.3:
        # fold one negated condition in, never in the last slot
        slot = rng.randrange(depth - 1)
        conds[slot] = _cond_getting(_draw_topic(rng, used_topics), negated=True)
    return conds


def _coverage(clause_text: str, sentence: str) -> float:
    clause = tokenize(clause_text)
    matchable = sum(1 for t in clause.tokens if t.normalized)
    if not matchable:
        return 1.0
    return len(lcs_match(clause, tokenize(sentence))) / matchable


def _content(text: str) -> set[str]:
    from .markers import BASIC_STOPWORDS

    return {
        t.normalized
        for t in tokenize(text).tokens
        if t.normalized and t.normalized not in BASIC_STOPWORDS
    }


def _check_tree(tree: _Tree) -> None:
    """Build-time guards for the textual couplings the corpus relies on."""
    rule_content = _content(tree.rule_text)
    for question in tree.questions:
        overlap = _content(question) & rule_content
        union = _content(question) | rule_content
        assert len(overlap) / len(union) >= 0.12, f"on-topic question drifted: {question!r}"
    for idx, cond in enumerate(tree.conds):
        for ask in cond.asks:
            assert _coverage(cond.text, ask) >= 0.6, f"ask does not cover clause: {ask!r}"
        assert _coverage(cond.text, cond.fact_yes) >= 0.6, cond.fact_yes
        assert _coverage(cond.text, cond.fact_no) >= 0.6, cond.fact_no
        for jdx, other in enumerate(tree.conds):
            if idx == jdx or (tree.kind == "trap" and {idx, jdx} == {0, tree.depth - 1}):
                continue
            for ask in other.asks:
                assert _coverage(cond.text, ask) <= 0.5, (
                    f"cross-clause collision in {tree.tree_id}: {cond.text!r} vs {ask!r}"
                )


def _conds_distinct(conds: Sequence[_Cond], exempt: frozenset[frozenset[int]]) -> bool:
    """No two conditions may share two content words, or coverage bleeds."""
    words = [_content(cond.text) for cond in conds]
    for i in range(len(conds)):
        for j in range(i + 1, len(conds)):
            if frozenset((i, j)) in exempt:
                continue
            if len(words[i] & words[j]) >= 2:
                return False
    return True


def _make_tree(split: str, index: int, kind: str, rng: random.Random, used_topics: set[str],
               depth_weights: dict[int, float]) -> _Tree:
    topic = _draw_topic(rng, used_topics)
    tree_id = f"{split}-tree-{index:04d}"
    questions = tuple(q.format(topic=topic) for q in _ON_TOPIC_QUESTIONS[kind])
    if kind == "single":
        age = rng.choice(_AGES)
        place = rng.choice(_PLACES)
        body = _SINGLE_BODY.format(topic=topic, age=age, place=place)
        # follow-ups echo most of the rule sentence, as real dialogs tend to
        # do when the whole rule is one condition
        cond = _Cond(
            text=body,
            asks=(
                f"You can claim {topic} if you are over {age} and you live in {place} — is that right?",
                f"Can you claim {topic} — are you over {age} and do you live in {place}?",
                f"To claim {topic}: are you over {age} and do you live in {place}?",
                f"Just to check for {topic}: you are over {age} and you live in {place}?",
            ),
            fact_yes=f"You can claim {topic} when over {age} living in {place}; that is my situation.",
            fact_no=f"You can claim {topic} when over {age} living in {place}; that does not fit me.",
        )
        tree = _Tree(tree_id, kind, topic, f"# {topic}\n\n{body}", [cond], questions)
        _check_tree(tree)
        return tree

    depths = sorted(depth_weights)
    weights = [depth_weights[d] for d in depths]
    depth = rng.choices(depths, weights=weights, k=1)[0]
    for _ in range(60):
        if kind == "trap":
            depth = max(3, depth)
            name = _draw_topic(rng, used_topics)
            conds = [_cond_getting(name)]
            conds.extend(_draw_conditions(rng, depth - 2, "plain", used_topics))
            conds.append(
                _Cond(
                    text=f"getting {name} top-up",
                    asks=(f"Are you getting {name} top-up?", f"Do you get {name} top-up?"),
                    fact_yes=f"I am getting {name} top-up.",
                    fact_no=f"I am not getting {name} top-up.",
                )
            )
            exempt = frozenset((frozenset((0, depth - 1)),))
        else:
            conds = _draw_conditions(rng, depth, kind, used_topics)
            exempt = frozenset()
        if _conds_distinct(conds, exempt):
            break
    else:  # pragma: no cover - the vocabulary is large enough in practice
        raise RuntimeError(f"could not draw distinct conditions for {tree_id}")
    lead_in = _LEAD_INS[kind].format(topic=topic)
    bullets = "\n".join(f"* {cond.text}" for cond in conds)
    rule_text = f"# {topic}\n\n{lead_in}\n\n{bullets}"
    tree = _Tree(tree_id, kind, topic, rule_text, conds, questions)
    _check_tree(tree)
    return tree


# --------------------------------------------------------------------------
# Instance emission
# --------------------------------------------------------------------------


def _sat_answer(cond: _Cond) -> str:
    return "No" if cond.negated else "Yes"


def _unsat_answer(cond: _Cond) -> str:
    return "Yes" if cond.negated else "No"


def _turn(cond: _Cond, answer: str, rng: random.Random) -> DialogTurn:
    return DialogTurn(follow_up_question=rng.choice(cond.asks), follow_up_answer=answer)


def _fact(cond: _Cond, answer: str) -> str:
    return cond.fact_yes if answer == "Yes" else cond.fact_no


@dataclass
class _Draft:
    tree: _Tree
    question: str
    scenario: str
    history: list[DialogTurn]
    evidence: list[DialogTurn]
    answer: str


def _scenario_text(facts: Sequence[str], rng: random.Random) -> str:
    parts = list(facts)
    roll = rng.random()
    if roll < 0.25:
        parts.insert(0, rng.choice(_PERSONAS))
    elif roll < 0.5:
        parts.append(rng.choice(_PERSONAS))
    return " ".join(parts)


def _emit_decisive_last(tree: _Tree, rng: random.Random, label: ClassLabel) -> _Draft:
    """Full dialog whose decisive answer arrives on the final turn."""
    history = []
    for cond in tree.conds[:-1]:
        answer = _unsat_answer(cond) if label is ClassLabel.YES else _sat_answer(cond)
        history.append(_turn(cond, answer, rng))
    last = tree.conds[-1]
    history.append(_turn(last, _sat_answer(last) if label is ClassLabel.YES else _unsat_answer(last), rng))
    return _Draft(tree, rng.choice(tree.questions), "", history, [], label.value)


def _emit_cued_first(tree: _Tree, rng: random.Random, label: ClassLabel) -> _Draft:
    """Cued rule decided by a single follow-up (any clause short-circuits)."""
    cond = rng.choice(tree.conds)
    answer = _sat_answer(cond) if label is ClassLabel.YES else _unsat_answer(cond)
    return _Draft(tree, rng.choice(tree.questions), "", [_turn(cond, answer, rng)], [], label.value)


def _emit_uniform(tree: _Tree, rng: random.Random, label: ClassLabel) -> _Draft:
    """Every condition asked and every answer keeping the rule on one side."""
    pick = _sat_answer if label is ClassLabel.YES else _unsat_answer
    history = [_turn(cond, pick(cond), rng) for cond in tree.conds]
    return _Draft(tree, rng.choice(tree.questions), "", history, [], label.value)


def _emit_folded_decider(tree: _Tree, rng: random.Random, label: ClassLabel) -> _Draft:
    """The answer that decides the dialog lives in the scenario, not the history."""
    decider_idx = rng.randrange(tree.depth)
    history: list[DialogTurn] = []
    evidence: list[DialogTurn] = []
    facts: list[str] = []
    for idx, cond in enumerate(tree.conds):
        if idx == decider_idx:
            answer = _sat_answer(cond) if label is ClassLabel.YES else _unsat_answer(cond)
            turn = _turn(cond, answer, rng)
            evidence.append(turn)
            facts.append(_fact(cond, answer))
        else:
            answer = _unsat_answer(cond) if label is ClassLabel.YES else _sat_answer(cond)
            history.append(_turn(cond, answer, rng))
    return _Draft(tree, rng.choice(tree.questions), _scenario_text(facts, rng), history, evidence, label.value)


def _emit_folded_all(tree: _Tree, rng: random.Random, label: ClassLabel) -> _Draft:
    """The whole dialog happened before the question: scenario only, no turns."""
    if tree.kind in ("udisj", "cdisj"):
        sat_at = rng.randrange(tree.depth) if label is ClassLabel.YES else None
        answers = [
            (_sat_answer(c) if idx == sat_at else _unsat_answer(c)) for idx, c in enumerate(tree.conds)
        ]
    else:
        unsat_at = rng.randrange(tree.depth) if label is ClassLabel.NO else None
        answers = [
            (_unsat_answer(c) if idx == unsat_at else _sat_answer(c)) for idx, c in enumerate(tree.conds)
        ]
    evidence = [_turn(cond, answer, rng) for cond, answer in zip(tree.conds, answers)]
    facts = [_fact(cond, answer) for cond, answer in zip(tree.conds, answers)]
    return _Draft(tree, rng.choice(tree.questions), _scenario_text(facts, rng), [], evidence, label.value)


def _emit_single_final(tree: _Tree, rng: random.Random, label: ClassLabel) -> _Draft:
    cond = tree.conds[0]
    answer = "Yes" if label is ClassLabel.YES else "No"
    return _Draft(tree, rng.choice(tree.questions), "", [_turn(cond, answer, rng)], [], label.value)


def _emit_stop_early(tree: _Tree, rng: random.Random, label: ClassLabel) -> _Draft:
    """Dialog that stopped mid-rule, leaving later conditions unasked."""
    stop = rng.randrange(1, tree.depth - 1)
    history = []
    for cond in tree.conds[:stop]:
        answer = _unsat_answer(cond) if label is ClassLabel.YES else _sat_answer(cond)
        history.append(_turn(cond, answer, rng))
    cond = tree.conds[stop]
    history.append(_turn(cond, _sat_answer(cond) if label is ClassLabel.YES else _unsat_answer(cond), rng))
    return _Draft(tree, rng.choice(tree.questions), "", history, [], label.value)


def _emit_more_plain(tree: _Tree, rng: random.Random, k: int, fold: bool) -> _Draft:
    """Ask the first ``k`` conditions, gold answer asks condition ``k``."""
    turns = []
    for cond in tree.conds[:k]:
        if tree.kind == "cdisj":
            answer = _unsat_answer(cond)  # a satisfying answer would have ended a cued dialog
        elif tree.kind in ("cconj", "trap"):
            answer = _sat_answer(cond)
        else:
            answer = _sat_answer(cond) if rng.random() < 0.6 else _unsat_answer(cond)
        turns.append((cond, answer))
    history: list[DialogTurn] = []
    evidence: list[DialogTurn] = []
    facts: list[str] = []
    fold_count = rng.randrange(1, k + 1) if fold and k else 0
    folded = set(rng.sample(range(k), fold_count)) if fold_count else set()
    for idx, (cond, answer) in enumerate(turns):
        turn = _turn(cond, answer, rng)
        if idx in folded:
            evidence.append(turn)
            facts.append(_fact(cond, answer))
        else:
            history.append(turn)
    # early-turn gold follow-ups mostly use the canonical phrasing (the first
    # paraphrase); deeper dialogs drift toward freer rewordings
    next_cond = tree.conds[k]
    if k <= 1 and rng.random() < 0.7:
        gold = next_cond.asks[0]
    elif k >= 2 and len(next_cond.asks) > 1:
        gold = rng.choice(next_cond.asks[1:])
    else:
        gold = rng.choice(next_cond.asks)
    scenario = _scenario_text(facts, rng) if facts else ""
    return _Draft(tree, rng.choice(tree.questions), scenario, history, evidence, gold)


def _emit_more_trap(tree: _Tree, rng: random.Random) -> _Draft:
    """Scenario text that lexically swallows the condition left to ask."""
    first, middle, last = tree.conds[0], tree.conds[1:-1], tree.conds[-1]
    answer = _sat_answer(first)
    folded = _turn(first, answer, rng)
    history = [_turn(cond, _sat_answer(cond), rng) for cond in middle]
    gold = rng.choice(last.asks)
    return _Draft(
        tree,
        rng.choice(tree.questions),
        _scenario_text([_fact(first, answer)], rng),
        history,
        [folded],
        gold,
    )


def _emit_irrelevant(tree: _Tree, rng: random.Random, with_scenario: bool) -> _Draft:
    scenario = ""
    if with_scenario:
        scenario = " ".join(rng.sample(_PERSONAS, rng.choice((1, 2))))
    return _Draft(tree, rng.choice(_OFF_TOPIC_QUESTIONS), scenario, [], [], "Irrelevant")


# --------------------------------------------------------------------------
# Strata tables: (emitter name, share) per class
# --------------------------------------------------------------------------

YES_STRATA: tuple[tuple[str, float], ...] = (
    ("decisive_last", 0.34),
    ("cued_first", 0.12),
    ("uniform", 0.01),
    ("folded_decider", 0.12),
    ("folded_all_cued", 0.20),
    ("folded_all_uncued", 0.05),
    ("single_final", 0.06),
    ("stop_early", 0.10),
)

NO_STRATA: tuple[tuple[str, float], ...] = (
    ("decisive_last", 0.34),
    ("cued_first", 0.12),
    ("uniform", 0.01),
    ("folded_decider", 0.12),
    ("folded_all_uncued", 0.20),
    ("folded_all_cued", 0.05),
    ("single_final", 0.06),
    ("stop_early", 0.10),
)

MORE_STRATA: tuple[tuple[str, float], ...] = (
    ("more_k0", 0.34),
    ("more_k1", 0.22),
    ("more_k2", 0.16),
    ("more_k3", 0.10),
    ("more_trap", 0.18),
)

IRR_STRATA: tuple[tuple[str, float], ...] = (
    ("irr_empty", 0.90),
    ("irr_scenario", 0.10),
)

_MORE_FOLD_RATE = 0.3


@dataclass(frozen=True)
class SplitSpec:
    """Recipe for one corpus split."""

    name: str
    seed: int
    class_counts: dict[ClassLabel, int] = field(default_factory=dict)
    tree_count: int = 460
    depth_weights: dict[int, float] = field(
        default_factory=lambda: {2: 0.30, 3: 0.40, 4: 0.30}
    )

    @property
    def size(self) -> int:
        return sum(self.class_counts.values())


TRAIN_SPEC = SplitSpec(
    name="train",
    seed=2024,
    class_counts={
        ClassLabel.IRRELEVANT: 1256,
        ClassLabel.YES: 6773,
        ClassLabel.NO: 7057,
        ClassLabel.MORE: 6804,
    },
)

DEV_SPEC = SplitSpec(
    name="dev",
    seed=7171,
    class_counts={
        ClassLabel.IRRELEVANT: 130,
        ClassLabel.YES: 702,
        ClassLabel.NO: 732,
        ClassLabel.MORE: 706,
    },
    tree_count=90,
    depth_weights={2: 0.20, 3: 0.40, 4: 0.40},
)

_TREE_KIND_WEIGHTS = {
    "udisj": 0.22,
    "uconj": 0.22,
    "cdisj": 0.16,
    "cconj": 0.16,
    "trap": 0.14,
    "single": 0.10,
}


def _stratum_counts(strata: Sequence[tuple[str, float]], total: int) -> dict[str, int]:
    """Largest-remainder rounding of share × total to integers summing to total."""
    raw = [(name, share * total) for name, share in strata]
    counts = {name: int(amount) for name, amount in raw}
    leftovers = sorted(raw, key=lambda item: item[1] - int(item[1]), reverse=True)
    short = total - sum(counts.values())
    for name, _ in leftovers[:short]:
        counts[name] += 1
    return counts


def _trees_for(trees: Sequence[_Tree], kinds: tuple[str, ...], min_depth: int = 1) -> list[_Tree]:
    out = [t for t in trees if t.kind in kinds and t.depth >= min_depth]
    if not out:
        raise RuntimeError(f"no trees of kind {kinds} with depth >= {min_depth}")
    return out


def _dispatch(stratum: str, trees: Sequence[_Tree], rng: random.Random, label: ClassLabel) -> _Draft:
    if stratum == "decisive_last":
        kind = "udisj" if label is ClassLabel.YES else "uconj"
        return _emit_decisive_last(rng.choice(_trees_for(trees, (kind,), 2)), rng, label)
    if stratum == "cued_first":
        kind = "cdisj" if label is ClassLabel.YES else "cconj"
        return _emit_cued_first(rng.choice(_trees_for(trees, (kind,))), rng, label)
    if stratum == "uniform":
        kind = "uconj" if label is ClassLabel.YES else "udisj"
        return _emit_uniform(rng.choice(_trees_for(trees, (kind,), 2)), rng, label)
    if stratum == "folded_decider":
        kind = "udisj" if label is ClassLabel.YES else "uconj"
        return _emit_folded_decider(rng.choice(_trees_for(trees, (kind,), 2)), rng, label)
    if stratum == "folded_all_cued":
        return _emit_folded_all(rng.choice(_trees_for(trees, ("cdisj",), 2)), rng, label)
    if stratum == "folded_all_uncued":
        kind = ("uconj", "udisj") if label is ClassLabel.YES else ("uconj",)
        return _emit_folded_all(rng.choice(_trees_for(trees, kind, 2)), rng, label)
    if stratum == "single_final":
        return _emit_single_final(rng.choice(_trees_for(trees, ("single",))), rng, label)
    if stratum == "stop_early":
        kind = "udisj" if label is ClassLabel.YES else "uconj"
        return _emit_stop_early(rng.choice(_trees_for(trees, (kind,), 3)), rng, label)
    if stratum.startswith("more_k"):
        k = int(stratum[-1])
        pool = _trees_for(trees, ("udisj", "uconj", "cdisj", "cconj", "single"), k + 1)
        fold = bool(k) and rng.random() < _MORE_FOLD_RATE
        return _emit_more_plain(rng.choice(pool), rng, k, fold)
    if stratum == "more_trap":
        return _emit_more_trap(rng.choice(_trees_for(trees, ("trap",), 3)), rng)
    if stratum == "irr_empty":
        return _emit_irrelevant(rng.choice(list(trees)), rng, with_scenario=False)
    if stratum == "irr_scenario":
        return _emit_irrelevant(rng.choice(list(trees)), rng, with_scenario=True)
    raise ValueError(f"unknown stratum {stratum!r}")


_CLASS_STRATA = {
    ClassLabel.YES: YES_STRATA,
    ClassLabel.NO: NO_STRATA,
    ClassLabel.MORE: MORE_STRATA,
    ClassLabel.IRRELEVANT: IRR_STRATA,
}


def generate_split(spec: SplitSpec) -> list[Instance]:
    """Generate one deterministic corpus split per the spec's recipe."""
    digest = hashlib.sha256(f"{spec.seed}|{spec.name}".encode("utf-8")).digest()
    rng = random.Random(int.from_bytes(digest[:8], "big"))
    used_topics: set[str] = set()

    kinds: list[str] = []
    for kind, weight in _TREE_KIND_WEIGHTS.items():
        kinds.extend([kind] * max(1, round(weight * spec.tree_count)))
    kinds = kinds[: spec.tree_count]
    trees = [
        _make_tree(spec.name, idx, kind, rng, used_topics, spec.depth_weights)
        for idx, kind in enumerate(kinds)
    ]

    instances: list[Instance] = []
    seen: set[str] = set()
    for label in (ClassLabel.YES, ClassLabel.NO, ClassLabel.MORE, ClassLabel.IRRELEVANT):
        for stratum, want in _stratum_counts(_CLASS_STRATA[label], spec.class_counts[label]).items():
            made = 0
            attempts = 0
            cap = 60 * want + 100
            while made < want:
                attempts += 1
                if attempts > cap:
                    raise RuntimeError(
                        f"could not fill stratum {stratum} for {label.value}: {made}/{want}"
                    )
                draft = _dispatch(stratum, trees, rng, label)
                instance = Instance(
                    utterance_id="pending",
                    tree_id=draft.tree.tree_id,
                    rule_text=draft.tree.rule_text,
                    question=draft.question,
                    scenario=draft.scenario,
                    history=draft.history,
                    evidence=draft.evidence,
                    gold_answer=draft.answer,
                )
                digest = content_hash(instance)
                if digest in seen:
                    continue
                seen.add(digest)
                made += 1
                instances.append(instance)

    rng.shuffle(instances)
    for index, instance in enumerate(instances):
        instance.utterance_id = f"{spec.name}-{index:05d}"
    return instances
