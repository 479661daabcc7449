"""A deterministic rule-based policy built to exploit the corpus clues.

The policy answers from surface signals only: an empty context with low
question/rule overlap means Irrelevant, a single decisive history answer
short-circuits cued conjunctive/disjunctive rules, uncovered clauses get a
templated follow-up while the turn budget lasts, and otherwise the last
follow-up answer is echoed. Every threshold is an exposed parameter so the
policy can be tuned by grid search and ablated.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .corpus import ClassLabel, Instance, TokenizedText, derive_label, dumps_record, tokenize
from .evaluate import evaluate
from .markers import BASIC_STOPWORDS, lcs_match
from .ruleparse import Clause, ClauseKind, CueSet, DEFAULT_CUES, LogicType, RuleStructure, parse_rule

__all__ = [
    "PolicyParams",
    "PolicyStats",
    "Prediction",
    "TuneResult",
    "generate_followup",
    "load_params",
    "load_predictions",
    "predict",
    "predict_corpus",
    "tune",
    "write_params",
    "write_predictions",
]


@dataclass(frozen=True)
class PolicyParams:
    """Thresholds of the rule-based policy."""

    tau_irr: float = 0.2  # Jaccard overlap below which an empty-context question is off-topic
    rho: float = 0.6  # LCS coverage at which a clause counts as asked
    rho_s: float = 0.6  # scenario coverage at which a clause counts as resolved (1.01 disables)
    l_max: int = 5  # stop asking follow-ups once the history reaches this many turns

    def to_dict(self) -> dict:
        return {"tau_irr": self.tau_irr, "rho": self.rho, "rho_s": self.rho_s, "l_max": self.l_max}


@dataclass(frozen=True)
class Prediction:
    utterance_id: str
    output: str
    predicted_class: ClassLabel
    asked_clause_ordinal: Optional[int] = None

    def to_record(self) -> dict:
        return {"utterance_id": self.utterance_id, "answer": self.output}


# --------------------------------------------------------------------------
# Follow-up templating
# --------------------------------------------------------------------------

_BULLET_MARKER_RE = re.compile(r"^[*\-•]+\s*")
_GERUND_RE = re.compile(r"^\w{3,}ing$")


def generate_followup(clause: Clause) -> str:
    """Turn a clause into a yes/no follow-up question.

    A verb phrase led by a gerund, bare ``be``, or ``to``-infinitive becomes
    "Are you ...?", a clause already containing the pronoun "you" becomes
    "Do ...?", and a bare noun phrase becomes "Do you get ...?". A leading
    "not" is dropped so the question asks the positive form.
    """
    if clause.kind is ClauseKind.HEADER:
        raise ValueError("header clauses cannot be asked as follow-ups")
    text = _BULLET_MARKER_RE.sub("", clause.text.strip()).strip().rstrip(".!?:;,").strip()
    if not text:
        raise ValueError("cannot build a follow-up from an empty clause")
    words = text.split()
    if words[0].lower() == "not" and len(words) > 1:
        words = words[1:]
        text = " ".join(words)
    first = words[0].lower()
    if _GERUND_RE.match(first):
        question = f"Are you {text}?"
    elif first in ("be", "to") and len(words) > 1:
        question = f"Are you {' '.join(words[1:])}?"
    elif any(token.normalized == "you" for token in tokenize(text).tokens):
        question = f"Do {text}?"
    else:
        question = f"Do you get {text}?"
    return question[0].upper() + question[1:]


# --------------------------------------------------------------------------
# Prediction
# --------------------------------------------------------------------------


def _content_tokens(text: TokenizedText) -> set[str]:
    return {t.normalized for t in text.tokens if t.normalized and t.normalized not in BASIC_STOPWORDS}


def _jaccard(a: set[str], b: set[str]) -> float:
    union = a | b
    if not union:
        return 0.0
    return len(a & b) / len(union)


def _is_lead_in(clause: Clause) -> bool:
    """Sentence clauses ending in a colon introduce a list; they are not conditions."""
    return clause.kind is ClauseKind.SENTENCE and clause.text.rstrip().endswith(":")


def _coverage(clause_tokens: TokenizedText, matchable: int, utterance: TokenizedText) -> float:
    if not matchable:
        return 1.0
    return len(lcs_match(clause_tokens, utterance)) / matchable


@dataclass
class _Features:
    """Everything threshold-free that the decision steps consume."""

    utterance_id: str
    empty_context: bool
    question_overlap: float
    logic: LogicType
    answers: list[str]
    n_h: int
    clauses: list[Clause]  # askable clauses in document order
    asked_fraction: dict[int, float]  # ordinal -> best LCS coverage by a history question
    scenario_fraction: dict[int, float]  # ordinal -> LCS coverage by the scenario
    followups: dict[int, str]  # ordinal -> templated question


def _features(instance: Instance, structure: RuleStructure) -> _Features:
    rule_tokens = tokenize(instance.rule_text)
    question_tokens = tokenize(instance.question)
    scenario_tokens = tokenize(instance.scenario)
    history_tokens = [tokenize(turn.follow_up_question) for turn in instance.history]

    askable: list[Clause] = []
    asked_fraction: dict[int, float] = {}
    scenario_fraction: dict[int, float] = {}
    followups: dict[int, str] = {}
    for clause in structure.clauses:
        if clause.kind is ClauseKind.HEADER or _is_lead_in(clause):
            continue
        clause_tokens = tokenize(clause.text)
        matchable = sum(1 for t in clause_tokens.tokens if t.normalized)
        if not matchable:
            continue
        askable.append(clause)
        asked_fraction[clause.ordinal] = max(
            (_coverage(clause_tokens, matchable, q) for q in history_tokens), default=0.0
        )
        scenario_fraction[clause.ordinal] = (
            _coverage(clause_tokens, matchable, scenario_tokens) if instance.scenario.strip() else 0.0
        )
        followups[clause.ordinal] = generate_followup(clause)

    return _Features(
        utterance_id=instance.utterance_id,
        empty_context=instance.has_empty_context,
        question_overlap=_jaccard(_content_tokens(question_tokens), _content_tokens(rule_tokens)),
        logic=structure.logic,
        answers=[turn.follow_up_answer for turn in instance.history],
        n_h=len(instance.history),
        clauses=askable,
        asked_fraction=asked_fraction,
        scenario_fraction=scenario_fraction,
        followups=followups,
    )


_FALLBACK_OUTPUT = {
    LogicType.DISJUNCTIVE: "No",  # nothing satisfied any clause
    LogicType.CONJUNCTIVE: "Yes",  # nothing violated any clause
    LogicType.SINGLE: "Yes",
    LogicType.UNKNOWN: "Yes",
}


def _decide(features: _Features, params: PolicyParams) -> tuple[str, Optional[int], int]:
    """Apply the six policy steps; returns (output, asked ordinal, step fired)."""
    # (1) empty context + off-topic question
    if features.empty_context and features.question_overlap < params.tau_irr:
        return ClassLabel.IRRELEVANT.value, None, 1
    # (2) decisive answer under cued logic
    if features.logic is LogicType.DISJUNCTIVE and "Yes" in features.answers:
        return "Yes", None, 2
    if features.logic is LogicType.CONJUNCTIVE and "No" in features.answers:
        return "No", None, 2
    # (3)+(4) clause coverage, then a follow-up while the turn budget lasts
    if features.n_h < params.l_max:
        for clause in features.clauses:
            already_asked = features.asked_fraction[clause.ordinal] >= params.rho
            resolved = features.scenario_fraction[clause.ordinal] >= params.rho_s
            if not already_asked and not resolved:
                return features.followups[clause.ordinal], clause.ordinal, 4
    # (5) echo the last follow-up answer
    if features.answers:
        return features.answers[-1], None, 5
    # (6) fallback by logic type
    return _FALLBACK_OUTPUT[features.logic], None, 6


def predict(instance: Instance, structure: RuleStructure, params: PolicyParams = PolicyParams()) -> Prediction:
    """Predict the response for one instance. Total and deterministic."""
    output, ordinal, _ = _decide(_features(instance, structure), params)
    return Prediction(
        utterance_id=instance.utterance_id,
        output=output,
        predicted_class=derive_label(output),
        asked_clause_ordinal=ordinal,
    )


@dataclass
class PolicyStats:
    """Aggregate bookkeeping over one batch prediction run."""

    logic_counts: dict[str, int] = field(default_factory=dict)
    step_counts: dict[int, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "logic_counts": dict(sorted(self.logic_counts.items())),
            "step_counts": {str(k): v for k, v in sorted(self.step_counts.items())},
        }


def predict_corpus(
    corpus: Sequence[Instance],
    params: PolicyParams = PolicyParams(),
    cues: CueSet = DEFAULT_CUES,
) -> tuple[list[Prediction], PolicyStats]:
    """Predict every instance, parsing each distinct rule text once."""
    structures: dict[str, RuleStructure] = {}
    stats = PolicyStats()
    predictions: list[Prediction] = []
    for instance in corpus:
        structure = structures.get(instance.rule_text)
        if structure is None:
            structure = parse_rule(instance.rule_text, cues)
            structures[instance.rule_text] = structure
        output, ordinal, step = _decide(_features(instance, structure), params)
        stats.logic_counts[structure.logic.value] = stats.logic_counts.get(structure.logic.value, 0) + 1
        stats.step_counts[step] = stats.step_counts.get(step, 0) + 1
        predictions.append(
            Prediction(
                utterance_id=instance.utterance_id,
                output=output,
                predicted_class=derive_label(output),
                asked_clause_ordinal=ordinal,
            )
        )
    return predictions, stats


# --------------------------------------------------------------------------
# Tuning
# --------------------------------------------------------------------------

DEFAULT_GRID: dict[str, Sequence] = {
    "tau_irr": (0.1, 0.2, 0.3),
    "rho": (0.4, 0.6, 0.8),
    "rho_s": (0.4, 0.6, 1.01),
    "l_max": (3, 5, 8),
}


@dataclass
class TuneResult:
    best_params: PolicyParams
    best_combined: float
    instance_count: int
    trials: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "best_params": self.best_params.to_dict(),
            "best_combined": self.best_combined,
            "instance_count": self.instance_count,
            "trials": self.trials,
        }


def tune(
    corpus: Sequence[Instance],
    grid: Optional[Mapping[str, Sequence]] = None,
    cues: CueSet = DEFAULT_CUES,
) -> TuneResult:
    """Grid-search the policy thresholds, maximizing the combined metric.

    Features (coverage fractions, overlaps, templated follow-ups) are
    computed once; every grid point reuses them through the same decision
    path as :func:`predict`, so tuning cannot drift from live prediction.
    Ties keep the first grid point in iteration order.
    """
    grid = dict(DEFAULT_GRID if grid is None else grid)
    structures: dict[str, RuleStructure] = {}
    features: list[_Features] = []
    for instance in corpus:
        structure = structures.get(instance.rule_text)
        if structure is None:
            structure = parse_rule(instance.rule_text, cues)
            structures[instance.rule_text] = structure
        features.append(_features(instance, structure))

    names = list(grid)
    best: Optional[PolicyParams] = None
    best_score = float("-inf")
    trials: list[dict] = []
    for values in itertools.product(*(grid[name] for name in names)):
        params = replace(PolicyParams(), **dict(zip(names, values)))
        outputs = {f.utterance_id: _decide(f, params)[0] for f in features}
        report = evaluate(corpus, outputs)
        score = report.combined if report.combined is not None else -1.0
        trials.append({"params": params.to_dict(), "combined": score, "micro": report.micro_accuracy})
        if score > best_score:
            best = params
            best_score = score
    assert best is not None, "empty parameter grid"
    return TuneResult(
        best_params=best,
        best_combined=best_score,
        instance_count=len(corpus),
        trials=trials,
    )


# --------------------------------------------------------------------------
# Serialization
# --------------------------------------------------------------------------


def write_predictions(path: str | Path, predictions: Iterable[Prediction]) -> None:
    with Path(path).open("w", encoding="utf-8") as handle:
        for prediction in predictions:
            handle.write(dumps_record(prediction.to_record()))
            handle.write("\n")


def load_predictions(path: str | Path) -> dict[str, str]:
    """Read a predictions file into a {utterance_id: answer} map."""
    outputs: dict[str, str] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        outputs[record["utterance_id"]] = record["answer"]
    return outputs


def write_params(path: str | Path, params: PolicyParams) -> None:
    Path(path).write_text(json.dumps(params.to_dict(), indent=2) + "\n", encoding="utf-8")


def load_params(path: str | Path) -> PolicyParams:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return PolicyParams(**data)
