"""Per-token marker supervision derived from dialog history and evidence.

Every rule token gets three labels: which answer (if any) a past follow-up
question about it received, which turn asked it, and whether scenario
evidence covers it. A fourth artifact, the gold span, locates the rule
region a gold follow-up question asks about. All of it rides on one
primitive: the longest common subsequence between the rule's tokens and an
utterance's tokens.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .corpus import ClassLabel, DialogTurn, Instance, TokenizedText, tokenize

__all__ = [
    "AnnotationStats",
    "BASIC_STOPWORDS",
    "MARKER_PHI",
    "MarkerAnnotation",
    "annotate_corpus",
    "annotate_history",
    "annotate_scenario",
    "extract_gold_span",
    "lcs_match",
    "lcs_pairs",
]

MARKER_PHI = "Phi"

# Function words for the optional stopword-excluded matching mode. The
# default mode matches everything; this list exists purely for ablation.
BASIC_STOPWORDS = frozenset(
    """a an and are be can could do does did for from get got has have had i if in is it my of on or
    should that the their they this to was were will would you your""".split()
)


def lcs_pairs(a: Sequence, b: Sequence) -> list[tuple[int, int]]:
    """One longest common subsequence of ``a`` and ``b`` as index pairs.

    Among all LCSs the one whose vector of ``a``-indices is lexicographically
    smallest is returned (leftmost match in ``a``), with ties on that vector
    broken toward the smallest ``b``-indices. Index pairs strictly increase
    in both coordinates.

    The walk below realizes that tie-break against a suffix-length table.
    At (i, j) the candidate columns for matching a[i] are exactly those j'
    where suffix[i][j'] still equals suffix[i][j] — skipping further would
    lose length. a[i] joins the LCS iff one of them matches with an optimal
    continuation, and the smallest such column is the right one: a smaller
    b-index only widens the choices downstream.
    """
    n, m = len(a), len(b)
    suffix = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        row = suffix[i]
        below = suffix[i + 1]
        ai = a[i]
        for j in range(m - 1, -1, -1):
            if ai == b[j]:
                row[j] = below[j + 1] + 1
            else:
                down = below[j]
                right = row[j + 1]
                row[j] = down if down >= right else right
    pairs: list[tuple[int, int]] = []
    i = j = 0
    while i < n and j < m and suffix[i][j]:
        length = suffix[i][j]
        column = j
        hit = -1
        while column < m and suffix[i][column] == length:
            if a[i] == b[column] and suffix[i + 1][column + 1] == length - 1:
                hit = column
                break
            column += 1
        if hit < 0:
            i += 1
        else:
            pairs.append((i, hit))
            i += 1
            j = hit + 1
    return pairs


def _matchable_indices(
    text: TokenizedText, use_normalized: bool, stopwords: frozenset[str]
) -> tuple[list[int], list[str]]:
    indices: list[int] = []
    symbols: list[str] = []
    for idx, token in enumerate(text.tokens):
        symbol = token.normalized if use_normalized else token.surface
        if use_normalized and not symbol:
            continue
        if token.normalized in stopwords:
            continue
        indices.append(idx)
        symbols.append(symbol)
    return indices, symbols


def lcs_match(
    rule: TokenizedText,
    utterance: TokenizedText,
    *,
    use_normalized: bool = True,
    stopwords: frozenset[str] = frozenset(),
) -> list[tuple[int, int]]:
    """LCS between a rule and an utterance as (rule_index, utterance_index) pairs.

    Matching runs over normalized token forms by default (raw surfaces when
    ``use_normalized`` is false); tokens whose normalized form is empty —
    pure punctuation and markdown markers — never participate. Returned
    indices address the *full* token sequences of both inputs.
    """
    rule_idx, rule_sym = _matchable_indices(rule, use_normalized, stopwords)
    utt_idx, utt_sym = _matchable_indices(utterance, use_normalized, stopwords)
    return [(rule_idx[i], utt_idx[j]) for i, j in lcs_pairs(rule_sym, utt_sym)]


def annotate_history(
    rule: TokenizedText,
    history: Sequence[DialogTurn],
    *,
    use_normalized: bool = True,
    stopwords: frozenset[str] = frozenset(),
) -> tuple[list[str], list[int]]:
    """Label each rule token with the answer and turn of the follow-up that asked it.

    Turns are applied in order 1..N, so on conflicts the latest turn wins.
    Unmatched tokens stay (Phi, 0); the pairing Phi ⇔ turn 0 is invariant.
    """
    markers = [MARKER_PHI] * len(rule.tokens)
    turns = [0] * len(rule.tokens)
    for turn_number, turn in enumerate(history, start=1):
        question = tokenize(turn.follow_up_question)
        for rule_token, _ in lcs_match(rule, question, use_normalized=use_normalized, stopwords=stopwords):
            markers[rule_token] = turn.follow_up_answer
            turns[rule_token] = turn_number
    return markers, turns


def annotate_scenario(
    rule: TokenizedText,
    evidence: Sequence[DialogTurn],
    *,
    use_normalized: bool = True,
    stopwords: frozenset[str] = frozenset(),
) -> list[str]:
    """Three-class evidence labels per rule token (Yes / No / Phi).

    Same mechanics as :func:`annotate_history`, driven by the evidence turns
    behind the scenario and without turn indices.
    """
    markers = [MARKER_PHI] * len(rule.tokens)
    for turn in evidence:
        question = tokenize(turn.follow_up_question)
        for rule_token, _ in lcs_match(rule, question, use_normalized=use_normalized, stopwords=stopwords):
            markers[rule_token] = turn.follow_up_answer
    return markers


def extract_gold_span(
    rule: TokenizedText,
    gold_followup: str,
    *,
    use_normalized: bool = True,
    stopwords: frozenset[str] = frozenset(),
) -> Optional[tuple[int, int]]:
    """Contiguous rule-token span [first, last] matched by a gold follow-up.

    Returns ``None`` when the LCS is empty; callers flag such instances.
    """
    pairs = lcs_match(rule, tokenize(gold_followup), use_normalized=use_normalized, stopwords=stopwords)
    if not pairs:
        return None
    return (pairs[0][0], pairs[-1][0])


@dataclass
class MarkerAnnotation:
    """Parallel per-token label arrays for one instance."""

    utterance_id: str
    tokens: list[str]
    history_marker: list[str]
    turn_index: list[int]
    scenario_marker: list[str]
    gold_span: Optional[tuple[int, int]] = None
    flags: list[str] = field(default_factory=list)

    def to_record(self) -> dict:
        return {
            "utterance_id": self.utterance_id,
            "tokens": self.tokens,
            "history_marker": self.history_marker,
            "turn_index": self.turn_index,
            "scenario_marker": self.scenario_marker,
            "gold_span": list(self.gold_span) if self.gold_span is not None else None,
            "flags": self.flags,
            "scenario_marker_source": "gold-evidence",
        }


@dataclass
class AnnotationStats:
    instances: int = 0
    more_instances: int = 0
    more_with_span: int = 0
    flag_counts: dict[str, int] = field(default_factory=dict)

    @property
    def span_coverage(self) -> Optional[float]:
        """Fraction of More-labeled instances whose gold span is non-empty."""
        if not self.more_instances:
            return None
        return self.more_with_span / self.more_instances

    def to_dict(self) -> dict:
        return {
            "instances": self.instances,
            "more_instances": self.more_instances,
            "more_with_span": self.more_with_span,
            "span_coverage": self.span_coverage,
            "flag_counts": dict(sorted(self.flag_counts.items())),
        }


def annotate_corpus(
    corpus: Sequence[Instance],
    *,
    use_normalized: bool = True,
    stopwords: frozenset[str] = frozenset(),
) -> tuple[list[MarkerAnnotation], AnnotationStats]:
    """Run all three annotators over a corpus.

    Gold spans are extracted only for More-labeled instances (the gold answer
    is a follow-up question there); instances whose span comes back empty are
    flagged rather than dropped.
    """
    annotations: list[MarkerAnnotation] = []
    stats = AnnotationStats()
    for instance in corpus:
        rule = tokenize(instance.rule_text)
        history_marker, turn_index = annotate_history(
            rule, instance.history, use_normalized=use_normalized, stopwords=stopwords
        )
        scenario_marker = annotate_scenario(
            rule, instance.evidence, use_normalized=use_normalized, stopwords=stopwords
        )
        gold_span = None
        flags: list[str] = []
        if instance.label is ClassLabel.MORE:
            stats.more_instances += 1
            gold_span = extract_gold_span(
                rule, instance.gold_answer, use_normalized=use_normalized, stopwords=stopwords
            )
            if gold_span is None:
                flags.append("empty_gold_span")
            else:
                stats.more_with_span += 1
        for flag in flags:
            stats.flag_counts[flag] = stats.flag_counts.get(flag, 0) + 1
        annotations.append(
            MarkerAnnotation(
                utterance_id=instance.utterance_id,
                tokens=rule.surfaces,
                history_marker=history_marker,
                turn_index=turn_index,
                scenario_marker=scenario_marker,
                gold_span=gold_span,
                flags=flags,
            )
        )
        stats.instances += 1
    return annotations, stats
