"""Scoring: classification accuracy and generation BLEU.

The classification side maps every free-text output onto the four classes
and reports micro accuracy plus macro-averaged per-class recall. The
generation side scores predicted follow-up questions against gold ones with
corpus-level BLEU over instances whose gold answer is a follow-up; a
prediction that is actually a class word still enters the pool literally
(and scores near zero), so dodging follow-ups is not free.

This scorer is self-contained and is not bit-compatible with any official
ShARC scoring script; the deviations are spelled out in
:data:`SCORING_NOTES` and repeated in every report.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .corpus import ClassLabel, Instance, derive_label, tokenize

__all__ = [
    "SCORING_NOTES",
    "EvalReport",
    "bleu",
    "combined_metric",
    "confusion_matrix",
    "evaluate",
    "load_report",
    "macro_accuracy",
    "micro_accuracy",
    "per_class_accuracy",
    "render_report",
    "write_report",
]

LABEL_ORDER = (ClassLabel.YES, ClassLabel.NO, ClassLabel.IRRELEVANT, ClassLabel.MORE)

SCORING_NOTES = (
    "classes derived from output text: exact class word (case-insensitive) or else More",
    "BLEU is corpus-level: n-gram counts pooled over all pairs, geometric mean, brevity penalty",
    "BLEU tokens are lowercased surface tokens incl. punctuation; no smoothing",
    "orders with an empty pooled candidate count are dropped from the geometric mean",
    "macro accuracy averages per-class recall over classes present in the gold set",
    "combined = macro/100 * BLEU-4; undefined (null) when the gold set has no follow-ups",
)


# --------------------------------------------------------------------------
# Classification
# --------------------------------------------------------------------------


def confusion_matrix(
    gold: Sequence[Instance], predictions: Mapping[str, str]
) -> dict[ClassLabel, dict[ClassLabel, int]]:
    """4x4 gold-by-predicted count matrix.

    Raises ``ValueError`` unless the prediction ids are exactly the gold ids.
    """
    gold_ids = {inst.utterance_id for inst in gold}
    if len(gold_ids) != len(gold):
        raise ValueError("gold corpus contains duplicate utterance ids")
    missing = gold_ids - predictions.keys()
    extra = predictions.keys() - gold_ids
    if missing:
        raise ValueError(f"predictions missing {len(missing)} ids (e.g. {sorted(missing)[:3]})")
    if extra:
        raise ValueError(f"predictions contain {len(extra)} unknown ids (e.g. {sorted(extra)[:3]})")
    matrix = {g: {p: 0 for p in LABEL_ORDER} for g in LABEL_ORDER}
    for instance in gold:
        matrix[instance.label][derive_label(predictions[instance.utterance_id])] += 1
    return matrix


def micro_accuracy(matrix: Mapping[ClassLabel, Mapping[ClassLabel, int]]) -> float:
    total = sum(sum(row.values()) for row in matrix.values())
    if not total:
        raise ValueError("empty confusion matrix")
    correct = sum(matrix[label][label] for label in matrix)
    return 100.0 * correct / total


def per_class_accuracy(
    matrix: Mapping[ClassLabel, Mapping[ClassLabel, int]]
) -> dict[ClassLabel, Optional[float]]:
    """Per-class recall in percent; None for classes absent from the gold set."""
    out: dict[ClassLabel, Optional[float]] = {}
    for label in LABEL_ORDER:
        row_total = sum(matrix[label].values())
        out[label] = 100.0 * matrix[label][label] / row_total if row_total else None
    return out


def macro_accuracy(matrix: Mapping[ClassLabel, Mapping[ClassLabel, int]]) -> float:
    recalls = [r for r in per_class_accuracy(matrix).values() if r is not None]
    if not recalls:
        raise ValueError("empty confusion matrix")
    return sum(recalls) / len(recalls)


# --------------------------------------------------------------------------
# BLEU
# --------------------------------------------------------------------------


def _bleu_tokens(text: str) -> list[str]:
    return [token.surface.lower() for token in tokenize(text).tokens]


def _ngram_counts(tokens: Sequence[str], order: int) -> Counter:
    return Counter(tuple(tokens[i : i + order]) for i in range(len(tokens) - order + 1))


def bleu(
    candidates_and_references: Sequence[tuple[str, str]],
    max_order: int = 4,
    *,
    sentence_average: bool = False,
) -> Optional[float]:
    """Corpus-level BLEU in [0, 100]; None when the pair set is empty.

    Modified n-gram precisions are pooled over all pairs and combined by a
    geometric mean with equal weights, times the brevity penalty
    ``exp(min(0, 1 - ref_len/cand_len))``. Orders whose pooled candidate
    count is zero carry no signal and are excluded from the mean, so a
    corpus of exact matches scores 100 even when every pair is shorter than
    ``max_order``. A zero precision at any contributing order gives 0.

    ``sentence_average`` instead scores each pair alone and returns the
    arithmetic mean — useful for diagnostics, never for headline numbers.
    """
    if max_order < 1:
        raise ValueError("max_order must be >= 1")
    if not candidates_and_references:
        return None
    if sentence_average:
        scores = [bleu([pair], max_order) for pair in candidates_and_references]
        return sum(scores) / len(scores)

    matches = [0] * max_order
    totals = [0] * max_order
    cand_len = 0
    ref_len = 0
    for candidate_text, reference_text in candidates_and_references:
        candidate = _bleu_tokens(candidate_text)
        reference = _bleu_tokens(reference_text)
        cand_len += len(candidate)
        ref_len += len(reference)
        for order in range(1, max_order + 1):
            cand_ngrams = _ngram_counts(candidate, order)
            if not cand_ngrams:
                continue
            ref_ngrams = _ngram_counts(reference, order)
            totals[order - 1] += sum(cand_ngrams.values())
            matches[order - 1] += sum(min(count, ref_ngrams[gram]) for gram, count in cand_ngrams.items())

    if cand_len == 0:
        return 0.0
    log_precisions = []
    for match, total in zip(matches, totals):
        if total == 0:
            continue  # vacuous order: no candidate was long enough
        if match == 0:
            return 0.0
        log_precisions.append(math.log(match / total))
    if not log_precisions:
        return 0.0
    brevity = math.exp(min(0.0, 1.0 - ref_len / cand_len))
    return 100.0 * brevity * math.exp(sum(log_precisions) / len(log_precisions))


def combined_metric(macro: Optional[float], bleu4: Optional[float]) -> Optional[float]:
    """Scalar for model selection: macro accuracy (as a fraction) times BLEU-4."""
    if macro is None or bleu4 is None:
        return None
    return macro / 100.0 * bleu4


# --------------------------------------------------------------------------
# Reports
# --------------------------------------------------------------------------


@dataclass
class EvalReport:
    micro_accuracy: float
    macro_accuracy: float
    per_class_accuracy: dict[str, Optional[float]]
    bleu1: Optional[float]
    bleu4: Optional[float]
    combined: Optional[float]
    bleu_instance_count: int
    instance_count: int
    confusion: dict[str, dict[str, int]]
    notes: tuple[str, ...] = SCORING_NOTES
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "notes": list(self.notes),
            "instance_count": self.instance_count,
            "micro_accuracy": self.micro_accuracy,
            "macro_accuracy": self.macro_accuracy,
            "per_class_accuracy": self.per_class_accuracy,
            "bleu1": self.bleu1,
            "bleu4": self.bleu4,
            "combined": self.combined,
            "bleu_instance_count": self.bleu_instance_count,
            "confusion": self.confusion,
            **({"extras": self.extras} if self.extras else {}),
        }


def evaluate(
    gold: Sequence[Instance],
    predictions: Mapping[str, str],
    *,
    sentence_average_bleu: bool = False,
) -> EvalReport:
    """Score predictions (a {utterance_id: output text} map) against gold."""
    matrix = confusion_matrix(gold, predictions)
    pairs = [
        (predictions[inst.utterance_id], inst.gold_answer)
        for inst in gold
        if inst.label is ClassLabel.MORE
    ]
    bleu1 = bleu(pairs, max_order=1, sentence_average=sentence_average_bleu)
    bleu4 = bleu(pairs, max_order=4, sentence_average=sentence_average_bleu)
    macro = macro_accuracy(matrix)
    per_class = per_class_accuracy(matrix)
    return EvalReport(
        micro_accuracy=micro_accuracy(matrix),
        macro_accuracy=macro,
        per_class_accuracy={label.value: per_class[label] for label in LABEL_ORDER},
        bleu1=bleu1,
        bleu4=bleu4,
        combined=combined_metric(macro, bleu4),
        bleu_instance_count=len(pairs),
        instance_count=len(gold),
        confusion={g.value: {p.value: matrix[g][p] for p in LABEL_ORDER} for g in LABEL_ORDER},
    )


def _fmt(value: Optional[float]) -> str:
    return "--" if value is None else f"{value:6.2f}"


def render_report(report: EvalReport, title: str = "evaluation") -> str:
    """Human-readable summary table (percentages; '--' where undefined)."""
    lines = [f"== {title} ({report.instance_count} instances) =="]
    lines.append(
        f"micro {_fmt(report.micro_accuracy)}  macro {_fmt(report.macro_accuracy)}  "
        f"bleu1 {_fmt(report.bleu1)}  bleu4 {_fmt(report.bleu4)}  combined {_fmt(report.combined)}"
    )
    lines.append(f"bleu pool: {report.bleu_instance_count} follow-up instances")
    header = "gold \\ pred" + "".join(f"{label.value:>12}" for label in LABEL_ORDER)
    lines.append(header)
    for gold_label in LABEL_ORDER:
        row = report.confusion[gold_label.value]
        cells = "".join(f"{row[p.value]:>12}" for p in LABEL_ORDER)
        recall = report.per_class_accuracy[gold_label.value]
        lines.append(f"{gold_label.value:>11}{cells}   recall {_fmt(recall)}")
    return "\n".join(lines)


def write_report(path: str | Path, report: EvalReport) -> None:
    Path(path).write_text(json.dumps(report.to_dict(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def load_report(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
