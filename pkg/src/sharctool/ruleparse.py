"""Segmentation of rule snippets into clauses and coarse logic typing.

Rule texts in the corpus are light markdown: ``##`` lines are section
headers, ``*`` lines are list items, and everything else is prose. The
parser cuts a snippet into clauses with exact character spans and then
classifies how the clauses combine (all required vs. any sufficient) from
cue words in the prose.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence

__all__ = [
    "Clause",
    "ClauseKind",
    "CueSet",
    "DEFAULT_CUES",
    "LogicType",
    "RuleStructure",
    "classify_logic",
    "load_cues",
    "parse_rule",
]


class ClauseKind(str, Enum):
    HEADER = "header"
    BULLET = "bullet"
    SENTENCE = "sentence"


class LogicType(str, Enum):
    CONJUNCTIVE = "Conjunctive"
    DISJUNCTIVE = "Disjunctive"
    SINGLE = "Single"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class Clause:
    """One clause of a rule with its exact location in the source snippet."""

    kind: ClauseKind
    text: str
    char_span: tuple[int, int]  # rule_text[start:end] == text
    ordinal: int  # 1-based, document order


@dataclass(frozen=True)
class CueSet:
    """Cue phrases that vote for a combination type during classification."""

    conjunctive: tuple[str, ...]
    disjunctive: tuple[str, ...]


DEFAULT_CUES = CueSet(
    conjunctive=("all of", "each of", "both", " and "),
    disjunctive=("any of", "either", "one of", " or "),
)


@dataclass
class RuleStructure:
    clauses: list[Clause] = field(default_factory=list)
    logic: LogicType = LogicType.UNKNOWN

    @property
    def non_header_clauses(self) -> list[Clause]:
        return [c for c in self.clauses if c.kind is not ClauseKind.HEADER]

    @property
    def bullets(self) -> list[Clause]:
        return [c for c in self.clauses if c.kind is ClauseKind.BULLET]


def load_cues(path: str | Path) -> CueSet:
    """Read a cue file: one ``conj <phrase>`` or ``disj <phrase>`` per line.

    Blank lines and lines starting with ``#`` are ignored. Phrases are matched
    case-insensitively as substrings of the rule's prose, so boundary spaces
    (as in ``" and "``) are significant and preserved.
    """
    conj: list[str] = []
    disj: list[str] = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tag, _, phrase = raw.partition(" ")
        if tag not in ("conj", "disj") or not phrase:
            raise ValueError(f"{path}:{lineno}: expected 'conj <phrase>' or 'disj <phrase>', got {raw!r}")
        (conj if tag == "conj" else disj).append(phrase.lower())
    return CueSet(conjunctive=tuple(conj), disjunctive=tuple(disj))


_SENTENCE_END_RE = re.compile(r"[.!?]+")


def _split_sentences(block: str, offset: int) -> list[tuple[str, int, int]]:
    """Split a prose block at sentence terminators, keeping source offsets."""
    pieces: list[tuple[str, int, int]] = []
    cursor = 0
    for match in _SENTENCE_END_RE.finditer(block):
        pieces.append((block[cursor : match.end()], cursor, match.end()))
        cursor = match.end()
    if cursor < len(block):
        pieces.append((block[cursor:], cursor, len(block)))
    out = []
    for text, start, end in pieces:
        trimmed = text.strip()
        if not trimmed:
            continue
        lead = len(text) - len(text.lstrip())
        begin = offset + start + lead
        out.append((trimmed, begin, begin + len(trimmed)))
    return out


def classify_logic(clauses: Sequence[Clause], cues: CueSet = DEFAULT_CUES) -> LogicType:
    """Classify how a rule's clauses combine.

    Cue phrases are counted over the sentence prose only (headers and bullet
    items never vote). A majority of conjunctive cues gives ``Conjunctive``,
    of disjunctive cues ``Disjunctive``. On a tie, a bullet list introduced by
    "the following" defaults to ``Disjunctive`` — such lists enumerate
    independently qualifying items. Exactly one non-header clause is always
    ``Single``; anything still unresolved is ``Unknown``.
    """
    non_header = [c for c in clauses if c.kind is not ClauseKind.HEADER]
    if len(non_header) == 1:
        return LogicType.SINGLE
    if not non_header:
        return LogicType.UNKNOWN
    prose = " ".join(c.text.lower() for c in clauses if c.kind is ClauseKind.SENTENCE)
    conj_votes = sum(prose.count(cue.lower()) for cue in cues.conjunctive)
    disj_votes = sum(prose.count(cue.lower()) for cue in cues.disjunctive)
    if conj_votes > disj_votes:
        return LogicType.CONJUNCTIVE
    if disj_votes > conj_votes:
        return LogicType.DISJUNCTIVE
    has_bullets = any(c.kind is ClauseKind.BULLET for c in clauses)
    if has_bullets and "the following" in prose:
        return LogicType.DISJUNCTIVE
    return LogicType.UNKNOWN


def parse_rule(rule_text: str, cues: CueSet = DEFAULT_CUES) -> RuleStructure:
    """Cut a rule snippet into clauses and classify its logic.

    ``##`` lines become header clauses, ``*`` lines bullet clauses, and runs
    of prose lines are split into sentence clauses at ``.!?``. Empty lines
    only separate blocks. Every clause's ``char_span`` indexes the original
    snippet exactly, spans are disjoint and ascending, and ordinals run
    contiguously from 1 in document order.
    """
    clauses: list[Clause] = []
    prose_start: Optional[int] = None
    prose_end = 0

    def flush_prose() -> None:
        nonlocal prose_start
        if prose_start is None:
            return
        block = rule_text[prose_start:prose_end]
        for text, start, end in _split_sentences(block, prose_start):
            clauses.append(Clause(ClauseKind.SENTENCE, text, (start, end), 0))
        prose_start = None

    offset = 0
    for raw_line in rule_text.splitlines(keepends=True):
        line = raw_line.rstrip("\r\n")
        stripped = line.strip()
        if not stripped:
            flush_prose()
        elif stripped.startswith("#"):
            flush_prose()
            text = stripped.lstrip("#").strip()
            if text:
                start = offset + line.index(text)
                clauses.append(Clause(ClauseKind.HEADER, text, (start, start + len(text)), 0))
        elif stripped.startswith("*"):
            flush_prose()
            text = stripped[1:].strip()
            if text:
                start = offset + line.index(text, line.index("*") + 1)
                clauses.append(Clause(ClauseKind.BULLET, text, (start, start + len(text)), 0))
        else:
            if prose_start is None:
                prose_start = offset + (len(line) - len(line.lstrip()))
            prose_end = offset + len(line)
        offset += len(raw_line)
    flush_prose()

    clauses = [
        Clause(c.kind, c.text, c.char_span, ordinal)
        for ordinal, c in enumerate(sorted(clauses, key=lambda c: c.char_span[0]), start=1)
    ]
    return RuleStructure(clauses=clauses, logic=classify_logic(clauses, cues))
