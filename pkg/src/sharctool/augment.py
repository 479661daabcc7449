"""Corpus augmentation: rule-replaced Irrelevant instances, history shuffles,
and class balancing toward configured marginals.

Two synthesis moves break the dataset's spurious clues. Replacing the rule
under an instance with a non-empty scenario yields a new Irrelevant instance
whose context is *not* empty, and reordering a dialog history detaches the
gold answer from whatever was answered last. Generation is deterministic:
every parent instance owns an RNG stream derived from (master seed,
parent id), so outputs do not depend on scheduling.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import random
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .corpus import (
    ClassLabel,
    Instance,
    content_hash,
    derive_label,
    dumps_record,
    instance_to_record,
    record_to_instance,
)

__all__ = [
    "AugmentConfig",
    "AugmentManifest",
    "AugmentedInstance",
    "DEFAULT_CLASS_TARGETS",
    "Provenance",
    "build_augmented_corpus",
    "load_augmented",
    "make_irrelevant_instance",
    "shuffle_history_instance",
    "write_augmented",
]


DEFAULT_CLASS_TARGETS: dict[ClassLabel, float] = {
    ClassLabel.IRRELEVANT: 22.41,
    ClassLabel.YES: 27.09,
    ClassLabel.NO: 28.11,
    ClassLabel.MORE: 22.39,
}

DEFAULT_TOTAL_TARGET = 31506


class Provenance(str, Enum):
    ORIGINAL = "Original"
    RULE_REPLACED = "RuleReplaced"
    HISTORY_SHUFFLED = "HistoryShuffled"


@dataclass
class AugmentConfig:
    """Settings for one augmentation run. The seed is always explicit."""

    seed: int
    total_target: int = DEFAULT_TOTAL_TARGET
    class_targets: dict[ClassLabel, float] = field(default_factory=lambda: dict(DEFAULT_CLASS_TARGETS))
    max_permutations_per_instance: int = 3
    keep_original: bool = True
    drop_replaced_history: bool = False

    def validate(self, corpus_size: int) -> None:
        total_pct = sum(self.class_targets.values())
        if abs(total_pct - 100.0) > 0.05:
            raise ValueError(f"class targets sum to {total_pct}, expected 100 ± 0.05")
        if set(self.class_targets) != set(ClassLabel):
            raise ValueError("class targets must cover exactly the four classes")
        if self.keep_original and self.total_target < corpus_size:
            raise ValueError(
                f"total_target {self.total_target} is below the corpus size {corpus_size} "
                "while keep_original is set"
            )
        if self.max_permutations_per_instance < 1:
            raise ValueError("max_permutations_per_instance must be at least 1")

    def target_counts(self) -> dict[ClassLabel, int]:
        return {label: round(pct / 100.0 * self.total_target) for label, pct in self.class_targets.items()}


@dataclass
class AugmentedInstance:
    """An output instance plus where it came from."""

    instance: Instance
    provenance: Provenance
    parent_id: str
    permutation: Optional[list[int]] = None  # new_history[i] == parent_history[permutation[i]]

    def to_record(self) -> dict:
        record = instance_to_record(self.instance)
        record["provenance"] = self.provenance.value
        record["parent_id"] = self.parent_id
        record["permutation"] = self.permutation
        return record


def _derived_id(parent_id: str, provenance: Provenance, detail: str, seed: int) -> str:
    payload = f"{parent_id}|{provenance.value}|{detail}|{seed}"
    return "aug-" + hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def make_irrelevant_instance(
    source: Instance,
    rule_pool: Sequence[Instance],
    rng: random.Random,
    *,
    seed: int = 0,
    drop_history: bool = False,
) -> AugmentedInstance:
    """Clone ``source`` under a foreign rule and relabel it Irrelevant.

    The replacement rule is drawn uniformly from the pool instances whose
    tree differs from the source's. The scenario (which must be non-empty)
    and, by default, the history are kept: the point is an Irrelevant
    instance whose context is not empty.
    """
    if not source.scenario.strip():
        raise ValueError(f"{source.utterance_id}: rule replacement requires a non-empty scenario")
    donor: Optional[Instance] = None
    if rule_pool:
        for _ in range(64):
            candidate = rule_pool[rng.randrange(len(rule_pool))]
            if candidate.tree_id != source.tree_id:
                donor = candidate
                break
    if donor is None:
        different = [p for p in rule_pool if p.tree_id != source.tree_id]
        if not different:
            raise ValueError(f"{source.utterance_id}: rule pool holds no instance with a different tree_id")
        donor = different[rng.randrange(len(different))]
    instance = Instance(
        utterance_id=_derived_id(source.utterance_id, Provenance.RULE_REPLACED, donor.tree_id, seed),
        tree_id=donor.tree_id,
        rule_text=donor.rule_text,
        question=source.question,
        scenario=source.scenario,
        history=[] if drop_history else list(source.history),
        evidence=list(source.evidence),
        gold_answer=ClassLabel.IRRELEVANT.value,
    )
    return AugmentedInstance(
        instance=instance,
        provenance=Provenance.RULE_REPLACED,
        parent_id=source.utterance_id,
    )


def _has_distinct_reordering(history: Sequence) -> bool:
    return len(history) >= 2 and len(set(history)) > 1


def shuffle_history_instance(source: Instance, rng: random.Random, *, seed: int = 0) -> AugmentedInstance:
    """Clone ``source`` with its history reordered; everything else is kept.

    The reordering is uniform over the orderings that differ from the
    original sequence (for histories with duplicate turns each distinct
    ordering corresponds to equally many index permutations, so sampling
    distinct orderings and sampling non-identity permutations agree). The
    gold answer is preserved: the answered-question multiset is unchanged.
    """
    history = tuple(source.history)
    n = len(history)
    if n < 2:
        raise ValueError(f"{source.utterance_id}: need at least 2 history turns to shuffle")
    if len(set(history)) == 1:
        raise ValueError(f"{source.utterance_id}: every reordering equals the original history")
    if n <= 7:
        orderings: dict[tuple, tuple[int, ...]] = {}
        for perm in itertools.permutations(range(n)):
            seq = tuple(history[i] for i in perm)
            if seq != history and seq not in orderings:
                orderings[seq] = perm
        sequence, perm = list(orderings.items())[rng.randrange(len(orderings))]
    else:
        indices = list(range(n))
        for _ in range(10000):
            rng.shuffle(indices)
            sequence = tuple(history[i] for i in indices)
            if sequence != history:
                perm = tuple(indices)
                break
        else:  # pragma: no cover - astronomically unlikely given the duplicate check
            raise ValueError(f"{source.utterance_id}: failed to sample a distinct reordering")
    detail = ",".join(map(str, perm))
    instance = Instance(
        utterance_id=_derived_id(source.utterance_id, Provenance.HISTORY_SHUFFLED, detail, seed),
        tree_id=source.tree_id,
        rule_text=source.rule_text,
        question=source.question,
        scenario=source.scenario,
        history=list(sequence),
        evidence=list(source.evidence),
        gold_answer=source.gold_answer,
    )
    return AugmentedInstance(
        instance=instance,
        provenance=Provenance.HISTORY_SHUFFLED,
        parent_id=source.utterance_id,
        permutation=list(perm),
    )


@dataclass
class AugmentManifest:
    """What one augmentation run did, class by class."""

    seed: int
    total_target: int
    keep_original: bool
    max_permutations_per_instance: int
    drop_replaced_history: bool
    class_targets: dict[str, float]
    target_counts: dict[str, int]
    original_counts: dict[str, int]
    generated_counts: dict[str, int]
    shortfalls: dict[str, int]
    achieved_counts: dict[str, int]
    achieved_marginals: dict[str, float]
    achieved_total: int
    provenance_counts: dict[str, int]
    duplicates_dropped: int
    original_duplicates_dropped: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _stream(seed: int, purpose: str, parent_id: str) -> random.Random:
    digest = hashlib.sha256(f"{seed}|{purpose}|{parent_id}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def build_augmented_corpus(
    corpus: Sequence[Instance], config: AugmentConfig
) -> tuple[list[AugmentedInstance], AugmentManifest]:
    """Balance a corpus toward the configured class marginals.

    Originals are kept (under ``keep_original``), per-class deficits against
    ``round(target% × total_target)`` are then filled — Irrelevant by rule
    replacement over sources with a non-empty scenario, Yes/No/More by
    history shuffles of same-class sources — walking the eligible parents
    round-robin so provenance spreads across rules. Candidates whose
    canonical content hash was already emitted never count toward a quota; a
    deficit that cannot be filled with unique variants is reported as a
    shortfall rather than papered over.
    """
    config.validate(len(corpus))
    out: list[AugmentedInstance] = []
    seen_hashes: set[str] = set()
    used_ids: set[str] = set()
    duplicates_dropped = 0
    original_duplicates = 0

    if config.keep_original:
        for instance in corpus:
            digest = content_hash(instance)
            if digest in seen_hashes:
                original_duplicates += 1
                continue
            seen_hashes.add(digest)
            used_ids.add(instance.utterance_id)
            out.append(
                AugmentedInstance(
                    instance=instance,
                    provenance=Provenance.ORIGINAL,
                    parent_id=instance.utterance_id,
                )
            )

    original_counts = {label: 0 for label in ClassLabel}
    for item in out:
        original_counts[item.instance.label] += 1
    target_counts = config.target_counts()
    deficits = {label: max(0, target_counts[label] - original_counts[label]) for label in ClassLabel}
    generated = {label: 0 for label in ClassLabel}

    def admit(candidate: AugmentedInstance, label: ClassLabel) -> bool:
        nonlocal duplicates_dropped
        digest = content_hash(candidate.instance)
        if digest in seen_hashes:
            duplicates_dropped += 1
            return False
        if candidate.instance.utterance_id in used_ids:  # pragma: no cover - hash ids collide only by data quirk
            candidate.instance.utterance_id += "-dup"
        seen_hashes.add(digest)
        used_ids.add(candidate.instance.utterance_id)
        out.append(candidate)
        generated[label] += 1
        return True

    max_passes = 64

    # Irrelevant deficit: rule replacement over sources with a non-empty scenario.
    need = deficits[ClassLabel.IRRELEVANT]
    if need:
        eligible = [inst for inst in corpus if inst.scenario.strip()]
        streams = {p.utterance_id: _stream(config.seed, "rule-replace", p.utterance_id) for p in eligible}
        for _ in range(max_passes):
            if generated[ClassLabel.IRRELEVANT] >= need or not eligible:
                break
            progress = False
            for parent in eligible:
                if generated[ClassLabel.IRRELEVANT] >= need:
                    break
                try:
                    candidate = make_irrelevant_instance(
                        parent,
                        corpus,
                        streams[parent.utterance_id],
                        seed=config.seed,
                        drop_history=config.drop_replaced_history,
                    )
                except ValueError:
                    continue
                # A duplicate draw is still progress: the parent's stream moved,
                # so the next pass can draw a donor we have not emitted yet.
                progress = True
                admit(candidate, ClassLabel.IRRELEVANT)
            if not progress:
                break

    # Yes / No / More deficits: history shuffles of same-class sources.
    for label in (ClassLabel.YES, ClassLabel.NO, ClassLabel.MORE):
        need = deficits[label]
        if not need:
            continue
        eligible = [
            inst for inst in corpus if inst.label is label and _has_distinct_reordering(inst.history)
        ]
        if not eligible:
            continue
        streams = {p.utterance_id: _stream(config.seed, f"shuffle-{label.value}", p.utterance_id) for p in eligible}
        emitted: dict[str, int] = {p.utterance_id: 0 for p in eligible}
        attempts: dict[str, int] = {p.utterance_id: 0 for p in eligible}
        attempt_cap = 4 * config.max_permutations_per_instance
        for _ in range(max_passes):
            if generated[label] >= need:
                break
            progress = False
            for parent in eligible:
                if generated[label] >= need:
                    break
                pid = parent.utterance_id
                if emitted[pid] >= config.max_permutations_per_instance or attempts[pid] >= attempt_cap:
                    continue
                attempts[pid] += 1
                progress = True  # the attempt cap guarantees this terminates
                candidate = shuffle_history_instance(parent, streams[pid], seed=config.seed)
                if admit(candidate, label):
                    emitted[pid] += 1
            if not progress:
                break

    achieved_counts = {label: 0 for label in ClassLabel}
    for item in out:
        achieved_counts[item.instance.label] += 1
    total = len(out)
    manifest = AugmentManifest(
        seed=config.seed,
        total_target=config.total_target,
        keep_original=config.keep_original,
        max_permutations_per_instance=config.max_permutations_per_instance,
        drop_replaced_history=config.drop_replaced_history,
        class_targets={label.value: pct for label, pct in config.class_targets.items()},
        target_counts={label.value: n for label, n in target_counts.items()},
        original_counts={label.value: n for label, n in original_counts.items()},
        generated_counts={label.value: n for label, n in generated.items()},
        shortfalls={label.value: max(0, deficits[label] - generated[label]) for label in ClassLabel},
        achieved_counts={label.value: n for label, n in achieved_counts.items()},
        achieved_marginals={
            label.value: (100.0 * n / total if total else 0.0) for label, n in achieved_counts.items()
        },
        achieved_total=total,
        provenance_counts={
            provenance.value: sum(1 for item in out if item.provenance is provenance)
            for provenance in Provenance
        },
        duplicates_dropped=duplicates_dropped,
        original_duplicates_dropped=original_duplicates,
    )
    return out, manifest


def write_augmented(path: str | Path, items: Iterable[AugmentedInstance]) -> None:
    """Write augmented instances as one-record-per-line JSON with provenance."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        for item in items:
            handle.write(dumps_record(item.to_record()))
            handle.write("\n")


def load_augmented(path: str | Path) -> list[AugmentedInstance]:
    """Read a file written by :func:`write_augmented`."""
    items: list[AugmentedInstance] = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        items.append(
            AugmentedInstance(
                instance=record_to_instance(record),
                provenance=Provenance(record.get("provenance", Provenance.ORIGINAL.value)),
                parent_id=record.get("parent_id", ""),
                permutation=record.get("permutation"),
            )
        )
    return items
