"""Difficulty scoring and sentence selection for the collection game.

A sentence group's difficulty is the sum, over every dialect label the
family knows, of that label's classification entropy within the group:
the mean prediction entropy of the group's variants carrying the label,
or the maximum entropy ln|K| when the label has no variant there yet.
Groups are then ranked family-wide into HARD (top 20%), NORMAL (middle
60%) and EASY (bottom 20%), and the quiz sampler draws unseen groups
from the requested tier, falling back to the nearest easier tier first.

Everything is in nats (natural log), with the 0·ln 0 := 0 convention.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from . import classifier
from .classifier import TrainedModel
from .errors import (
    EmptyInput,
    ModelLabelMismatch,
    NoGroups,
    NotNormalized,
    UnknownLabel,
)
from .store import CorpusView, ParallelGroup

EASY = "EASY"
NORMAL = "NORMAL"
HARD = "HARD"
TIERS = (EASY, NORMAL, HARD)

OBSERVED = "OBSERVED"
MAX_FALLBACK = "MAX_FALLBACK"

# requested tier -> preference order when tiers run dry (nearest easier first)
_FALLBACK = {
    EASY: (EASY, NORMAL, HARD),
    NORMAL: (NORMAL, EASY, HARD),
    HARD: (HARD, NORMAL, EASY),
}

# module indirection so the distribution source is swappable in tests
_predict = classifier.predict


def sentence_entropy(dist: Mapping[str, float]) -> float:
    """Shannon entropy of a prediction distribution, in nats."""
    total = sum(dist.values())
    if abs(total - 1.0) > 1e-6:
        raise NotNormalized(f"probabilities sum to {total}")
    return -sum(p * math.log(p) for p in dist.values() if p > 0.0)


@dataclass(frozen=True)
class ClassEntropy:
    label_id: str
    value: float
    basis: str  # OBSERVED | MAX_FALLBACK


@dataclass(frozen=True)
class DifficultyRecord:
    group_id: str
    score: float
    tier: Optional[str] = None
    scored_with: str = ""


def class_entropy(group: ParallelGroup, label_id: str, model: TrainedModel,
                  label_set: Iterable[str]) -> ClassEntropy:
    """Mean prediction entropy of the group's variants carrying the label,
    or exactly ln|K| when the label is unrepresented in the group."""
    labels = frozenset(label_set)
    if label_id not in labels:
        raise UnknownLabel(label_id)
    carrying = [v for v in group.variants if label_id in v.labels]
    if not carrying:
        return ClassEntropy(label_id, math.log(len(labels)), MAX_FALLBACK)
    mean = sum(sentence_entropy(_predict(model, v.text)) for v in carrying) \
        / len(carrying)
    return ClassEntropy(label_id, mean, OBSERVED)


def difficulty_score(group: ParallelGroup, model: TrainedModel,
                     label_set: Iterable[str]) -> float:
    labels = frozenset(label_set)
    return sum(class_entropy(group, k, model, labels).value for k in labels)


def assign_tiers(records: Sequence[DifficultyRecord]) -> list[DifficultyRecord]:
    """20/60/20 split by score: ceil(0.2·M) HARD, floor(0.2·M) EASY.

    Records come back sorted by (score desc, group_id asc), which is also
    the tie-break that decides borderline tier membership.
    """
    if not records:
        raise EmptyInput("no difficulty records")
    ordered = sorted(records, key=lambda rec: (-rec.score, rec.group_id))
    m = len(ordered)
    n_hard = math.ceil(0.2 * m)
    n_easy = math.floor(0.2 * m)
    out = []
    for i, rec in enumerate(ordered):
        if i < n_hard:
            tier = HARD
        elif i >= m - n_easy:
            tier = EASY
        else:
            tier = NORMAL
        out.append(replace(rec, tier=tier))
    return out


@dataclass(frozen=True)
class TierTable:
    records: tuple[DifficultyRecord, ...]   # sorted by (score desc, group_id)
    model_version: str

    def by_tier(self, tier: str) -> tuple[str, ...]:
        return tuple(r.group_id for r in self.records if r.tier == tier)

    def tier_of(self, group_id: str) -> Optional[str]:
        for rec in self.records:
            if rec.group_id == group_id:
                return rec.tier
        return None


def rescore_all(view: CorpusView, model: TrainedModel) -> TierTable:
    """Score every group and re-partition tiers with one model version."""
    if set(model.label_index) != set(view.label_set):
        raise ModelLabelMismatch(
            f"model knows {sorted(model.label_index)}, "
            f"corpus has {sorted(view.label_set)}")
    records = [
        DifficultyRecord(group_id=g.group_id,
                         score=difficulty_score(g, model, view.label_set),
                         scored_with=model.version)
        for g in view.groups
    ]
    if not records:
        return TierTable(records=(), model_version=model.version)
    return TierTable(records=tuple(assign_tiers(records)),
                     model_version=model.version)


def next_sentence(table: TierTable, seen: set[str], requested_tier: str,
                  rng: np.random.Generator) -> str:
    """Uniform seeded pick of an unseen group from the requested tier.

    Exhausted tiers fall back through ``_FALLBACK`` order; when every
    group was seen, repeats are allowed (same preference order).  The
    chosen group is added to ``seen``.
    """
    if requested_tier not in _FALLBACK:
        raise ValueError(f"unknown tier {requested_tier!r}")
    if not table.records:
        raise NoGroups("family has no scored groups")
    for tier in _FALLBACK[requested_tier]:
        fresh = sorted(set(table.by_tier(tier)) - seen)
        if fresh:
            choice = fresh[int(rng.integers(0, len(fresh)))]
            seen.add(choice)
            return choice
    for tier in _FALLBACK[requested_tier]:  # everything seen: repeats allowed
        groups = table.by_tier(tier)
        if groups:
            choice = groups[int(rng.integers(0, len(groups)))]
            seen.add(choice)
            return choice
    raise NoGroups("family has no scored groups")


@dataclass(frozen=True)
class RetrainPolicy:
    threshold: int = 50

    def __post_init__(self):
        if self.threshold < 1:
            raise ValueError("retrain threshold must be >= 1")


def should_retrain(accepted_since_last_train: int, policy: RetrainPolicy,
                   label_set_grew: bool = False) -> bool:
    return label_set_grew or accepted_since_last_train >= policy.threshold


def report_lines(table: TierTable) -> list[str]:
    """Difficulty report rows: one JSON object per group."""
    return [
        json.dumps({"group_id": r.group_id, "score": r.score, "tier": r.tier,
                    "model_version": r.scored_with}, sort_keys=True)
        for r in table.records
    ]
