"""Game session state machine: quiz/review loop, match rounds, difficulty.

Sessions progress QUIZ → REVIEW → QUIZ … (familiar speakers) or play
MATCH rounds (everyone else).  Confirming a prediction raises the
difficulty one step (capped at HARD); corrections never do.  All corpus
effects go through the store's event log; the engine never mutates
dialect names or affiliations — only regions, via recorded geo edits.

Model and tier-table lookups are injected as callables so the serving
layer can swap retrained models atomically without the engine noticing.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from . import geo, selection
from .classifier import TrainedModel, predict
from .errors import (
    AlreadyAnswered,
    EmptyText,
    InsufficientData,
    InvalidPayload,
    NoOpenTurn,
    TurnAlreadyOpen,
    UnknownDivision,
    UnknownLabel,
    UnknownSession,
    WrongStage,
)
from .geo import HexCell
from .selection import EASY, HARD, NORMAL, TierTable
from .store import CorpusStore, normalize_text

QUIZ = "QUIZ"
MATCH = "MATCH"
REVIEW = "REVIEW"
DONE = "DONE"

_LEVELS = (EASY, NORMAL, HARD)

DEFAULT_TAU = 0.3
DEFAULT_IDLE_TIMEOUT_S = 30 * 60.0


@dataclass
class QuizTurn:
    group_id: str
    standard_text: str
    tier_at_issue: str
    submitted_text: Optional[str] = None
    prediction: Optional[dict[str, float]] = None
    predicted_labels: Optional[list[str]] = None


@dataclass
class MatchItem:
    variant_id: str
    text: str
    reference_divisions: frozenset[str]
    answer: Optional[frozenset[str]] = None
    score: Optional[float] = None


@dataclass
class MatchRound:
    items: list[MatchItem]

    @property
    def complete(self) -> bool:
        return all(item.answer is not None for item in self.items)


@dataclass
class Session:
    session_id: str
    family_id: str
    path: str                      # QUIZ | MATCH
    stage: str                     # QUIZ | REVIEW | MATCH | DONE
    level: str = EASY
    seen_groups: set[str] = field(default_factory=set)
    turn: Optional[QuizTurn] = None
    match_round: Optional[MatchRound] = None
    rounds_played: int = 0
    rng: np.random.Generator = field(default_factory=np.random.default_rng)
    last_activity: float = 0.0


def jaccard(a: Iterable[str], b: Iterable[str]) -> float:
    sa, sb = set(a), set(b)
    union = sa | sb
    if not union:
        return 0.0
    return len(sa & sb) / len(union)


class GameEngine:
    def __init__(self, store: CorpusStore,
                 model_for: Callable[[str], TrainedModel],
                 table_for: Callable[[str], TierTable], *,
                 tau: float = DEFAULT_TAU,
                 idle_timeout_s: float = DEFAULT_IDLE_TIMEOUT_S,
                 rng_seed: Optional[int] = None,
                 clock: Callable[[], float] = time.monotonic):
        self._store = store
        self._model_for = model_for
        self._table_for = table_for
        self._tau = tau
        self._idle_timeout = idle_timeout_s
        self._clock = clock
        self._seeds = np.random.SeedSequence(rng_seed)
        self._token_rng = np.random.default_rng(self._seeds.spawn(1)[0])
        self._sessions: dict[str, Session] = {}
        self._counter = 0

    # -- session lifecycle ------------------------------------------------------

    def start_session(self, family_id: str, familiar: bool) -> Session:
        self._store.family(family_id)  # raises UnknownFamily
        self._counter += 1
        token = f"{family_id}-{self._counter:04d}-" \
                f"{int(self._token_rng.integers(0, 1 << 32)):08x}"
        session = Session(
            session_id=token,
            family_id=family_id,
            path=QUIZ if familiar else MATCH,
            stage=QUIZ if familiar else MATCH,
            level=EASY,
            rng=np.random.default_rng(self._seeds.spawn(1)[0]),
            last_activity=self._clock(),
        )
        self._sessions[token] = session
        self._store.register_session(token, family_id)
        return session

    def get_session(self, session_id: str) -> Session:
        session = self._sessions.get(session_id)
        if session is not None and \
                self._clock() - session.last_activity > self._idle_timeout:
            # idle sessions expire; any open turn or round is discarded
            session.stage = DONE
            del self._sessions[session_id]
            session = None
        if session is None:
            raise UnknownSession(session_id)
        session.last_activity = self._clock()
        return session

    def active_sessions(self) -> int:
        return len(self._sessions)

    # -- quiz path ----------------------------------------------------------------

    def begin_quiz_turn(self, session: Session) -> dict:
        if session.stage != QUIZ:
            raise WrongStage(f"stage is {session.stage}, need {QUIZ}")
        if session.turn is not None:
            raise TurnAlreadyOpen(session.session_id)
        table = self._table_for(session.family_id)
        group_id = selection.next_sentence(table, session.seen_groups,
                                           session.level, session.rng)
        group = self._store.group(group_id)
        tier = table.tier_of(group_id) or session.level
        session.turn = QuizTurn(group_id=group_id,
                                standard_text=group.standard_text,
                                tier_at_issue=tier)
        return {
            "group_id": group_id,
            "standard_text": group.standard_text,
            "tier": tier,
            "suggestion_seed_words": self.top_words(session.family_id, 20),
        }

    def submit_rewrite(self, session: Session, text: str) -> dict:
        if session.turn is None or session.stage != QUIZ:
            raise NoOpenTurn(session.session_id)
        text = normalize_text(text)
        if not text:
            raise EmptyText("rewrite")
        model = self._model_for(session.family_id)
        dist = predict(model, text)
        predicted = self._display_labels(dist)
        session.turn.submitted_text = text
        session.turn.prediction = dist
        session.turn.predicted_labels = predicted
        session.stage = REVIEW
        return {
            "prediction": dist,
            "predicted_labels": predicted,
            "region_payloads": self._region_payloads(session.family_id, predicted),
        }

    def _display_labels(self, dist: dict[str, float]) -> list[str]:
        """Top-1 plus everything at or above the display threshold."""
        ranked = sorted(dist.items(), key=lambda kv: (-kv[1], kv[0]))
        picked = [label for label, p in ranked if p >= self._tau]
        if not picked:
            picked = [ranked[0][0]]
        return picked

    def _region_payloads(self, family_id: str, labels: list[str]) -> list[dict]:
        family = self._store.family(family_id)
        registry = self._store.labels(family_id)
        payloads = []
        for label_id in labels:
            label = registry.get(label_id)
            if label is None:
                continue
            rings = geo.region_boundary(label.region, family)
            payloads.append({
                "label_id": label_id,
                "name": label.name,
                "boundary": [[[x, y] for x, y in ring] for ring in rings],
            })
        return payloads

    def review_confirm(self, session: Session) -> dict:
        if session.stage != REVIEW or session.turn is None:
            raise WrongStage(f"stage is {session.stage}, need {REVIEW}")
        turn = session.turn
        self._store.record_event(session.session_id, "CONFIRM", {
            "group_id": turn.group_id,
            "text": turn.submitted_text,
            "labels": sorted(turn.predicted_labels or []),
        })
        idx = _LEVELS.index(session.level)
        session.level = _LEVELS[min(idx + 1, len(_LEVELS) - 1)]
        session.stage = QUIZ
        session.turn = None
        session.rounds_played += 1
        return {"new_level": session.level}

    def review_correct(self, session: Session, *,
                       label_id: Optional[str] = None,
                       new_dialect_name: Optional[str] = None,
                       geo_add: Optional[set[HexCell]] = None,
                       geo_remove: Optional[set[HexCell]] = None) -> dict:
        if session.stage != REVIEW or session.turn is None:
            raise WrongStage(f"stage is {session.stage}, need {REVIEW}")
        if (label_id is None) == (new_dialect_name is None):
            raise InvalidPayload("choose an existing label or a new dialect name")
        family_id = session.family_id
        family = self._store.family(family_id)
        geo_add = geo_add or set()
        geo_remove = geo_remove or set()

        if label_id is not None:
            registry = self._store.labels(family_id)
            if label_id not in registry:
                raise UnknownLabel(label_id)
            base_region = registry[label_id].region
        else:
            base_region = geo.HexRegion(family_id, frozenset())
        if geo_add or geo_remove:
            # dry-run: surface OutOfBounds/ConflictingEdit before any event
            geo.edited_region(base_region, geo_add, geo_remove, family)

        if new_dialect_name is not None:
            label = self._store.create_dialect(family_id, new_dialect_name,
                                               session_id=session.session_id)
            label_id = label.label_id

        turn = session.turn
        self._store.record_event(session.session_id, "RELABEL", {
            "group_id": turn.group_id,
            "text": turn.submitted_text,
            "label": label_id,
        })
        if geo_add or geo_remove:
            self._store.apply_geo_edit(family_id, label_id, geo_add, geo_remove,
                                       session_id=session.session_id)
        session.stage = QUIZ
        session.turn = None
        session.rounds_played += 1
        return {"label_id": label_id, "level": session.level}

    def set_difficulty(self, session: Session, tier: str) -> Session:
        if session.stage != QUIZ:
            raise WrongStage(f"stage is {session.stage}, need {QUIZ}")
        if session.turn is not None:
            raise TurnAlreadyOpen(session.session_id)
        if tier not in _LEVELS:
            raise InvalidPayload(f"unknown difficulty {tier!r}")
        session.level = tier
        return session

    # -- word suggestions ------------------------------------------------------------

    def suggest_words(self, family_id: str, prefix: str, limit: int = 10) -> list[str]:
        self._store.family(family_id)
        prefix = normalize_text(prefix).casefold()
        if not prefix:
            raise EmptyText("prefix")
        counts = self._store.word_counts(family_id)
        matches = [(word, n) for word, n in counts.items()
                   if word.casefold().startswith(prefix)]
        matches.sort(key=lambda wn: (-wn[1], wn[0]))
        return [word for word, _ in matches[:limit]]

    def top_words(self, family_id: str, limit: int = 20) -> list[str]:
        counts = self._store.word_counts(family_id)
        ranked = sorted(counts.items(), key=lambda wn: (-wn[1], wn[0]))
        return [word for word, _ in ranked[:limit]]

    # -- match path --------------------------------------------------------------------

    def begin_match_round(self, session: Session) -> dict:
        if session.path != MATCH or session.stage != MATCH:
            raise WrongStage(f"session path is {session.path}, need {MATCH}")
        if session.match_round is not None and not session.match_round.complete:
            raise TurnAlreadyOpen(session.session_id)
        family = self._store.family(session.family_id)
        divisions = self._store.divisions(session.family_id)
        registry = self._store.labels(session.family_id)
        view = self._store.snapshot(session.family_id)

        label_divisions: dict[str, frozenset[str]] = {}
        for label_id, label in registry.items():
            label_divisions[label_id] = frozenset(
                geo.region_divisions(label.region, divisions, family))

        eligible: dict[str, list[tuple[str, str, frozenset[str]]]] = {}
        for group in view.groups:
            for variant in group.variants:
                refs: set[str] = set()
                for label_id in variant.labels:
                    refs |= label_divisions.get(label_id, frozenset())
                if refs:
                    eligible.setdefault(group.group_id, []).append(
                        (variant.variant_id, variant.text, frozenset(refs)))
        if len(eligible) < 3:
            raise InsufficientData(
                f"{len(eligible)} group(s) with mappable variants, need 3")

        group_ids = sorted(eligible)
        chosen = session.rng.choice(len(group_ids), size=3, replace=False)
        items = []
        for pos in sorted(int(i) for i in chosen):
            candidates = sorted(eligible[group_ids[pos]])
            vid, text, refs = candidates[int(session.rng.integers(0, len(candidates)))]
            items.append(MatchItem(variant_id=vid, text=text,
                                   reference_divisions=refs))
        session.match_round = MatchRound(items=items)
        return {
            "items": [{"item_index": i, "variant_id": item.variant_id,
                       "text": item.text}
                      for i, item in enumerate(items)],
        }

    def submit_match_answer(self, session: Session, item_index: int,
                            division_ids: Iterable[str]) -> dict:
        round_ = session.match_round
        if round_ is None:
            raise NoOpenTurn(session.session_id)
        if not (0 <= item_index < len(round_.items)):
            raise InvalidPayload(f"item index {item_index} out of range")
        item = round_.items[item_index]
        if item.answer is not None:
            raise AlreadyAnswered(f"item {item_index}")
        divisions = self._store.divisions(session.family_id)
        answer = frozenset(division_ids)
        for division_id in answer:
            if division_id not in divisions:
                raise UnknownDivision(division_id)
        item.answer = answer
        item.score = jaccard(answer, item.reference_divisions)
        if round_.complete:
            session.rounds_played += 1
        return {
            "reference_divisions": sorted(item.reference_divisions),
            "score": item.score,
        }

    def submit_match_correction(self, session: Session, item_index: int,
                                division_ids: Iterable[str]) -> int:
        round_ = session.match_round
        if round_ is None:
            raise NoOpenTurn(session.session_id)
        if not (0 <= item_index < len(round_.items)):
            raise InvalidPayload(f"item index {item_index} out of range")
        item = round_.items[item_index]
        if item.answer is None:
            raise InvalidPayload("answer the item before correcting it")
        divisions = self._store.divisions(session.family_id)
        corrected = sorted(set(division_ids))
        for division_id in corrected:
            if division_id not in divisions:
                raise UnknownDivision(division_id)
        return self._store.record_event(session.session_id, "MATCH_CORRECTION", {
            "variant_id": item.variant_id,
            "divisions": corrected,
        })
