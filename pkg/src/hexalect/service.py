"""HTTP facade: REST endpoints over the store, engine, and selector.

One process serves gameplay, word suggestions, geo payloads, and admin
retraining.  Each family's (model, tier table, generation) triple lives
in a single runtime object that is swapped wholesale after a retrain,
so no request ever observes a half-updated model.
"""
from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import classifier, geo, selection
from .classifier import ModelConfig, TrainedModel
from .config import RETRAIN_SYNC, TRAIN_AUTOTUNE, ServiceConfig
from .engine import GameEngine
from .errors import (
    AlreadyAnswered,
    ConflictingEdit,
    DegeneratePolygon,
    DuplicateDialectName,
    DuplicateGroup,
    EmptyInput,
    EmptyTestSet,
    EmptyText,
    EmptyTrainingSet,
    HexalectError,
    InsufficientData,
    InvalidPayload,
    MalformedRecord,
    ModelLabelMismatch,
    NoFeasibleModel,
    NoGroups,
    NoOpenTurn,
    NotNormalized,
    OutOfBounds,
    RetrainInProgress,
    SingleClassCorpus,
    TurnAlreadyOpen,
    UnknownDivision,
    UnknownFamily,
    UnknownGroup,
    UnknownLabel,
    UnknownSession,
    WrongStage,
)
from .geo import HexCell
from .selection import RetrainPolicy, TierTable, should_retrain
from .store import CorpusStore

MODEL_FILENAME = "model.bin"

_NOT_FOUND = (UnknownFamily, UnknownLabel, UnknownGroup, UnknownSession,
              UnknownDivision)
_BAD_REQUEST = (InvalidPayload, EmptyText, MalformedRecord, DegeneratePolygon,
                OutOfBounds, ConflictingEdit, NotNormalized, EmptyInput)
_CONFLICT = (WrongStage, TurnAlreadyOpen, NoOpenTurn, AlreadyAnswered,
             DuplicateGroup, DuplicateDialectName, RetrainInProgress,
             InsufficientData, NoGroups, SingleClassCorpus, EmptyTrainingSet,
             EmptyTestSet, NoFeasibleModel, ModelLabelMismatch)


def status_for(exc: HexalectError) -> int:
    if isinstance(exc, _NOT_FOUND):
        return 404
    if isinstance(exc, _BAD_REQUEST):
        return 400
    if isinstance(exc, _CONFLICT):
        return 409
    return 500


@dataclass(frozen=True)
class FamilyRuntime:
    """Immutable serving state for one family; replaced atomically."""

    model: Optional[TrainedModel]
    table: TierTable
    generation: int
    micro_f1: Optional[float] = None
    macro_f1: Optional[float] = None


class AppState:
    def __init__(self, config: ServiceConfig):
        self.config = config
        data_dir = Path(config.data_dir) if config.data_dir else None
        clock = config.store_clock()
        if clock is not None:
            self.store = CorpusStore(data_dir, clock=clock)
        else:
            self.store = CorpusStore(data_dir)
        self.lock = threading.RLock()
        self.engine_lock = threading.RLock()
        self.runtimes: dict[str, FamilyRuntime] = {}
        self.counters: dict[str, int] = {}
        self.label_grew: set[str] = set()
        self.retraining: set[str] = set()
        self.policy = RetrainPolicy(threshold=config.retrain_threshold)
        self.executor = ThreadPoolExecutor(max_workers=2,
                                           thread_name_prefix="retrain")
        for family in self.store.families():
            self.runtimes[family.family_id] = self._boot_runtime(family.family_id)
        self.engine = GameEngine(
            self.store, self.model_for, self.table_for, tau=config.tau,
            idle_timeout_s=config.idle_timeout_s, rng_seed=config.rng_seed)
        self.store.subscribe(self._on_store_change)

    # -- runtime bootstrap / lookup -------------------------------------------

    def _boot_runtime(self, family_id: str) -> FamilyRuntime:
        view = self.store.snapshot(family_id)
        label_index = tuple(sorted(view.label_set))
        model = self._load_saved_model(family_id, label_index)
        if model is None and label_index:
            model = classifier.zero_model(label_index)
        if model is None:
            return FamilyRuntime(None, TierTable((), "unscored"), 0)
        return FamilyRuntime(model, selection.rescore_all(view, model), 0)

    def _load_saved_model(self, family_id: str,
                          label_index: tuple) -> Optional[TrainedModel]:
        if self.config.data_dir is None:
            return None
        path = Path(self.config.data_dir) / family_id / MODEL_FILENAME
        if not path.exists():
            return None
        try:
            model = classifier.load_model(path)
        except (ValueError, OSError):
            return None
        if model.label_index != label_index:
            return None  # stale model from before the label set changed
        return model

    def runtime(self, family_id: str) -> FamilyRuntime:
        self.store.family(family_id)  # raises UnknownFamily
        with self.lock:
            if family_id not in self.runtimes:
                self.runtimes[family_id] = self._boot_runtime(family_id)
            return self.runtimes[family_id]

    def model_for(self, family_id: str) -> TrainedModel:
        model = self.runtime(family_id).model
        if model is None:
            raise SingleClassCorpus(f"family {family_id} has no labels")
        return model

    def table_for(self, family_id: str) -> TierTable:
        return self.runtime(family_id).table

    # -- retraining -------------------------------------------------------------

    def _on_store_change(self, family_id: str, change: str) -> None:
        with self.lock:
            if change == "variant":
                self.counters[family_id] = self.counters.get(family_id, 0) + 1
            elif change == "label":
                self.label_grew.add(family_id)
            else:
                return
            due = should_retrain(self.counters.get(family_id, 0), self.policy,
                                 family_id in self.label_grew)
        if due:
            self.trigger_retrain(family_id, raise_if_running=False)

    def trigger_retrain(self, family_id: str, *,
                        raise_if_running: bool) -> Optional[dict]:
        self.store.family(family_id)
        with self.lock:
            if family_id in self.retraining:
                if raise_if_running:
                    raise RetrainInProgress(family_id)
                return None
            self.retraining.add(family_id)
            self.counters[family_id] = 0
            self.label_grew.discard(family_id)
        if self.config.retrain_mode == RETRAIN_SYNC:
            return self._retrain(family_id)
        self.executor.submit(self._retrain_quietly, family_id)
        return None

    def _retrain_quietly(self, family_id: str) -> None:
        try:
            self._retrain(family_id)
        except HexalectError:
            pass  # e.g. still single-class; the next trigger retries

    def _retrain(self, family_id: str) -> dict:
        try:
            view = self.store.snapshot(family_id)
            label_index = tuple(sorted(view.label_set))
            settings = self.config.train
            if settings.mode == TRAIN_AUTOTUNE:
                result = classifier.autotune(
                    view, self.config.max_model_bytes,
                    time_budget_s=settings.time_budget_s,
                    max_candidates=settings.max_candidates,
                    seed=settings.seed, ratio=settings.split_ratio)
                model, report = result.model, result.report
            else:
                config = ModelConfig(**settings.model)
                size = classifier.serialized_size(config, label_index)
                if size > self.config.max_model_bytes:
                    raise NoFeasibleModel(
                        f"{size} bytes exceeds cap {self.config.max_model_bytes}")
                split = classifier.split_train_test(
                    view, ratio=settings.split_ratio, seed=settings.seed)
                model = classifier.train(split.train, config, label_index)
                report = classifier.evaluate(model, split.test,
                                             split_seed=settings.seed)
            table = selection.rescore_all(view, model)
            with self.lock:
                generation = self.runtimes[family_id].generation + 1 \
                    if family_id in self.runtimes else 1
                self.runtimes[family_id] = FamilyRuntime(
                    model, table, generation, report.micro_f1, report.macro_f1)
            self._save_model(family_id, model)
            return {
                "family_id": family_id,
                "model_version": generation,
                "model_hash": model.version,
                "micro_f1": report.micro_f1,
                "macro_f1": report.macro_f1,
            }
        finally:
            with self.lock:
                self.retraining.discard(family_id)

    def _save_model(self, family_id: str, model: TrainedModel) -> None:
        if self.config.data_dir is None:
            return
        target = Path(self.config.data_dir) / family_id / MODEL_FILENAME
        target.parent.mkdir(parents=True, exist_ok=True)
        tmp = target.with_suffix(".bin.tmp")
        tmp.write_bytes(classifier.serialize_model(model))
        tmp.replace(target)


# -- request bodies ---------------------------------------------------------------

class SessionBody(BaseModel):
    family_id: str
    familiar: bool


class SubmitBody(BaseModel):
    text: str


class GeoEditBody(BaseModel):
    add: list[str] = Field(default_factory=list)
    remove: list[str] = Field(default_factory=list)


class ReviewBody(BaseModel):
    decision: Union[str, dict]
    geo_edit: Optional[GeoEditBody] = None


class AnswerBody(BaseModel):
    divisions: list[str]


class TierBody(BaseModel):
    tier: str


class RetrainBody(BaseModel):
    family_id: str


class LassoBody(BaseModel):
    polygon: list[list[float]]


def _parse_cells(cell_ids: list[str]) -> set[HexCell]:
    try:
        return {HexCell.parse(c) for c in cell_ids}
    except (ValueError, TypeError, AttributeError) as exc:
        raise InvalidPayload(f"bad cell id: {exc}") from exc


def _ring_payload(rings) -> list:
    return [[[x, y] for x, y in ring] for ring in rings]


# -- app factory ---------------------------------------------------------------------

def create_app(config: Optional[ServiceConfig] = None,
               state: Optional[AppState] = None) -> FastAPI:
    config = config or ServiceConfig()
    state = state or AppState(config)
    app = FastAPI(title="hexalect", docs_url=None, redoc_url=None)
    app.state.hexalect = state
    if config.cors_origins:
        app.add_middleware(
            CORSMiddleware, allow_origins=list(config.cors_origins),
            allow_methods=["*"], allow_headers=["*"])

    @app.exception_handler(HexalectError)
    async def domain_error(request: Request, exc: HexalectError):
        return JSONResponse(status_code=status_for(exc),
                            content={"code": exc.code, "message": str(exc)})

    @app.exception_handler(RequestValidationError)
    async def body_error(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content={"code": "invalid_payload",
                                     "message": str(exc.errors()[:3])})

    @app.exception_handler(Exception)
    async def unexpected_error(request: Request, exc: Exception):
        return JSONResponse(status_code=500,
                            content={"code": "internal",
                                     "message": "internal error"})

    # -- discovery -------------------------------------------------------------

    @app.get("/api/health")
    def health():
        return {"status": "ok"}

    @app.get("/api/families")
    def families():
        out = []
        for family in state.store.families():
            lon_min, lat_min, lon_max, lat_max = family.bounding_box
            out.append({
                "family_id": family.family_id,
                "display_name": family.display_name,
                "pin": [(lon_min + lon_max) / 2.0, (lat_min + lat_max) / 2.0],
                "bounding_box": list(family.bounding_box),
                "hex_resolution": family.hex_resolution,
                "writing_direction": family.writing_direction,
            })
        return out

    @app.get("/api/families/{family_id}/labels")
    def family_labels(family_id: str):
        family = state.store.family(family_id)
        out = []
        for label_id in sorted(state.store.labels(family_id)):
            label = state.store.labels(family_id)[label_id]
            out.append({
                "label_id": label.label_id,
                "name": label.name,
                "affiliation": label.affiliation,
                "cells": label.region.cell_ids(),
                "boundary": _ring_payload(geo.region_boundary(label.region, family)),
            })
        return out

    @app.get("/api/families/{family_id}/divisions")
    def family_divisions(family_id: str):
        state.store.family(family_id)
        out = []
        for division_id in sorted(state.store.divisions(family_id)):
            division = state.store.divisions(family_id)[division_id]
            out.append({
                "division_id": division.division_id,
                "name": division.name,
                "polygon": _ring_payload(division.polygon),
            })
        return out

    @app.get("/api/families/{family_id}/suggest")
    def suggest(family_id: str, prefix: str = ""):
        with state.engine_lock:
            return {"words": state.engine.suggest_words(family_id, prefix)}

    @app.post("/api/families/{family_id}/lasso")
    def lasso(family_id: str, body: LassoBody):
        family = state.store.family(family_id)
        polygon = [(float(x), float(y)) for x, y in body.polygon]
        cells = geo.cells_in_lasso(polygon, family)
        return {"cells": sorted(c.cell_id for c in cells)}

    # -- sessions ----------------------------------------------------------------

    @app.post("/api/sessions")
    def start_session(body: SessionBody):
        with state.engine_lock:
            session = state.engine.start_session(body.family_id, body.familiar)
        return {"session_id": session.session_id, "path": session.path,
                "level": session.level}

    @app.get("/api/sessions/{session_id}")
    def session_state(session_id: str):
        with state.engine_lock:
            s = state.engine.get_session(session_id)
            return {"session_id": s.session_id, "family_id": s.family_id,
                    "path": s.path, "stage": s.stage, "level": s.level,
                    "rounds_played": s.rounds_played}

    @app.get("/api/sessions/{session_id}/quiz")
    def begin_quiz(session_id: str):
        with state.engine_lock:
            session = state.engine.get_session(session_id)
            return state.engine.begin_quiz_turn(session)

    @app.post("/api/sessions/{session_id}/quiz/submit")
    def submit_rewrite(session_id: str, body: SubmitBody):
        with state.engine_lock:
            session = state.engine.get_session(session_id)
            return state.engine.submit_rewrite(session, body.text)

    @app.post("/api/sessions/{session_id}/review")
    def review(session_id: str, body: ReviewBody):
        add = _parse_cells(body.geo_edit.add) if body.geo_edit else set()
        remove = _parse_cells(body.geo_edit.remove) if body.geo_edit else set()
        with state.engine_lock:
            session = state.engine.get_session(session_id)
            if body.decision == "confirm":
                if body.geo_edit is not None:
                    raise InvalidPayload("confirm does not take a geo_edit")
                return state.engine.review_confirm(session)
            if isinstance(body.decision, dict) and set(body.decision) == {"label"}:
                return state.engine.review_correct(
                    session, label_id=str(body.decision["label"]),
                    geo_add=add, geo_remove=remove)
            if isinstance(body.decision, dict) and \
                    set(body.decision) == {"new_dialect"}:
                return state.engine.review_correct(
                    session, new_dialect_name=str(body.decision["new_dialect"]),
                    geo_add=add, geo_remove=remove)
        raise InvalidPayload(
            'decision must be "confirm", {"label": id}, or {"new_dialect": name}')

    @app.post("/api/sessions/{session_id}/difficulty")
    def set_difficulty(session_id: str, body: TierBody):
        with state.engine_lock:
            session = state.engine.get_session(session_id)
            state.engine.set_difficulty(session, body.tier)
            return {"level": session.level}

    # -- match ------------------------------------------------------------------------

    @app.get("/api/sessions/{session_id}/match")
    def begin_match(session_id: str):
        with state.engine_lock:
            session = state.engine.get_session(session_id)
            return state.engine.begin_match_round(session)

    @app.post("/api/sessions/{session_id}/match/{item_index}")
    def answer_match(session_id: str, item_index: int, body: AnswerBody):
        with state.engine_lock:
            session = state.engine.get_session(session_id)
            return state.engine.submit_match_answer(session, item_index,
                                                    set(body.divisions))

    @app.post("/api/sessions/{session_id}/match/{item_index}/correction")
    def correct_match(session_id: str, item_index: int, body: AnswerBody):
        with state.engine_lock:
            session = state.engine.get_session(session_id)
            event_id = state.engine.submit_match_correction(
                session, item_index, set(body.divisions))
            return {"event_id": event_id}

    # -- admin ------------------------------------------------------------------------

    @app.post("/api/admin/retrain")
    def retrain(body: RetrainBody):
        result = state.trigger_retrain(body.family_id, raise_if_running=True)
        if result is None:  # background mode: poll the difficulty report
            return JSONResponse(status_code=202, content={
                "status": "started", "family_id": body.family_id})
        return result

    @app.get("/api/admin/difficulty/{family_id}")
    def difficulty_report(family_id: str):
        runtime = state.runtime(family_id)
        return {
            "family_id": family_id,
            "model_version": runtime.generation,
            "model_hash": runtime.model.version if runtime.model else None,
            "rows": [{"group_id": r.group_id, "score": r.score, "tier": r.tier}
                     for r in runtime.table.records],
        }

    @app.get("/api/admin/stats/{family_id}")
    def family_stats(family_id: str):
        runtime = state.runtime(family_id)
        view = state.store.snapshot(family_id)
        return {
            "family_id": family_id,
            "groups": len(view.groups),
            "variants": view.variant_count,
            "labels": len(view.label_set),
            "events": state.store.event_count(family_id),
            "model_version": runtime.generation,
            "model_hash": runtime.model.version if runtime.model else None,
            "micro_f1": runtime.micro_f1,
            "macro_f1": runtime.macro_f1,
        }

    return app


def run_server(config: ServiceConfig) -> None:
    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port,
                log_level="warning")
