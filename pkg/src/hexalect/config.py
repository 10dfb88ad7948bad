"""Service configuration: a small JSON file, path given by flag or env var.

Every knob has a default so the server runs with no config at all; the
file only overrides what it names.  Unknown keys are rejected loudly —
a typo in a config should never silently fall back to a default.
"""
from __future__ import annotations

import itertools
import json
import os
from dataclasses import dataclass, field, fields
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Callable, Optional

from .errors import InvalidPayload

CONFIG_ENV_VAR = "HEXALECT_CONFIG"

RETRAIN_SYNC = "sync"
RETRAIN_BACKGROUND = "background"

TRAIN_FIXED = "fixed"
TRAIN_AUTOTUNE = "autotune"


@dataclass(frozen=True)
class TrainSettings:
    """How the server (re)trains a family's classifier.

    ``fixed`` trains one model with ``model`` as hyperparameters —
    deterministic and fast, the default for interactive serving.
    ``autotune`` runs the budgeted random search instead.
    """

    mode: str = TRAIN_FIXED
    model: dict = field(default_factory=dict)       # ModelConfig overrides
    time_budget_s: Optional[float] = None
    max_candidates: Optional[int] = 12
    split_ratio: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if self.mode not in (TRAIN_FIXED, TRAIN_AUTOTUNE):
            raise InvalidPayload(f"train.mode must be fixed|autotune, got {self.mode!r}")
        if self.mode == TRAIN_AUTOTUNE and \
                self.time_budget_s is None and self.max_candidates is None:
            raise InvalidPayload("autotune needs time_budget_s or max_candidates")
        if not 0.0 < self.split_ratio < 1.0:
            raise InvalidPayload("split_ratio must be in (0, 1)")


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    data_dir: Optional[str] = None            # None → in-memory store
    tau: float = 0.3                          # display threshold for predictions
    retrain_threshold: int = 50               # new variants per automatic retrain
    idle_timeout_s: float = 1800.0
    rng_seed: Optional[int] = None
    retrain_mode: str = RETRAIN_BACKGROUND
    cors_origins: tuple = ()
    fixed_clock_start: Optional[str] = None   # ISO instant → deterministic clock
    max_model_bytes: int = 2_097_152
    train: TrainSettings = field(default_factory=TrainSettings)

    def __post_init__(self):
        if self.retrain_mode not in (RETRAIN_SYNC, RETRAIN_BACKGROUND):
            raise InvalidPayload(
                f"retrain_mode must be sync|background, got {self.retrain_mode!r}")
        if self.retrain_threshold < 1:
            raise InvalidPayload("retrain_threshold must be >= 1")
        if self.idle_timeout_s <= 0:
            raise InvalidPayload("idle_timeout_s must be positive")
        if not 0.0 < self.tau <= 1.0:
            raise InvalidPayload("tau must be in (0, 1]")
        if self.max_model_bytes < 1:
            raise InvalidPayload("max_model_bytes must be positive")

    def store_clock(self) -> Optional[Callable[[], str]]:
        if self.fixed_clock_start is None:
            return None
        return deterministic_clock(self.fixed_clock_start)


def deterministic_clock(start: str) -> Callable[[], str]:
    """A clock that ticks one microsecond per call, starting at ``start``.

    Lets two runs that make the same sequence of store calls produce
    byte-identical snapshots, which is what the persistence checks diff.
    """
    base = datetime.strptime(start, "%Y-%m-%dT%H:%M:%S.%fZ").replace(
        tzinfo=timezone.utc)
    counter = itertools.count()

    def tick() -> str:
        instant = base + timedelta(microseconds=next(counter))
        return instant.strftime("%Y-%m-%dT%H:%M:%S.%fZ")

    return tick


def _build(cls, doc: dict, where: str):
    allowed = {f.name for f in fields(cls)}
    unknown = set(doc) - allowed
    if unknown:
        raise InvalidPayload(f"unknown {where} key(s): {', '.join(sorted(unknown))}")
    return doc


def load_config(path: Optional[str] = None) -> ServiceConfig:
    """Read config JSON from ``path``, the env var, or fall back to defaults."""
    path = path or os.environ.get(CONFIG_ENV_VAR)
    if path is None:
        return ServiceConfig()
    raw = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InvalidPayload(f"config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise InvalidPayload("config must be a JSON object")
    doc = dict(doc)
    train_doc = doc.pop("train", None)
    kwargs = _build(ServiceConfig, doc, "config")
    if "cors_origins" in kwargs:
        kwargs["cors_origins"] = tuple(kwargs["cors_origins"])
    if train_doc is not None:
        if not isinstance(train_doc, dict):
            raise InvalidPayload("train must be a JSON object")
        kwargs["train"] = TrainSettings(**_build(TrainSettings, train_doc, "train"))
    return ServiceConfig(**kwargs)
