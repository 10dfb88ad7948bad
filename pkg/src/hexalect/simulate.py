"""Closed-loop simulation: a scripted player exercising the live service.

A simulated speaker plays full Quiz rounds against the HTTP API — start a
session, take a sentence, rewrite it with one dialect's substitution
rules, submit, then confirm or correct the model's guess.  The player is
imperfect on purpose: with probability ``1 - confirm_accuracy`` it does
the opposite of the right thing (confirms a wrong guess, or "corrects" a
right one to a random other dialect), which keeps a realistic level of
label noise in the loop.

Everything observable goes through the public API.  By default the
simulation hosts the service in-process over an ASGI test client seeded
from the bundled synthetic data; ``server=`` points it at a running
instance instead.
"""
from __future__ import annotations

import json
import tempfile
import time
from contextlib import ExitStack
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import synthdata
from .config import ServiceConfig, TrainSettings
from .errors import HexalectError, UnknownFamily
from .store import CorpusStore

# Deliberately modest hyperparameters: strong enough to learn the bundled
# families from a few hundred confirmations, weak enough that the seed
# corpus alone leaves clear headroom — otherwise the loop has nothing to
# demonstrate.
SIM_TRAIN = TrainSettings(
    mode="fixed",
    model={
        "char_ngram_min": 1,
        "char_ngram_max": 3,
        "word_ngram_max": 1,
        "hash_buckets": 16384,
        "embedding_dim": 8,
        "learning_rate": 0.5,
        "epochs": 10,
        "seed": 0,
    },
    split_ratio=0.8,
    seed=0,
)


class RemoteApiError(HexalectError):
    """An API call failed; carries the server's error code through."""

    code = "remote_api_error"

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


@dataclass
class SimulationReport:
    family_id: str
    seed: int
    rounds: list[dict]
    summary: dict


def _check(response) -> dict:
    if response.status_code >= 400:
        try:
            doc = response.json()
        except ValueError:
            doc = {}
        raise RemoteApiError(doc.get("code", "internal"),
                             doc.get("message", f"HTTP {response.status_code}"))
    return response.json()


def _seed_store(data_dir: Path, family_id: str) -> None:
    """Load the bundled family into a store directory if it is not there."""
    store = CorpusStore(data_dir)
    if any(f.family_id == family_id for f in store.families()):
        return
    spec = synthdata.SPECS.get(family_id)
    if spec is None:
        raise UnknownFamily(family_id)
    store.register_family(synthdata.registry(spec))
    store.load_divisions(family_id, synthdata.divisions(spec))
    with tempfile.NamedTemporaryFile("w", suffix=".jsonl", delete=False,
                                     encoding="utf-8") as fh:
        for group in synthdata.seed_corpus(spec):
            fh.write(json.dumps(group) + "\n")
        corpus_path = Path(fh.name)
    try:
        store.ingest_corpus(corpus_path, family_id)
    finally:
        corpus_path.unlink()


def _retrain(client, family_id: str) -> float:
    """Ask for a retrain and return the resulting held-out micro-F1."""
    before = _check(client.get(f"/api/admin/stats/{family_id}"))["model_version"]
    response = client.post("/api/admin/retrain", json={"family_id": family_id})
    doc = _check(response)
    if response.status_code == 202:  # background server: wait for the swap
        for _ in range(1200):
            stats = _check(client.get(f"/api/admin/stats/{family_id}"))
            if stats["model_version"] > before and stats["micro_f1"] is not None:
                return stats["micro_f1"]
            time.sleep(0.05)
        raise RemoteApiError("internal", "background retrain never finished")
    return doc["micro_f1"]


def _mean_difficulty(client, family_id: str) -> float:
    report = _check(client.get(f"/api/admin/difficulty/{family_id}"))
    rows = report["rows"]
    if not rows:
        return 0.0
    return sum(r["score"] for r in rows) / len(rows)


def run_simulation(family_id: str, rounds: int, seed: int, *,
                   confirm_accuracy: float = 0.9,
                   server: Optional[str] = None,
                   data_dir: Optional[Path] = None,
                   emit: Optional[Callable[[dict], None]] = None,
                   ) -> SimulationReport:
    """Play ``rounds`` Quiz rounds and report per-round and summary stats.

    The summary's ``corpus_growth`` is measured from the server's own
    stats endpoint, so the log can be checked against the store rather
    than against the player's intentions.
    """
    spec = synthdata.SPECS.get(family_id)
    if spec is None:
        raise UnknownFamily(family_id)
    emit = emit or (lambda record: None)
    rng = np.random.default_rng(seed)

    with ExitStack() as stack:
        if server is not None:
            import httpx
            client = stack.enter_context(
                httpx.Client(base_url=server.rstrip("/"), timeout=60.0))
        else:
            if data_dir is None:
                data_dir = Path(stack.enter_context(
                    tempfile.TemporaryDirectory(prefix="hexalect-sim-")))
            _seed_store(Path(data_dir), family_id)
            from starlette.testclient import TestClient

            from .service import create_app
            config = ServiceConfig(data_dir=str(data_dir), retrain_mode="sync",
                                   retrain_threshold=50, rng_seed=seed,
                                   train=SIM_TRAIN)
            client = stack.enter_context(
                TestClient(create_app(config), raise_server_exceptions=False))

        # Track, per group, which dialects have a variant and which exact
        # texts exist.  Dialects that share feature values can produce the
        # same rewrite when a sentence misses a trigger, and the store
        # deduplicates content — so the player varies any rewrite that
        # would collide, keeping every submission a genuine addition.
        used: dict[str, set[str]] = {}
        group_texts: dict[str, set[str]] = {}
        for group in synthdata.seed_corpus(spec):
            used[group["group_id"]] = {label
                                       for variant in group["variants"]
                                       for label in variant["labels"]}
            group_texts[group["group_id"]] = {variant["text"]
                                              for variant in group["variants"]}
        counter = 0

        start = _check(client.get(f"/api/admin/stats/{family_id}"))
        f1_initial = _retrain(client, family_id)

        session = _check(client.post(
            "/api/sessions", json={"family_id": family_id, "familiar": True}))
        sid = session["session_id"]

        round_logs: list[dict] = []
        for index in range(rounds):
            turn = _check(client.get(f"/api/sessions/{sid}/quiz"))
            group_id = turn["group_id"]
            seen = used.setdefault(group_id, set())
            texts = group_texts.setdefault(group_id, set())
            fresh = [d for d in spec.dialects if d not in seen]
            if fresh:
                dialect = fresh[int(rng.integers(len(fresh)))]
            else:
                dialect = spec.dialects[int(rng.integers(len(spec.dialects)))]
            seen.add(dialect)
            standard = turn["standard_text"]
            text = synthdata.apply_rules(standard, spec.rules[dialect])
            while text in texts:  # would dedupe away: vary to stay novel
                counter += 1
                text = synthdata.apply_rules(f"{standard} wego{counter}",
                                             spec.rules[dialect])
            texts.add(text)

            submitted = _check(client.post(
                f"/api/sessions/{sid}/quiz/submit", json={"text": text}))
            prediction = submitted["prediction"]
            top = max(sorted(prediction), key=lambda k: prediction[k])
            correct = top == dialect

            faithful = bool(rng.random() < confirm_accuracy)
            if correct == faithful:          # right+honest or wrong+sloppy
                decision: object = "confirm"
            elif faithful:                   # wrong guess, honest fix
                decision = {"label": dialect}
            else:                            # right guess, sloppy "fix"
                others = [d for d in spec.dialects if d != top]
                decision = {"label": others[int(rng.integers(len(others)))]}
            _check(client.post(f"/api/sessions/{sid}/review",
                               json={"decision": decision}))

            record = {
                "round": index + 1,
                "tier": turn["tier"],
                "predicted": top,
                "correct": correct,
                "D_mean": round(_mean_difficulty(client, family_id), 6),
            }
            emit(record)
            round_logs.append(record)

        f1_final = _retrain(client, family_id)
        end = _check(client.get(f"/api/admin/stats/{family_id}"))

        summary = {
            "corpus_growth": end["variants"] - start["variants"],
            "f1_initial": f1_initial,
            "f1_final": f1_final,
        }
        return SimulationReport(family_id=family_id, seed=seed,
                                rounds=round_logs, summary=summary)
