"""Dialect registry and parallel-sentence corpus with an append-only event log.

Persistence layout (one directory per language family under
``<data_dir>/families/``):

    registry.json   seed family + dialect labels        (written on register)
    divisions.json  administrative divisions             (optional)
    corpus.jsonl    seed groups and directly-added variants (append-only)
    events.jsonl    feedback events, one JSON object per line (append-only)
    snapshot.json   compaction point: full state + replay offsets (optional)

Rebuilding a store from these files is deterministic: variants are
content-addressed (id = hash of group, text, label set), every timestamp
is read back from the files, and canonical snapshots sort all collections,
so a replayed store serializes to byte-identical snapshots.

All mutations go through a single writer lock; reads hand out immutable
views that are never touched by later writes.
"""
from __future__ import annotations

import hashlib
import json
import re
import threading
import unicodedata
from collections import Counter
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Optional

from . import geo
from .errors import (
    DuplicateDialectName,
    DuplicateGroup,
    EmptyText,
    InvalidPayload,
    MalformedRecord,
    UnknownFamily,
    UnknownGroup,
    UnknownLabel,
    UnknownSession,
)
from .geo import AdminDivision, HexCell, HexRegion

SEED = "SEED"
USER = "USER"

EVENT_KINDS = ("CONFIRM", "RELABEL", "NEW_DIALECT", "GEO_EDIT", "MATCH_CORRECTION")

SYSTEM_SESSION = "system"


def utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def normalize_text(text: str) -> str:
    """NFC, trim, collapse internal whitespace runs to single spaces."""
    return re.sub(r"\s+", " ", unicodedata.normalize("NFC", text)).strip()


def variant_id_for(group_id: str, text: str, labels: Iterable[str]) -> str:
    key = "\x1f".join([group_id, text, ",".join(sorted(labels))])
    return hashlib.sha1(key.encode("utf-8")).hexdigest()[:12]


@dataclass(frozen=True)
class LanguageFamily:
    family_id: str
    display_name: str
    bounding_box: tuple[float, float, float, float]  # lon_min, lat_min, lon_max, lat_max
    hex_resolution: float
    admin_divisions: tuple[str, ...] = ()
    writing_direction: str = "LTR"

    def __post_init__(self):
        lon_min, lat_min, lon_max, lat_max = self.bounding_box
        if not (lon_min < lon_max and lat_min < lat_max):
            raise ValueError(f"family {self.family_id}: malformed bounding box")
        if self.hex_resolution <= 0:
            raise ValueError(f"family {self.family_id}: hex_resolution must be > 0")
        if self.writing_direction not in ("LTR", "RTL"):
            raise ValueError(f"family {self.family_id}: bad writing_direction")


@dataclass(frozen=True)
class DialectLabel:
    label_id: str
    name: str          # immutable after creation
    affiliation: str   # immutable after creation
    region: HexRegion  # replaced wholesale by geo edits


@dataclass(frozen=True)
class DialectVariant:
    variant_id: str
    text: str
    labels: frozenset[str]
    provenance: str
    created_at: str


@dataclass(frozen=True)
class ParallelGroup:
    group_id: str
    family_id: str
    standard_text: str
    variants: tuple[DialectVariant, ...]


@dataclass(frozen=True)
class FeedbackEvent:
    event_id: int
    session_id: str
    kind: str
    payload: dict
    created_at: str


@dataclass(frozen=True)
class CorpusView:
    """Immutable corpus snapshot handed to the classifier and selector."""

    family: LanguageFamily
    labels: tuple[DialectLabel, ...]          # sorted by label_id
    groups: tuple[ParallelGroup, ...]         # sorted by group_id, variants by variant_id
    label_set: frozenset[str]                 # K: registered ∪ observed

    @property
    def variant_count(self) -> int:
        return sum(len(g.variants) for g in self.groups)

    def to_canonical_json(self) -> bytes:
        doc = {
            "family": _family_doc(self.family),
            "labels": [_label_doc(l) for l in self.labels],
            "groups": [_group_doc(g) for g in self.groups],
            "label_set": sorted(self.label_set),
        }
        return json.dumps(doc, sort_keys=True, ensure_ascii=False,
                          separators=(",", ":")).encode("utf-8")


def _family_doc(fam: LanguageFamily) -> dict:
    return {
        "family_id": fam.family_id,
        "display_name": fam.display_name,
        "bounding_box": list(fam.bounding_box),
        "hex_resolution": fam.hex_resolution,
        "admin_divisions": list(fam.admin_divisions),
        "writing_direction": fam.writing_direction,
    }


def _label_doc(label: DialectLabel) -> dict:
    return {
        "label_id": label.label_id,
        "name": label.name,
        "affiliation": label.affiliation,
        "region": label.region.cell_ids(),
    }


def _variant_doc(v: DialectVariant) -> dict:
    return {
        "variant_id": v.variant_id,
        "text": v.text,
        "labels": sorted(v.labels),
        "provenance": v.provenance,
        "created_at": v.created_at,
    }


def _group_doc(g: ParallelGroup) -> dict:
    return {
        "group_id": g.group_id,
        "family_id": g.family_id,
        "standard": g.standard_text,
        "variants": [_variant_doc(v) for v in sorted(g.variants, key=lambda v: v.variant_id)],
    }


class _FamilyState:
    def __init__(self, family: LanguageFamily):
        self.family = family
        self.labels: dict[str, DialectLabel] = {}
        self.groups: dict[str, ParallelGroup] = {}
        self.divisions: dict[str, AdminDivision] = {}
        self.last_event_id = 0
        self.corpus_lines = 0          # lines of corpus.jsonl already applied
        self.word_counts: Counter[str] = Counter()

    def count_words(self, text: str) -> None:
        self.word_counts.update(text.split(" "))


class CorpusStore:
    """Single-writer store over one data directory (or fully in memory).

    ``clock`` injects timestamps so replay tests stay deterministic.
    """

    def __init__(self, data_dir: Optional[Path] = None,
                 clock: Callable[[], str] = utc_now):
        self._dir = Path(data_dir) if data_dir is not None else None
        self._clock = clock
        self._lock = threading.RLock()
        self._families: dict[str, _FamilyState] = {}
        self._sessions: dict[str, str] = {SYSTEM_SESSION: ""}
        self._group_index: dict[str, str] = {}  # group_id -> family_id
        self._listeners: list[Callable[[str, str], None]] = []
        if self._dir is not None and (self._dir / "families").is_dir():
            self._load_all()

    # -- change notifications -------------------------------------------------

    def subscribe(self, callback: Callable[[str, str], None]) -> None:
        """callback(family_id, change kind: "variant" | "label" | "region")."""
        self._listeners.append(callback)

    def _notify(self, family_id: str, change: str) -> None:
        for cb in self._listeners:
            cb(family_id, change)

    # -- registry -------------------------------------------------------------

    def register_family(self, registry: dict) -> LanguageFamily:
        """Load a registry document: {"family": {...}, "labels": [...]}."""
        fam_doc = registry["family"]
        family = LanguageFamily(
            family_id=fam_doc["family_id"],
            display_name=fam_doc.get("display_name", fam_doc["family_id"]),
            bounding_box=tuple(fam_doc["bounding_box"]),
            hex_resolution=float(fam_doc["hex_resolution"]),
            admin_divisions=tuple(fam_doc.get("admin_divisions", [])),
            writing_direction=fam_doc.get("writing_direction", "LTR"),
        )
        with self._lock:
            if family.family_id in self._families:
                raise ValueError(f"family {family.family_id} already registered")
            state = _FamilyState(family)
            for doc in registry.get("labels", []):
                label = DialectLabel(
                    label_id=doc["label_id"],
                    name=doc["name"],
                    affiliation=doc.get("affiliation", family.family_id),
                    region=HexRegion.from_ids(family.family_id, doc.get("region", [])),
                )
                if label.label_id in state.labels:
                    raise ValueError(f"duplicate label id {label.label_id}")
                state.labels[label.label_id] = label
            self._families[family.family_id] = state
            if self._dir is not None:
                fam_dir = self._family_dir(family.family_id)
                fam_dir.mkdir(parents=True, exist_ok=True)
                path = fam_dir / "registry.json"
                if not path.exists():
                    path.write_text(json.dumps(registry, ensure_ascii=False, indent=1),
                                    encoding="utf-8")
        return family

    def load_divisions(self, family_id: str, doc: dict) -> int:
        state = self._require_family(family_id)
        with self._lock:
            for entry in doc["divisions"]:
                division = AdminDivision(
                    division_id=entry["division_id"],
                    name=entry["name"],
                    polygon=[[tuple(p) for p in ring] for ring in entry["polygon"]],
                )
                state.divisions[division.division_id] = division
            if self._dir is not None:
                path = self._family_dir(family_id) / "divisions.json"
                if not path.exists():
                    path.write_text(json.dumps(doc, ensure_ascii=False), encoding="utf-8")
        return len(state.divisions)

    def families(self) -> list[LanguageFamily]:
        with self._lock:
            return [s.family for s in self._families.values()]

    def family(self, family_id: str) -> LanguageFamily:
        return self._require_family(family_id).family

    def labels(self, family_id: str) -> dict[str, DialectLabel]:
        with self._lock:
            return dict(self._require_family(family_id).labels)

    def divisions(self, family_id: str) -> dict[str, AdminDivision]:
        with self._lock:
            return dict(self._require_family(family_id).divisions)

    def registry_fingerprint(self, family_id: str) -> tuple:
        """(label_id, name, affiliation) triples; geo edits must not alter it."""
        with self._lock:
            state = self._require_family(family_id)
            return tuple(sorted((l.label_id, l.name, l.affiliation)
                                for l in state.labels.values()))

    def event_count(self, family_id: str) -> int:
        """Id of the newest applied event (0 before the first)."""
        with self._lock:
            return self._require_family(family_id).last_event_id

    # -- sessions ---------------------------------------------------------------

    def register_session(self, session_id: str, family_id: str) -> None:
        self._require_family(family_id)
        with self._lock:
            self._sessions[session_id] = family_id

    def session_family(self, session_id: str) -> str:
        with self._lock:
            if session_id not in self._sessions:
                raise UnknownSession(session_id)
            return self._sessions[session_id]

    # -- corpus ingest ----------------------------------------------------------

    def ingest_corpus(self, path: Path, family_id: str) -> int:
        """Load a line-delimited corpus file; all-or-nothing validation."""
        state = self._require_family(family_id)
        with self._lock:
            parsed: list[tuple[str, str, list[tuple[str, frozenset[str]]]]] = []
            seen_ids: set[str] = set()
            with open(path, encoding="utf-8") as fh:
                for line_no, line in enumerate(fh, start=1):
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        doc = json.loads(line)
                        group_id = doc["group_id"]
                        standard = normalize_text(doc["standard"])
                        variants = [
                            (normalize_text(v["text"]),
                             frozenset(v["labels"]))
                            for v in doc.get("variants", [])
                        ]
                    except (KeyError, TypeError, ValueError, AttributeError) as exc:
                        raise MalformedRecord(line_no, str(exc)) from exc
                    if not standard:
                        raise MalformedRecord(line_no, "empty standard text")
                    if group_id in self._group_index or group_id in seen_ids:
                        raise DuplicateGroup(group_id)
                    seen_ids.add(group_id)
                    for text, labels in variants:
                        if not text:
                            raise MalformedRecord(line_no, "empty variant text")
                        if not labels:
                            raise MalformedRecord(line_no, "variant without labels")
                        for label_id in labels:
                            if label_id not in state.labels:
                                raise UnknownLabel(label_id)
                    parsed.append((group_id, standard, variants))

            now = self._clock()
            for group_id, standard, variants in parsed:
                vs = []
                for text, labels in variants:
                    vs.append(DialectVariant(
                        variant_id=variant_id_for(group_id, text, labels),
                        text=text, labels=labels, provenance=SEED, created_at=now,
                    ))
                    state.count_words(text)
                group = ParallelGroup(group_id, family_id, standard, tuple(vs))
                state.groups[group_id] = group
                self._group_index[group_id] = family_id
                self._append_corpus_line(family_id, {
                    "group_id": group_id,
                    "standard": standard,
                    "variants": [{"text": v.text, "labels": sorted(v.labels),
                                  "provenance": v.provenance, "created_at": v.created_at}
                                 for v in vs],
                })
            if parsed:
                self._notify(family_id, "variant")
            return len(parsed)

    # -- variants ---------------------------------------------------------------

    def add_variant(self, group_id: str, text: str, labels: Iterable[str],
                    provenance: str = USER, *, created_at: Optional[str] = None,
                    _persist: bool = True) -> str:
        """Append a dialect variant to its group; idempotent on duplicates.

        A variant with the same normalized text and label set as an existing
        one returns the existing id without growing the corpus.
        """
        with self._lock:
            if group_id not in self._group_index:
                raise UnknownGroup(group_id)
            family_id = self._group_index[group_id]
            state = self._families[family_id]
            text = normalize_text(text)
            if not text:
                raise EmptyText("variant text")
            labels = frozenset(labels)
            if not labels:
                raise UnknownLabel("variant requires at least one label")
            for label_id in labels:
                if label_id not in state.labels:
                    raise UnknownLabel(label_id)
            vid = variant_id_for(group_id, text, labels)
            group = state.groups[group_id]
            for v in group.variants:
                if v.variant_id == vid:
                    return vid
            variant = DialectVariant(
                variant_id=vid, text=text, labels=labels,
                provenance=provenance, created_at=created_at or self._clock(),
            )
            state.groups[group_id] = replace(group, variants=group.variants + (variant,))
            state.count_words(text)
            if _persist:
                self._append_corpus_line(family_id, {"variant": {
                    "group_id": group_id, "text": text, "labels": sorted(labels),
                    "provenance": provenance, "created_at": variant.created_at,
                }})
            self._notify(family_id, "variant")
            return vid

    def group(self, group_id: str) -> ParallelGroup:
        with self._lock:
            if group_id not in self._group_index:
                raise UnknownGroup(group_id)
            return self._families[self._group_index[group_id]].groups[group_id]

    # -- feedback events ----------------------------------------------------------

    def record_event(self, session_id: str, kind: str, payload: dict) -> int:
        """Validate, durably append, and apply a feedback event."""
        with self._lock:
            if session_id not in self._sessions:
                raise UnknownSession(session_id)
            if kind not in EVENT_KINDS:
                raise InvalidPayload(f"unknown event kind {kind!r}")
            family_id = payload.get("family_id") or self._sessions[session_id]
            if not family_id:
                raise InvalidPayload("event does not resolve to a family")
            state = self._require_family(family_id)
            self._validate_payload(state, kind, payload)
            event = FeedbackEvent(
                event_id=state.last_event_id + 1,
                session_id=session_id,
                kind=kind,
                payload=dict(payload),
                created_at=self._clock(),
            )
            self._append_event_line(family_id, event)
            state.last_event_id = event.event_id
            self._apply_event(state, event)
            return event.event_id

    def _validate_payload(self, state: _FamilyState, kind: str, payload: dict) -> None:
        def need(*keys):
            for key in keys:
                if key not in payload:
                    raise InvalidPayload(f"{kind} payload missing {key!r}")

        if kind in ("CONFIRM", "RELABEL"):
            need("group_id", "text")
            group_id = payload["group_id"]
            if self._group_index.get(group_id) != state.family.family_id:
                raise InvalidPayload(f"group {group_id} not in family")
            if not normalize_text(payload["text"]):
                raise InvalidPayload("empty text")
            labels = payload.get("labels") if kind == "CONFIRM" else [payload.get("label")]
            if not labels or any(l not in state.labels for l in labels):
                raise InvalidPayload("unregistered label in payload")
        elif kind == "NEW_DIALECT":
            need("label_id", "name")
            if payload["label_id"] in state.labels:
                raise InvalidPayload(f"label id {payload['label_id']} exists")
            name = payload["name"].strip()
            if not name:
                raise InvalidPayload("empty dialect name")
            if any(l.name.casefold() == name.casefold() for l in state.labels.values()):
                raise DuplicateDialectName(name)
        elif kind == "GEO_EDIT":
            need("label_id")
            if payload["label_id"] not in state.labels:
                raise InvalidPayload(f"label {payload['label_id']} not in family")
            add = {HexCell.parse(c) for c in payload.get("add", [])}
            remove = {HexCell.parse(c) for c in payload.get("remove", [])}
            # raises OutOfBounds / ConflictingEdit before anything is written
            geo.edited_region(state.labels[payload["label_id"]].region,
                              add, remove, state.family)
        elif kind == "MATCH_CORRECTION":
            need("variant_id", "divisions")
            for division_id in payload["divisions"]:
                if division_id not in state.divisions:
                    raise InvalidPayload(f"unknown division {division_id}")

    def _apply_event(self, state: _FamilyState, event: FeedbackEvent) -> None:
        payload = event.payload
        kind = event.kind
        if kind == "CONFIRM":
            self.add_variant(payload["group_id"], payload["text"], payload["labels"],
                             provenance=USER, created_at=event.created_at, _persist=False)
        elif kind == "RELABEL":
            self.add_variant(payload["group_id"], payload["text"], [payload["label"]],
                             provenance=USER, created_at=event.created_at, _persist=False)
        elif kind == "NEW_DIALECT":
            label = DialectLabel(
                label_id=payload["label_id"],
                name=payload["name"].strip(),
                affiliation=state.family.family_id,
                region=HexRegion(state.family.family_id, frozenset()),
            )
            state.labels[label.label_id] = label
            self._notify(state.family.family_id, "label")
        elif kind == "GEO_EDIT":
            label = state.labels[payload["label_id"]]
            add = {HexCell.parse(c) for c in payload.get("add", [])}
            remove = {HexCell.parse(c) for c in payload.get("remove", [])}
            region = geo.edited_region(label.region, add, remove, state.family)
            state.labels[label.label_id] = replace(label, region=region)
            self._notify(state.family.family_id, "region")
        # MATCH_CORRECTION is stored, never applied to the registry

    # -- geo edits ----------------------------------------------------------------

    def apply_geo_edit(self, family_id: str, label_id: str, add: set[HexCell],
                       remove: set[HexCell],
                       session_id: str = SYSTEM_SESSION) -> HexRegion:
        """Edit a label's region; records a GEO_EDIT event with the change."""
        with self._lock:
            state = self._require_family(family_id)
            if label_id not in state.labels:
                raise UnknownLabel(label_id)
            self.record_event(session_id, "GEO_EDIT", {
                "family_id": family_id,
                "label_id": label_id,
                "add": sorted(c.cell_id for c in add),
                "remove": sorted(c.cell_id for c in remove),
            })
            return state.labels[label_id].region

    def create_dialect(self, family_id: str, name: str,
                       session_id: str = SYSTEM_SESSION) -> DialectLabel:
        """Register a user-proposed dialect with an empty region."""
        with self._lock:
            state = self._require_family(family_id)
            label_id = self._slug_for(state, name)
            self.record_event(session_id, "NEW_DIALECT", {
                "family_id": family_id, "label_id": label_id, "name": name,
            })
            return state.labels[label_id]

    @staticmethod
    def _slug_for(state: _FamilyState, name: str) -> str:
        base = re.sub(r"[^a-z0-9]+", "-", name.strip().casefold()).strip("-") or "dialect"
        slug = base
        n = 2
        while slug in state.labels:
            slug = f"{base}-{n}"
            n += 1
        return slug

    # -- snapshots ----------------------------------------------------------------

    def snapshot(self, family_id: str) -> CorpusView:
        with self._lock:
            state = self._require_family(family_id)
            observed: set[str] = set()
            groups = []
            for gid in sorted(state.groups):
                g = state.groups[gid]
                variants = tuple(sorted(g.variants, key=lambda v: v.variant_id))
                groups.append(replace(g, variants=variants))
                for v in variants:
                    observed.update(v.labels)
            return CorpusView(
                family=state.family,
                labels=tuple(state.labels[i] for i in sorted(state.labels)),
                groups=tuple(groups),
                label_set=frozenset(observed) | frozenset(state.labels),
            )

    def word_counts(self, family_id: str) -> Counter:
        with self._lock:
            return Counter(self._require_family(family_id).word_counts)

    def compact(self, family_id: str) -> None:
        """Write a snapshot so later loads replay only the log tail."""
        if self._dir is None:
            return
        with self._lock:
            state = self._require_family(family_id)
            view = self.snapshot(family_id)
            doc = {
                "events_applied": state.last_event_id,
                "corpus_lines": state.corpus_lines,
                "state": json.loads(view.to_canonical_json().decode("utf-8")),
            }
            path = self._family_dir(family_id) / "snapshot.json"
            tmp = path.with_suffix(".json.tmp")
            tmp.write_text(json.dumps(doc, ensure_ascii=False, sort_keys=True),
                           encoding="utf-8")
            tmp.replace(path)

    # -- loading --------------------------------------------------------------------

    def _load_all(self) -> None:
        assert self._dir is not None
        for fam_dir in sorted((self._dir / "families").iterdir()):
            if not fam_dir.is_dir():
                continue
            registry = json.loads((fam_dir / "registry.json").read_text(encoding="utf-8"))
            self.register_family(registry)
            family_id = registry["family"]["family_id"]
            state = self._families[family_id]
            div_path = fam_dir / "divisions.json"
            if div_path.exists():
                self.load_divisions(family_id,
                                    json.loads(div_path.read_text(encoding="utf-8")))
            snap_path = fam_dir / "snapshot.json"
            if snap_path.exists():
                self._restore_snapshot(state, json.loads(snap_path.read_text(encoding="utf-8")))
            corpus_path = fam_dir / "corpus.jsonl"
            if corpus_path.exists():
                self._replay_corpus_file(state, corpus_path)
            events_path = fam_dir / "events.jsonl"
            if events_path.exists():
                self._replay_event_file(state, events_path)

    def _restore_snapshot(self, state: _FamilyState, doc: dict) -> None:
        family_id = state.family.family_id
        state.labels = {}
        for label_doc in doc["state"]["labels"]:
            state.labels[label_doc["label_id"]] = DialectLabel(
                label_id=label_doc["label_id"],
                name=label_doc["name"],
                affiliation=label_doc["affiliation"],
                region=HexRegion.from_ids(family_id, label_doc["region"]),
            )
        for group_doc in doc["state"]["groups"]:
            variants = tuple(DialectVariant(
                variant_id=v["variant_id"], text=v["text"],
                labels=frozenset(v["labels"]), provenance=v["provenance"],
                created_at=v["created_at"],
            ) for v in group_doc["variants"])
            group = ParallelGroup(group_doc["group_id"], family_id,
                                  group_doc["standard"], variants)
            state.groups[group.group_id] = group
            self._group_index[group.group_id] = family_id
            for v in variants:
                state.count_words(v.text)
        state.last_event_id = doc["events_applied"]
        state.corpus_lines = doc["corpus_lines"]

    def _replay_corpus_file(self, state: _FamilyState, path: Path) -> None:
        family_id = state.family.family_id
        with open(path, encoding="utf-8") as fh:
            for idx, line in enumerate(fh):
                if idx < state.corpus_lines:
                    continue
                doc = json.loads(line)
                if "variant" in doc:
                    v = doc["variant"]
                    self.add_variant(v["group_id"], v["text"], v["labels"],
                                     provenance=v.get("provenance", USER),
                                     created_at=v["created_at"], _persist=False)
                else:
                    variants = tuple(DialectVariant(
                        variant_id=variant_id_for(doc["group_id"], v["text"],
                                                  frozenset(v["labels"])),
                        text=v["text"], labels=frozenset(v["labels"]),
                        provenance=v.get("provenance", SEED),
                        created_at=v["created_at"],
                    ) for v in doc["variants"])
                    group = ParallelGroup(doc["group_id"], family_id,
                                          doc["standard"], variants)
                    state.groups[group.group_id] = group
                    self._group_index[group.group_id] = family_id
                    for v in variants:
                        state.count_words(v.text)
                state.corpus_lines = idx + 1

    def _replay_event_file(self, state: _FamilyState, path: Path) -> None:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                doc = json.loads(line)
                if doc["event_id"] <= state.last_event_id:
                    continue
                event = FeedbackEvent(
                    event_id=doc["event_id"], session_id=doc["session_id"],
                    kind=doc["kind"], payload=doc["payload"],
                    created_at=doc["created_at"],
                )
                self._apply_event(state, event)
                state.last_event_id = event.event_id

    # -- plumbing ---------------------------------------------------------------------

    def _require_family(self, family_id: str) -> _FamilyState:
        with self._lock:
            if family_id not in self._families:
                raise UnknownFamily(family_id)
            return self._families[family_id]

    def _family_dir(self, family_id: str) -> Path:
        assert self._dir is not None
        return self._dir / "families" / family_id

    def _append_corpus_line(self, family_id: str, doc: dict) -> None:
        state = self._families[family_id]
        state.corpus_lines += 1
        if self._dir is None:
            return
        fam_dir = self._family_dir(family_id)
        fam_dir.mkdir(parents=True, exist_ok=True)
        with open(fam_dir / "corpus.jsonl", "a", encoding="utf-8") as fh:
            fh.write(json.dumps(doc, ensure_ascii=False, sort_keys=True) + "\n")
            fh.flush()

    def _append_event_line(self, family_id: str, event: FeedbackEvent) -> None:
        if self._dir is None:
            return
        fam_dir = self._family_dir(family_id)
        fam_dir.mkdir(parents=True, exist_ok=True)
        doc = {
            "event_id": event.event_id,
            "session_id": event.session_id,
            "kind": event.kind,
            "payload": event.payload,
            "created_at": event.created_at,
        }
        with open(fam_dir / "events.jsonl", "a", encoding="utf-8") as fh:
            fh.write(json.dumps(doc, ensure_ascii=False, sort_keys=True) + "\n")
            fh.flush()
