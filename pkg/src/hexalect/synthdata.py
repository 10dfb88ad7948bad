"""Bundled synthetic language families for tests, demos, and simulation.

Each family is a set of pseudo-dialects defined by deterministic
character-substitution rules over generated standard sentences, so the
whole pipeline runs without any licensed corpus:

- ``tri``:  3 dialects with disjoint, strongly separable rules.
- ``octo``: 8 dialects built from 3 binary substitution features;
  neighbouring dialects differ in a single feature and short sentences
  may not express every feature, so sparse seed data leaves real
  headroom for the active-learning loop to earn back.
- ``duo``:  2 dialects, the smallest end-to-end fixture.

Generation is pure and seeded: the committed files under
``data/synthetic/`` are reproducible byte-for-byte via the ``synth``
CLI subcommand.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

CONSONANTS = "bdfghklmnprstvz"
VOWELS = "aeiou"
# Trigger characters are oversampled so most sentences express every
# substitution feature; see _octo_rules for why that matters.
WEIGHTED_CONSONANTS = CONSONANTS + "kkksss"
WEIGHTED_VOWELS = VOWELS + "aa"


@dataclass(frozen=True)
class FamilySpec:
    name: str
    display_name: str
    rules: dict[str, dict[str, str]]     # label_id -> char substitutions
    n_groups: int
    seeded_per_group: int                # dialects with a seed variant per group
    words: tuple[int, int]               # sentence length range (inclusive)
    seed: int
    require_triggers: bool               # every sentence expresses every dialect

    @property
    def dialects(self) -> tuple[str, ...]:
        return tuple(sorted(self.rules))


def _octo_rules() -> dict[str, dict[str, str]]:
    """Eight dialects from three binary substitution features.

    Each feature rewrites one trigger character two possible ways, and a
    dialect is one of the eight value combinations, so dialects that
    share feature values are mutually confusable whenever a sentence
    happens to miss a trigger.  Marker outputs never occur in base text
    (no doubled letters, no vowel clusters, no 'c'/'q' in the alphabet)
    and share no bigrams with each other.
    """
    rules = {}
    for i in range(8):
        rules[f"o{i}"] = {
            "k": "ch" if i & 1 else "qu",
            "s": "sh" if i & 2 else "zz",
            "a": "ou" if i & 4 else "ei",
        }
    return rules


SPECS: dict[str, FamilySpec] = {
    "tri": FamilySpec(
        name="tri",
        display_name="Trivallis",
        rules={
            "t0": {"k": "ch", "t": "tt", "a": "aa"},
            "t1": {"s": "sj", "d": "dd", "o": "oo"},
            "t2": {"p": "pf", "g": "gg", "e": "ee"},
        },
        n_groups=300,
        seeded_per_group=3,
        words=(5, 8),
        seed=101,
        require_triggers=True,
    ),
    "octo": FamilySpec(
        name="octo",
        display_name="Octomark",
        rules=_octo_rules(),
        n_groups=50,
        seeded_per_group=3,
        words=(4, 6),
        seed=202,
        require_triggers=False,
    ),
    "duo": FamilySpec(
        name="duo",
        display_name="Duoland",
        rules={
            "u0": {"k": "gg", "a": "au"},
            "u1": {"t": "zz", "o": "eu"},
        },
        n_groups=40,
        seeded_per_group=2,
        words=(4, 7),
        seed=303,
        require_triggers=True,
    ),
}


def apply_rules(text: str, rules: dict[str, str]) -> str:
    """Apply a dialect's character substitutions in one pass."""
    return "".join(rules.get(ch, ch) for ch in text)


def _word(rng: np.random.Generator) -> str:
    syllables = int(rng.integers(2, 4))
    out = []
    for _ in range(syllables):
        out.append(WEIGHTED_CONSONANTS[int(rng.integers(0, len(WEIGHTED_CONSONANTS)))])
        out.append(WEIGHTED_VOWELS[int(rng.integers(0, len(WEIGHTED_VOWELS)))])
    return "".join(out)


def _sentence(rng: np.random.Generator, spec: FamilySpec) -> str:
    lo, hi = spec.words
    for _ in range(200):
        n = int(rng.integers(lo, hi + 1))
        sentence = " ".join(_word(rng) for _ in range(n))
        if not spec.require_triggers:
            return sentence
        chars = set(sentence)
        if all(chars & set(rules) for rules in spec.rules.values()):
            return sentence
    raise RuntimeError("sentence sampling failed to cover every dialect")


def seed_corpus(spec: FamilySpec) -> list[dict]:
    """Parallel groups with seed variants for a subset of dialects each."""
    rng = np.random.default_rng(spec.seed)
    dialects = spec.dialects
    groups = []
    for i in range(spec.n_groups):
        standard = _sentence(rng, spec)
        k = min(spec.seeded_per_group, len(dialects))
        chosen = sorted(
            dialects[int(j)]
            for j in rng.choice(len(dialects), size=k, replace=False))
        groups.append({
            "group_id": f"{spec.name}-g{i:04d}",
            "standard": standard,
            "variants": [
                {"text": apply_rules(standard, spec.rules[d]), "labels": [d]}
                for d in chosen
            ],
        })
    return groups


BBOX = (0.0, 0.0, 6.0, 6.0)
RESOLUTION = 0.25
SQRT3 = 3.0 ** 0.5


def _cell_center(q: int, r: int) -> tuple[float, float]:
    return (BBOX[0] + RESOLUTION * SQRT3 * (q + r / 2.0),
            BBOX[1] + RESOLUTION * 1.5 * r)


def registry(spec: FamilySpec) -> dict:
    labels = []
    for i, label_id in enumerate(spec.dialects):
        labels.append({
            "label_id": label_id,
            "name": f"{spec.display_name} {i}",
            "affiliation": spec.name,
            "region": [f"{i}:0", f"{i}:1"],
        })
    return {
        "family": {
            "family_id": spec.name,
            "display_name": spec.display_name,
            "bounding_box": list(BBOX),
            "hex_resolution": RESOLUTION,
            "admin_divisions": [f"prov{i}" for i in range(len(spec.dialects))],
            "writing_direction": "LTR",
        },
        "labels": labels,
    }


def divisions(spec: FamilySpec) -> dict:
    """One square province per dialect, centred in its region."""
    out = []
    for i in range(len(spec.dialects)):
        lon, lat = _cell_center(i, 0)
        s = 0.05
        ring = [[lon - s, lat - s], [lon + s, lat - s], [lon + s, lat + s],
                [lon - s, lat + s], [lon - s, lat - s]]
        out.append({"division_id": f"prov{i}", "name": f"Province {i}",
                    "polygon": [ring]})
    return {"divisions": out}


def write_family(root: Path, name: str) -> Path:
    """Write registry.json, corpus.jsonl, divisions.json for one family."""
    spec = SPECS[name]
    target = root / name
    target.mkdir(parents=True, exist_ok=True)
    (target / "registry.json").write_text(
        json.dumps(registry(spec), indent=2, sort_keys=True) + "\n",
        encoding="utf-8")
    lines = [json.dumps(group, sort_keys=True) for group in seed_corpus(spec)]
    (target / "corpus.jsonl").write_text("\n".join(lines) + "\n",
                                         encoding="utf-8")
    (target / "divisions.json").write_text(
        json.dumps(divisions(spec), indent=2, sort_keys=True) + "\n",
        encoding="utf-8")
    return target


def bundled_root() -> Path:
    """The committed copy of the synthetic data inside the repository."""
    return Path(__file__).resolve().parents[2] / "data" / "synthetic"
