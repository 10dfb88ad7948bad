"""Linear dialect classifier over hashed character and word n-grams.

The model is a bag-of-features text classifier in the fastText style,
self-contained on numpy: feature ids are FNV-1a hashes of in-word
character n-grams (with ``<`` ``>`` boundary sentinels) and word n-grams,
reduced modulo a power-of-two bucket count.  A text embeds as the mean of
its buckets' embedding rows; a bias-free linear projection and softmax
give the label distribution.  Training is per-example SGD on multinomial
log loss with a linearly decaying learning rate and seeded per-epoch
shuffles, so identical inputs produce byte-identical serialized models.

Model file layout: ``DLG1`` magic, little-endian uint32 header length,
JSON header (config, label index, matrix shapes), then the embedding and
projection matrices as little-endian float32, C order.
"""
from __future__ import annotations

import hashlib
import json
import math
import struct
import time
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, NamedTuple, Optional, Sequence, Union

import numpy as np

from .errors import (
    EmptyTestSet,
    EmptyTrainingSet,
    NoFeasibleModel,
    SingleClassCorpus,
    UnknownLabel,
)
from .store import CorpusView

MAGIC = b"DLG1"
FORMAT_VERSION = 1

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def _fnv1a(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


@dataclass(frozen=True)
class ModelConfig:
    char_ngram_min: int = 1
    char_ngram_max: int = 3
    word_ngram_max: int = 1
    hash_buckets: int = 4096
    embedding_dim: int = 4
    learning_rate: float = 0.5
    epochs: int = 5
    seed: int = 0

    def __post_init__(self):
        if not (1 <= self.char_ngram_min <= self.char_ngram_max <= 6):
            raise ValueError("char n-gram range must satisfy 1 <= min <= max <= 6")
        if self.word_ngram_max not in (0, 1, 2):
            raise ValueError("word_ngram_max must be 0, 1 or 2")
        b = self.hash_buckets
        if b < 4096 or (b & (b - 1)) != 0:
            raise ValueError("hash_buckets must be a power of two >= 4096")
        if self.embedding_dim < 4:
            raise ValueError("embedding_dim must be >= 4")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not (0 <= self.seed < (1 << 64)):
            raise ValueError("seed must fit in 64 bits")

    def to_dict(self) -> dict:
        return {
            "char_ngram_min": self.char_ngram_min,
            "char_ngram_max": self.char_ngram_max,
            "word_ngram_max": self.word_ngram_max,
            "hash_buckets": self.hash_buckets,
            "embedding_dim": self.embedding_dim,
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "seed": self.seed,
        }

    @staticmethod
    def from_dict(doc: dict) -> "ModelConfig":
        return ModelConfig(**doc)


class Example(NamedTuple):
    variant_id: str
    text: str
    label: str                 # training target / gold for this example
    label_set: frozenset[str]  # the variant's full label set


def featurize(text: str, config: ModelConfig) -> list[int]:
    """Hashed feature multiset: char n-grams within words, plus word n-grams."""
    features: list[int] = []
    if not text:
        return features
    mask = config.hash_buckets - 1
    words = text.split(" ")
    for word in words:
        padded = f"<{word}>"
        for n in range(config.char_ngram_min, config.char_ngram_max + 1):
            for i in range(len(padded) - n + 1):
                features.append(_fnv1a(padded[i:i + n].encode("utf-8")) & mask)
    for n in range(1, config.word_ngram_max + 1):
        for i in range(len(words) - n + 1):
            token = " ".join(words[i:i + n])
            features.append(_fnv1a(token.encode("utf-8")) & mask)
    return features


@dataclass(frozen=True)
class SplitResult:
    train: tuple[Example, ...]
    test: tuple[Example, ...]
    too_small: tuple[str, ...]  # labels with < 2 variants, forced into train
    seed: int


def split_train_test(view: CorpusView, ratio: float = 0.8,
                     seed: int = 0) -> SplitResult:
    """Stratified, variant-disjoint split into train/test example sets.

    Variants are stratified by their lexicographically first label; all
    examples expanded from one variant (one per label it carries) land on
    the same side, so no text straddles the split.
    """
    if not (0.0 < ratio < 1.0):
        raise ValueError("ratio must be in (0, 1)")
    strata: dict[str, list[tuple[str, str, frozenset[str]]]] = {}
    for group in view.groups:
        for variant in group.variants:
            key = min(variant.labels)
            strata.setdefault(key, []).append(
                (variant.variant_id, variant.text, variant.labels))

    rng = np.random.default_rng(seed)
    train: list[Example] = []
    test: list[Example] = []
    too_small: list[str] = []
    for key in sorted(strata):
        variants = sorted(strata[key])
        order = rng.permutation(len(variants))
        if len(variants) < 2:
            too_small.append(key)
            n_train = len(variants)
        else:
            n_train = math.floor(len(variants) * ratio)
        for pos, idx in enumerate(order):
            vid, text, labels = variants[idx]
            side = train if pos < n_train else test
            for label in sorted(labels):
                side.append(Example(vid, text, label, labels))
    return SplitResult(tuple(train), tuple(test), tuple(too_small), seed)


@dataclass(frozen=True, eq=False)
class TrainedModel:
    config: ModelConfig
    label_index: tuple[str, ...]
    embeddings: np.ndarray   # (hash_buckets, dim) float32
    projection: np.ndarray   # (dim, |K|) float32
    training_loss: tuple[float, ...] = ()  # mean online loss per epoch

    @cached_property
    def _serialized(self) -> bytes:
        return serialize_model(self)

    @property
    def byte_size(self) -> int:
        return len(self._serialized)

    @property
    def version(self) -> str:
        return hashlib.sha1(self._serialized).hexdigest()[:12]


def zero_model(label_index: Sequence[str],
               config: Optional[ModelConfig] = None) -> TrainedModel:
    """All-zero parameters: predicts the uniform distribution everywhere."""
    config = config or ModelConfig()
    return TrainedModel(
        config=config,
        label_index=tuple(label_index),
        embeddings=np.zeros((config.hash_buckets, config.embedding_dim),
                            dtype=np.float32),
        projection=np.zeros((config.embedding_dim, len(label_index)),
                            dtype=np.float32),
    )


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    e = np.exp(shifted)
    return e / e.sum()


def train(examples: Sequence[Example], config: ModelConfig,
          label_index: Optional[Sequence[str]] = None) -> TrainedModel:
    """SGD on multinomial log loss over the hashed bag-of-features model."""
    if not examples:
        raise EmptyTrainingSet()
    observed = {e.label for e in examples}
    if label_index is None:
        label_index = sorted(observed)
    label_index = tuple(label_index)
    if len(label_index) < 2 or len(observed) < 2:
        raise SingleClassCorpus(f"{len(observed)} distinct label(s) in training data")
    label_pos = {label: i for i, label in enumerate(label_index)}
    for e in examples:
        if e.label not in label_pos:
            raise UnknownLabel(e.label)

    dim = config.embedding_dim
    rng = np.random.default_rng(config.seed)
    emb = (rng.random((config.hash_buckets, dim)) * 2.0 - 1.0) / dim
    proj = np.zeros((dim, len(label_index)))

    feature_cache: dict[str, np.ndarray] = {}
    feats: list[np.ndarray] = []
    targets = np.empty(len(examples), dtype=np.int64)
    for i, e in enumerate(examples):
        ids = feature_cache.get(e.text)
        if ids is None:
            ids = np.asarray(featurize(e.text, config), dtype=np.int64)
            feature_cache[e.text] = ids
        feats.append(ids)
        targets[i] = label_pos[e.label]

    total_steps = config.epochs * len(examples)
    step = 0
    epoch_losses: list[float] = []
    for _ in range(config.epochs):
        order = rng.permutation(len(examples))
        loss_sum = 0.0
        for idx in order:
            ids = feats[idx]
            if ids.size:
                h = emb[ids].mean(axis=0)
            else:
                h = np.zeros(dim)
            p = _softmax(h @ proj)
            loss_sum += -math.log(max(p[targets[idx]], 1e-12))
            lr = config.learning_rate * (1.0 - step / total_steps)
            step += 1
            err = p.copy()
            err[targets[idx]] -= 1.0
            if ids.size:
                grad_h = proj @ err
                np.add.at(emb, ids, -lr / ids.size * grad_h)
            proj -= lr * np.outer(h, err)
        epoch_losses.append(loss_sum / len(examples))

    return TrainedModel(
        config=config,
        label_index=label_index,
        embeddings=emb.astype("<f4"),
        projection=proj.astype("<f4"),
        training_loss=tuple(epoch_losses),
    )


def predict(model: TrainedModel, text: str) -> dict[str, float]:
    """Softmax label distribution; empty-feature texts embed as zero."""
    ids = featurize(text, model.config)
    if ids:
        h = model.embeddings[np.asarray(ids, dtype=np.int64)].astype(np.float64).mean(axis=0)
    else:
        h = np.zeros(model.config.embedding_dim)
    p = _softmax(h @ model.projection.astype(np.float64))
    return {label: float(p[i]) for i, label in enumerate(model.label_index)}


def top_prediction(dist: dict[str, float]) -> str:
    """Argmax with deterministic ties (first key in iteration order wins)."""
    best, best_p = None, -1.0
    for label, p in dist.items():
        if p > best_p:
            best, best_p = label, p
    assert best is not None
    return best


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class EvalReport:
    micro_f1: float
    macro_f1: float
    per_class: dict[str, ClassMetrics]
    split_seed: int


def evaluate(model: TrainedModel, test: Sequence[Example],
             split_seed: int = 0) -> EvalReport:
    """Single-prediction scoring; multi-label gold accepts any of its labels.

    Per-class counts attribute a hit or miss to the example's own gold
    label and a false positive to the wrongly predicted one, so supports
    always sum to the test-set size and micro-F1 equals accuracy.
    """
    if not test:
        raise EmptyTestSet()
    tp: dict[str, int] = {}
    fn: dict[str, int] = {}
    fp: dict[str, int] = {}
    for label in model.label_index:
        tp[label] = fn[label] = fp[label] = 0
    for e in test:
        pred = top_prediction(predict(model, e.text))
        if pred in e.label_set:
            tp[e.label] += 1
        else:
            fn[e.label] += 1
            fp[pred] += 1

    per_class: dict[str, ClassMetrics] = {}
    f1_sum = 0.0
    for label in model.label_index:
        support = tp[label] + fn[label]
        precision = tp[label] / (tp[label] + fp[label]) if tp[label] + fp[label] else 0.0
        recall = tp[label] / support if support else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[label] = ClassMetrics(precision, recall, f1, support)
        f1_sum += f1
    micro = sum(tp.values()) / len(test)
    return EvalReport(
        micro_f1=micro,
        macro_f1=f1_sum / len(model.label_index),
        per_class=per_class,
        split_seed=split_seed,
    )


# -- serialization ------------------------------------------------------------

def _header_bytes(config: ModelConfig, label_index: Sequence[str]) -> bytes:
    header = {
        "format_version": FORMAT_VERSION,
        "config": config.to_dict(),
        "label_index": list(label_index),
        "shapes": {
            "embeddings": [config.hash_buckets, config.embedding_dim],
            "projection": [config.embedding_dim, len(label_index)],
        },
    }
    return json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")


def serialized_size(config: ModelConfig, label_index: Sequence[str]) -> int:
    """Exact model-file size for a config, without training anything."""
    n_floats = config.hash_buckets * config.embedding_dim \
        + config.embedding_dim * len(label_index)
    return len(MAGIC) + 4 + len(_header_bytes(config, label_index)) + 4 * n_floats


def serialize_model(model: TrainedModel) -> bytes:
    head = _header_bytes(model.config, model.label_index)
    return b"".join([
        MAGIC,
        struct.pack("<I", len(head)),
        head,
        np.ascontiguousarray(model.embeddings, dtype="<f4").tobytes(),
        np.ascontiguousarray(model.projection, dtype="<f4").tobytes(),
    ])


def load_model(source: Union[bytes, Path, str]) -> TrainedModel:
    data = source if isinstance(source, bytes) else Path(source).read_bytes()
    if data[:4] != MAGIC:
        raise ValueError("not a model file (bad magic)")
    (head_len,) = struct.unpack_from("<I", data, 4)
    header = json.loads(data[8:8 + head_len].decode("utf-8"))
    if header["format_version"] != FORMAT_VERSION:
        raise ValueError(f"unsupported model format {header['format_version']}")
    config = ModelConfig.from_dict(header["config"])
    e_shape = tuple(header["shapes"]["embeddings"])
    p_shape = tuple(header["shapes"]["projection"])
    offset = 8 + head_len
    n_emb = e_shape[0] * e_shape[1]
    n_proj = p_shape[0] * p_shape[1]
    emb = np.frombuffer(data, dtype="<f4", count=n_emb, offset=offset).reshape(e_shape)
    proj = np.frombuffer(data, dtype="<f4", count=n_proj,
                         offset=offset + 4 * n_emb).reshape(p_shape)
    return TrainedModel(
        config=config,
        label_index=tuple(header["label_index"]),
        embeddings=emb.copy(),
        projection=proj.copy(),
    )


# -- autotune ------------------------------------------------------------------

MINIMAL_CONFIG = ModelConfig(
    char_ngram_min=1, char_ngram_max=2, word_ngram_max=1,
    hash_buckets=4096, embedding_dim=4, learning_rate=0.5, epochs=5,
)


@dataclass(frozen=True)
class AutotuneResult:
    config: ModelConfig
    model: TrainedModel
    report: EvalReport
    candidates_tried: int
    elapsed_s: float


def _sample_config(rng: np.random.Generator, max_bytes: int,
                   label_index: Sequence[str]) -> Optional[ModelConfig]:
    lo = int(rng.integers(1, 3))
    hi = int(rng.integers(lo, min(6, lo + 4) + 1))
    config = ModelConfig(
        char_ngram_min=lo,
        char_ngram_max=hi,
        word_ngram_max=int(rng.integers(1, 3)),
        hash_buckets=1 << int(rng.integers(12, 18)),
        embedding_dim=int(rng.choice([4, 8, 16, 32, 64])),
        learning_rate=float(np.exp(rng.uniform(np.log(0.05), np.log(1.0)))),
        epochs=int(rng.integers(3, 16)),
        seed=int(rng.integers(0, 1 << 63)),
    )
    if serialized_size(config, label_index) > max_bytes:
        return None  # discarded before any training
    return config


def autotune(view: CorpusView, max_model_bytes: int = 2_097_152, *,
             time_budget_s: Optional[float] = None,
             max_candidates: Optional[int] = None,
             seed: int = 0, ratio: float = 0.8) -> AutotuneResult:
    """Seeded random hyperparameter search under size and budget caps.

    Every candidate is scored on the same internal 80/20 validation split;
    configs whose exact serialized size would exceed ``max_model_bytes``
    are discarded untrained.  The minimal fallback config is always tried
    first, so a result exists as soon as one candidate fits the cap.  Use
    ``max_candidates`` for deterministic runs, ``time_budget_s`` for
    wall-clock-bounded ones (both may be given; whichever ends first).
    """
    if time_budget_s is None and max_candidates is None:
        raise ValueError("need a time or candidate budget")
    if time_budget_s is not None and time_budget_s <= 0:
        raise ValueError("time budget must be positive")
    if max_candidates is not None and max_candidates < 1:
        raise ValueError("candidate budget must be >= 1")
    label_index = tuple(sorted(view.label_set))
    if len(label_index) < 2:
        raise SingleClassCorpus(f"{len(label_index)} label(s) in corpus")

    minimal = ModelConfig(**{**MINIMAL_CONFIG.to_dict(), "seed": seed & ((1 << 63) - 1)})
    if serialized_size(minimal, label_index) > max_model_bytes:
        raise NoFeasibleModel(
            f"minimal model needs {serialized_size(minimal, label_index)} bytes, "
            f"cap is {max_model_bytes}")

    split = split_train_test(view, ratio=ratio, seed=seed)
    rng = np.random.default_rng(seed)
    started = time.monotonic()
    best: Optional[tuple[float, ModelConfig, TrainedModel, EvalReport]] = None
    tried = 0

    def out_of_budget() -> bool:
        if max_candidates is not None and tried >= max_candidates:
            return True
        if time_budget_s is not None and time.monotonic() - started >= time_budget_s:
            return True
        return False

    config: Optional[ModelConfig] = minimal
    while True:
        if config is not None:
            model = train(split.train, config, label_index)
            report = evaluate(model, split.test, split_seed=seed)
            tried += 1
            if best is None or report.micro_f1 > best[0]:
                best = (report.micro_f1, config, model, report)
        if out_of_budget():
            break
        config = _sample_config(rng, max_model_bytes, label_index)

    assert best is not None
    _, config, model, report = best
    return AutotuneResult(config, model, report, tried, time.monotonic() - started)


def examples_from_view(view: CorpusView) -> list[Example]:
    """All (variant, label) pairs in a corpus view, in canonical order."""
    out = []
    for group in view.groups:
        for variant in group.variants:
            for label in sorted(variant.labels):
                out.append(Example(variant.variant_id, variant.text, label,
                                   variant.labels))
    return out
