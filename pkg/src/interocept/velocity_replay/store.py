"""Embedding store keyed by context, replay stitching, model file I/O.

A model file bundles everything replay needs: encoder weights, decoder
weights, the embedding store and the windowing metadata, all as row-major
JSON arrays so the file stays language-neutral.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import UnknownContext
from ..tracking import VelocityProfile
from .decoder import DecoderParams, decode
from .encoder import GruParams, _TENSORS


@dataclass(frozen=True)
class Embedding:
    vector: tuple[float, ...]
    context_key: str
    order_index: int

    def __post_init__(self):
        object.__setattr__(self, "vector", tuple(float(v) for v in self.vector))


@dataclass
class StoreMeta:
    window: int
    stride: int
    sample_rate_hz: float
    dimension: int


@dataclass
class EmbeddingStore:
    meta: StoreMeta
    by_context: dict[str, list[Embedding]] = field(default_factory=dict)

    def add(self, embedding: Embedding) -> None:
        if len(embedding.vector) != self.meta.dimension:
            raise ValueError(
                f"embedding dim {len(embedding.vector)} != store dim {self.meta.dimension}")
        bucket = self.by_context.setdefault(embedding.context_key, [])
        if bucket and embedding.order_index <= bucket[-1].order_index:
            raise ValueError("order_index must be strictly increasing per context")
        bucket.append(embedding)

    def contexts(self) -> list[str]:
        return sorted(self.by_context)

    def to_json_dict(self) -> dict:
        return {
            "meta": {
                "window": self.meta.window,
                "stride": self.meta.stride,
                "sample_rate_hz": self.meta.sample_rate_hz,
                "dimension": self.meta.dimension,
            },
            "embeddings": [
                {"context": key, "order_index": e.order_index, "vector": list(e.vector)}
                for key in self.contexts()
                for e in self.by_context[key]
            ],
        }


def store_from_dict(data: dict) -> EmbeddingStore:
    m = data["meta"]
    store = EmbeddingStore(
        StoreMeta(m["window"], m["stride"], m["sample_rate_hz"], m["dimension"]))
    for entry in data["embeddings"]:
        store.add(Embedding(entry["vector"], entry["context"], entry["order_index"]))
    return store


def replay(store: EmbeddingStore, decoder: DecoderParams, context_key: str) -> VelocityProfile:
    """Decode a context's embeddings and overlap-average them into a profile.

    Output length is W + stride*(k-1); each position averages every decoded
    window covering it, then clamps at zero since these are forward drive
    speeds.
    """
    if context_key not in store.by_context:
        raise UnknownContext(context_key)
    embeddings = store.by_context[context_key]
    w, stride = store.meta.window, store.meta.stride
    length = w + stride * (len(embeddings) - 1)
    sums = np.zeros(length)
    counts = np.zeros(length)
    for slot, embedding in enumerate(embeddings):
        decoded = decode(decoder, embedding.vector)
        start = slot * stride
        sums[start:start + w] += decoded
        counts[start:start + w] += 1.0
    values = np.maximum(0.0, sums / counts)
    return VelocityProfile(store.meta.sample_rate_hz, tuple(float(v) for v in values))


def _weights_to_json(tensors: dict[str, np.ndarray]) -> dict:
    return {
        name: {"shape": list(t.shape), "data": t.ravel().tolist()}
        for name, t in tensors.items()
    }


def _weights_from_json(data: dict) -> dict[str, np.ndarray]:
    return {
        name: np.asarray(entry["data"], dtype=float).reshape(entry["shape"])
        for name, entry in data.items()
    }


def save_model(path: str, encoder: GruParams, decoder: DecoderParams,
               store: EmbeddingStore, hyper: dict | None = None) -> None:
    payload = {
        "encoder": _weights_to_json(encoder.tensors()),
        "decoder": _weights_to_json({
            "l1": decoder.l1, "b1": decoder.b1, "l2": decoder.l2, "b2": decoder.b2,
        }),
        "store": store.to_json_dict(),
        "hyper": hyper or {},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_model(path: str) -> tuple[GruParams, DecoderParams, EmbeddingStore, dict]:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    enc = _weights_from_json(payload["encoder"])
    encoder = GruParams(*(enc[name] for name in _TENSORS))
    dec = _weights_from_json(payload["decoder"])
    decoder = DecoderParams(dec["l1"], dec["b1"], dec["l2"], dec["b2"])
    return encoder, decoder, store_from_dict(payload["store"]), payload.get("hyper", {})
