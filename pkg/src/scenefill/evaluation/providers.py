"""Pluggable model providers and their deterministic mocks.

Real pretrained encoders/detectors/captioners are deployment adapters;
everything here is hermetic. Provider protocols:

  EmbeddingProvider: embed_image(image) -> vector, embed_text(str) -> vector
  DetectorProvider:  detect(image) -> list[Detection]
  CaptionProvider:   caption(image) -> str
  PerceptualProvider: features(torch NCHW) -> list of feature tensors
"""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import numpy as np

from ..boxes import Box
from ..errors import ProviderError
from ..imaging import image_digest


@dataclass(frozen=True)
class Detection:
    class_id: int
    box: Box
    score: float = 1.0


class EmbeddingProvider(Protocol):
    name: str
    def embed_image(self, image: np.ndarray) -> np.ndarray: ...
    def embed_text(self, text: str) -> np.ndarray: ...


class DetectorProvider(Protocol):
    name: str
    def detect(self, image: np.ndarray) -> list: ...


class CaptionProvider(Protocol):
    name: str
    def caption(self, image: np.ndarray) -> str: ...


@dataclass
class HashEmbeddingProvider:
    """Unit vectors derived from content hashes; stable across processes."""
    dim: int = 16
    name: str = "mock:hash"

    def _vec(self, digest: bytes) -> np.ndarray:
        rng = np.random.default_rng(int.from_bytes(digest[:8], "big"))
        v = rng.standard_normal(self.dim)
        return v / np.linalg.norm(v)

    def embed_image(self, image):
        return self._vec(hashlib.sha256(
            np.ascontiguousarray(image).tobytes()).digest())

    def embed_text(self, text):
        return self._vec(hashlib.sha256(text.encode("utf-8")).digest())


@dataclass
class MeanColorEmbeddingProvider:
    """Images embed as their mean RGB; captions via a configured table.

    Lets tests construct fixtures where captions are 'closer' to scenes
    whose colors match what the caption describes.
    """
    text_table: dict = field(default_factory=dict)
    name: str = "mock:mean-color"

    def embed_image(self, image):
        v = np.asarray(image, dtype=np.float64).reshape(-1, 3).mean(axis=0)
        return v + 1e-9   # keep strictly nonzero

    def embed_text(self, text):
        if text not in self.text_table:
            raise ProviderError(f"no embedding configured for caption {text!r}")
        return np.asarray(self.text_table[text], dtype=np.float64)


@dataclass
class StaticDetector:
    """Returns a fixed detection list, or a per-image-digest mapping."""
    detections: list = field(default_factory=list)
    by_digest: dict = field(default_factory=dict)
    name: str = "mock:static-detector"

    def detect(self, image):
        d = image_digest(np.asarray(image))
        if d in self.by_digest:
            return list(self.by_digest[d])
        return list(self.detections)


@dataclass
class StaticCaptioner:
    text: str = "a photo"
    by_digest: dict = field(default_factory=dict)
    name: str = "mock:static-captioner"
    calls: int = 0

    def caption(self, image):
        self.calls += 1
        return self.by_digest.get(image_digest(np.asarray(image)), self.text)


class CaptionCache:
    """File-backed caption store keyed by image content hash."""

    def __init__(self, path):
        self.path = Path(path)
        self._data: dict[str, str] = {}
        if self.path.exists():
            with open(self.path) as f:
                self._data = json.load(f)

    def _flush(self):
        tmp = self.path.with_suffix(".tmp")
        with open(tmp, "w") as f:
            json.dump(self._data, f, indent=0, sort_keys=True)
        os.replace(tmp, self.path)

    def get(self, key: str) -> str | None:
        return self._data.get(key)

    def put(self, key: str, caption: str) -> None:
        self._data[key] = caption
        self._flush()

    def __len__(self):
        return len(self._data)


def caption_of(image: np.ndarray, captioner, cache: CaptionCache | None = None) -> str:
    """Provider pass-through with optional content-hash caching."""
    key = image_digest(np.asarray(image))
    if cache is not None:
        hit = cache.get(key)
        if hit is not None:
            return hit
    try:
        text = captioner.caption(image)
    except Exception as e:
        raise ProviderError(f"caption provider failed: {e}") from e
    if cache is not None:
        cache.put(key, text)
    return text
