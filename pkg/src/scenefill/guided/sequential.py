"""Sequential per-segment inpainting over a pluggable text-prompted backend.

The fold starts from the masked image and paints one segment at a time:
I_n = backend(I_{n-1}, S_n, prompt(c_n)). After each call the result is
composited so nothing outside S_n can change, whatever the backend does.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from ..errors import DataError, ProviderError


class InpaintBackend(Protocol):
    def inpaint(self, image: np.ndarray, mask: np.ndarray,
                prompt: str) -> np.ndarray: ...


def prompt_paint_value(prompt: str) -> float:
    """Deterministic fill value in [0, 1]: sha256(prompt) mod 256 / 255."""
    digest = hashlib.sha256(prompt.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") % 256 / 255.0


@dataclass
class HashPaintBackend:
    """Mock backend painting every masked pixel with prompt_paint_value."""

    def inpaint(self, image, mask, prompt):
        out = np.array(image, copy=True)
        out[np.asarray(mask) > 0] = prompt_paint_value(prompt)
        return out


def class_to_prompt(class_id: int, phrases) -> str:
    """'a photo of ' + the configured noun phrase ('a dog', 'sky', ...)."""
    try:
        phrase = phrases[class_id]
    except (KeyError, IndexError):
        raise DataError(f"no prompt phrase configured for class {class_id}")
    return f"a photo of {phrase}"


def sequential_inpaint(image_masked: np.ndarray, segments,
                       backend: InpaintBackend, prompt_fn) -> np.ndarray:
    """Fold the backend over (segment mask, class) pairs in order.

    Segments must be pairwise disjoint; prompt_fn maps a class id to text.
    """
    segments = list(segments)
    if not segments:
        return np.array(image_masked, copy=True)
    h, w = image_masked.shape[:2]
    coverage = np.zeros((h, w), dtype=np.int32)
    for seg, _ in segments:
        seg = np.asarray(seg)
        if seg.shape != (h, w):
            raise DataError("segment mask shape mismatch")
        coverage += seg > 0
    if (coverage > 1).any():
        raise DataError("overlapping segment masks")

    img = np.array(image_masked, copy=True)
    for n, (seg, class_id) in enumerate(segments):
        seg = np.asarray(seg) > 0
        try:
            painted = backend.inpaint(img, seg, prompt_fn(class_id))
        except Exception as e:
            raise ProviderError(f"inpainting backend failed on segment {n}: {e}") from e
        sel = seg[..., None] if img.ndim == 3 else seg
        img = np.where(sel, painted, img)
    return img
