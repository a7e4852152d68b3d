"""Small image helpers shared by the data pipeline and the networks."""
from __future__ import annotations

import hashlib

import numpy as np
import torch


def resize_nearest(arr: np.ndarray, out_hw) -> np.ndarray:
    """Nearest-neighbor resize via source index floor(i * src / dst)."""
    oh, ow = out_hw
    h, w = arr.shape[:2]
    rows = np.floor(np.arange(oh) * (h / oh)).astype(np.int64)
    cols = np.floor(np.arange(ow) * (w / ow)).astype(np.int64)
    return arr[rows][:, cols]


def resize_bilinear(img: np.ndarray, out_hw) -> np.ndarray:
    """Bilinear resize of an (H, W, C) or (H, W) float image."""
    squeeze = img.ndim == 2
    if squeeze:
        img = img[..., None]
    t = torch.from_numpy(np.ascontiguousarray(img.astype(np.float32)))
    t = t.permute(2, 0, 1).unsqueeze(0)
    out = torch.nn.functional.interpolate(
        t, size=tuple(out_hw), mode="bilinear", align_corners=False)
    res = out.squeeze(0).permute(1, 2, 0).numpy()
    return res[..., 0] if squeeze else res


def to_uint8(img: np.ndarray) -> np.ndarray:
    """[0,1] float image to uint8 with round-half-away rounding."""
    return np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)


def from_uint8(img: np.ndarray) -> np.ndarray:
    return img.astype(np.float32) / 255.0


def image_digest(img: np.ndarray) -> str:
    """Stable content hash used for caption caching and provenance."""
    arr = np.ascontiguousarray(img)
    h = hashlib.sha256()
    h.update(str(arr.shape).encode())
    h.update(str(arr.dtype).encode())
    h.update(arr.tobytes())
    return h.hexdigest()
