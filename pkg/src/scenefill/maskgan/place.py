"""Binarize a generated silhouette and paste it into the missing box."""
from __future__ import annotations

import numpy as np

from ..boxes import Box
from ..errors import DataError
from ..imaging import resize_nearest


def place_instance_mask(raw: np.ndarray, missing_box: Box, canvas_hw,
                        threshold: float = 0.0) -> np.ndarray:
    """raw >= threshold, nearest-resized to the box extent, 0 elsewhere."""
    if not -1.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (-1, 1)")
    h, w = canvas_hw
    if missing_box.w * w < 1.0 or missing_box.h * h < 1.0:
        raise DataError(f"degenerate box on a {h}x{w} canvas: {missing_box}")
    x0, y0, x1, y1 = missing_box.to_pixels(h, w)
    binar = (np.asarray(raw) >= threshold).astype(np.uint8)
    patch = resize_nearest(binar, (y1 - y0, x1 - x0))
    canvas = np.zeros((h, w), dtype=np.uint8)
    canvas[y0:y1, x0:x1] = patch
    return canvas
