"""Scribble corruption of clean label maps for self-supervised restoration."""
from __future__ import annotations

import numpy as np

from ..boxes import Box
from ..errors import DataError
from ..datasets.masks import generate_irregular_mask
from ..labelmap import LabelMap


def scribble_corrupt(label_map: LabelMap, coverage, rng: np.random.Generator,
                     *, n_points: int = 10, thickness_px: int = 5,
                     attempts: int = 300):
    """Overwrite an irregular region with UNKNOWN.

    coverage = (lo, hi) bounds the corrupted area fraction; the region is an
    irregular mask grown around a random interior box, re-drawn until the
    realized fraction lands inside the bounds. coverage = (0, 0) is the
    documented identity limit. Returns (corrupted map, corruption mask).
    """
    lo, hi = coverage
    if not (0.0 <= lo <= hi < 1.0):
        raise ValueError(f"bad coverage window ({lo}, {hi})")
    h, w = label_map.shape
    if hi == 0.0:
        return label_map.copy(), np.zeros((h, w), dtype=np.uint8)

    for _ in range(attempts):
        target = rng.uniform(max(lo, 1e-4), hi)
        # the box takes most of the area; scribble lines add the rest
        area = target * 0.8 * h * w
        aspect = rng.uniform(0.5, 2.0)
        bw = float(np.clip(np.sqrt(area * aspect), 2.0, 0.95 * w))
        bh = float(np.clip(area / bw, 2.0, 0.95 * h))
        cx = rng.uniform(bw / 2, w - bw / 2) / w
        cy = rng.uniform(bh / 2, h - bh / 2) / h
        box = Box(cx, cy, bw / w, bh / h)
        mask = generate_irregular_mask(box, (h, w), n_points, thickness_px, rng)
        frac = mask.mean()
        if lo <= frac <= hi:
            corrupted = label_map.copy()
            corrupted.labels[mask > 0] = label_map.unknown_id
            return corrupted, mask
    raise DataError(f"could not realize coverage in ({lo}, {hi}) "
                    f"after {attempts} attempts")
