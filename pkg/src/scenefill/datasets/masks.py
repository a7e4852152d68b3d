"""Irregular hole masks: a filled rectangle plus thick scribble lines.

The mask is the union of the target box and line segments drawn between
points sampled in a band around the box perimeter. One extra segment ties
the scribble chain to the box center so the result is always a single
connected component (8-connectivity).
"""
from __future__ import annotations

import numpy as np

from ..boxes import Box
from ..errors import DataError

# Width of the sampling band outside the box perimeter, as a fraction of
# the box diagonal. Tunable; the source protocol only says "around the box".
BAND_FRACTION = 0.1


def _bresenham(p0, p1, shape) -> np.ndarray:
    """8-connected integer line between the pixels containing p0 and p1."""
    h, w = shape
    x0 = int(np.clip(np.floor(p0[0]), 0, w - 1))
    y0 = int(np.clip(np.floor(p0[1]), 0, h - 1))
    x1 = int(np.clip(np.floor(p1[0]), 0, w - 1))
    y1 = int(np.clip(np.floor(p1[1]), 0, h - 1))
    mask = np.zeros((h, w), dtype=np.uint8)
    dx, dy = abs(x1 - x0), -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    while True:
        mask[y0, x0] = 1
        if x0 == x1 and y0 == y1:
            break
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy
    return mask


def rasterize_segment(p0, p1, thickness_px: float, shape) -> np.ndarray:
    """Thick line: pixels within thickness/2 of the segment, plus a Bresenham
    backbone so the result stays connected even at thickness 1."""
    h, w = shape
    x0, y0 = float(p0[0]), float(p0[1])
    x1, y1 = float(p1[0]), float(p1[1])
    r = thickness_px / 2.0
    # restrict to the segment's padded bounding window
    cx0 = max(int(np.floor(min(x0, x1) - r)) - 1, 0)
    cx1 = min(int(np.ceil(max(x0, x1) + r)) + 2, w)
    cy0 = max(int(np.floor(min(y0, y1) - r)) - 1, 0)
    cy1 = min(int(np.ceil(max(y0, y1) + r)) + 2, h)
    mask = _bresenham(p0, p1, shape)
    if cx0 >= cx1 or cy0 >= cy1:
        return mask
    ys, xs = np.mgrid[cy0:cy1, cx0:cx1]
    px = xs + 0.5
    py = ys + 0.5
    dx, dy = x1 - x0, y1 - y0
    seg_len2 = dx * dx + dy * dy
    if seg_len2 == 0.0:
        dist2 = (px - x0) ** 2 + (py - y0) ** 2
    else:
        t = np.clip(((px - x0) * dx + (py - y0) * dy) / seg_len2, 0.0, 1.0)
        dist2 = (px - (x0 + t * dx)) ** 2 + (py - (y0 + t * dy)) ** 2
    mask[cy0:cy1, cx0:cx1] |= (dist2 <= r * r).astype(np.uint8)
    return mask


def _sample_band_points(box_px, n_points, band_px, shape, rng):
    """Points uniform in the ring between the box and its band expansion.

    Falls back to the box perimeter when the ring has no room inside the
    image (e.g. the box covers the whole frame).
    """
    h, w = shape
    bx0, by0, bx1, by1 = box_px
    ex0, ey0 = max(bx0 - band_px, 0.0), max(by0 - band_px, 0.0)
    ex1, ey1 = min(bx1 + band_px, float(w)), min(by1 + band_px, float(h))
    pts = []
    tries = 0
    while len(pts) < n_points and tries < 200 * n_points:
        x = rng.uniform(ex0, ex1)
        y = rng.uniform(ey0, ey1)
        tries += 1
        if bx0 < x < bx1 and by0 < y < by1:
            continue  # strictly inside the box: not in the band
        pts.append((x, y))
    while len(pts) < n_points:
        # perimeter fallback, parameterized by arc length
        per = 2.0 * ((bx1 - bx0) + (by1 - by0))
        s = rng.uniform(0.0, per)
        if s < (bx1 - bx0):
            pts.append((bx0 + s, by0))
        elif s < (bx1 - bx0) + (by1 - by0):
            pts.append((bx1, by0 + (s - (bx1 - bx0))))
        elif s < 2 * (bx1 - bx0) + (by1 - by0):
            pts.append((bx1 - (s - (bx1 - bx0) - (by1 - by0)), by1))
        else:
            pts.append((bx0, by1 - (s - 2 * (bx1 - bx0) - (by1 - by0))))
    return pts


def generate_irregular_mask(box: Box, image_size, n_points: int,
                            thickness_px: int,
                            rng: np.random.Generator) -> np.ndarray:
    """Union of the filled box and a thick scribble chain around it.

    Deterministic given rng state; always a single connected component.
    """
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    if thickness_px < 1:
        raise ValueError("thickness_px must be >= 1")
    h, w = image_size
    if box.w * w < 1.0 or box.h * h < 1.0:
        raise DataError(f"degenerate box at {h}x{w}: {box}")

    px0, py0, px1, py1 = box.to_pixels(h, w)
    mask = np.zeros((h, w), dtype=np.uint8)
    mask[py0:py1, px0:px1] = 1

    diag = float(np.hypot(px1 - px0, py1 - py0))
    band_px = max(BAND_FRACTION * diag, 1.0)
    pts = _sample_band_points((float(px0), float(py0), float(px1), float(py1)),
                              n_points, band_px, (h, w), rng)

    segments = list(zip(pts[:-1], pts[1:]))
    center = ((px0 + px1) / 2.0, (py0 + py1) / 2.0)
    segments.append((pts[0], center))  # anchor the chain to the box
    for p0, p1 in segments:
        mask |= rasterize_segment(p0, p1, float(thickness_px), (h, w))
    return mask
