"""Axis-aligned boxes in normalized (cx, cy, w, h) form.

All coordinates are relative to the current image frame and live in [0, 1].
Construction clips corners back into the unit square, so a box that pokes
outside the frame is shrunk rather than rejected.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_EPS = 1e-9


@dataclass(frozen=True)
class Box:
    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self):
        if not all(np.isfinite([self.cx, self.cy, self.w, self.h])):
            raise ValueError(f"non-finite box: {self}")
        if not (0.0 <= self.cx <= 1.0 and 0.0 <= self.cy <= 1.0):
            raise ValueError(f"box center outside [0,1]: {self}")
        if not (0.0 < self.w <= 1.0 and 0.0 < self.h <= 1.0):
            raise ValueError(f"box size outside (0,1]: {self}")
        x0, y0, x1, y1 = self.to_xyxy()
        if x0 < -_EPS or y0 < -_EPS or x1 > 1.0 + _EPS or y1 > 1.0 + _EPS:
            raise ValueError(f"box corners outside [0,1]: {self}")

    @classmethod
    def from_xyxy(cls, x0: float, y0: float, x1: float, y1: float) -> "Box":
        """Build from corner coordinates, clipping into the unit square."""
        x0, x1 = max(0.0, min(x0, x1)), min(1.0, max(x0, x1))
        y0, y1 = max(0.0, min(y0, y1)), min(1.0, max(y0, y1))
        w, h = x1 - x0, y1 - y0
        if w <= 0.0 or h <= 0.0:
            raise ValueError(f"degenerate box after clipping: ({x0},{y0},{x1},{y1})")
        return cls((x0 + x1) / 2.0, (y0 + y1) / 2.0, w, h)

    @classmethod
    def from_pixel_rect(cls, x0: int, y0: int, x1: int, y1: int,
                        height: int, width: int) -> "Box":
        """From a half-open pixel rectangle [x0,x1) x [y0,y1)."""
        return cls.from_xyxy(x0 / width, y0 / height, x1 / width, y1 / height)

    def to_xyxy(self) -> tuple[float, float, float, float]:
        return (self.cx - self.w / 2.0, self.cy - self.h / 2.0,
                self.cx + self.w / 2.0, self.cy + self.h / 2.0)

    def to_pixels(self, height: int, width: int) -> tuple[int, int, int, int]:
        """Half-open pixel rectangle (x0, y0, x1, y1), at least 1 px each way."""
        x0, y0, x1, y1 = self.to_xyxy()
        px0 = int(np.clip(np.floor(x0 * width), 0, width - 1))
        py0 = int(np.clip(np.floor(y0 * height), 0, height - 1))
        px1 = int(np.clip(np.ceil(x1 * width), px0 + 1, width))
        py1 = int(np.clip(np.ceil(y1 * height), py0 + 1, height))
        return px0, py0, px1, py1

    def area(self) -> float:
        return self.w * self.h

    def as_vector(self) -> np.ndarray:
        return np.array([self.cx, self.cy, self.w, self.h], dtype=np.float64)

    def translate(self, dx: float, dy: float) -> "Box":
        """Shift without clipping; raises if the result leaves the frame."""
        return Box(self.cx + dx, self.cy + dy, self.w, self.h)

    def intersection_area(self, other: "Box") -> float:
        ax0, ay0, ax1, ay1 = self.to_xyxy()
        bx0, by0, bx1, by1 = other.to_xyxy()
        iw = min(ax1, bx1) - max(ax0, bx0)
        ih = min(ay1, by1) - max(ay0, by0)
        return max(iw, 0.0) * max(ih, 0.0)

    def iou(self, other: "Box") -> float:
        inter = self.intersection_area(other)
        union = self.area() + other.area() - inter
        return inter / union if union > 0 else 0.0


def iou_pixels(a: tuple[int, int, int, int], b: tuple[int, int, int, int]) -> float:
    """IoU of two half-open pixel rectangles."""
    iw = min(a[2], b[2]) - max(a[0], b[0])
    ih = min(a[3], b[3]) - max(a[1], b[1])
    inter = max(iw, 0) * max(ih, 0)
    area_a = (a[2] - a[0]) * (a[3] - a[1])
    area_b = (b[2] - b[0]) * (b[3] - b[1])
    union = area_a + area_b - inter
    return inter / union if union > 0 else 0.0


def mask_tight_box(mask: np.ndarray) -> tuple[int, int, int, int]:
    """Half-open pixel bounding rectangle (x0, y0, x1, y1) of a binary mask."""
    ys, xs = np.nonzero(mask)
    if len(ys) == 0:
        raise ValueError("empty mask has no bounding box")
    return int(xs.min()), int(ys.min()), int(xs.max()) + 1, int(ys.max()) + 1
