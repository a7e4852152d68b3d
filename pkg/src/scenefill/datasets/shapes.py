"""Synthetic scenes of colored geometric shapes with exact labels.

Desk-scale stand-in for a panoptic dataset. Each scene has a sky/ground
background (two stuff classes) and a handful of shape instances (things).
The class of one designated instance -- always the LAST entry of
scene.instances -- is a deterministic function of the other instances'
classes (and optionally of the missing region's quadrant), so removing it
leaves a learnable inference problem with known ground truth.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..boxes import Box
from ..errors import ConfigError
from ..labelmap import ClassCatalog, LabelMap
from .crop import Instance

SKY, GROUND = 0, 1
N_STUFF = 2

_PALETTE = {
    "circle": (0.85, 0.25, 0.25),
    "square": (0.25, 0.75, 0.30),
    "triangle": (0.95, 0.80, 0.20),
    "diamond": (0.75, 0.30, 0.80),
    "cross": (0.25, 0.70, 0.80),
}


@dataclass
class ShapesConfig:
    image_size: int = 96
    shape_classes: tuple = ("circle", "square", "triangle", "diamond")
    class_probs: tuple | None = None      # context-shape marginals, uniform if None
    n_context: tuple = (2, 4)             # inclusive range of context shapes
    size_range: tuple = (0.18, 0.30)      # shape box side as fraction of image
    rule: str = "sum_mod"                 # or "sum_mod_quadrant"

    def __post_init__(self):
        for name in self.shape_classes:
            if name not in _PALETTE:
                raise ConfigError(f"unknown shape class {name!r}")
        if self.class_probs is not None:
            if len(self.class_probs) != len(self.shape_classes):
                raise ConfigError("class_probs length must match shape_classes")
            if abs(sum(self.class_probs) - 1.0) > 1e-9:
                raise ConfigError("class_probs must sum to 1")
        if self.rule not in ("sum_mod", "sum_mod_quadrant"):
            raise ConfigError(f"unknown rule {self.rule!r}")
        if not (1 <= self.n_context[0] <= self.n_context[1]):
            raise ConfigError("bad n_context range")

    @property
    def num_things(self) -> int:
        return len(self.shape_classes)

    def catalog(self) -> ClassCatalog:
        names = ("sky", "ground") + tuple(self.shape_classes)
        things = tuple(range(N_STUFF, N_STUFF + self.num_things))
        return ClassCatalog(names, things)

    def probs(self) -> np.ndarray:
        if self.class_probs is None:
            return np.full(self.num_things, 1.0 / self.num_things)
        return np.asarray(self.class_probs, dtype=np.float64)

    def target_rule(self, context_indices, missing_box: Box) -> int:
        """Thing index of the designated instance, given its context."""
        t = int(sum(context_indices)) % self.num_things
        if self.rule == "sum_mod_quadrant":
            quadrant = 2 * int(missing_box.cy >= 0.5) + int(missing_box.cx >= 0.5)
            t = (t + quadrant) % self.num_things
        return t


@dataclass
class InferencePair:
    """A missing-class inference example in classifier (thing-index) space."""
    visible: list[Instance]
    missing_box: Box
    target: int


def _shape_raster(name: str, h: int, w: int, box_px) -> np.ndarray:
    x0, y0, x1, y1 = box_px
    ys, xs = np.mgrid[0:h, 0:w]
    cx, cy = (x0 + x1) / 2.0, (y0 + y1) / 2.0
    a, b = max((x1 - x0) / 2.0, 0.5), max((y1 - y0) / 2.0, 0.5)
    px, py = xs + 0.5, ys + 0.5
    if name == "circle":
        return ((px - cx) / a) ** 2 + ((py - cy) / b) ** 2 <= 1.0
    if name == "square":
        return (px >= x0) & (px <= x1) & (py >= y0) & (py <= y1)
    if name == "triangle":  # apex at top center, base along the bottom edge
        inside = (py >= y0) & (py <= y1)
        half = (py - y0) / (2.0 * b) * a
        return inside & (np.abs(px - cx) <= half)
    if name == "diamond":
        return np.abs(px - cx) / a + np.abs(py - cy) / b <= 1.0
    if name == "cross":
        bar = 0.34
        horiz = (np.abs(py - cy) <= b * bar) & (px >= x0) & (px <= x1)
        vert = (np.abs(px - cx) <= a * bar) & (py >= y0) & (py <= y1)
        return horiz | vert
    raise ConfigError(f"unknown shape {name!r}")


def _sample_layout(cfg: ShapesConfig, rng: np.random.Generator):
    """Context (thing index, Box) list plus the designated target (idx, Box)."""
    k = int(rng.integers(cfg.n_context[0], cfg.n_context[1] + 1))
    probs = cfg.probs()
    context_idx = [int(rng.choice(cfg.num_things, p=probs)) for _ in range(k)]

    boxes: list[Box] = []
    for _ in range(k + 1):
        for _attempt in range(200):
            s = rng.uniform(*cfg.size_range)
            cx = rng.uniform(s / 2 + 0.02, 1 - s / 2 - 0.02)
            cy = rng.uniform(s / 2 + 0.02, 1 - s / 2 - 0.02)
            if all(np.hypot(cx - b.cx, cy - b.cy) > 0.8 * s for b in boxes):
                break
        boxes.append(Box(cx, cy, s, s))

    target_box = boxes[-1]
    target_idx = cfg.target_rule(context_idx, target_box)
    context = list(zip(context_idx, boxes[:-1]))
    return context, target_idx, target_box


def _render_scene(cfg: ShapesConfig, rng, context, target_idx, target_box):
    size = cfg.image_size
    horizon = int(rng.uniform(0.35, 0.65) * size)
    sky = np.array([0.53, 0.72, 0.92]) + rng.uniform(-0.04, 0.04, 3)
    ground = np.array([0.45, 0.33, 0.20]) + rng.uniform(-0.04, 0.04, 3)

    image = np.empty((size, size, 3), dtype=np.float32)
    image[:horizon] = sky
    image[horizon:] = ground
    labels = np.full((size, size), GROUND, dtype=np.int64)
    labels[:horizon] = SKY

    instances = []
    for idx, box in context + [(target_idx, target_box)]:
        name = cfg.shape_classes[idx]
        raster = _shape_raster(name, size, size, box.to_pixels(size, size))
        color = np.clip(np.array(_PALETTE[name]) + rng.uniform(-0.05, 0.05, 3), 0, 1)
        image[raster] = color
        labels[raster] = N_STUFF + idx
        instances.append(Instance(N_STUFF + idx, box))

    from .panoptic import PanopticScene  # local import to avoid a cycle at load
    return PanopticScene(image.astype(np.float32),
                         LabelMap(labels, N_STUFF + cfg.num_things),
                         instances)


def synth_shapes_dataset(cfg: ShapesConfig, rng: np.random.Generator, n: int):
    """Yield n pixel-exact scenes; the designated instance is instances[-1]."""
    for _ in range(n):
        context, target_idx, target_box = _sample_layout(cfg, rng)
        yield _render_scene(cfg, rng, context, target_idx, target_box)


def inference_pairs(cfg: ShapesConfig, rng: np.random.Generator, n: int):
    """Missing-class examples only (no rasterization), in thing-index space."""
    out = []
    for _ in range(n):
        context, target_idx, target_box = _sample_layout(cfg, rng)
        visible = [Instance(idx, box) for idx, box in context]
        out.append(InferencePair(visible, target_box, target_idx))
    return out
