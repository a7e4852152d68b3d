"""Masked-sample construction: crop a window around the hole and renormalize.

The crop window covers between 10% and 50% of the source image area,
contains the full mask, and is resized to the working resolution (bilinear
for the image, nearest-neighbor for labels and the mask). Masked pixels are
filled with 0; the mask travels as a separate channel so black scene pixels
stay distinguishable from holes.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..boxes import Box, mask_tight_box
from ..errors import DataError, RegionTooLarge
from ..imaging import resize_bilinear, resize_nearest
from ..labelmap import LabelMap

DEFAULT_RESOLUTION = 256
AREA_RANGE = (0.10, 0.50)
SURVIVAL_THRESHOLD = 0.5  # min retained box area for an instance to stay visible
FILL_VALUE = 0.0


@dataclass(frozen=True)
class Instance:
    class_id: int
    box: Box


@dataclass
class MaskedSample:
    image_masked: np.ndarray        # (H, W, 3) float32 in [0, 1]
    mask: np.ndarray                # (H, W) uint8, 1 = missing
    missing_box: Box                # tight bounding box of mask
    target_class: int               # class of the removed instance
    target_label_map: LabelMap      # ground-truth labels of the crop
    visible_instances: list[Instance] = field(default_factory=list)
    crop_fraction: float = float("nan")   # provenance: crop area / source area
    source_image: np.ndarray | None = None  # unmasked crop, for training targets

    def validate(self) -> None:
        if self.mask.sum() == 0:
            raise DataError("mask is empty")
        h, w = self.mask.shape
        tight = mask_tight_box(self.mask)
        if tight != self.missing_box.to_pixels(h, w):
            raise DataError("missing_box does not match the mask's tight box")
        if self.source_image is not None:
            free = self.mask == 0
            if not np.array_equal(self.image_masked[free], self.source_image[free]):
                raise DataError("unmasked pixels differ from the source crop")


def _choose_window(mask_box, image_hw, rng, area_range, attempts=1000):
    """Pick (x0, y0, cw, ch) containing mask_box with area fraction in range."""
    h, w = image_hw
    bx0, by0, bx1, by1 = mask_box
    bw, bh = bx1 - bx0, by1 - by0
    lo, hi = area_range
    total = h * w
    if bw * bh > hi * total:
        raise RegionTooLarge(
            f"mask box {bw}x{bh} exceeds {hi:.0%} of a {h}x{w} image")
    f_lo = max(lo, bw * bh / total)
    for _ in range(attempts):
        f = rng.uniform(f_lo, hi)
        target = f * total
        cw_min = max(bw, int(np.ceil(target / h)))
        cw_max = min(w, int(np.floor(target / bh)))
        if cw_min > cw_max:
            continue
        cw = int(rng.integers(cw_min, cw_max + 1))
        ch = int(np.clip(round(target / cw), bh, h))
        frac = cw * ch / total
        if not (lo <= frac <= hi):
            continue
        x_lo, x_hi = max(0, bx1 - cw), min(bx0, w - cw)
        y_lo, y_hi = max(0, by1 - ch), min(by0, h - ch)
        if x_lo > x_hi or y_lo > y_hi:
            continue
        x0 = int(rng.integers(x_lo, x_hi + 1))
        y0 = int(rng.integers(y_lo, y_hi + 1))
        return x0, y0, cw, ch
    raise RegionTooLarge("no crop window satisfying the area bounds was found")


def crop_sample(scene, mask: np.ndarray, target: Instance,
                rng: np.random.Generator, *,
                resolution: int = DEFAULT_RESOLUTION,
                area_range=AREA_RANGE,
                survival=SURVIVAL_THRESHOLD) -> MaskedSample:
    """Cut a training sample out of a scene around an already-generated mask."""
    img = scene.image
    h, w = img.shape[:2]
    mask = np.asarray(mask, dtype=np.uint8)
    if mask.shape != (h, w):
        raise DataError("mask shape does not match the scene image")
    if mask.sum() == 0:
        raise DataError("mask is empty")

    mbox = mask_tight_box(mask)
    x0, y0, cw, ch = _choose_window(mbox, (h, w), rng, area_range)

    crop_img = img[y0:y0 + ch, x0:x0 + cw]
    crop_mask = mask[y0:y0 + ch, x0:x0 + cw]
    crop_labels = scene.label_map.labels[y0:y0 + ch, x0:x0 + cw]

    size = (resolution, resolution)
    out_img = resize_bilinear(crop_img, size).astype(np.float32)
    out_mask = resize_nearest(crop_mask, size)
    out_labels = resize_nearest(crop_labels, size)
    if out_mask.sum() == 0:  # guard against resize swallowing a thin mask
        bx0, by0, bx1, by1 = mbox
        sx = resolution / cw
        sy = resolution / ch
        out_mask[int((by0 - y0) * sy):max(int((by1 - y0) * sy), int((by0 - y0) * sy) + 1),
                 int((bx0 - x0) * sx):max(int((bx1 - x0) * sx), int((bx0 - x0) * sx) + 1)] = 1

    image_masked = out_img.copy()
    image_masked[out_mask > 0] = FILL_VALUE

    tx0, ty0, tx1, ty1 = mask_tight_box(out_mask)
    missing_box = Box.from_pixel_rect(tx0, ty0, tx1, ty1, resolution, resolution)

    visible = []
    for inst in scene.instances:
        if inst is target:
            continue
        ix0, iy0, ix1, iy1 = inst.box.to_xyxy()
        ix0, iy0, ix1, iy1 = ix0 * w, iy0 * h, ix1 * w, iy1 * h
        ox0, oy0 = max(ix0, x0), max(iy0, y0)
        ox1, oy1 = min(ix1, x0 + cw), min(iy1, y0 + ch)
        inter = max(ox1 - ox0, 0.0) * max(oy1 - oy0, 0.0)
        orig = (ix1 - ix0) * (iy1 - iy0)
        if orig <= 0 or inter / orig < survival:
            continue
        visible.append(Instance(inst.class_id, Box.from_xyxy(
            (ox0 - x0) / cw, (oy0 - y0) / ch, (ox1 - x0) / cw, (oy1 - y0) / ch)))

    return MaskedSample(
        image_masked=image_masked,
        mask=out_mask,
        missing_box=missing_box,
        target_class=target.class_id,
        target_label_map=LabelMap(out_labels, scene.label_map.num_classes),
        visible_instances=visible,
        crop_fraction=cw * ch / (h * w),
        source_image=out_img,
    )
