"""Background-swap validation of the region score.

Swapped variants replace the non-instance pixels of each missing region
with a replacement background; the mean region score of the originals is
compared against the mean for the swapped versions. When a detector is
supplied, only samples it judges correct (target class found in-region on
the completed image) are counted.
"""
from __future__ import annotations

import numpy as np

from ..errors import DataError
from .metrics import clipscore_region, detr_acc


def background_swap_check(completed_images, missing_masks, instance_masks,
                          replacements, captions, provider, *,
                          detector=None, target_classes=None,
                          missing_boxes=None, iou_gate: float = 0.3) -> dict:
    """Returns {mean_complete, mean_swapped, n_counted}."""
    items = list(zip(completed_images, missing_masks, instance_masks,
                     replacements, captions))
    if not items:
        raise DataError("no samples to check")
    score_c, score_s = [], []
    for i, (img, mask, inst, repl, caption) in enumerate(items):
        mask = np.asarray(mask) > 0
        inst = np.asarray(inst) > 0
        if not (inst <= mask).all():
            raise DataError(f"sample {i}: instance mask leaves the missing region")
        if detector is not None:
            ok = detr_acc([(img, target_classes[i], missing_boxes[i])],
                          detector, iou_gate) > 0
            if not ok:
                continue
        swap_sel = mask & ~inst
        swapped = img.copy()
        swapped[swap_sel] = np.asarray(repl)[swap_sel]
        score_c.append(clipscore_region(img, mask, caption, provider))
        score_s.append(clipscore_region(swapped, mask, caption, provider))
    if not score_c:
        raise DataError("no sample passed the detector gate")
    return {"mean_complete": float(np.mean(score_c)),
            "mean_swapped": float(np.mean(score_s)),
            "n_counted": len(score_c)}
