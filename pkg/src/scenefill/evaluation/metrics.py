"""Context-preservation metrics over pluggable providers."""
from __future__ import annotations

import numpy as np
import torch

from ..boxes import Box, iou_pixels, mask_tight_box
from ..errors import DataError, ProviderError
from ..torchutils import image_to_tensor

CLIP_SCALE = 2.5


def clipscore(h: np.ndarray, t: np.ndarray) -> float:
    """2.5 * max(cos(h, t), 0)."""
    h = np.asarray(h, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    nh, nt = np.linalg.norm(h), np.linalg.norm(t)
    if nh == 0.0 or nt == 0.0:
        raise ValueError("zero embedding vector")
    return CLIP_SCALE * max(float(h @ t) / (nh * nt), 0.0)


def region_crop_bounds(mask: np.ndarray, shape, pad_frac: float = 0.05,
                       square: bool = True) -> tuple[int, int, int, int]:
    """Crop rectangle for the masked region: tight box, padded, square-padded."""
    h, w = shape
    x0, y0, x1, y1 = mask_tight_box(mask)
    pad_x = int(round((x1 - x0) * pad_frac))
    pad_y = int(round((y1 - y0) * pad_frac))
    x0, x1 = x0 - pad_x, x1 + pad_x
    y0, y1 = y0 - pad_y, y1 + pad_y
    if square:
        side = max(x1 - x0, y1 - y0)
        cx, cy = (x0 + x1) // 2, (y0 + y1) // 2
        x0, x1 = cx - side // 2, cx - side // 2 + side
        y0, y1 = cy - side // 2, cy - side // 2 + side
    x0, y0 = max(x0, 0), max(y0, 0)
    x1, y1 = min(x1, w), min(y1, h)
    return x0, y0, x1, y1


def clipscore_region(completed: np.ndarray, mask: np.ndarray, caption: str,
                     provider, pad_frac: float = 0.05) -> float:
    """Score the completed region crop against the caption."""
    if np.asarray(mask).sum() == 0:
        raise DataError("empty mask has no region to score")
    x0, y0, x1, y1 = region_crop_bounds(mask, completed.shape[:2], pad_frac)
    crop = completed[y0:y1, x0:x1]
    try:
        h = provider.embed_image(crop)
        t = provider.embed_text(caption)
    except ProviderError:
        raise
    except Exception as e:
        raise ProviderError(f"embedding provider failed: {e}") from e
    return clipscore(h, t)


def detr_acc(samples, detector, iou_gate: float = 0.3) -> float:
    """Fraction of samples where the detector finds the target class
    overlapping the missing region (IoU >= gate).

    samples: iterable of (completed image, target_class, missing_box).
    """
    samples = list(samples)
    if not samples:
        raise DataError("empty sample list")
    if not 0.0 <= iou_gate <= 1.0:
        raise ValueError("iou_gate must lie in [0, 1]")
    correct = 0
    for image, target_class, missing_box in samples:
        h, w = image.shape[:2]
        region = missing_box.to_pixels(h, w)
        try:
            detections = detector.detect(image)
        except Exception as e:
            raise ProviderError(f"detector failed: {e}") from e
        for det in detections:
            if det.class_id != target_class:
                continue
            if iou_pixels(det.box.to_pixels(h, w), region) >= iou_gate:
                correct += 1
                break
    return correct / len(samples)


def perceptual_distance(a: np.ndarray, b: np.ndarray, provider) -> float:
    """Mean over provider layers of mean squared feature difference.

    With an identity provider this is exactly image-space MSE.
    """
    a = np.asarray(a, dtype=np.float32)
    b = np.asarray(b, dtype=np.float32)
    if a.shape != b.shape:
        raise ValueError("image shapes differ")
    ta, tb = image_to_tensor(a), image_to_tensor(b)
    try:
        with torch.no_grad():
            fa = provider.features(ta)
            fb = provider.features(tb)
            dists = [float(((x - y) ** 2).mean()) for x, y in zip(fa, fb)]
    except Exception as e:
        raise ProviderError(f"perceptual provider failed: {e}") from e
    return float(np.mean(dists))
