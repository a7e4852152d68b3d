"""Dense semantic label grids and the metrics defined over them.

A LabelMap carries N real semantic classes in [0, N) plus two reserved ids:
UNKNOWN = N marks corrupted or unannotated pixels, MASKED = N + 1 is used
by the guided synthesis stage to tag hole pixels. Network inputs accept
UNKNOWN but never MASKED.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError


@dataclass
class ClassCatalog:
    """Names for the semantic label space plus which ids are 'things'.

    Thing classes are countable instances; everything else is stuff. The
    instance classifier and mask generator index things contiguously
    (thing_index), while label maps use the global semantic id.
    """
    names: tuple[str, ...]
    things: tuple[int, ...]

    def __post_init__(self):
        self.names = tuple(self.names)
        self.things = tuple(self.things)
        for t in self.things:
            if not 0 <= t < len(self.names):
                raise ValueError(f"thing id {t} outside class range")

    @property
    def num_classes(self) -> int:
        return len(self.names)

    @property
    def num_things(self) -> int:
        return len(self.things)

    def thing_index(self, class_id: int) -> int:
        """Contiguous index of a thing class among the things subset."""
        try:
            return self.things.index(class_id)
        except ValueError:
            raise DataError(f"class {class_id} is not a thing class") from None

    def thing_class_id(self, thing_index: int) -> int:
        return self.things[thing_index]

    def to_json(self) -> dict:
        return {"names": list(self.names), "things": list(self.things)}

    @classmethod
    def from_json(cls, obj: dict) -> "ClassCatalog":
        return cls(tuple(obj["names"]), tuple(obj["things"]))


@dataclass
class LabelMap:
    labels: np.ndarray  # (H, W) integer grid
    num_classes: int

    def __post_init__(self):
        self.labels = np.asarray(self.labels)
        if self.labels.ndim != 2:
            raise ValueError("label map must be 2-D")
        if not np.issubdtype(self.labels.dtype, np.integer):
            self.labels = self.labels.astype(np.int64)
        lo, hi = int(self.labels.min()), int(self.labels.max())
        if lo < 0 or hi > self.num_classes + 1:
            raise ValueError(
                f"labels outside [0, {self.num_classes + 1}]: min={lo} max={hi}")

    @property
    def unknown_id(self) -> int:
        return self.num_classes

    @property
    def masked_id(self) -> int:
        return self.num_classes + 1

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape  # type: ignore[return-value]

    def copy(self) -> "LabelMap":
        return LabelMap(self.labels.copy(), self.num_classes)


def compose_segmentation(background: LabelMap, instance_mask: np.ndarray,
                         instance_class: int) -> LabelMap:
    """Overwrite mask pixels with the instance class; everything else untouched."""
    if instance_class >= background.num_classes:
        raise ValueError(f"instance class {instance_class} not a real class")
    instance_mask = np.asarray(instance_mask)
    if instance_mask.shape != background.labels.shape:
        raise ValueError(
            f"shape mismatch: mask {instance_mask.shape} vs map {background.labels.shape}")
    out = np.where(instance_mask > 0, instance_class, background.labels)
    return LabelMap(out, background.num_classes)


def miou(pred: LabelMap, truth: LabelMap, classes=None) -> float:
    """Mean IoU over the evaluated classes.

    Pixels labeled UNKNOWN in the truth map are excluded entirely. A class
    contributes only if it appears in either map on the evaluable pixels;
    classes absent from both are skipped, so miou(a, b) == miou(b, a).
    """
    if pred.labels.shape != truth.labels.shape:
        raise ValueError("pred / truth shape mismatch")
    valid = truth.labels != truth.unknown_id
    p = pred.labels[valid]
    t = truth.labels[valid]
    if classes is None:
        classes = range(truth.num_classes)
    ious = []
    for c in classes:
        pc = p == c
        tc = t == c
        union = int(np.count_nonzero(pc | tc))
        if union == 0:
            continue
        inter = int(np.count_nonzero(pc & tc))
        ious.append(inter / union)
    if not ious:
        raise DataError("no evaluable class for mIoU")
    return float(np.mean(ious))
