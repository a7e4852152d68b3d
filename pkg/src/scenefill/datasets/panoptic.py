"""Panoptic annotation ingestion (COCO-panoptic JSON + id-encoded PNGs).

Categories are remapped to a contiguous semantic label space ordered by
category id. Instances are restricted to a configurable subset of thing
classes; by default the 30 most frequent things in the annotation file.
"""
from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from ..boxes import Box
from ..errors import DataError, ProviderError
from ..imaging import from_uint8
from ..labelmap import ClassCatalog, LabelMap
from .crop import Instance

log = logging.getLogger(__name__)

DEFAULT_SUBSET_SIZE = 30


@dataclass
class PanopticScene:
    image: np.ndarray          # (H, W, 3) float32 in [0, 1]
    label_map: LabelMap
    instances: list[Instance] = field(default_factory=list)
    image_id: str = ""

    def validate(self, catalog: ClassCatalog | None = None) -> None:
        h, w = self.image.shape[:2]
        if self.label_map.labels.shape != (h, w):
            raise DataError("label map size differs from image size")
        for inst in self.instances:
            x0, y0, x1, y1 = inst.box.to_xyxy()
            if x0 < -1e-9 or y0 < -1e-9 or x1 > 1 + 1e-9 or y1 > 1 + 1e-9:
                raise DataError(f"instance box outside image: {inst}")
            if catalog is not None and inst.class_id not in catalog.things:
                raise DataError(f"instance class {inst.class_id} is not a thing")


def _decode_segment_ids(png: np.ndarray) -> np.ndarray:
    """COCO panoptic PNGs encode segment ids as R + 256*G + 256^2*B."""
    png = png.astype(np.uint32)
    return png[..., 0] + 256 * png[..., 1] + 256 * 256 * png[..., 2]


def select_things_subset(annotation: dict, size: int = DEFAULT_SUBSET_SIZE) -> list[int]:
    """The `size` most frequent thing categories by instance count."""
    things = {c["id"] for c in annotation["categories"] if c.get("isthing")}
    counts: Counter = Counter()
    for ann in annotation["annotations"]:
        for seg in ann["segments_info"]:
            if seg["category_id"] in things:
                counts[seg["category_id"]] += 1
    ranked = [cid for cid, _ in counts.most_common(size)]
    return sorted(ranked)


def catalog_from_annotation(annotation: dict,
                            things_subset=None) -> tuple[ClassCatalog, dict]:
    """Contiguous catalog over all categories; returns (catalog, id->index)."""
    cats = sorted(annotation["categories"], key=lambda c: c["id"])
    names = tuple(c["name"] for c in cats)
    index = {c["id"]: i for i, c in enumerate(cats)}
    if things_subset is None:
        things_subset = select_things_subset(annotation)
    things = tuple(sorted(index[cid] for cid in things_subset if cid in index))
    return ClassCatalog(names, things), index


def load_panoptic(annotation_path, image_root, *, segmaps_root=None,
                  things_subset=None, stats: dict | None = None):
    """Yield PanopticScene objects from a COCO-panoptic annotation file.

    Scenes with no qualifying instance are skipped and counted in `stats`
    (keys: scenes, skipped_no_instance, skipped_missing_file). A missing
    image or label PNG skips the record with a warning; malformed JSON is
    fatal and names the byte offset.
    """
    annotation_path = Path(annotation_path)
    image_root = Path(image_root)
    if segmaps_root is None:
        segmaps_root = annotation_path.with_suffix("")
    segmaps_root = Path(segmaps_root)
    if stats is None:
        stats = {}
    stats.setdefault("scenes", 0)
    stats.setdefault("skipped_no_instance", 0)
    stats.setdefault("skipped_missing_file", 0)

    try:
        with open(annotation_path, "rb") as f:
            annotation = json.load(f)
    except FileNotFoundError:
        raise DataError(f"annotation file not found: {annotation_path}")
    except json.JSONDecodeError as e:
        raise DataError(
            f"malformed annotation JSON at byte offset {e.pos}: {e.msg}") from e

    catalog, cat_index = catalog_from_annotation(annotation, things_subset)
    stats["catalog"] = catalog
    images = {img["id"]: img for img in annotation["images"]}
    things_set = set(catalog.things)

    for ann in annotation["annotations"]:
        info = images.get(ann["image_id"])
        if info is None:
            stats["skipped_missing_file"] += 1
            log.warning("annotation %s references unknown image id", ann["image_id"])
            continue
        img_path = image_root / info["file_name"]
        png_path = segmaps_root / ann["file_name"]
        try:
            image = from_uint8(np.asarray(Image.open(img_path).convert("RGB")))
            seg_png = np.asarray(Image.open(png_path).convert("RGB"))
        except FileNotFoundError as e:
            stats["skipped_missing_file"] += 1
            log.warning("skipping image %s: %s", info["file_name"], e)
            continue

        h, w = image.shape[:2]
        seg_ids = _decode_segment_ids(seg_png)
        labels = np.full((h, w), catalog.num_classes, dtype=np.int64)  # UNKNOWN
        instances = []
        for seg in ann["segments_info"]:
            cls = cat_index.get(seg["category_id"])
            if cls is None:
                continue
            labels[seg_ids == seg["id"]] = cls
            if cls in things_set and not seg.get("iscrowd", 0):
                x, y, bw, bh = seg["bbox"]
                instances.append(Instance(cls, Box.from_xyxy(
                    x / w, y / h, (x + bw) / w, (y + bh) / h)))

        if not instances:
            stats["skipped_no_instance"] += 1
            continue
        stats["scenes"] += 1
        yield PanopticScene(image, LabelMap(labels, catalog.num_classes),
                            instances, image_id=str(ann["image_id"]))


def pseudo_annotate(image: np.ndarray, detector, *, things_subset=None,
                    num_classes: int | None = None,
                    image_id: str = "") -> PanopticScene:
    """Build a scene from detector output (classes outside the subset dropped).

    The detector must expose predict_panoptic(image) -> (instances, label_map)
    where instances are objects with class_id and box attributes.
    """
    try:
        instances, label_map = detector.predict_panoptic(image)
    except Exception as e:
        raise ProviderError(f"detector failed on image {image_id!r}: {e}") from e
    if things_subset is not None:
        keep = set(things_subset)
        instances = [i for i in instances if i.class_id in keep]
    if not isinstance(label_map, LabelMap):
        if num_classes is None:
            raise DataError("num_classes required when detector returns a raw grid")
        label_map = LabelMap(np.asarray(label_map), num_classes)
    return PanopticScene(image, label_map,
                         [Instance(i.class_id, i.box) for i in instances],
                         image_id=image_id)
