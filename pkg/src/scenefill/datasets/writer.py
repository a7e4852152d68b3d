"""On-disk sample format: PNG triplet plus a versioned JSON manifest.

Each sample lives in its own directory: image.png (masked image),
mask.png, label_map.png (single-channel ids), source.png (unmasked crop,
for training targets), manifest.json. A palette.json at the dataset root
maps label ids to names and display colors.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from ..boxes import Box
from ..errors import DataError
from ..imaging import from_uint8, to_uint8
from ..labelmap import ClassCatalog, LabelMap
from .crop import Instance, MaskedSample

SCHEMA_VERSION = 1

_DISPLAY_COLORS = [
    (135, 183, 234), (115, 84, 51), (217, 64, 64), (64, 191, 77),
    (242, 204, 51), (191, 77, 204), (64, 179, 204), (230, 126, 34),
    (142, 68, 173), (39, 174, 96), (127, 140, 141), (241, 196, 15),
]


def _box_json(box: Box) -> list[float]:
    return [box.cx, box.cy, box.w, box.h]


def _box_from_json(v) -> Box:
    return Box(*v)


def write_palette(out_dir, catalog: ClassCatalog) -> None:
    palette = {
        str(i): {"name": name,
                 "color": list(_DISPLAY_COLORS[i % len(_DISPLAY_COLORS)])}
        for i, name in enumerate(catalog.names)
    }
    palette[str(catalog.num_classes)] = {"name": "UNKNOWN", "color": [0, 0, 0]}
    palette[str(catalog.num_classes + 1)] = {"name": "MASKED", "color": [255, 255, 255]}
    obj = {"schema_version": SCHEMA_VERSION, "catalog": catalog.to_json(),
           "palette": palette}
    with open(Path(out_dir) / "palette.json", "w") as f:
        json.dump(obj, f, indent=1, sort_keys=True)


def read_palette(dataset_dir) -> ClassCatalog:
    path = Path(dataset_dir) / "palette.json"
    if not path.exists():
        raise DataError(f"palette.json not found in {dataset_dir}")
    with open(path) as f:
        obj = json.load(f)
    return ClassCatalog.from_json(obj["catalog"])


def write_sample(sample: MaskedSample, sample_dir, *, seed=None, provenance="") -> None:
    sample_dir = Path(sample_dir)
    sample_dir.mkdir(parents=True, exist_ok=True)
    Image.fromarray(to_uint8(sample.image_masked)).save(sample_dir / "image.png")
    Image.fromarray((sample.mask > 0).astype(np.uint8) * 255).save(sample_dir / "mask.png")
    labels = sample.target_label_map.labels
    if labels.max() > 255:
        raise DataError("label ids exceed 8-bit PNG range")
    Image.fromarray(labels.astype(np.uint8), mode="L").save(sample_dir / "label_map.png")
    if sample.source_image is not None:
        Image.fromarray(to_uint8(sample.source_image)).save(sample_dir / "source.png")
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "missing_box": _box_json(sample.missing_box),
        "target_class": sample.target_class,
        "num_classes": sample.target_label_map.num_classes,
        "crop_fraction": sample.crop_fraction,
        "visible_instances": [
            {"class_id": i.class_id, "box": _box_json(i.box)}
            for i in sample.visible_instances
        ],
        "seed": seed,
        "provenance": provenance,
    }
    with open(sample_dir / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=1, sort_keys=True)


def write_samples(samples, out_dir, catalog: ClassCatalog, *, seed=None,
                  provenance="") -> int:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_palette(out_dir, catalog)
    n = 0
    for i, sample in enumerate(samples):
        write_sample(sample, out_dir / f"sample_{i:05d}", seed=seed,
                     provenance=provenance)
        n += 1
    return n


def load_sample(sample_dir) -> MaskedSample:
    sample_dir = Path(sample_dir)
    mpath = sample_dir / "manifest.json"
    if not mpath.exists():
        raise DataError(f"manifest.json not found in {sample_dir}")
    with open(mpath) as f:
        manifest = json.load(f)
    if manifest.get("schema_version") != SCHEMA_VERSION:
        raise DataError(
            f"unsupported sample schema_version {manifest.get('schema_version')}")
    image = from_uint8(np.asarray(Image.open(sample_dir / "image.png").convert("RGB")))
    mask = (np.asarray(Image.open(sample_dir / "mask.png").convert("L")) > 127)
    labels = np.asarray(Image.open(sample_dir / "label_map.png")).astype(np.int64)
    source = None
    if (sample_dir / "source.png").exists():
        source = from_uint8(np.asarray(Image.open(sample_dir / "source.png").convert("RGB")))
    return MaskedSample(
        image_masked=image,
        mask=mask.astype(np.uint8),
        missing_box=_box_from_json(manifest["missing_box"]),
        target_class=manifest["target_class"],
        target_label_map=LabelMap(labels, manifest["num_classes"]),
        visible_instances=[
            Instance(v["class_id"], _box_from_json(v["box"]))
            for v in manifest["visible_instances"]
        ],
        crop_fraction=manifest.get("crop_fraction", float("nan")),
        source_image=source,
    )


def load_samples(dataset_dir) -> list[MaskedSample]:
    dataset_dir = Path(dataset_dir)
    dirs = sorted(p for p in dataset_dir.iterdir()
                  if p.is_dir() and (p / "manifest.json").exists())
    if not dirs:
        raise DataError(f"no samples found in {dataset_dir}")
    return [load_sample(d) for d in dirs]
