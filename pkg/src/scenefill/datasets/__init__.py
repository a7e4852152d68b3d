from .masks import generate_irregular_mask, rasterize_segment
from .crop import Instance, MaskedSample, crop_sample
from .panoptic import PanopticScene, load_panoptic, pseudo_annotate
from .shapes import ShapesConfig, synth_shapes_dataset, inference_pairs
from .writer import write_samples, load_sample, load_samples

__all__ = [
    "generate_irregular_mask", "rasterize_segment",
    "Instance", "MaskedSample", "crop_sample",
    "PanopticScene", "load_panoptic", "pseudo_annotate",
    "ShapesConfig", "synth_shapes_dataset", "inference_pairs",
    "write_samples", "load_sample", "load_samples",
]
