from .providers import (CaptionCache, Detection, HashEmbeddingProvider,
                        MeanColorEmbeddingProvider, StaticCaptioner,
                        StaticDetector, caption_of)
from .metrics import clipscore, clipscore_region, detr_acc, perceptual_distance, region_crop_bounds
from .fid import FeatureStatistics, fid, trace_sqrt_product
from .swap import background_swap_check
from .report import MetricReport, render_metric_figure, render_sweep_figure, write_report

__all__ = [
    "CaptionCache", "Detection", "HashEmbeddingProvider",
    "MeanColorEmbeddingProvider", "StaticCaptioner", "StaticDetector",
    "caption_of",
    "clipscore", "clipscore_region", "detr_acc", "perceptual_distance",
    "region_crop_bounds",
    "FeatureStatistics", "fid", "trace_sqrt_product",
    "background_swap_check",
    "MetricReport", "render_metric_figure", "render_sweep_figure", "write_report",
]
