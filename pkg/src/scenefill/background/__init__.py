from ..labelmap import LabelMap, compose_segmentation, miou
from .corrupt import scribble_corrupt
from .nets import (BackgroundConfig, BackgroundNet, build_background_net,
                   complete_background, match_conv_width)
from .train import BackgroundTrainConfig, hole_fraction_sweep, train_background_net

__all__ = [
    "LabelMap", "compose_segmentation", "miou",
    "scribble_corrupt",
    "BackgroundConfig", "BackgroundNet", "build_background_net",
    "complete_background", "match_conv_width",
    "BackgroundTrainConfig", "hole_fraction_sweep", "train_background_net",
]
