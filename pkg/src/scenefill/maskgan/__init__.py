from .nets import (CondInput, GenConfig, MaskDiscriminator, MaskGenerator,
                   build_mask_gan, discriminate_mask, generate_instance_mask)
from .losses import gan_losses
from .diffaug import diffaug
from .place import place_instance_mask
from .train import GanTrainConfig, train_mask_gan

__all__ = [
    "CondInput", "GenConfig", "MaskDiscriminator", "MaskGenerator",
    "build_mask_gan", "discriminate_mask", "generate_instance_mask",
    "gan_losses", "diffaug", "place_instance_mask",
    "GanTrainConfig", "train_mask_gan",
]
