from .guidance import GuidanceMap
from .spade import SpadeModulation, SpadeResBlock, spade_modulate
from .nets import (CompletionConfig, CompletionGenerator, CompletionNets,
                   PatchDiscriminator, SegDiscriminator, build_completion_nets,
                   complete_image)
from .losses import oasis_losses
from .sequential import (HashPaintBackend, class_to_prompt, prompt_paint_value,
                         sequential_inpaint)
from .train import GuidedTrainConfig, train_guided_completion

__all__ = [
    "GuidanceMap", "SpadeModulation", "SpadeResBlock", "spade_modulate",
    "CompletionConfig", "CompletionGenerator", "CompletionNets",
    "PatchDiscriminator", "SegDiscriminator", "build_completion_nets",
    "complete_image", "oasis_losses",
    "HashPaintBackend", "class_to_prompt", "prompt_paint_value",
    "sequential_inpaint",
    "GuidedTrainConfig", "train_guided_completion",
]
