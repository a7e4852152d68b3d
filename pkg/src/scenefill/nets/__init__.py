from .sn import SNConv2d, SNEmbedding, SNLinear, spectral_normalize, spectral_sigma
from .transformer import EncoderLayer, sinusoid_2d
from .blocks import (ConditionalBatchNorm, DBlock, GenBlock, OptimizedDBlock,
                     ResBlock, SelfAttention)

__all__ = [
    "SNConv2d", "SNEmbedding", "SNLinear", "spectral_normalize", "spectral_sigma",
    "EncoderLayer", "sinusoid_2d",
    "ConditionalBatchNorm", "DBlock", "GenBlock", "OptimizedDBlock",
    "ResBlock", "SelfAttention",
]
