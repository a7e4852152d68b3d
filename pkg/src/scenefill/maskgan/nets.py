"""Conditional GAN for 64x64 instance silhouettes.

The generator is a conditional-BN residual up-stack (4x4 -> 64x64, self
attention at 32x32); each up block's batch-norm gains and biases are
predicted from [shared class embedding | sigmoid(linear(box)) | z chunk],
with z split evenly across the four blocks. The discriminator mirrors it
with spectrally normalized down blocks, global sum pooling, and projection
class conditioning.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from ..boxes import Box
from ..errors import ConfigError
from ..nets import (DBlock, GenBlock, OptimizedDBlock, SelfAttention,
                    SNConv2d, SNEmbedding, SNLinear)
from ..torchutils import torch_seed

N_UP_BLOCKS = 4


@dataclass
class GenConfig:
    num_classes: int
    z_dim: int = 20
    shared_embed_dim: int = 128
    box_embed_dim: int = 32
    base_channels: int = 80
    output_size: int = 64

    def __post_init__(self):
        if self.z_dim % N_UP_BLOCKS != 0:
            raise ConfigError(f"z_dim must split across {N_UP_BLOCKS} blocks")
        if self.output_size != 64:
            raise ConfigError("generator is laid out for 64x64 output")
        if self.base_channels < 8:
            raise ConfigError("base_channels must be >= 8")

    @property
    def cond_dim(self) -> int:
        return self.shared_embed_dim + self.box_embed_dim + self.z_dim // N_UP_BLOCKS

    def to_json(self) -> dict:
        return {"num_classes": self.num_classes, "z_dim": self.z_dim,
                "shared_embed_dim": self.shared_embed_dim,
                "box_embed_dim": self.box_embed_dim,
                "base_channels": self.base_channels,
                "output_size": self.output_size}

    @classmethod
    def from_json(cls, obj) -> "GenConfig":
        return cls(**obj)

    @classmethod
    def tiny(cls, num_classes: int) -> "GenConfig":
        return cls(num_classes, z_dim=8, shared_embed_dim=16,
                   box_embed_dim=8, base_channels=8)


@dataclass(frozen=True)
class CondInput:
    class_id: int
    box: Box


class MaskGenerator(nn.Module):
    def __init__(self, cfg: GenConfig):
        super().__init__()
        self.cfg = cfg
        b = cfg.base_channels
        widths = [16 * b, 8 * b, 4 * b, 2 * b, b]
        self.shared_embed = nn.Embedding(cfg.num_classes, cfg.shared_embed_dim)
        self.box_linear = SNLinear(4, cfg.box_embed_dim)
        self.fc = SNLinear(cfg.z_dim, widths[0] * 4 * 4)
        self.blocks = nn.ModuleList(
            GenBlock(widths[i], widths[i + 1], cfg.cond_dim)
            for i in range(N_UP_BLOCKS))
        self.attn = SelfAttention(widths[3])  # after three ups: 32x32
        self.out_bn = nn.BatchNorm2d(widths[-1])
        self.out_conv = SNConv2d(widths[-1], 1, 3, 1, 1)

    def forward(self, z, class_ids, boxes):
        """z (B, z_dim), class_ids (B,), boxes (B, 4) -> (B, 1, 64, 64)."""
        b = z.shape[0]
        emb = self.shared_embed(class_ids)
        box_code = torch.sigmoid(self.box_linear(boxes))
        chunks = z.chunk(N_UP_BLOCKS, dim=1)
        h = self.fc(z).view(b, -1, 4, 4)
        for i, block in enumerate(self.blocks):
            cond = torch.cat([emb, box_code, chunks[i]], dim=1)
            h = block(h, cond)
            if i == 2:
                h = self.attn(h)
        h = self.out_conv(F.relu(self.out_bn(h)))
        return torch.tanh(h)


class MaskDiscriminator(nn.Module):
    def __init__(self, cfg: GenConfig):
        super().__init__()
        self.cfg = cfg
        b = cfg.base_channels
        self.stem = OptimizedDBlock(1, b)              # 64 -> 32
        self.attn = SelfAttention(b)
        self.block2 = DBlock(b, 2 * b, downsample=True)    # 32 -> 16
        self.block3 = DBlock(2 * b, 4 * b, downsample=True)  # 16 -> 8
        self.block4 = DBlock(4 * b, 8 * b, downsample=True)  # 8 -> 4
        self.block5 = DBlock(8 * b, 16 * b, downsample=False)
        self.linear = SNLinear(16 * b, 1)
        self.proj_embed = SNEmbedding(cfg.num_classes, 16 * b)

    def forward(self, masks, class_ids):
        h = self.stem(masks)
        h = self.attn(h)
        h = self.block5(self.block4(self.block3(self.block2(h))))
        h = F.relu(h).sum(dim=(2, 3))   # global sum pooling
        out = self.linear(h).squeeze(1)
        out = out + (self.proj_embed(class_ids) * h).sum(dim=1)
        return out


def build_mask_gan(cfg: GenConfig, seed: int = 0):
    with torch_seed(seed):
        return MaskGenerator(cfg), MaskDiscriminator(cfg)


def generate_instance_mask(z: np.ndarray, cond: CondInput,
                           generator: MaskGenerator,
                           mode: str = "eval") -> np.ndarray:
    """One 64x64 silhouette in [-1, 1]; eval mode is deterministic."""
    z = np.asarray(z, dtype=np.float32)
    if z.shape != (generator.cfg.z_dim,):
        raise ConfigError(f"z must have shape ({generator.cfg.z_dim},)")
    if not np.isfinite(z).all():
        raise ValueError("non-finite z")
    if mode not in ("train", "eval"):
        raise ValueError(f"unknown mode {mode!r}")
    generator.train(mode == "train")
    with torch.no_grad():
        out = generator(torch.from_numpy(z).unsqueeze(0),
                        torch.tensor([cond.class_id]),
                        torch.from_numpy(cond.box.as_vector().astype(np.float32)).unsqueeze(0))
    generator.eval()
    return out[0, 0].numpy()


def discriminate_mask(mask: np.ndarray, cond: CondInput,
                      discriminator: MaskDiscriminator) -> float:
    mask = np.asarray(mask, dtype=np.float32)
    size = discriminator.cfg.output_size
    if mask.shape != (size, size):
        raise ConfigError(f"mask must be {size}x{size}, got {mask.shape}")
    if mask.min() < -1.0 - 1e-6 or mask.max() > 1.0 + 1e-6:
        raise ValueError("mask values must lie in [-1, 1]")
    discriminator.eval()
    with torch.no_grad():
        logit = discriminator(torch.from_numpy(mask)[None, None],
                              torch.tensor([cond.class_id]))
    return float(logit[0])
