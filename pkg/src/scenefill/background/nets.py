"""Label-map restoration networks.

Both bodies share the same head (label embedding + three stride-2 convs to
a resolution/8 feature grid) and tail (three upsample+ResBlock stages and a
per-pixel FC/GELU/LN head followed by the class projection). The
transformer body runs encoder layers over the token grid, with fixed 2-D
sinusoidal encodings added so the stack can localize; the conv body swaps
in a small UNet trunk whose width is chosen to match the transformer
trunk's parameter count within 20%.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from ..errors import ConfigError, DataError
from ..labelmap import LabelMap
from ..nets import EncoderLayer, ResBlock, sinusoid_2d
from ..torchutils import torch_seed

BODIES = ("transformer", "conv")


@dataclass
class BackgroundConfig:
    num_classes: int
    body: str = "transformer"
    embed_dim: int = 64
    head_channels: tuple = (128, 256, 512)
    enc_layers: int = 8
    heads: int = 8
    mlp_dim: int = 2048
    resolution: int = 256
    conv_base: int | None = None   # UNet trunk width; auto-matched when None

    def __post_init__(self):
        self.head_channels = tuple(self.head_channels)
        if self.body not in BODIES:
            raise ConfigError(f"unknown body {self.body!r}")
        if len(self.head_channels) != 3:
            raise ConfigError("three stride-2 head convs expected")
        if self.resolution % 8 != 0:
            raise ConfigError("resolution must be divisible by 8")
        d = self.head_channels[-1]
        if d % self.heads != 0 or d % 4 != 0:
            raise ConfigError("token dim must divide heads and 4")

    @property
    def d(self) -> int:
        return self.head_channels[-1]

    @property
    def grid(self) -> int:
        return self.resolution // 8

    def to_json(self) -> dict:
        return {"num_classes": self.num_classes, "body": self.body,
                "embed_dim": self.embed_dim,
                "head_channels": list(self.head_channels),
                "enc_layers": self.enc_layers, "heads": self.heads,
                "mlp_dim": self.mlp_dim, "resolution": self.resolution,
                "conv_base": self.conv_base}

    @classmethod
    def from_json(cls, obj) -> "BackgroundConfig":
        obj = dict(obj)
        obj["head_channels"] = tuple(obj["head_channels"])
        return cls(**obj)

    @classmethod
    def tiny(cls, num_classes: int, body: str = "transformer",
             resolution: int = 64) -> "BackgroundConfig":
        return cls(num_classes, body=body, embed_dim=16,
                   head_channels=(24, 32, 48), enc_layers=2, heads=4,
                   mlp_dim=96, resolution=resolution)


class _TransformerTrunk(nn.Module):
    def __init__(self, cfg: BackgroundConfig):
        super().__init__()
        self.layers = nn.ModuleList(
            EncoderLayer(cfg.d, cfg.heads, cfg.mlp_dim)
            for _ in range(cfg.enc_layers))
        self.register_buffer("pos", sinusoid_2d(cfg.grid, cfg.grid, cfg.d))

    def forward(self, x):  # (B, d, g, g)
        b, d, g, _ = x.shape
        z = x.flatten(2).transpose(1, 2) + self.pos
        for layer in self.layers:
            z, _ = layer(z)
        return z.transpose(1, 2).reshape(b, d, g, g)


class _ConvTrunk(nn.Module):
    """Two-level UNet over the token grid."""

    def __init__(self, d: int, width: int):
        super().__init__()
        self.enc1 = ResBlock(d, width)
        self.enc2 = ResBlock(width, 2 * width)
        self.mid = ResBlock(2 * width, 2 * width)
        self.dec2 = ResBlock(4 * width, width)
        self.dec1 = ResBlock(2 * width, d)

    def forward(self, x):
        e1 = self.enc1(x)
        e2 = self.enc2(F.avg_pool2d(e1, 2))
        m = self.mid(F.avg_pool2d(e2, 2))
        u2 = F.interpolate(m, scale_factor=2, mode="nearest")
        d2 = self.dec2(torch.cat([u2, e2], dim=1))
        u1 = F.interpolate(d2, scale_factor=2, mode="nearest")
        return self.dec1(torch.cat([u1, e1], dim=1))


def _trunk_params(module: nn.Module) -> int:
    return sum(p.numel() for p in module.parameters())


def match_conv_width(cfg: BackgroundConfig, tolerance: float = 0.2) -> int:
    """UNet width whose trunk parameter count best matches the transformer's."""
    target = _trunk_params(_TransformerTrunk(cfg))
    best_w, best_err = None, None
    for w in range(4, 2048, 4):
        n = _trunk_params(_ConvTrunk(cfg.d, w))
        err = abs(n - target) / target
        if best_err is None or err < best_err:
            best_w, best_err = w, err
        if n > target * 1.5:
            break
    if best_err is None or best_err > tolerance:
        raise ConfigError(
            f"no conv width matches transformer trunk within {tolerance:.0%}")
    return best_w


class BackgroundNet(nn.Module):
    def __init__(self, cfg: BackgroundConfig):
        super().__init__()
        self.cfg = cfg
        c1, c2, d = cfg.head_channels
        # labels in [0, N]: the UNKNOWN id is a legal input symbol
        self.embed = nn.Embedding(cfg.num_classes + 1, cfg.embed_dim)
        self.down1 = nn.Conv2d(cfg.embed_dim, c1, 4, 2, 1)
        self.down2 = nn.Conv2d(c1, c2, 4, 2, 1)
        self.down3 = nn.Conv2d(c2, d, 4, 2, 1)
        if cfg.body == "transformer":
            self.trunk = _TransformerTrunk(cfg)
        else:
            width = cfg.conv_base or match_conv_width(cfg)
            self.trunk = _ConvTrunk(d, width)
        self.up3 = ResBlock(d, c2)
        self.up2 = ResBlock(c2, c1)
        self.up1 = ResBlock(c1, cfg.embed_dim)
        self.pixel_fc = nn.Linear(cfg.embed_dim, cfg.embed_dim)
        self.pixel_ln = nn.LayerNorm(cfg.embed_dim)
        self.classify = nn.Linear(cfg.embed_dim, cfg.num_classes)

    def forward(self, labels: torch.Tensor) -> torch.Tensor:
        """(B, H, W) int labels in [0, N] -> (B, N, H, W) logits."""
        h = self.embed(labels).permute(0, 3, 1, 2)
        h = F.gelu(self.down1(h))
        h = F.gelu(self.down2(h))
        h = self.down3(h)
        h = self.trunk(h)
        h = self.up3(F.interpolate(h, scale_factor=2, mode="nearest"))
        h = self.up2(F.interpolate(h, scale_factor=2, mode="nearest"))
        h = self.up1(F.interpolate(h, scale_factor=2, mode="nearest"))
        h = h.permute(0, 2, 3, 1)
        h = self.pixel_ln(F.gelu(self.pixel_fc(h)))
        return self.classify(h).permute(0, 3, 1, 2)


def build_background_net(cfg: BackgroundConfig, seed: int = 0) -> BackgroundNet:
    with torch_seed(seed):
        return BackgroundNet(cfg)


def complete_background(corrupted: LabelMap, model: BackgroundNet):
    """Restore a corrupted map. Returns (logits (H, W, N), argmax LabelMap)."""
    cfg = model.cfg
    labels = corrupted.labels
    if labels.shape != (cfg.resolution, cfg.resolution):
        raise DataError(
            f"expected {cfg.resolution}x{cfg.resolution} map, got {labels.shape}")
    if (labels == corrupted.masked_id).any():
        raise DataError("MASKED labels belong to the synthesis stage, not here")
    if labels.max() > corrupted.unknown_id:
        raise DataError("labels outside [0, UNKNOWN]")
    model.eval()
    with torch.no_grad():
        logits = model(torch.from_numpy(labels.astype(np.int64)).unsqueeze(0))
    logits = logits[0].permute(1, 2, 0).numpy()
    restored = LabelMap(np.argmax(logits, axis=2), corrupted.num_classes)
    return logits, restored
