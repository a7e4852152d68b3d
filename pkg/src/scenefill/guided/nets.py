"""Segmentation-guided completion networks.

Generator: a VAE-style encoder over [masked image | mask] down to 4x4 with
mu/log-variance heads, then a SPADE-modulated decoder from 8x8 back to full
resolution with encoder skip concatenations and a tanh head. The SPADE
condition is [broadcast latent | guidance one-hot | mask]; conditioning is
applied only on the decoder side.

Discriminators: the segmentation (OASIS-style) UNet emitting per-pixel
(N+1)-way logits (N real classes + fake), and a patch discriminator for
the SPADE-style variant.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from ..errors import ConfigError, DataError
from ..nets import SNConv2d
from ..torchutils import image_to_tensor, tensor_to_image, torch_seed
from .guidance import GuidanceMap
from .spade import SpadeResBlock


@dataclass
class CompletionConfig:
    num_classes: int
    resolution: int = 256
    base: int = 32
    max_width: int = 512
    latent_dim: int = 256
    z_channels: int = 64
    disc_base: int = 32

    def __post_init__(self):
        r = self.resolution
        if r < 16 or r & (r - 1):
            raise ConfigError("resolution must be a power of two >= 16")

    @property
    def n_down(self) -> int:
        return int(np.log2(self.resolution)) - 2   # encoder bottom is 4x4

    def enc_width(self, stage: int) -> int:
        return min(self.base * (2 ** stage), self.max_width)

    @property
    def cond_channels(self) -> int:
        return self.z_channels + self.num_classes + 2

    def to_json(self) -> dict:
        return {"num_classes": self.num_classes, "resolution": self.resolution,
                "base": self.base, "max_width": self.max_width,
                "latent_dim": self.latent_dim, "z_channels": self.z_channels,
                "disc_base": self.disc_base}

    @classmethod
    def from_json(cls, obj) -> "CompletionConfig":
        return cls(**obj)

    @classmethod
    def tiny(cls, num_classes: int, resolution: int = 64) -> "CompletionConfig":
        return cls(num_classes, resolution=resolution, base=8, max_width=64,
                   latent_dim=32, z_channels=8, disc_base=8)


class CompletionGenerator(nn.Module):
    def __init__(self, cfg: CompletionConfig):
        super().__init__()
        self.cfg = cfg
        widths = [cfg.enc_width(i) for i in range(cfg.n_down + 1)]
        self.stem = nn.Conv2d(4, widths[0], 3, 1, 1)
        self.downs = nn.ModuleList(
            nn.Conv2d(widths[i], widths[i + 1], 3, 2, 1)
            for i in range(cfg.n_down))
        bottom = widths[-1] * 4 * 4
        self.mu = nn.Linear(bottom, cfg.latent_dim)
        self.logvar = nn.Linear(bottom, cfg.latent_dim)
        self.z_fc = nn.Linear(cfg.latent_dim, 8 * 8 * 2 * widths[-1])
        self.z_proj = nn.Linear(cfg.latent_dim, cfg.z_channels)

        cond_ch = cfg.cond_channels
        self.dec_blocks = nn.ModuleList()
        in_ch = 2 * widths[-1]
        for k in range(cfg.n_down - 1, -1, -1):
            self.dec_blocks.append(SpadeResBlock(in_ch, widths[k], cond_ch))
            in_ch = 2 * widths[k]   # after the skip concat
        self.out_conv = nn.Conv2d(in_ch, 3, 3, 1, 1)

    def forward(self, image_masked, mask, cond, noise=None):
        """All tensors NCHW; cond is [one-hot | mask] with N+2 channels.

        Returns (raw completed image in [-1,1], mu, logvar). The raw output
        is unblended; callers compose it with the input via the mask.
        """
        x = torch.cat([image_masked, mask], dim=1)
        feats = [F.leaky_relu(self.stem(x), 0.2)]
        for down in self.downs:
            feats.append(F.leaky_relu(down(feats[-1]), 0.2))
        flat = feats[-1].flatten(1)
        mu = self.mu(flat)
        logvar = self.logvar(flat)
        z = mu if noise is None else mu + torch.exp(0.5 * logvar) * noise

        b = x.shape[0]
        h = self.z_fc(z).view(b, -1, 8, 8)
        zmap = self.z_proj(z)[:, :, None, None].expand(
            b, self.cfg.z_channels, *cond.shape[2:])
        zy = torch.cat([zmap, cond], dim=1)

        skips = feats[-2::-1]   # resolutions 8, 16, ..., R
        for block, skip in zip(self.dec_blocks, skips):
            if h.shape[2] != skip.shape[2]:
                h = F.interpolate(h, scale_factor=2, mode="nearest")
            h = block(h, zy)
            h = torch.cat([h, skip], dim=1)
        return torch.tanh(self.out_conv(h)), mu, logvar


class _Down(nn.Module):
    def __init__(self, in_ch, out_ch):
        super().__init__()
        self.conv1 = SNConv2d(in_ch, out_ch, 3, 1, 1)
        self.conv2 = SNConv2d(out_ch, out_ch, 3, 1, 1)
        self.skip = SNConv2d(in_ch, out_ch, 1, 1, 0, bias=False)

    def forward(self, x):
        h = self.conv2(F.leaky_relu(self.conv1(F.leaky_relu(x, 0.2)), 0.2))
        return F.avg_pool2d(h + self.skip(x), 2)


class _Up(nn.Module):
    def __init__(self, in_ch, out_ch):
        super().__init__()
        self.conv1 = SNConv2d(in_ch, out_ch, 3, 1, 1)
        self.conv2 = SNConv2d(out_ch, out_ch, 3, 1, 1)
        self.skip = SNConv2d(in_ch, out_ch, 1, 1, 0, bias=False)

    def forward(self, x):
        x = F.interpolate(x, scale_factor=2, mode="nearest")
        h = self.conv2(F.leaky_relu(self.conv1(F.leaky_relu(x, 0.2)), 0.2))
        return h + self.skip(x)


class SegDiscriminator(nn.Module):
    """UNet over [image | mask] with per-pixel (N+1)-way logits."""

    def __init__(self, cfg: CompletionConfig):
        super().__init__()
        self.cfg = cfg
        n_down = cfg.n_down
        w = [min(cfg.disc_base * (2 ** i), cfg.max_width)
             for i in range(n_down + 1)]
        self.stem = SNConv2d(4, w[0], 3, 1, 1)
        self.downs = nn.ModuleList(_Down(w[i], w[i + 1]) for i in range(n_down))
        self.ups = nn.ModuleList()
        in_ch = w[n_down]
        for level in range(n_down - 1, -1, -1):
            self.ups.append(_Up(in_ch, w[level]))
            in_ch = 2 * w[level]    # up output concatenated with the skip
        self.head = SNConv2d(in_ch, cfg.num_classes + 1, 3, 1, 1)

    def forward(self, image, mask):
        h = self.stem(torch.cat([image, mask], dim=1))
        skips = [h]
        for down in self.downs:
            h = down(h)
            skips.append(h)
        h = skips[-1]
        for i, up in enumerate(self.ups):
            h = up(h)
            h = torch.cat([h, skips[len(self.ups) - 1 - i]], dim=1)
        return self.head(h)


class PatchDiscriminator(nn.Module):
    """SPADE-variant patch discriminator over [image | guidance | mask]."""

    def __init__(self, cfg: CompletionConfig):
        super().__init__()
        in_ch = 3 + cfg.num_classes + 2
        w = cfg.disc_base
        self.net = nn.Sequential(
            SNConv2d(in_ch, w, 4, 2, 1), nn.LeakyReLU(0.2),
            SNConv2d(w, 2 * w, 4, 2, 1), nn.LeakyReLU(0.2),
            SNConv2d(2 * w, 4 * w, 4, 2, 1), nn.LeakyReLU(0.2),
            SNConv2d(4 * w, 1, 3, 1, 1),
        )

    def forward(self, image, cond):
        return self.net(torch.cat([image, cond], dim=1))


@dataclass
class CompletionNets:
    generator: CompletionGenerator
    discriminator: nn.Module
    cfg: CompletionConfig
    disc_kind: str = "oasis"


def build_completion_nets(cfg: CompletionConfig, seed: int = 0,
                          disc_kind: str = "oasis") -> CompletionNets:
    if disc_kind not in ("oasis", "spade"):
        raise ConfigError(f"unknown discriminator kind {disc_kind!r}")
    with torch_seed(seed):
        gen = CompletionGenerator(cfg)
        disc = (SegDiscriminator(cfg) if disc_kind == "oasis"
                else PatchDiscriminator(cfg))
    return CompletionNets(gen, disc, cfg, disc_kind)


def complete_image(image_masked: np.ndarray, mask: np.ndarray,
                   guidance: GuidanceMap, nets: CompletionNets,
                   rng: np.random.Generator | None = None,
                   mode: str = "eval") -> np.ndarray:
    """Fill the hole; unmasked pixels are returned bit-exact from the input.

    image_masked: (H, W, 3) in [-1, 1]. In eval mode the latent is the
    posterior mean and the output is deterministic; train mode draws the
    reparameterization noise from rng.
    """
    if mode not in ("train", "eval"):
        raise ValueError(f"unknown mode {mode!r}")
    mask = (np.asarray(mask) > 0).astype(np.float32)
    if mask.shape != image_masked.shape[:2]:
        raise DataError("mask shape does not match the image")
    if not np.array_equal(guidance.mask > 0, mask > 0):
        raise DataError("guidance mask is inconsistent with the given mask")
    gen = nets.generator
    gen.train(mode == "train")
    noise = None
    if mode == "train":
        if rng is None:
            raise DataError("train mode needs an rng for the latent noise")
        noise = torch.from_numpy(
            rng.standard_normal(nets.cfg.latent_dim).astype(np.float32)).unsqueeze(0)
    with torch.no_grad():
        raw, _, _ = gen(image_to_tensor(image_masked),
                        image_to_tensor(mask),
                        guidance.condition_tensor(), noise)
    gen.eval()
    raw_img = tensor_to_image(raw)
    return np.where(mask[..., None] > 0, raw_img,
                    image_masked).astype(np.float32)
