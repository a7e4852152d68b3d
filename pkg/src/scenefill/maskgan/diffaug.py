"""Differentiable augmentations applied inside the adversarial graph.

Policies: color (brightness + contrast jitter), translation (shifts up to
1/8 of the width, zero padded), cutout (a half-width square zeroed out).
Offsets are drawn from the supplied torch.Generator in a fixed order:
color draws (B,) brightness then (B,) contrast; translation draws (B, 2)
as (tx, ty); cutout draws (B, 2) as (cx, cy) upper-left corners.
"""
from __future__ import annotations

import torch
import torch.nn.functional as F

POLICIES = ("color", "translation", "cutout")


def _color(x, rng):
    b = x.shape[0]
    brightness = torch.rand(b, 1, 1, 1, generator=rng) - 0.5
    x = x + brightness
    contrast = torch.rand(b, 1, 1, 1, generator=rng) + 0.5
    mean = x.mean(dim=(1, 2, 3), keepdim=True)
    return (x - mean) * contrast + mean


def _translation(x, rng):
    b, _, h, w = x.shape
    sy, sx = h // 8, w // 8
    shifts = torch.stack([
        torch.randint(-sx, sx + 1, (b,), generator=rng),
        torch.randint(-sy, sy + 1, (b,), generator=rng),
    ], dim=1)
    padded = F.pad(x, (sx, sx, sy, sy))
    rows = []
    for i in range(b):
        tx, ty = int(shifts[i, 0]), int(shifts[i, 1])
        rows.append(padded[i, :, sy - ty:sy - ty + h, sx - tx:sx - tx + w])
    return torch.stack(rows)


def _cutout(x, rng):
    b, _, h, w = x.shape
    ch, cw = h // 2, w // 2
    ys = torch.randint(0, h - ch + 1, (b,), generator=rng)
    xs = torch.randint(0, w - cw + 1, (b,), generator=rng)
    keep = torch.ones(b, 1, h, w, dtype=x.dtype)
    for i in range(b):
        keep[i, :, int(ys[i]):int(ys[i]) + ch, int(xs[i]):int(xs[i]) + cw] = 0
    return x * keep


_APPLY = {"color": _color, "translation": _translation, "cutout": _cutout}


def diffaug(batch: torch.Tensor, policy, rng: torch.Generator) -> torch.Tensor:
    """Apply the requested augmentations to a (B, C, H, W) batch."""
    tokens = list(policy)
    for tok in tokens:
        if tok not in POLICIES:
            raise ValueError(f"unknown diffaug policy {tok!r}")
    x = batch
    for tok in POLICIES:  # canonical order, independent of input order
        if tok in tokens:
            x = _APPLY[tok](x, rng)
    return x
