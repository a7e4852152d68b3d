"""Residual GAN blocks: conditional-BN up blocks, SN down blocks, self-attention."""
from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn

from .sn import SNConv2d, SNLinear


class ConditionalBatchNorm(nn.Module):
    """BN whose per-channel gain/bias are linear in a conditioning vector."""

    def __init__(self, channels: int, cond_dim: int):
        super().__init__()
        self.bn = nn.BatchNorm2d(channels, affine=False)
        self.gain = SNLinear(cond_dim, channels, bias=False)
        self.bias = SNLinear(cond_dim, channels, bias=False)

    def forward(self, x, cond):
        gain = (1.0 + self.gain(cond)).unsqueeze(-1).unsqueeze(-1)
        bias = self.bias(cond).unsqueeze(-1).unsqueeze(-1)
        return self.bn(x) * gain + bias


class GenBlock(nn.Module):
    """Conditional residual up block: CBN-ReLU-Up-Conv, CBN-ReLU-Conv + skip."""

    def __init__(self, in_ch: int, out_ch: int, cond_dim: int, upsample: bool = True):
        super().__init__()
        self.upsample = upsample
        self.cbn1 = ConditionalBatchNorm(in_ch, cond_dim)
        self.conv1 = SNConv2d(in_ch, out_ch, 3, 1, 1)
        self.cbn2 = ConditionalBatchNorm(out_ch, cond_dim)
        self.conv2 = SNConv2d(out_ch, out_ch, 3, 1, 1)
        self.conv_sc = SNConv2d(in_ch, out_ch, 1, 1, 0)

    def forward(self, x, cond):
        h = F.relu(self.cbn1(x, cond))
        if self.upsample:
            h = F.interpolate(h, scale_factor=2, mode="nearest")
            x = F.interpolate(x, scale_factor=2, mode="nearest")
        h = self.conv1(h)
        h = self.conv2(F.relu(self.cbn2(h, cond)))
        return h + self.conv_sc(x)


class DBlock(nn.Module):
    def __init__(self, in_ch: int, out_ch: int, downsample: bool = True):
        super().__init__()
        self.downsample = downsample
        self.conv1 = SNConv2d(in_ch, out_ch, 3, 1, 1)
        self.conv2 = SNConv2d(out_ch, out_ch, 3, 1, 1)
        self.learnable_sc = in_ch != out_ch or downsample
        if self.learnable_sc:
            self.conv_sc = SNConv2d(in_ch, out_ch, 1, 1, 0)

    def forward(self, x):
        h = self.conv1(F.relu(x))
        h = self.conv2(F.relu(h))
        if self.downsample:
            h = F.avg_pool2d(h, 2)
        sc = x
        if self.learnable_sc:
            sc = self.conv_sc(sc)
        if self.downsample:
            sc = F.avg_pool2d(sc, 2)
        return h + sc


class OptimizedDBlock(nn.Module):
    """First discriminator block: no pre-activation on the raw input."""

    def __init__(self, in_ch: int, out_ch: int):
        super().__init__()
        self.conv1 = SNConv2d(in_ch, out_ch, 3, 1, 1)
        self.conv2 = SNConv2d(out_ch, out_ch, 3, 1, 1)
        self.conv_sc = SNConv2d(in_ch, out_ch, 1, 1, 0)

    def forward(self, x):
        h = self.conv2(F.relu(self.conv1(x)))
        h = F.avg_pool2d(h, 2)
        return h + self.conv_sc(F.avg_pool2d(x, 2))


class SelfAttention(nn.Module):
    """SAGAN-style non-local block with a learnable residual gain."""

    def __init__(self, channels: int):
        super().__init__()
        self.theta = SNConv2d(channels, channels // 8, 1, 1, 0, bias=False)
        self.phi = SNConv2d(channels, channels // 8, 1, 1, 0, bias=False)
        self.g = SNConv2d(channels, channels // 2, 1, 1, 0, bias=False)
        self.out = SNConv2d(channels // 2, channels, 1, 1, 0, bias=False)
        self.gamma = nn.Parameter(torch.zeros(1))

    def forward(self, x):
        b, c, h, w = x.shape
        theta = self.theta(x).reshape(b, c // 8, h * w)
        phi = F.max_pool2d(self.phi(x), 2).reshape(b, c // 8, h * w // 4)
        g = F.max_pool2d(self.g(x), 2).reshape(b, c // 2, h * w // 4)
        attn = torch.softmax(theta.transpose(1, 2) @ phi, dim=-1)
        o = (g @ attn.transpose(1, 2)).reshape(b, c // 2, h, w)
        return x + self.gamma * self.out(o)


class ResBlock(nn.Module):
    """Plain (unconditional) residual conv block, optional channel change."""

    def __init__(self, in_ch: int, out_ch: int):
        super().__init__()
        self.conv1 = nn.Conv2d(in_ch, out_ch, 3, 1, 1)
        self.conv2 = nn.Conv2d(out_ch, out_ch, 3, 1, 1)
        self.skip = (nn.Conv2d(in_ch, out_ch, 1, 1, 0)
                     if in_ch != out_ch else nn.Identity())

    def forward(self, x):
        h = self.conv1(F.gelu(x))
        h = self.conv2(F.gelu(h))
        return h + self.skip(x)
