"""Spatially adaptive modulation: out = normalize(x) * gamma(cond) + beta(cond).

The normalization is parameter-free, per channel over the (batch, H, W)
statistics of the incoming features; gamma and beta are conv-predicted
from the condition map resized (nearest) to the feature resolution. The
gamma conv bias starts at 1 so modulation is near-identity at init.
"""
from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn

_NORM_EPS = 1e-5


def _batch_stat_normalize(x: torch.Tensor) -> torch.Tensor:
    mean = x.mean(dim=(0, 2, 3), keepdim=True)
    var = x.var(dim=(0, 2, 3), unbiased=False, keepdim=True)
    return (x - mean) / torch.sqrt(var + _NORM_EPS)


class SpadeModulation(nn.Module):
    def __init__(self, feature_ch: int, cond_ch: int, hidden: int = 64):
        super().__init__()
        self.shared = nn.Conv2d(cond_ch, hidden, 3, 1, 1)
        self.gamma = nn.Conv2d(hidden, feature_ch, 3, 1, 1)
        self.beta = nn.Conv2d(hidden, feature_ch, 3, 1, 1)
        nn.init.ones_(self.gamma.bias)

    def forward(self, features: torch.Tensor, condition: torch.Tensor):
        if condition.shape[1] != self.shared.in_channels:
            raise ValueError(
                f"condition has {condition.shape[1]} channels, "
                f"expected {self.shared.in_channels}")
        cond = F.interpolate(condition, size=features.shape[2:], mode="nearest")
        a = F.relu(self.shared(cond))
        return _batch_stat_normalize(features) * self.gamma(a) + self.beta(a)


def spade_modulate(features: torch.Tensor, condition: torch.Tensor,
                   module: SpadeModulation) -> torch.Tensor:
    return module(features, condition)


class SpadeResBlock(nn.Module):
    def __init__(self, in_ch: int, out_ch: int, cond_ch: int):
        super().__init__()
        mid = min(in_ch, out_ch)
        self.spade1 = SpadeModulation(in_ch, cond_ch)
        self.conv1 = nn.Conv2d(in_ch, mid, 3, 1, 1)
        self.spade2 = SpadeModulation(mid, cond_ch)
        self.conv2 = nn.Conv2d(mid, out_ch, 3, 1, 1)
        self.learned_skip = in_ch != out_ch
        if self.learned_skip:
            self.spade_s = SpadeModulation(in_ch, cond_ch)
            self.conv_s = nn.Conv2d(in_ch, out_ch, 1, 1, 0, bias=False)

    def forward(self, x, cond):
        h = self.conv1(F.leaky_relu(self.spade1(x, cond), 0.2))
        h = self.conv2(F.leaky_relu(self.spade2(h, cond), 0.2))
        s = self.conv_s(self.spade_s(x, cond)) if self.learned_skip else x
        return h + s
