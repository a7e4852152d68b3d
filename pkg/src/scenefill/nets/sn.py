"""Spectrally normalized layers.

The top singular pair (u, v) of each weight is computed exactly (one small
SVD) and cached against the weight's in-place version counter, so it is
refreshed once per optimizer step no matter how many forwards reuse the
weight. Each forward then normalizes by sigma = u^T W v, which equals the
true spectral norm for the current weight and backpropagates the exact
gradient u v^T without differentiating through the SVD itself.
"""
from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn

_EPS = 1e-12


def spectral_sigma(weight: torch.Tensor) -> torch.Tensor:
    """Exact largest singular value of the weight viewed as (out, -1)."""
    mat = weight.reshape(weight.shape[0], -1)
    return torch.linalg.matrix_norm(mat, ord=2)


def spectral_normalize(weight: torch.Tensor, eps: float = _EPS) -> torch.Tensor:
    """Exact normalization via SVD; reference path for checks."""
    return weight / (spectral_sigma(weight) + eps)


class _SpectralNormMixin:
    def _init_sn(self) -> None:
        self._sn_version = -1
        self._sn_u: torch.Tensor | None = None
        self._sn_v: torch.Tensor | None = None

    def _singular_pair(self, mat: torch.Tensor):
        version = self.weight._version
        if version != self._sn_version or self._sn_u is None:
            u, s, vh = torch.linalg.svd(mat.detach(), full_matrices=False)
            self._sn_u = u[:, 0].contiguous()
            self._sn_v = vh[0].contiguous()
            self._sn_version = version
        return self._sn_u, self._sn_v

    def normalized_weight(self) -> torch.Tensor:
        w = self.weight
        mat = w.reshape(w.shape[0], -1)
        u, v = self._singular_pair(mat)
        sigma = torch.dot(u, mat.mv(v))
        return w / (sigma + _EPS)


class SNLinear(nn.Linear, _SpectralNormMixin):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._init_sn()

    def forward(self, x):
        return F.linear(x, self.normalized_weight(), self.bias)


class SNConv2d(nn.Conv2d, _SpectralNormMixin):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._init_sn()

    def forward(self, x):
        return self._conv_forward(x, self.normalized_weight(), self.bias)


class SNEmbedding(nn.Embedding, _SpectralNormMixin):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._init_sn()

    def forward(self, x):
        return F.embedding(x, self.normalized_weight())


def module_spectral_sigmas(module: nn.Module) -> dict[str, float]:
    """True spectral norms of every normalized weight, for invariant checks."""
    out = {}
    for name, m in module.named_modules():
        if isinstance(m, (SNLinear, SNConv2d, SNEmbedding)):
            with torch.no_grad():
                out[name] = float(spectral_sigma(m.normalized_weight()))
    return out
