"""Pre-norm transformer encoder layer with inspectable attention."""
from __future__ import annotations

import math

import torch
import torch.nn.functional as F
from torch import nn


class EncoderLayer(nn.Module):
    """z' = z + MSA(LN(z)); out = z' + MLP(LN(z')).

    Returns the post-softmax attention tensor (B, heads, T, T) alongside the
    output so callers can extract per-layer attention maps.
    """

    def __init__(self, d: int, heads: int, mlp_dim: int):
        super().__init__()
        assert d % heads == 0
        self.d = d
        self.heads = heads
        self.ln1 = nn.LayerNorm(d)
        self.qkv = nn.Linear(d, 3 * d)
        self.proj = nn.Linear(d, d)
        self.ln2 = nn.LayerNorm(d)
        self.fc1 = nn.Linear(d, mlp_dim)
        self.fc2 = nn.Linear(mlp_dim, d)

    def forward(self, z, key_padding_mask=None):
        """key_padding_mask: (B, T) bool, True = padded key (excluded)."""
        b, t, d = z.shape
        dh = d // self.heads
        h = self.ln1(z)
        q, k, v = self.qkv(h).chunk(3, dim=-1)
        q = q.view(b, t, self.heads, dh).transpose(1, 2)
        k = k.view(b, t, self.heads, dh).transpose(1, 2)
        v = v.view(b, t, self.heads, dh).transpose(1, 2)
        scores = q @ k.transpose(-1, -2) / math.sqrt(dh)
        if key_padding_mask is not None:
            scores = scores.masked_fill(
                key_padding_mask[:, None, None, :], float("-inf"))
        attn = scores.softmax(dim=-1)
        out = (attn @ v).transpose(1, 2).reshape(b, t, d)
        z = z + self.proj(out)
        z = z + self.fc2(F.relu(self.fc1(self.ln2(z))))
        return z, attn


def sinusoid_2d(h: int, w: int, d: int) -> torch.Tensor:
    """Fixed 2-D sine/cosine positional table, shape (h*w, d)."""
    assert d % 4 == 0, "2-D sinusoid needs d divisible by 4"
    quarter = d // 4
    freq = torch.exp(-math.log(10000.0) * torch.arange(quarter) / max(quarter - 1, 1))
    ys = torch.arange(h, dtype=torch.float32)[:, None] * freq[None, :]
    xs = torch.arange(w, dtype=torch.float32)[:, None] * freq[None, :]
    y_enc = torch.cat([ys.sin(), ys.cos()], dim=1)  # (h, d/2)
    x_enc = torch.cat([xs.sin(), xs.cos()], dim=1)  # (w, d/2)
    grid = torch.cat([
        y_enc[:, None, :].expand(h, w, d // 2),
        x_enc[None, :, :].expand(h, w, d // 2),
    ], dim=2)
    return grid.reshape(h * w, d)
