"""Seeding and conversion helpers for the torch-backed networks."""
from __future__ import annotations

from contextlib import contextmanager

import numpy as np
import torch


@contextmanager
def torch_seed(seed: int):
    """Run a block under a fixed torch RNG state without leaking it."""
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        yield


def as_tensor(x, dtype=torch.float32) -> torch.Tensor:
    if isinstance(x, torch.Tensor):
        return x.to(dtype)
    return torch.as_tensor(np.ascontiguousarray(x), dtype=dtype)


def count_params(module: torch.nn.Module) -> int:
    return sum(p.numel() for p in module.parameters())


def image_to_tensor(img: np.ndarray) -> torch.Tensor:
    """(H, W, C) or (H, W) numpy image to a (1, C, H, W) float tensor."""
    if img.ndim == 2:
        img = img[..., None]
    t = torch.from_numpy(np.ascontiguousarray(img.astype(np.float32)))
    return t.permute(2, 0, 1).unsqueeze(0)


def tensor_to_image(t: torch.Tensor) -> np.ndarray:
    """(1, C, H, W) tensor back to (H, W, C) float32 numpy."""
    return t.squeeze(0).permute(1, 2, 0).detach().cpu().numpy().astype(np.float32)
