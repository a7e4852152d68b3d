"""Hinge adversarial losses."""
from __future__ import annotations

import torch

from ..torchutils import as_tensor


def gan_losses(d_real, d_fake) -> dict:
    """d_loss = E[max(0, 1-d_real)] + E[max(0, 1+d_fake)]; g_loss = -E[d_fake]."""
    d_real = as_tensor(d_real, torch.float64) if not torch.is_tensor(d_real) else d_real
    d_fake = as_tensor(d_fake, torch.float64) if not torch.is_tensor(d_fake) else d_fake
    if not (torch.isfinite(d_real).all() and torch.isfinite(d_fake).all()):
        raise ValueError("non-finite logits")
    d_loss = torch.relu(1.0 - d_real).mean() + torch.relu(1.0 + d_fake).mean()
    g_loss = -d_fake.mean()
    return {"d_loss": d_loss, "g_loss": g_loss}
