"""Per-pixel segmentation-discriminator losses plus the reconstruction terms.

The discriminator emits (N+1)-way logits per pixel (channel N = fake).
Masked real pixels are labeled with their guidance class; masked fake
pixels with the fake class. The class-targeted cross-entropy terms are
weighted by inverse class frequency within the batch's masked pixels,
normalized to mean 1 so a uniform-logit generator scores exactly ln(N+1).
L2 covers the unmasked region of the raw generator output; the perceptual
term compares full images in a provider's feature space.
"""
from __future__ import annotations

import numpy as np
import torch
import torch.nn.functional as F

from ..torchutils import image_to_tensor
from .guidance import GuidanceMap


def _canon_image(x) -> torch.Tensor:
    if torch.is_tensor(x):
        return x if x.ndim == 4 else x.unsqueeze(0)
    return image_to_tensor(np.asarray(x, dtype=np.float32))


def _canon_mask(mask) -> torch.Tensor:
    if torch.is_tensor(mask):
        m = mask.float()
        if m.ndim == 2:
            m = m[None, None]
        elif m.ndim == 3:
            m = m.unsqueeze(1)
        return m
    return image_to_tensor((np.asarray(mask) > 0).astype(np.float32))


def _canon_labels(guidance) -> torch.Tensor:
    if isinstance(guidance, GuidanceMap):
        return torch.from_numpy(guidance.semantic_labels()).unsqueeze(0)
    g = guidance if torch.is_tensor(guidance) else torch.as_tensor(guidance)
    return g.long() if g.ndim == 3 else g.long().unsqueeze(0)


def _class_weights(labels: torch.Tensor, hole: torch.Tensor,
                   num_classes: int) -> torch.Tensor:
    """Per-pixel inverse-frequency weights over masked pixels, mean 1."""
    sel = labels[hole]
    counts = torch.bincount(sel, minlength=num_classes).float()
    inv = torch.where(counts > 0, 1.0 / counts.clamp(min=1.0),
                      torch.zeros_like(counts))
    w = inv[labels] * hole
    total = w.sum()
    if total > 0:
        w = w * (hole.sum() / total)
    return w


def perceptual_features_distance(a: torch.Tensor, b: torch.Tensor,
                                 provider) -> torch.Tensor:
    fa = provider.features(a)
    fb = provider.features(b)
    dists = [((x - y) ** 2).mean() for x, y in zip(fa, fb)]
    return torch.stack(dists).mean()


def oasis_losses(completed, real, mask, guidance, disc, *,
                 perceptual_provider=None, class_weighting: bool = True,
                 lambda2: float = 10.0, lambda_p: float = 10.0) -> dict:
    """Returns {g_loss, d_loss, l2_unmasked, perceptual, total_g} (tensors).

    `completed` is the raw generator output (unblended); the adversarial
    terms see it composited into the real image at mask pixels, and the L2
    term penalizes it against the real image on the unmasked region.
    """
    completed = _canon_image(completed)
    real = _canon_image(real)
    m = _canon_mask(mask)
    labels = _canon_labels(guidance)
    n = disc.cfg.num_classes if hasattr(disc, "cfg") else None

    blended = torch.where(m > 0, completed, real)
    d_real_logits = disc(real, m)
    d_fake_logits = disc(blended.detach(), m)
    g_fake_logits = disc(blended, m)
    if n is None:
        n = d_real_logits.shape[1] - 1

    hole = (m[:, 0] > 0)
    weights = (_class_weights(labels, hole, n) if class_weighting
               else hole.float())

    def masked_ce(logits, targets, w):
        ce = F.cross_entropy(logits, targets, reduction="none")
        denom = hole.float().sum().clamp(min=1.0)
        return (ce * w).sum() / denom

    fake_target = torch.full_like(labels, n)
    d_loss = (masked_ce(d_real_logits, labels, weights)
              + masked_ce(d_fake_logits, fake_target, hole.float()))
    g_loss = masked_ce(g_fake_logits, labels, weights)

    free = (m <= 0).expand_as(real)
    if free.any():
        l2_unmasked = ((completed - real) ** 2)[free].mean()
    else:
        l2_unmasked = completed.new_zeros(())

    if perceptual_provider is not None:
        perceptual = perceptual_features_distance(completed, real,
                                                  perceptual_provider)
    else:
        perceptual = completed.new_zeros(())

    total_g = g_loss + lambda2 * l2_unmasked + lambda_p * perceptual
    return {"g_loss": g_loss, "d_loss": d_loss, "l2_unmasked": l2_unmasked,
            "perceptual": perceptual, "total_g": total_g}
