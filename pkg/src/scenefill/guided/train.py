"""Alternating G/D training for segmentation-guided completion."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch

from ..errors import DataError
from ..torchutils import image_to_tensor
from .guidance import GuidanceMap
from .losses import oasis_losses, perceptual_features_distance
from .nets import CompletionConfig, CompletionNets, build_completion_nets


class IdentityPerceptual:
    """Feature provider whose single layer is the image itself (loss = MSE)."""

    name = "identity"

    def features(self, images: torch.Tensor):
        return [images]


@dataclass
class GuidedTrainConfig:
    net: CompletionConfig
    steps: int = 300
    batch_size: int = 2
    lr_g: float = 1e-4
    lr_d: float = 4e-4
    betas: tuple = (0.0, 0.999)
    lambda2: float = 10.0
    lambda_p: float = 10.0
    kl_weight: float = 0.05
    use_kl: bool = True
    disc_kind: str = "oasis"   # or "spade" for the patch-discriminator variant
    class_weighting: bool = True
    seed: int = 0


def _sample_tensors(sample):
    """MaskedSample -> (real, image_masked, mask, guidance) in [-1,1] tensors."""
    real01 = sample.source_image
    if real01 is None:
        raise DataError("training samples need source_image (the unmasked crop)")
    real = image_to_tensor(real01 * 2.0 - 1.0)
    masked = image_to_tensor(sample.image_masked * 2.0 - 1.0)
    mask = image_to_tensor((sample.mask > 0).astype(np.float32))
    guidance = GuidanceMap.from_label_map(sample.target_label_map, sample.mask)
    return real, masked, mask, guidance


def train_guided_completion(dataset, cfg: GuidedTrainConfig, *,
                            perceptual_provider=None,
                            nets: CompletionNets | None = None):
    """dataset: MaskedSamples with ground-truth labels as guidance.

    Returns (nets, log).
    """
    dataset = list(dataset)
    if not dataset:
        raise DataError("empty guided-completion training dataset")
    if nets is None:
        nets = build_completion_nets(cfg.net, seed=cfg.seed,
                                     disc_kind=cfg.disc_kind)
    if perceptual_provider is None:
        perceptual_provider = IdentityPerceptual()
    gen, disc = nets.generator, nets.discriminator
    opt_g = torch.optim.Adam(gen.parameters(), lr=cfg.lr_g, betas=cfg.betas)
    opt_d = torch.optim.Adam(disc.parameters(), lr=cfg.lr_d, betas=cfg.betas)
    rng = np.random.default_rng(cfg.seed)
    log = {"d_loss": [], "g_loss": [], "l2_unmasked": [], "perceptual": []}

    cached = [_sample_tensors(s) for s in dataset]
    gen.train()
    disc.train()
    for _ in range(cfg.steps):
        idx = rng.integers(0, len(cached), size=min(cfg.batch_size, len(cached)))
        real = torch.cat([cached[i][0] for i in idx])
        masked = torch.cat([cached[i][1] for i in idx])
        mask = torch.cat([cached[i][2] for i in idx])
        cond = torch.cat([cached[i][3].condition_tensor() for i in idx])
        labels = torch.stack([torch.from_numpy(cached[i][3].semantic_labels())
                              for i in idx])
        noise = torch.from_numpy(rng.standard_normal(
            (len(idx), cfg.net.latent_dim)).astype(np.float32))

        raw, mu, logvar = gen(masked, mask, cond, noise)

        if cfg.disc_kind == "oasis":
            losses = oasis_losses(raw, real, mask, labels, disc,
                                  perceptual_provider=perceptual_provider,
                                  class_weighting=cfg.class_weighting,
                                  lambda2=cfg.lambda2, lambda_p=cfg.lambda_p)
            d_loss = losses["d_loss"]
            g_total = losses["total_g"]
        else:  # spade: hinge patch discriminator on [image | guidance]
            blended = torch.where(mask > 0, raw, real)
            d_real = disc(real, cond)
            d_fake = disc(blended.detach(), cond)
            d_loss = (torch.relu(1.0 - d_real).mean()
                      + torch.relu(1.0 + d_fake).mean())
            g_adv = -disc(blended, cond).mean()
            free = (mask <= 0).expand_as(real)
            l2 = ((raw - real) ** 2)[free].mean() if free.any() \
                else raw.new_zeros(())
            perc = perceptual_features_distance(raw, real, perceptual_provider)
            losses = {"g_loss": g_adv, "l2_unmasked": l2, "perceptual": perc}
            g_total = g_adv + cfg.lambda2 * l2 + cfg.lambda_p * perc

        if cfg.use_kl:
            kl = 0.5 * (mu ** 2 + logvar.exp() - 1.0 - logvar).mean()
            g_total = g_total + cfg.kl_weight * kl

        # G first: its step leaves D weights untouched, so the d_loss graph
        # (built on detached generator output) stays valid afterwards.
        opt_g.zero_grad()
        g_total.backward(retain_graph=True)
        opt_g.step()
        opt_d.zero_grad()   # drop stray D grads from the generator backward
        d_loss.backward()
        opt_d.step()

        log["d_loss"].append(float(d_loss.detach()))
        log["g_loss"].append(float(losses["g_loss"].detach()))
        log["l2_unmasked"].append(float(losses["l2_unmasked"].detach()))
        log["perceptual"].append(float(losses["perceptual"].detach()))

    gen.eval()
    disc.eval()
    return nets, log
