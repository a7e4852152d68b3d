"""Alternating hinge-loss training with DiffAug on both real and fake batches."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch

from ..errors import DataError
from .diffaug import diffaug
from .losses import gan_losses
from .nets import GenConfig, build_mask_gan


@dataclass
class GanTrainConfig:
    gen: GenConfig
    steps: int = 500
    batch_size: int = 16
    lr_g: float = 5e-5
    lr_d: float = 2e-4
    betas: tuple = (0.0, 0.999)
    policy: tuple = ("translation", "cutout")
    seed: int = 0


def _stack_batch(dataset, idx):
    sils = torch.from_numpy(np.stack([dataset[i][0] for i in idx]).astype(np.float32))
    classes = torch.tensor([dataset[i][1] for i in idx], dtype=torch.long)
    boxes = torch.from_numpy(np.stack(
        [dataset[i][2].as_vector() for i in idx]).astype(np.float32))
    return sils.unsqueeze(1), classes, boxes


def train_mask_gan(dataset, cfg: GanTrainConfig, *, nets=None, rng_state=None):
    """dataset: sequence of (silhouette 64x64 in {-1,+1}, class_id, Box).

    Returns ((generator, discriminator), log). Pass `nets` to continue
    training an existing pair; `rng_state` (log["rng_state"] of the previous
    round) keeps the data/noise stream advancing instead of repeating.
    """
    dataset = list(dataset)
    if not dataset:
        raise DataError("empty GAN training dataset")
    if nets is not None:
        gen, disc = nets
    else:
        gen, disc = build_mask_gan(cfg.gen, seed=cfg.seed)
    opt_g = torch.optim.Adam(gen.parameters(), lr=cfg.lr_g, betas=cfg.betas)
    opt_d = torch.optim.Adam(disc.parameters(), lr=cfg.lr_d, betas=cfg.betas)
    rng = np.random.default_rng(cfg.seed)
    aug_rng = torch.Generator().manual_seed(cfg.seed)
    if rng_state is not None:
        rng.bit_generator.state = rng_state[0]
        aug_rng.set_state(rng_state[1])
    log = {"d_loss": [], "g_loss": []}

    gen.train()
    disc.train()
    for _ in range(cfg.steps):
        idx = rng.integers(0, len(dataset), size=min(cfg.batch_size, len(dataset)))
        real, classes, boxes = _stack_batch(dataset, idx)
        z = torch.from_numpy(
            rng.standard_normal((len(idx), cfg.gen.z_dim)).astype(np.float32))

        fake = gen(z, classes, boxes)
        d_real = disc(diffaug(real, cfg.policy, aug_rng), classes)
        d_fake = disc(diffaug(fake.detach(), cfg.policy, aug_rng), classes)
        d_loss = gan_losses(d_real, d_fake)["d_loss"]
        opt_d.zero_grad()
        d_loss.backward()
        opt_d.step()

        d_fake_for_g = disc(diffaug(fake, cfg.policy, aug_rng), classes)
        g_loss = gan_losses(d_real.detach(), d_fake_for_g)["g_loss"]
        opt_g.zero_grad()
        g_loss.backward()
        opt_g.step()

        log["d_loss"].append(float(d_loss.detach()))
        log["g_loss"].append(float(g_loss.detach()))

    gen.eval()
    disc.eval()
    log["rng_state"] = (rng.bit_generator.state, aug_rng.get_state())
    return (gen, disc), log
