"""Restoration training and the hole-fraction robustness sweep."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn.functional as F

from ..errors import DataError
from ..labelmap import LabelMap, miou
from .corrupt import scribble_corrupt
from .nets import BackgroundConfig, BackgroundNet, build_background_net


@dataclass
class BackgroundTrainConfig:
    net: BackgroundConfig
    steps: int = 400
    batch_size: int = 4
    lr: float = 1e-4
    weight_decay: float = 1e-4
    betas: tuple = (0.9, 0.999)
    coverage: tuple = (0.1, 0.5)
    loss_on_corrupted_only: bool = False
    seed: int = 0


def train_background_net(dataset, cfg: BackgroundTrainConfig,
                         model: BackgroundNet | None = None):
    """dataset: clean background LabelMaps (instances already erased to UNKNOWN).

    Cross-entropy against the clean map over all pixels (UNKNOWN targets are
    ignored); corruption is drawn fresh every step. Returns (model, log).
    """
    dataset = list(dataset)
    if not dataset:
        raise DataError("empty background training dataset")
    if model is None:
        model = build_background_net(cfg.net, seed=cfg.seed)
    opt = torch.optim.Adam(model.parameters(), lr=cfg.lr, betas=cfg.betas,
                           weight_decay=cfg.weight_decay)
    rng = np.random.default_rng(cfg.seed)
    unknown = dataset[0].unknown_id
    log = {"loss": []}
    model.train()
    for _ in range(cfg.steps):
        idx = rng.integers(0, len(dataset), size=min(cfg.batch_size, len(dataset)))
        clean, corrupted, masks = [], [], []
        for i in idx:
            cm, mask = scribble_corrupt(dataset[i], cfg.coverage, rng)
            clean.append(dataset[i].labels)
            corrupted.append(cm.labels)
            masks.append(mask)
        inputs = torch.from_numpy(np.stack(corrupted).astype(np.int64))
        targets = torch.from_numpy(np.stack(clean).astype(np.int64))
        logits = model(inputs)
        if cfg.loss_on_corrupted_only:
            hole = torch.from_numpy(np.stack(masks)) > 0
            targets = targets.masked_fill(~hole, unknown)
        loss = F.cross_entropy(logits, targets, ignore_index=unknown)
        opt.zero_grad()
        loss.backward()
        opt.step()
        log["loss"].append(float(loss.detach()))
    model.eval()
    return model, log


def evaluate_restoration(model: BackgroundNet, maps, hole_fraction: float,
                         rng: np.random.Generator, band: float = 0.05) -> float:
    """Mean restoration mIoU at a target hole fraction (evaluated full-map)."""
    from .nets import complete_background
    lo = max(hole_fraction - band, 0.0)
    hi = min(hole_fraction + band, 0.95)
    scores = []
    for m in maps:
        corrupted, _ = scribble_corrupt(m, (lo, hi), rng)
        _, restored = complete_background(corrupted, model)
        scores.append(miou(restored, m))
    return float(np.mean(scores))


def hole_fraction_sweep(models: dict, maps, fractions, seed: int = 0) -> list[dict]:
    """Rows of {body, hole_fraction, miou} for each model at each fraction."""
    rows = []
    for body, model in models.items():
        for f in fractions:
            rng = np.random.default_rng(seed)  # same holes for every body
            rows.append({
                "body": body,
                "hole_fraction": float(f),
                "miou": evaluate_restoration(model, maps, f, rng),
            })
    return rows
