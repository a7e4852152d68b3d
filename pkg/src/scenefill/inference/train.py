"""Classifier training: cross-entropy, Adam, linear warmup then linear decay.

The warmup fraction defaults to 0.2 of the total steps (the 50-of-250-epoch
ramp expressed in steps so tiny runs still get a schedule). The learning
rate peaks exactly at step floor(warmup_frac * total_steps).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn.functional as F

from ..errors import DataError
from .model import EncoderConfig, MissingClassEncoder, build_classifier


@dataclass
class TrainSchedule:
    steps: int = 1000
    batch_size: int = 32
    base_lr: float = 1e-3
    warmup_frac: float = 0.2
    betas: tuple = (0.9, 0.999)
    seed: int = 0
    eval_every: int = 0   # 0 = only at the end


def learning_rate_at(step: int, total_steps: int, base_lr: float,
                     warmup_frac: float = 0.2) -> float:
    """Piecewise-linear: 0 -> base_lr at floor(warmup_frac*T), then back down."""
    peak = int(np.floor(warmup_frac * total_steps))
    peak = max(peak, 1)
    if step <= peak:
        return base_lr * step / peak
    return base_lr * max(total_steps - step, 0) / (total_steps - peak)


def _pad_batch(pairs, missing_token_id):
    """Stack ragged examples; padded keys are masked out of attention."""
    t = max(len(p.visible) for p in pairs) + 1
    b = len(pairs)
    ids = np.full((b, t), missing_token_id, dtype=np.int64)
    boxes = np.tile(np.array([0.5, 0.5, 1.0, 1.0]), (b, t, 1))
    pad = np.ones((b, t), dtype=bool)
    targets = np.empty(b, dtype=np.int64)
    for i, p in enumerate(pairs):
        pad[i, 0] = False
        boxes[i, 0] = p.missing_box.as_vector()
        for j, inst in enumerate(p.visible, start=1):
            ids[i, j] = inst.class_id
            boxes[i, j] = inst.box.as_vector()
            pad[i, j] = False
        targets[i] = p.target
    return (torch.from_numpy(ids), torch.from_numpy(boxes.astype(np.float32)),
            torch.from_numpy(pad), torch.from_numpy(targets))


def evaluate_accuracy(model: MissingClassEncoder, pairs, batch_size: int = 64) -> float:
    model.eval()
    correct = 0
    with torch.no_grad():
        for i in range(0, len(pairs), batch_size):
            chunk = pairs[i:i + batch_size]
            ids, boxes, pad, targets = _pad_batch(chunk, model.missing_token_id)
            logits = model.logits_from_batch(ids, boxes, pad)
            correct += int((logits.argmax(dim=1) == targets).sum())
    return correct / len(pairs)


def train_inference_model(dataset, cfg: EncoderConfig,
                          schedule: TrainSchedule, *, eval_pairs=None,
                          model: MissingClassEncoder | None = None):
    """Returns (model, log) where log has per-step lr/loss and eval accuracy."""
    dataset = list(dataset)
    if not dataset:
        raise DataError("empty training dataset")
    if model is None:
        model = build_classifier(cfg, seed=schedule.seed)
    rng = np.random.default_rng(schedule.seed)
    opt = torch.optim.Adam(model.parameters(), lr=schedule.base_lr,
                           betas=schedule.betas)
    log = {"lr": [], "loss": [], "accuracy": []}
    model.train()
    for step in range(schedule.steps):
        lr = learning_rate_at(step, schedule.steps, schedule.base_lr,
                              schedule.warmup_frac)
        for group in opt.param_groups:
            group["lr"] = lr
        idx = rng.integers(0, len(dataset), size=min(schedule.batch_size, len(dataset)))
        ids, boxes, pad, targets = _pad_batch([dataset[i] for i in idx],
                                              model.missing_token_id)
        logits = model.logits_from_batch(ids, boxes, pad)
        loss = F.cross_entropy(logits, targets)
        opt.zero_grad()
        loss.backward()
        opt.step()
        log["lr"].append(lr)
        log["loss"].append(float(loss.detach()))
        if (schedule.eval_every and eval_pairs is not None
                and (step + 1) % schedule.eval_every == 0):
            log["accuracy"].append(evaluate_accuracy(model, eval_pairs))
            model.train()
    if eval_pairs is not None:
        log["accuracy"].append(evaluate_accuracy(model, eval_pairs))
    model.eval()
    return model, log
