"""Guidance maps: restored semantics one-hot plus a MASKED hole channel.

The semantic channels are one-hot everywhere (the restored map carries
real labels inside the hole -- that is the point of the restoration
stage); the extra MASKED channel duplicates the hole mask so modulation
layers can tell hole pixels apart from visible ones.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from ..errors import DataError
from ..labelmap import LabelMap


@dataclass
class GuidanceMap:
    one_hot: np.ndarray   # (H, W, N+1) float32; channel N mirrors the mask
    mask: np.ndarray      # (H, W) uint8

    @property
    def num_classes(self) -> int:
        return self.one_hot.shape[2] - 1

    @classmethod
    def from_label_map(cls, label_map: LabelMap, mask: np.ndarray) -> "GuidanceMap":
        labels = label_map.labels
        if labels.max() >= label_map.num_classes:
            raise DataError("guidance needs fully restored labels "
                            "(no UNKNOWN/MASKED)")
        mask = (np.asarray(mask) > 0).astype(np.uint8)
        if mask.shape != labels.shape:
            raise DataError("mask shape does not match the label map")
        n = label_map.num_classes
        one_hot = np.zeros(labels.shape + (n + 1,), dtype=np.float32)
        np.put_along_axis(one_hot, labels[..., None], 1.0, axis=2)
        one_hot[..., n] = mask
        return cls(one_hot, mask)

    def validate(self) -> None:
        sums = self.one_hot[..., :-1].sum(axis=2)
        if not np.allclose(sums, 1.0):
            raise DataError("semantic channels must be one-hot per pixel")
        if not np.array_equal(self.one_hot[..., -1] > 0, self.mask > 0):
            raise DataError("MASKED channel must equal the mask")

    def semantic_labels(self) -> np.ndarray:
        return np.argmax(self.one_hot[..., :-1], axis=2).astype(np.int64)

    def condition_tensor(self) -> torch.Tensor:
        """(1, N+2, H, W): one-hot channels plus the raw mask channel."""
        chans = np.concatenate(
            [self.one_hot, self.mask[..., None].astype(np.float32)], axis=2)
        return torch.from_numpy(chans).permute(2, 0, 1).unsqueeze(0)
