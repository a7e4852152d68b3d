"""Frechet distance between Gaussian feature fits.

The trace of sqrt(cov_a cov_b) is computed through the symmetrized product
sqrt_a cov_b sqrt_a (similar to cov_a cov_b, so the eigenvalues match),
with eigenvalues below a small negative tolerance treated as a numerical
breakdown and small negatives clipped to zero.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError

_SYM_TOL = 1e-8
_NEG_TOL = 1e-6


@dataclass
class FeatureStatistics:
    mean: np.ndarray
    cov: np.ndarray
    n: int

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.cov = np.asarray(self.cov, dtype=np.float64)
        if self.mean.ndim != 1 or self.cov.shape != (self.mean.size,) * 2:
            raise ValueError("mean must be (D,), cov (D, D)")
        if self.n < 2:
            raise ValueError("need at least two samples")
        asym = np.abs(self.cov - self.cov.T).max()
        if asym > _SYM_TOL:
            raise ValueError(f"covariance asymmetric by {asym:g}")

    @classmethod
    def from_features(cls, feats: np.ndarray) -> "FeatureStatistics":
        feats = np.asarray(feats, dtype=np.float64)
        if feats.ndim != 2 or feats.shape[0] < 2:
            raise DataError("need a (n >= 2, D) feature matrix")
        mean = feats.mean(axis=0)
        cov = np.cov(feats, rowvar=False)
        cov = np.atleast_2d(cov)
        return cls(mean, (cov + cov.T) / 2.0, feats.shape[0])


def _psd_sqrt(mat: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh((mat + mat.T) / 2.0)
    scale = max(np.abs(vals).max(), 1.0)
    if vals.min() < -_NEG_TOL * scale:
        raise DataError(f"matrix not PSD: eigenvalue {vals.min():g}")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def trace_sqrt_product(cov_a: np.ndarray, cov_b: np.ndarray) -> float:
    """tr sqrt(cov_a cov_b) via eigendecomposition of the symmetrized product."""
    sqrt_a = _psd_sqrt(cov_a)
    inner = sqrt_a @ cov_b @ sqrt_a
    vals = np.linalg.eigvalsh((inner + inner.T) / 2.0)
    scale = max(np.abs(vals).max(), 1.0)
    if vals.min() < -_NEG_TOL * scale:
        raise DataError(f"product eigenvalue {vals.min():g}: numerical breakdown")
    return float(np.sqrt(np.clip(vals, 0.0, None)).sum())


def fid(stats_a: FeatureStatistics, stats_b: FeatureStatistics) -> float:
    """|mu_a - mu_b|^2 + tr(cov_a + cov_b - 2 sqrt(cov_a cov_b)), clipped >= 0."""
    if stats_a.mean.size != stats_b.mean.size:
        raise ValueError(
            f"dimension mismatch: {stats_a.mean.size} vs {stats_b.mean.size}")
    diff = stats_a.mean - stats_b.mean
    value = (float(diff @ diff)
             + float(np.trace(stats_a.cov) + np.trace(stats_b.cov))
             - 2.0 * trace_sqrt_product(stats_a.cov, stats_b.cov))
    return max(value, 0.0)
