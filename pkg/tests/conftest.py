import numpy as np
import pytest
import torch

from scenefill.boxes import Box
from scenefill.datasets.shapes import ShapesConfig, synth_shapes_dataset


@pytest.fixture(autouse=True)
def _single_thread():
    torch.set_num_threads(2)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def shapes_cfg():
    return ShapesConfig(image_size=96)


@pytest.fixture
def tiny_scene(shapes_cfg):
    return next(synth_shapes_dataset(shapes_cfg, np.random.default_rng(7), 1))


def finite_difference_grad(fn, params, eps=1e-5):
    """Central-difference gradient of scalar fn() w.r.t. a list of tensors.

    Independent of autograd: perturbs one coordinate at a time.
    """
    grads = []
    with torch.no_grad():
        for p in params:
            g = torch.zeros_like(p, dtype=torch.float64)
            flat = p.reshape(-1)
            gflat = g.reshape(-1)
            for i in range(flat.numel()):
                orig = flat[i].item()
                flat[i] = orig + eps
                hi = float(fn())
                flat[i] = orig - eps
                lo = float(fn())
                flat[i] = orig
                gflat[i] = (hi - lo) / (2.0 * eps)
            grads.append(g)
    return grads


def relative_grad_error(analytic, numeric):
    """max over tensors of ||a - n|| / max(||a||, ||n||, tiny)."""
    worst = 0.0
    for a, n in zip(analytic, numeric):
        a = a.double()
        num = torch.linalg.norm(a - n)
        den = max(float(torch.linalg.norm(a)), float(torch.linalg.norm(n)), 1e-12)
        worst = max(worst, float(num) / den)
    return worst
