import numpy as np
import pytest
import torch

from scenefill.errors import DataError, ProviderError
from scenefill.guided import (CompletionConfig, GuidanceMap, HashPaintBackend,
                              SpadeModulation, build_completion_nets,
                              class_to_prompt, complete_image, oasis_losses,
                              prompt_paint_value, sequential_inpaint,
                              spade_modulate)
from scenefill.guided.train import IdentityPerceptual
from scenefill.labelmap import LabelMap

from conftest import finite_difference_grad, relative_grad_error

N = 3


def small_guidance(h=16, w=16, mask_rows=(4, 10)):
    labels = np.zeros((h, w), dtype=np.int64)
    labels[h // 2:] = 1
    mask = np.zeros((h, w), dtype=np.uint8)
    mask[mask_rows[0]:mask_rows[1], 3:12] = 1
    return GuidanceMap.from_label_map(LabelMap(labels, N), mask)


# ---------------------------------------------------------------- guidance

def test_guidance_channel_invariants():
    g = small_guidance()
    g.validate()
    assert g.one_hot.shape == (16, 16, N + 1)
    assert np.array_equal(g.one_hot[..., -1], g.mask)


def test_guidance_rejects_unrestored_labels():
    labels = np.full((8, 8), 3, dtype=np.int64)  # UNKNOWN for N=3
    with pytest.raises(DataError):
        GuidanceMap.from_label_map(LabelMap(labels, N), np.zeros((8, 8)))


# ------------------------------------------------------------------- spade

def test_spade_gamma_zero_gives_zero():
    mod = SpadeModulation(4, N + 2)
    with torch.no_grad():
        for p in mod.parameters():
            p.zero_()
    x = torch.randn(2, 4, 8, 8)
    cond = torch.rand(2, N + 2, 16, 16)
    out = spade_modulate(x, cond, mod)
    assert torch.equal(out, torch.zeros_like(out))


def test_spade_gamma_one_gives_normalized_features():
    mod = SpadeModulation(4, N + 2)
    with torch.no_grad():
        for p in mod.parameters():
            p.zero_()
        mod.gamma.bias.fill_(1.0)
    x = torch.randn(3, 4, 8, 8)
    out = spade_modulate(x, torch.rand(3, N + 2, 8, 8), mod)
    mean = out.mean(dim=(0, 2, 3))
    var = out.var(dim=(0, 2, 3), unbiased=False)
    assert mean.abs().max() < 1e-4
    assert (var - 1).abs().max() < 1e-4


def test_spade_channel_mismatch():
    mod = SpadeModulation(4, N + 2)
    with pytest.raises(ValueError):
        spade_modulate(torch.randn(1, 4, 8, 8), torch.rand(1, N + 5, 8, 8), mod)


def test_spade_gradients_match_finite_differences():
    mod = SpadeModulation(2, 3, hidden=4).double()
    x = torch.randn(1, 2, 4, 4, dtype=torch.float64)
    cond = torch.rand(1, 3, 4, 4, dtype=torch.float64)

    def fn():
        return (spade_modulate(x, cond, mod) ** 2).sum()

    params = [mod.gamma.weight, mod.gamma.bias, mod.beta.weight, mod.beta.bias]
    analytic = torch.autograd.grad(fn(), params)
    numeric = finite_difference_grad(fn, params, eps=1e-6)
    assert relative_grad_error(analytic, numeric) <= 1e-3


# ------------------------------------------------------------ complete_image

@pytest.fixture(scope="module")
def tiny_nets():
    return build_completion_nets(CompletionConfig.tiny(N, resolution=16), seed=0)


def make_inputs(h=16, w=16):
    rng = np.random.default_rng(0)
    img = (rng.random((h, w, 3)).astype(np.float32) * 2 - 1)
    g = small_guidance(h, w)
    masked = img.copy()
    masked[g.mask > 0] = 0.0
    return masked, g.mask, g


def test_blend_contract_bit_exact(tiny_nets):
    masked, mask, g = make_inputs()
    out = complete_image(masked, mask, g, tiny_nets)
    free = mask == 0
    assert np.array_equal(out[free], masked[free])
    assert out.shape == masked.shape


def test_eval_mode_deterministic_and_rng_free(tiny_nets):
    masked, mask, g = make_inputs()
    a = complete_image(masked, mask, g, tiny_nets, rng=np.random.default_rng(1))
    b = complete_image(masked, mask, g, tiny_nets, rng=np.random.default_rng(9))
    assert np.array_equal(a, b)


def test_train_mode_uses_rng(tiny_nets):
    masked, mask, g = make_inputs()
    a = complete_image(masked, mask, g, tiny_nets,
                       rng=np.random.default_rng(1), mode="train")
    b = complete_image(masked, mask, g, tiny_nets,
                       rng=np.random.default_rng(2), mode="train")
    assert not np.array_equal(a[mask > 0], b[mask > 0])


def test_guidance_mask_inconsistency_rejected(tiny_nets):
    masked, mask, g = make_inputs()
    other = np.zeros_like(mask)
    other[0, 0] = 1
    with pytest.raises(DataError):
        complete_image(masked, other, g, tiny_nets)


# ------------------------------------------------------------------- losses

class UniformDisc(torch.nn.Module):
    def __init__(self, n):
        super().__init__()
        self.n = n

    def forward(self, image, mask):
        b, _, h, w = image.shape
        return torch.zeros(b, self.n + 1, h, w)


def test_l2_zero_when_equal_and_unmasked():
    img = np.random.default_rng(0).random((8, 8, 3)).astype(np.float32)
    g = GuidanceMap.from_label_map(
        LabelMap(np.zeros((8, 8), dtype=np.int64), N), np.zeros((8, 8)))
    # mask empty: adversarial terms see no hole pixels; l2 covers everything
    out = oasis_losses(img, img, np.zeros((8, 8)), g, UniformDisc(N))
    assert float(out["l2_unmasked"]) == 0.0


def test_uniform_logits_give_log_nplus1():
    masked, mask, g = make_inputs()
    completed = np.zeros_like(masked)
    real = np.zeros_like(masked)
    out = oasis_losses(completed, real, mask, g, UniformDisc(N))
    assert float(out["g_loss"]) == pytest.approx(np.log(N + 1), rel=1e-6)
    # d_loss = real CE + fake CE, both uniform
    assert float(out["d_loss"]) == pytest.approx(2 * np.log(N + 1), rel=1e-6)


def test_hand_built_2x2_losses():
    """2x2, N=2, all pixels masked, equal class counts -> plain CE."""
    n = 2

    class FixedDisc(torch.nn.Module):
        def __init__(self, logits):
            super().__init__()
            self.logits = logits

        def forward(self, image, mask):
            return self.logits

    # logits favor class 0 everywhere with margin 1
    logits = torch.zeros(1, n + 1, 2, 2)
    logits[0, 0] = 1.0
    labels = np.array([[0, 0], [1, 1]], dtype=np.int64)
    mask = np.ones((2, 2), dtype=np.uint8)
    g = GuidanceMap.from_label_map(LabelMap(labels, n), mask)
    img = np.zeros((2, 2, 3), dtype=np.float32)
    out = oasis_losses(img, img, mask, g, FixedDisc(logits),
                       class_weighting=True)

    # per-pixel CE from logits (1,0,0): z = log(e + 2)
    z = np.log(np.e + 2.0)
    ce0 = z - 1.0     # target class 0
    ce1 = z           # target class 1 (logit 0)
    ce_fake = z       # fake class logit 0
    # class counts equal -> inverse-frequency weights normalize to 1
    want_g = (2 * ce0 + 2 * ce1) / 4
    want_d = want_g + ce_fake
    assert float(out["g_loss"]) == pytest.approx(want_g, rel=1e-6)
    assert float(out["d_loss"]) == pytest.approx(want_d, rel=1e-6)


def test_perceptual_identity_reduces_to_mse():
    rng = np.random.default_rng(3)
    a = rng.random((4, 4, 3)).astype(np.float32)
    b = rng.random((4, 4, 3)).astype(np.float32)
    g = GuidanceMap.from_label_map(
        LabelMap(np.zeros((4, 4), dtype=np.int64), N), np.zeros((4, 4)))
    out = oasis_losses(a, b, np.zeros((4, 4)), g, UniformDisc(N),
                       perceptual_provider=IdentityPerceptual())
    assert float(out["perceptual"]) == pytest.approx(((a - b) ** 2).mean(), rel=1e-5)


def test_oasis_ce_gradient_matches_finite_differences():
    """Per-pixel CE gradient w.r.t. discriminator logits, double precision."""
    n = 2
    logits = torch.randn(1, n + 1, 2, 2, dtype=torch.float64, requires_grad=True)
    labels = torch.tensor([[[0, 1], [1, 0]]])
    mask = torch.ones(1, 1, 2, 2, dtype=torch.float64)

    class PassThrough(torch.nn.Module):
        def forward(self, image, mask):
            return logits

    img = torch.zeros(1, 3, 2, 2, dtype=torch.float64)

    def fn():
        return oasis_losses(img, img, mask, labels, PassThrough(),
                            class_weighting=False)["g_loss"]

    analytic = torch.autograd.grad(fn(), [logits])
    numeric = finite_difference_grad(fn, [logits], eps=1e-6)
    assert relative_grad_error(analytic, numeric) <= 1e-3


# --------------------------------------------------------------- sequential

def test_class_to_prompt_templates():
    phrases = {0: "a dog", 5: "sky"}
    assert class_to_prompt(0, phrases) == "a photo of a dog"
    assert class_to_prompt(5, phrases) == "a photo of sky"
    with pytest.raises(DataError):
        class_to_prompt(7, phrases)


def test_sequential_zero_segments_identity():
    img = np.random.default_rng(0).random((8, 8, 3)).astype(np.float32)
    out = sequential_inpaint(img, [], HashPaintBackend(), lambda c: "x")
    assert np.array_equal(out, img)


def test_sequential_hash_paint_matches_oracle():
    img = np.zeros((8, 8, 3), dtype=np.float32)
    seg_a = np.zeros((8, 8), dtype=np.uint8)
    seg_a[:4, :4] = 1
    seg_b = np.zeros((8, 8), dtype=np.uint8)
    seg_b[4:, 4:] = 1
    phrases = {0: "a dog", 1: "grass"}
    prompt = lambda c: class_to_prompt(c, phrases)
    out = sequential_inpaint(img, [(seg_a, 0), (seg_b, 1)],
                             HashPaintBackend(), prompt)
    va = prompt_paint_value("a photo of a dog")
    vb = prompt_paint_value("a photo of grass")
    assert (out[seg_a > 0] == va).all()
    assert (out[seg_b > 0] == vb).all()
    untouched = (seg_a == 0) & (seg_b == 0)
    assert (out[untouched] == 0).all()


def test_sequential_disjoint_order_independent():
    img = np.zeros((8, 8, 3), dtype=np.float32)
    seg_a = np.zeros((8, 8), dtype=np.uint8)
    seg_a[:4] = 1
    seg_b = np.zeros((8, 8), dtype=np.uint8)
    seg_b[4:] = 1
    prompt = lambda c: f"class {c}"
    ab = sequential_inpaint(img, [(seg_a, 0), (seg_b, 1)], HashPaintBackend(), prompt)
    ba = sequential_inpaint(img, [(seg_b, 1), (seg_a, 0)], HashPaintBackend(), prompt)
    assert np.array_equal(ab, ba)


def test_sequential_rejects_overlap():
    img = np.zeros((8, 8, 3), dtype=np.float32)
    seg = np.ones((8, 8), dtype=np.uint8)
    with pytest.raises(DataError):
        sequential_inpaint(img, [(seg, 0), (seg, 1)], HashPaintBackend(),
                           lambda c: "x")


def test_sequential_backend_failure_names_segment():
    class Exploding:
        def inpaint(self, image, mask, prompt):
            raise RuntimeError("boom")

    img = np.zeros((4, 4, 3), dtype=np.float32)
    seg = np.ones((4, 4), dtype=np.uint8)
    with pytest.raises(ProviderError, match="segment 0"):
        sequential_inpaint(img, [(seg, 0)], Exploding(), lambda c: "x")


def test_sequential_never_writes_outside_segments():
    class Vandal:
        def inpaint(self, image, mask, prompt):
            return np.full_like(image, 0.77)  # tries to repaint everything

    img = np.zeros((6, 6, 3), dtype=np.float32)
    seg = np.zeros((6, 6), dtype=np.uint8)
    seg[2:4, 2:4] = 1
    out = sequential_inpaint(img, [(seg, 0)], Vandal(), lambda c: "x")
    assert (out[seg == 0] == 0).all()
    assert (out[seg > 0] == np.float32(0.77)).all()
