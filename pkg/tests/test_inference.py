import numpy as np
import pytest
import torch
import torch.nn.functional as F

from scenefill.boxes import Box
from scenefill.datasets.crop import Instance
from scenefill.errors import ConfigError
from scenefill.inference import (EncoderConfig, TrainSchedule,
                                 attention_of_missing_token, build_classifier,
                                 build_tokens, encode_positions, infer_class,
                                 learning_rate_at, train_inference_model)
from scenefill.datasets.shapes import InferencePair

from conftest import finite_difference_grad, relative_grad_error
from oracles import classifier_oracle


def tiny_cfg(variant="abs4c", classes=3):
    return EncoderConfig(num_classes=classes, layers=2, heads=2, d=8,
                         mlp_dim=16, pe_variant=variant)


VISIBLE = [
    Instance(0, Box(0.2, 0.3, 0.15, 0.2)),
    Instance(1, Box(0.7, 0.6, 0.2, 0.25)),
    Instance(2, Box(0.5, 0.8, 0.1, 0.1)),
]
MISSING = Box(0.45, 0.45, 0.3, 0.3)


# ---------------------------------------------------------------- positions

def test_nope_is_zero_matrix():
    model = build_classifier(tiny_cfg("nope"), seed=1)
    enc = encode_positions([i.box for i in VISIBLE], MISSING, "nope", model)
    assert enc.shape == (4, 8)
    assert (enc == 0).all()


def test_rel2c_box_at_missing_center_gives_zero_features():
    model = build_classifier(tiny_cfg("rel2c"), seed=1)
    centered = Box(MISSING.cx, MISSING.cy, 0.1, 0.1)
    enc = encode_positions([centered], MISSING, "rel2c", model)
    # feature row (0, 0) -> sigmoid(bias) alone; so the row must equal the
    # encoding of the missing box itself (also at zero offset)
    assert np.array_equal(enc[1], enc[0])
    with torch.no_grad():
        expected = torch.sigmoid(model.pos_linear(torch.zeros(2))).numpy()
    assert np.allclose(enc[1], expected, atol=0)


def test_rel4c_translation_invariance_bitwise():
    model = build_classifier(tiny_cfg("rel4c"), seed=2)
    base = encode_positions([i.box for i in VISIBLE], MISSING, "rel4c", model)
    dx, dy = 0.1, -0.05
    moved = encode_positions([i.box.translate(dx, dy) for i in VISIBLE],
                             MISSING.translate(dx, dy), "rel4c", model)
    assert np.array_equal(base, moved)


def test_rel_requires_missing_box():
    model = build_classifier(tiny_cfg("rel4c"), seed=0)
    with pytest.raises(ConfigError):
        encode_positions([i.box for i in VISIBLE], None, "rel4c", model)


# ------------------------------------------------------------------- tokens

def test_build_tokens_k0_single_row():
    model = build_classifier(tiny_cfg(), seed=0)
    tb = build_tokens([], MISSING, model)
    assert tb.k == 0
    assert tb.z0.shape == (1, 8)
    assert tb.class_ids[0] == model.missing_token_id


def test_build_tokens_preserves_order():
    model = build_classifier(tiny_cfg(), seed=0)
    tb = build_tokens(VISIBLE, MISSING, model)
    assert list(tb.class_ids) == [3, 0, 1, 2]


def test_build_tokens_deterministic():
    model = build_classifier(tiny_cfg(), seed=0)
    a = build_tokens(VISIBLE, MISSING, model)
    b = build_tokens(VISIBLE, MISSING, model)
    assert np.array_equal(a.z0, b.z0)


def test_invalid_class_id_rejected():
    model = build_classifier(tiny_cfg(classes=2), seed=0)
    with pytest.raises(ConfigError):
        build_tokens([Instance(5, Box(0.5, 0.5, 0.1, 0.1))], MISSING, model)


# ------------------------------------------------------------------- logits

@pytest.mark.parametrize("variant", ["abs4c", "abs2c", "rel4c", "rel2c", "nope"])
def test_permutation_invariance(variant):
    model = build_classifier(tiny_cfg(variant), seed=3)
    base = infer_class(build_tokens(VISIBLE, MISSING, model), model).logits
    perm = [VISIBLE[2], VISIBLE[0], VISIBLE[1]]
    swapped = infer_class(build_tokens(perm, MISSING, model), model).logits
    assert np.abs(base - swapped).max() <= 1e-4


def test_nope_box_independence_exact():
    model = build_classifier(tiny_cfg("nope"), seed=4)
    a = infer_class(build_tokens(VISIBLE, MISSING, model), model).logits
    moved = [Instance(i.class_id, Box(0.5, 0.5, 0.05, 0.05)) for i in VISIBLE]
    b = infer_class(build_tokens(moved, Box(0.9, 0.9, 0.1, 0.1), model), model).logits
    assert np.array_equal(a, b)


def test_abs4c_not_translation_invariant():
    model = build_classifier(tiny_cfg("abs4c"), seed=5)
    a = infer_class(build_tokens(VISIBLE, MISSING, model), model).logits
    dx, dy = 0.2, 0.1
    moved = [Instance(i.class_id, i.box.translate(dx, dy)) for i in VISIBLE]
    b = infer_class(build_tokens(moved, MISSING.translate(dx, dy), model), model).logits
    assert not np.allclose(a, b, atol=1e-7)


def test_rel_logits_translation_invariant_exactly():
    model = build_classifier(tiny_cfg("rel4c"), seed=6)
    a = infer_class(build_tokens(VISIBLE, MISSING, model), model).logits
    dx, dy = 0.1, -0.05
    moved = [Instance(i.class_id, i.box.translate(dx, dy)) for i in VISIBLE]
    b = infer_class(build_tokens(moved, MISSING.translate(dx, dy), model), model).logits
    assert np.array_equal(a, b)


def test_logits_match_loop_oracle():
    model = build_classifier(tiny_cfg(), seed=7)
    tb = build_tokens(VISIBLE, MISSING, model)
    got = infer_class(tb, model)
    want_logits, _ = classifier_oracle(model, tb.z0)
    assert np.abs(got.logits - want_logits).max() < 1e-5


def test_token_dim_mismatch_rejected():
    model = build_classifier(tiny_cfg(), seed=0)
    other = build_classifier(EncoderConfig(num_classes=3, layers=1, heads=2,
                                           d=16, mlp_dim=16), seed=0)
    tb = build_tokens(VISIBLE, MISSING, other)
    with pytest.raises(ConfigError):
        infer_class(tb, model)


# ---------------------------------------------------------------- attention

def test_attention_rows_sum_to_one():
    model = build_classifier(tiny_cfg(), seed=8)
    tb = build_tokens(VISIBLE, MISSING, model)
    attn = attention_of_missing_token(tb, model, layer=1)
    assert attn.shape == (2, 4)
    assert np.abs(attn.sum(axis=1) - 1.0).max() <= 1e-6


def test_attention_k0_is_one():
    model = build_classifier(tiny_cfg(), seed=8)
    tb = build_tokens([], MISSING, model)
    attn = attention_of_missing_token(tb, model, layer=2)
    assert np.allclose(attn, 1.0)


def test_attention_matches_loop_oracle():
    model = build_classifier(tiny_cfg(), seed=9)
    tb = build_tokens(VISIBLE, MISSING, model)
    _, oracle_attns = classifier_oracle(model, tb.z0)
    for layer in (1, 2):
        got = attention_of_missing_token(tb, model, layer)
        want = oracle_attns[layer - 1][:, 0, :]
        assert np.abs(got - want).max() < 1e-5


def test_attention_layer_out_of_range():
    model = build_classifier(tiny_cfg(), seed=8)
    tb = build_tokens(VISIBLE, MISSING, model)
    with pytest.raises(ValueError):
        attention_of_missing_token(tb, model, layer=3)
    with pytest.raises(ValueError):
        attention_of_missing_token(tb, model, layer=0)


# ----------------------------------------------------------------- training

def test_lr_schedule_piecewise_linear_peak():
    total, base = 100, 2.0
    trace = [learning_rate_at(t, total, base) for t in range(total)]
    peak = int(np.argmax(trace))
    assert peak == int(np.floor(0.2 * total))
    assert trace[peak] == base
    ups = np.diff(trace[:peak + 1])
    downs = np.diff(trace[peak:])
    assert np.allclose(ups, ups[0])
    assert np.allclose(downs, downs[0])


def test_empty_dataset_rejected():
    from scenefill.errors import DataError
    with pytest.raises(DataError):
        train_inference_model([], tiny_cfg(), TrainSchedule(steps=1))


def test_single_sample_overfits():
    cfg = EncoderConfig(num_classes=4, layers=2, heads=4, d=32, mlp_dim=64)
    pair = InferencePair(VISIBLE[:2], MISSING, target=3)
    model, log = train_inference_model(
        [pair], cfg, TrainSchedule(steps=200, batch_size=4, base_lr=2e-3, seed=0))
    assert log["loss"][-1] < 0.01


def test_gradients_match_finite_differences():
    """Analytic CE gradient vs central differences, double precision."""
    cfg = EncoderConfig(num_classes=3, layers=1, heads=2, d=8, mlp_dim=16)
    model = build_classifier(cfg, seed=11).double()
    ids = torch.tensor([[3, 0, 2]])
    boxes = torch.tensor([[[0.4, 0.4, 0.3, 0.3],
                           [0.2, 0.3, 0.15, 0.2],
                           [0.7, 0.6, 0.2, 0.25]]], dtype=torch.float64)
    target = torch.tensor([1])

    def loss_fn():
        return F.cross_entropy(model.logits_from_batch(ids, boxes), target)

    loss = loss_fn()
    params = [p for p in model.parameters() if p.requires_grad]
    analytic = torch.autograd.grad(loss, params)
    numeric = finite_difference_grad(loss_fn, params, eps=1e-6)
    assert relative_grad_error(analytic, numeric) <= 1e-3
