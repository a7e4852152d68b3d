"""Straight-line reference implementations used as independent oracles.

Everything here is written with explicit loops in float64 numpy, reading
weights out of the torch modules but never calling their forward paths.
"""
import numpy as np


def _layer_norm(x, weight, bias, eps):
    mu = x.mean()
    var = ((x - mu) ** 2).mean()
    return (x - mu) / np.sqrt(var + eps) * weight + bias


def _linear(x, weight, bias):
    y = weight @ x
    return y + bias if bias is not None else y


def encoder_layer_oracle(layer, z):
    """One pre-norm encoder layer on z (T, d); returns (z, attn (heads,T,T))."""
    t, d = z.shape
    heads = layer.heads
    dh = d // heads
    w_qkv = layer.qkv.weight.detach().numpy().astype(np.float64)
    b_qkv = layer.qkv.bias.detach().numpy().astype(np.float64)
    w_proj = layer.proj.weight.detach().numpy().astype(np.float64)
    b_proj = layer.proj.bias.detach().numpy().astype(np.float64)
    ln1_w = layer.ln1.weight.detach().numpy().astype(np.float64)
    ln1_b = layer.ln1.bias.detach().numpy().astype(np.float64)
    ln2_w = layer.ln2.weight.detach().numpy().astype(np.float64)
    ln2_b = layer.ln2.bias.detach().numpy().astype(np.float64)
    w1 = layer.fc1.weight.detach().numpy().astype(np.float64)
    b1 = layer.fc1.bias.detach().numpy().astype(np.float64)
    w2 = layer.fc2.weight.detach().numpy().astype(np.float64)
    b2 = layer.fc2.bias.detach().numpy().astype(np.float64)
    eps = layer.ln1.eps

    h = np.stack([_layer_norm(z[i], ln1_w, ln1_b, eps) for i in range(t)])
    q = np.stack([_linear(h[i], w_qkv[:d], b_qkv[:d]) for i in range(t)])
    k = np.stack([_linear(h[i], w_qkv[d:2 * d], b_qkv[d:2 * d]) for i in range(t)])
    v = np.stack([_linear(h[i], w_qkv[2 * d:], b_qkv[2 * d:]) for i in range(t)])

    attn = np.zeros((heads, t, t))
    mixed = np.zeros((t, d))
    for head in range(heads):
        sl = slice(head * dh, (head + 1) * dh)
        for i in range(t):
            scores = np.empty(t)
            for j in range(t):
                scores[j] = float(q[i, sl] @ k[j, sl]) / np.sqrt(dh)
            e = np.exp(scores - scores.max())
            attn[head, i] = e / e.sum()
            for j in range(t):
                mixed[i, sl] += attn[head, i, j] * v[j, sl]
    z = z + np.stack([_linear(mixed[i], w_proj, b_proj) for i in range(t)])

    out = np.empty_like(z)
    for i in range(t):
        hid = _layer_norm(z[i], ln2_w, ln2_b, eps)
        hid = np.maximum(_linear(hid, w1, b1), 0.0)
        out[i] = z[i] + _linear(hid, w2, b2)
    return out, attn


def classifier_oracle(model, z0):
    """Loop reference of the full classifier from token matrix z0 (T, d).

    Returns (logits, [attn per layer]).
    """
    z = z0.astype(np.float64).copy()
    attns = []
    for layer in model.encoder:
        z, attn = encoder_layer_oracle(layer, z)
        attns.append(attn)
    fw = model.final_ln.weight.detach().numpy().astype(np.float64)
    fb = model.final_ln.bias.detach().numpy().astype(np.float64)
    y = _layer_norm(z[0], fw, fb, model.final_ln.eps)
    hw = model.head.weight.detach().numpy().astype(np.float64)
    hb = model.head.bias.detach().numpy().astype(np.float64)
    return _linear(y, hw, hb), attns


def denman_beavers_sqrt(a, iters=60, tol=1e-14):
    """Matrix square root by the Denman-Beavers iteration (oracle for FID)."""
    y = a.astype(np.float64).copy()
    z = np.eye(a.shape[0])
    for _ in range(iters):
        y_next = 0.5 * (y + np.linalg.inv(z))
        z_next = 0.5 * (z + np.linalg.inv(y))
        if np.linalg.norm(y_next - y) <= tol * max(np.linalg.norm(y), 1.0):
            y = y_next
            break
        y, z = y_next, z_next
    return y
