"""Missing-instance class inference.

Tokens are built as z0 = class_embedding + sigmoid(linear(box features)),
with row 0 reserved for the missing-region token (a dedicated embedding id
one past the real classes). A stack of pre-norm encoder layers mixes the
tokens; the classifier reads the final row-0 state through a LayerNorm and
a linear head.

Positional-encoding variants (box features fed to the positional linear):
  abs4c  (cx, cy, w, h)            abs2c  (cx, cy)
  rel4c  (cx-mx, cy-my, w, h)      rel2c  (cx-mx, cy-my)
  learnable  free per-slot vectors (slot 0 = missing token, rest input order)
  nope   zeros
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch
from torch import nn

from ..boxes import Box
from ..errors import ConfigError
from ..nets.transformer import EncoderLayer
from ..torchutils import torch_seed

PE_VARIANTS = ("abs4c", "abs2c", "rel4c", "rel2c", "learnable", "nope")


@dataclass
class EncoderConfig:
    num_classes: int
    layers: int = 12
    heads: int = 8
    d: int = 256
    mlp_dim: int = 2048
    pe_variant: str = "abs4c"
    max_slots: int = 64   # learnable variant only

    def __post_init__(self):
        self.pe_variant = self.pe_variant.lower()
        if self.pe_variant not in PE_VARIANTS:
            raise ConfigError(f"unknown pe variant {self.pe_variant!r}")
        if self.d % self.heads != 0:
            raise ConfigError("d must be divisible by heads")
        if self.layers < 1:
            raise ConfigError("need at least one encoder layer")
        if self.num_classes < 2:
            raise ConfigError("need at least two classes")

    def to_json(self) -> dict:
        return {"num_classes": self.num_classes, "layers": self.layers,
                "heads": self.heads, "d": self.d, "mlp_dim": self.mlp_dim,
                "pe_variant": self.pe_variant, "max_slots": self.max_slots}

    @classmethod
    def from_json(cls, obj) -> "EncoderConfig":
        return cls(**obj)


@dataclass
class TokenBatch:
    """One inference problem: row 0 is the missing token, rows 1..k visible."""
    class_ids: np.ndarray   # (k+1,) int, row 0 = missing-token id
    boxes: np.ndarray       # (k+1, 4) float64 (cx, cy, w, h), row 0 = missing box
    z0: np.ndarray          # (k+1, d) float32 token matrix

    @property
    def k(self) -> int:
        return len(self.class_ids) - 1


def _pe_features(boxes: np.ndarray, variant: str) -> np.ndarray | None:
    """Box-derived inputs to the positional linear, in float64."""
    if variant == "abs4c":
        return boxes.copy()
    if variant == "abs2c":
        return boxes[:, :2].copy()
    rel = boxes[:, :2] - boxes[0:1, :2]
    if variant == "rel4c":
        return np.concatenate([rel, boxes[:, 2:]], axis=1)
    if variant == "rel2c":
        return rel
    return None  # learnable / nope need no box features


class MissingClassEncoder(nn.Module):
    def __init__(self, cfg: EncoderConfig):
        super().__init__()
        self.cfg = cfg
        self.missing_token_id = cfg.num_classes
        self.class_embed = nn.Embedding(cfg.num_classes + 1, cfg.d)
        if cfg.pe_variant in ("abs4c", "rel4c"):
            self.pos_linear = nn.Linear(4, cfg.d)
        elif cfg.pe_variant in ("abs2c", "rel2c"):
            self.pos_linear = nn.Linear(2, cfg.d)
        elif cfg.pe_variant == "learnable":
            self.slot_embed = nn.Parameter(torch.randn(cfg.max_slots, cfg.d) * 0.02)
        self.encoder = nn.ModuleList(
            EncoderLayer(cfg.d, cfg.heads, cfg.mlp_dim) for _ in range(cfg.layers))
        self.final_ln = nn.LayerNorm(cfg.d)
        self.head = nn.Linear(cfg.d, cfg.num_classes)

    @property
    def dtype(self) -> torch.dtype:
        return self.class_embed.weight.dtype

    def positional(self, boxes: np.ndarray) -> torch.Tensor:
        """(T, 4) float64 box rows (row 0 = missing box) -> (T, d)."""
        cfg = self.cfg
        if cfg.pe_variant == "nope":
            return torch.zeros(len(boxes), cfg.d, dtype=self.dtype)
        if cfg.pe_variant == "learnable":
            if len(boxes) > cfg.max_slots:
                raise ConfigError(
                    f"{len(boxes)} tokens exceed max_slots={cfg.max_slots}")
            return self.slot_embed[:len(boxes)]
        # box features stay float64 until the final cast so that globally
        # translated inputs give bit-identical rel features
        feats = _pe_features(np.asarray(boxes, dtype=np.float64), cfg.pe_variant)
        x = torch.from_numpy(feats).to(self.dtype)
        return torch.sigmoid(self.pos_linear(x))

    def tokens(self, class_ids, boxes) -> torch.Tensor:
        ids = torch.as_tensor(np.asarray(class_ids), dtype=torch.long)
        return self.class_embed(ids) + self.positional(boxes)

    def forward_tokens(self, z: torch.Tensor, key_padding_mask=None):
        """Run the encoder stack; returns (final states, list of attn maps)."""
        attns = []
        for layer in self.encoder:
            z, attn = layer(z, key_padding_mask)
            attns.append(attn)
        return z, attns

    def logits_from_batch(self, class_ids, boxes, key_padding_mask=None):
        """Batched training path: (B, T) ids, (B, T, 4) boxes -> (B, C) logits."""
        b, t = class_ids.shape
        embeds = self.class_embed(class_ids)
        if self.cfg.pe_variant == "nope":
            pos = torch.zeros(b, t, self.cfg.d, dtype=self.dtype)
        elif self.cfg.pe_variant == "learnable":
            if t > self.cfg.max_slots:
                raise ConfigError(f"{t} tokens exceed max_slots")
            pos = self.slot_embed[:t].unsqueeze(0).expand(b, t, self.cfg.d)
        else:
            feats = boxes.to(self.dtype)
            if self.cfg.pe_variant.startswith("rel"):
                feats = torch.cat([feats[..., :2] - feats[:, 0:1, :2],
                                   feats[..., 2:]], dim=-1)
            if self.cfg.pe_variant.endswith("2c"):
                feats = feats[..., :2]
            pos = torch.sigmoid(self.pos_linear(feats))
        z, _ = self.forward_tokens(embeds + pos, key_padding_mask)
        return self.head(self.final_ln(z[:, 0]))


def build_classifier(cfg: EncoderConfig, seed: int = 0) -> MissingClassEncoder:
    with torch_seed(seed):
        return MissingClassEncoder(cfg)


def encode_positions(boxes, missing_box: Box | None, variant: str,
                     model: MissingClassEncoder) -> np.ndarray:
    """(k+1, d) positional matrix for explicit box rows.

    `boxes` excludes the missing box; row 0 is prepended from missing_box.
    Relative variants require missing_box.
    """
    variant = variant.lower()
    if variant != model.cfg.pe_variant:
        raise ConfigError(
            f"model was built for {model.cfg.pe_variant!r}, not {variant!r}")
    if variant.startswith("rel") and missing_box is None:
        raise ConfigError("relative encoding requires the missing box")
    rows = [missing_box.as_vector()] if missing_box is not None else []
    rows += [b.as_vector() if isinstance(b, Box) else np.asarray(b, dtype=np.float64)
             for b in boxes]
    with torch.no_grad():
        return model.positional(np.stack(rows)).numpy()


def build_tokens(visible, missing_box: Box,
                 model: MissingClassEncoder) -> TokenBatch:
    """Token batch with row 0 = missing token, rows 1..k in input order."""
    cfg = model.cfg
    ids = [model.missing_token_id]
    rows = [missing_box.as_vector()]
    for inst in visible:
        if not 0 <= inst.class_id < cfg.num_classes:
            raise ConfigError(
                f"class id {inst.class_id} outside [0, {cfg.num_classes})")
        ids.append(inst.class_id)
        rows.append(inst.box.as_vector())
    class_ids = np.asarray(ids, dtype=np.int64)
    boxes = np.stack(rows)
    with torch.no_grad():
        z0 = model.tokens(class_ids, boxes).numpy().astype(np.float32)
    return TokenBatch(class_ids, boxes, z0)


@dataclass
class InferenceResult:
    logits: np.ndarray
    predicted: int


def infer_class(tokens: TokenBatch, model: MissingClassEncoder) -> InferenceResult:
    if tokens.z0.shape[1] != model.cfg.d:
        raise ConfigError(
            f"token dim {tokens.z0.shape[1]} != model dim {model.cfg.d}")
    model.eval()
    with torch.no_grad():
        z = torch.from_numpy(tokens.z0).to(model.dtype).unsqueeze(0)
        z, _ = model.forward_tokens(z)
        logits = model.head(model.final_ln(z[0, 0])).numpy()
    return InferenceResult(logits, int(np.argmax(logits)))


def attention_of_missing_token(tokens: TokenBatch, model: MissingClassEncoder,
                               layer: int) -> np.ndarray:
    """Row-0 post-softmax attention at `layer` (1-indexed): (heads, k+1)."""
    if not 1 <= layer <= model.cfg.layers:
        raise ValueError(f"layer {layer} outside [1, {model.cfg.layers}]")
    model.eval()
    with torch.no_grad():
        z = torch.from_numpy(tokens.z0).to(model.dtype).unsqueeze(0)
        _, attns = model.forward_tokens(z)
    return attns[layer - 1][0, :, 0, :].numpy()
