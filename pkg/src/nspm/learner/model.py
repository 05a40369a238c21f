"""Parameter layout and initialization of the encoder-decoder."""
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from .vocab import Vocab



@dataclass
class Seq2SeqModel:
    source_vocab: Vocab
    target_vocab: Vocab
    embed_dim: int = 128
    hidden_dim: int = 128
    num_layers: int = 2
    dropout_rate: float = 0.2
    bidirectional_encoder: bool = False
    params: Dict[str, np.ndarray] = field(default_factory=dict)
    preset: Optional[str] = None
    seed: Optional[int] = None

    def __post_init__(self):
        for name in ("embed_dim", "hidden_dim", "num_layers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")

    def parameter_shapes(self):
        """Ordered ``name -> shape`` for every trainable array."""
        E, H, L = self.embed_dim, self.hidden_dim, self.num_layers
        shapes = {
            "src_embedding": (len(self.source_vocab), E),
            "tgt_embedding": (len(self.target_vocab), E),
        }
        directions = ("fwd", "bwd") if self.bidirectional_encoder else ("fwd",)
        for layer in range(L):
            in_dim = E if layer == 0 else H * len(directions)
            for d in directions:
                p = f"encoder.{layer}.{d}"
                shapes[p + ".W_ih"] = (4 * H, in_dim)
                shapes[p + ".W_hh"] = (4 * H, H)
                shapes[p + ".b"] = (4 * H,)
            if self.bidirectional_encoder:
                shapes[f"encoder.{layer}.bridge"] = (H, 2 * H)
        for layer in range(L):
            p = f"decoder.{layer}"
            shapes[p + ".W_ih"] = (4 * H, E if layer == 0 else H)
            shapes[p + ".W_hh"] = (4 * H, H)
            shapes[p + ".b"] = (4 * H,)
        shapes["output.W"] = (H, len(self.target_vocab))
        shapes["output.b"] = (len(self.target_vocab),)
        return shapes

    def parameter_count(self):
        return int(sum(np.prod(s) for s in self.parameter_shapes().values()))

    def copy(self):
        return Seq2SeqModel(
            self.source_vocab, self.target_vocab, self.embed_dim, self.hidden_dim,
            self.num_layers, self.dropout_rate, self.bidirectional_encoder,
            {k: v.copy() for k, v in self.params.items()}, self.preset, self.seed,
        )


def init_model(source_vocab, target_vocab, embed_dim=128, hidden_dim=128, num_layers=2,
               dropout_rate=0.2, bidirectional_encoder=False, seed=0, preset=None,
               init_scale=None, embedding_std=1.0):
    """Randomly initialized model.

    Embeddings are N(0, ``embedding_std``); every other array is
    Uniform(-s, s) with ``s = init_scale`` or ``1/sqrt(hidden_dim)`` when
    None.  Forget-gate biases start at one.  ``embedding_std=None`` makes
    embeddings uniform too.
    """
    model = Seq2SeqModel(source_vocab, target_vocab, embed_dim, hidden_dim, num_layers,
                         dropout_rate, bidirectional_encoder, preset=preset, seed=seed)
    rng = np.random.default_rng(seed)
    H = hidden_dim
    scale = init_scale if init_scale is not None else 1.0 / np.sqrt(H)
    for name, shape in model.parameter_shapes().items():
        if name.endswith("_embedding") and embedding_std is not None:
            w = rng.normal(0.0, embedding_std, size=shape)
        else:
            w = rng.uniform(-scale, scale, size=shape)
        if name.endswith(".b") and name != "output.b":
            w[H:2 * H] = 1.0
        model.params[name] = w
    return model
