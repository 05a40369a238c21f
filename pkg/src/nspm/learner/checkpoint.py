"""JSON checkpoints with exact float round-trip."""
import json

import numpy as np

from .._io import atomic_write_text, read_text
from ..exceptions import CorruptCheckpoint
from .model import Seq2SeqModel
from .vocab import RESERVED, Vocab

FORMAT = "nspm-checkpoint/1"


def dumps_model(model):
    meta = {
        "format": FORMAT,
        "embed_dim": int(model.embed_dim),
        "hidden_dim": int(model.hidden_dim),
        "num_layers": int(model.num_layers),
        "dropout_rate": float(model.dropout_rate),
        "bidirectional_encoder": bool(model.bidirectional_encoder),
        "preset": model.preset,
        "seed": model.seed,
        "source_vocab": model.source_vocab.itos,
        "target_vocab": model.target_vocab.itos,
    }
    params = {}
    for name, shape in model.parameter_shapes().items():
        arr = np.asarray(model.params[name], dtype=np.float64)
        if arr.shape != shape:
            raise CorruptCheckpoint(f"parameter {name} has shape {arr.shape}, expected {shape}")
        # repr of a Python float is the shortest string that round-trips
        params[name] = {"shape": list(shape), "data": [float(x) for x in arr.ravel()]}
    return json.dumps({"meta": meta, "params": params}, separators=(",", ":")) + "\n"


def _vocab(itos, which):
    if not isinstance(itos, list) or tuple(itos[:4]) != RESERVED:
        raise CorruptCheckpoint(f"{which} vocabulary lacks the reserved prefix")
    try:
        return Vocab(itos[4:])
    except ValueError as exc:
        raise CorruptCheckpoint(f"{which} vocabulary: {exc}") from None


def loads_model(text):
    try:
        doc = json.loads(text)
        meta, params = doc["meta"], doc["params"]
    except (ValueError, KeyError, TypeError):
        raise CorruptCheckpoint("checkpoint is not a complete JSON document") from None
    if meta.get("format") != FORMAT:
        raise CorruptCheckpoint(f"unsupported checkpoint format {meta.get('format')!r}")
    try:
        model = Seq2SeqModel(
            _vocab(meta["source_vocab"], "source"), _vocab(meta["target_vocab"], "target"),
            int(meta["embed_dim"]), int(meta["hidden_dim"]), int(meta["num_layers"]),
            float(meta["dropout_rate"]), bool(meta["bidirectional_encoder"]),
            preset=meta.get("preset"), seed=meta.get("seed"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, CorruptCheckpoint):
            raise
        raise CorruptCheckpoint(f"bad checkpoint metadata: {exc}") from None
    shapes = model.parameter_shapes()
    if set(params) != set(shapes):
        raise CorruptCheckpoint("parameter names do not match the declared dimensions")
    for name, shape in shapes.items():
        entry = params[name]
        if tuple(entry.get("shape", ())) != shape:
            raise CorruptCheckpoint(f"parameter {name}: shape {entry.get('shape')} does not match {list(shape)}")
        data = np.asarray(entry.get("data", ()), dtype=np.float64)
        if data.size != int(np.prod(shape)):
            raise CorruptCheckpoint(f"parameter {name}: {data.size} values for shape {list(shape)}")
        model.params[name] = data.reshape(shape)
    return model


def save_model(model, path):
    atomic_write_text(path, dumps_model(model))


def load_model(path):
    try:
        text = read_text(path)
    except UnicodeDecodeError:
        raise CorruptCheckpoint(f"{path} is not a text checkpoint") from None
    return loads_model(text)
