"""Forward pass, loss and backpropagation through time."""
import numpy as np

from ..exceptions import NumericOverflow
from .lstm import lstm_backward, lstm_forward, lstm_step
from .vocab import BOS, EOS, PAD


def pad_batch(sequences, add_bos=False, add_eos=False):
    """Right-pad index lists with PAD into a ``(T, B)`` int array."""
    seqs = [([BOS] if add_bos else []) + list(s) + ([EOS] if add_eos else []) for s in sequences]
    T = max(1, max(len(s) for s in seqs))
    out = np.full((T, len(seqs)), PAD, dtype=np.int64)
    for b, s in enumerate(seqs):
        out[:len(s), b] = s
    return out


def _dropout_mask(rng, shape, rate):
    keep = 1.0 - rate
    return (rng.random(shape) < keep) / keep


def _encoder_directions(model):
    return ("fwd", "bwd") if model.bidirectional_encoder else ("fwd",)


def encode(model, src, train_mode=False, rng=None):
    """Run the encoder on a ``(T, B)`` index array.

    Returns the per-layer initial decoder states and a cache for backward.
    """
    P = model.params
    p = model.dropout_rate if train_mode else 0.0
    src_mask = (src != PAD).astype(np.float64)
    x = P["src_embedding"][src]
    drop_masks = []
    states = []
    layer_caches = []
    for layer in range(model.num_layers):
        if p > 0.0:
            dm = _dropout_mask(rng, x.shape, p)
            x = x * dm
        else:
            dm = None
        drop_masks.append(dm)
        B = x.shape[1]
        H = model.hidden_dim
        zeros = np.zeros((B, H))
        outs, finals, caches = [], [], []
        for d in _encoder_directions(model):
            pre = f"encoder.{layer}.{d}"
            hs, h, c, cache = lstm_forward(
                x, zeros, zeros, P[pre + ".W_ih"], P[pre + ".W_hh"], P[pre + ".b"],
                mask=src_mask, reverse=(d == "bwd"),
            )
            outs.append(hs)
            finals.append((h, c))
            caches.append(cache)
        if model.bidirectional_encoder:
            bridge = P[f"encoder.{layer}.bridge"]
            hcat = np.concatenate([finals[0][0], finals[1][0]], axis=1)
            ccat = np.concatenate([finals[0][1], finals[1][1]], axis=1)
            states.append((hcat @ bridge.T, ccat @ bridge.T))
            layer_caches.append((caches, hcat, ccat))
            x = np.concatenate(outs, axis=2)
        else:
            states.append(finals[0])
            layer_caches.append((caches, None, None))
            x = outs[0]
    return states, (src, drop_masks, layer_caches)


def _encoder_backward(model, d_states, enc_cache, grads):
    P = model.params
    src, drop_masks, layer_caches = enc_cache
    dx_above = None
    for layer in range(model.num_layers - 1, -1, -1):
        caches, hcat, ccat = layer_caches[layer]
        dh, dc = d_states[layer]
        H = model.hidden_dim
        if model.bidirectional_encoder:
            bridge = P[f"encoder.{layer}.bridge"]
            grads[f"encoder.{layer}.bridge"] += dh.T @ hcat + dc.T @ ccat
            dhcat, dccat = dh @ bridge, dc @ bridge
            finals = [(dhcat[:, :H], dccat[:, :H]), (dhcat[:, H:], dccat[:, H:])]
        else:
            finals = [(dh, dc)]
        dx = None
        for k, d in enumerate(_encoder_directions(model)):
            pre = f"encoder.{layer}.{d}"
            dhs = None if dx_above is None else dx_above[:, :, k * H:(k + 1) * H]
            ddx, _, _, dW_ih, dW_hh, db = lstm_backward(dhs, finals[k][0], finals[k][1], caches[k])
            grads[pre + ".W_ih"] += dW_ih
            grads[pre + ".W_hh"] += dW_hh
            grads[pre + ".b"] += db
            dx = ddx if dx is None else dx + ddx
        if drop_masks[layer] is not None:
            dx = dx * drop_masks[layer]
        dx_above = dx
    np.add.at(grads["src_embedding"], src, dx_above)


def log_softmax(logits):
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def forward_loss(model, batch, train_mode=False, rng=None, compute_grads=True):
    """Mean cross-entropy over non-PAD target positions and its gradients.

    ``batch`` is a pair ``(source_ids, target_ids)`` of lists of index
    lists (targets without BOS/EOS).  Returns ``(loss, grads)``; ``grads``
    is None when ``compute_grads`` is false.
    """
    if train_mode and model.dropout_rate > 0.0 and rng is None:
        raise ValueError("train_mode with dropout needs an rng")
    P = model.params
    p = model.dropout_rate if train_mode else 0.0
    src_ids, tgt_ids = batch
    src = pad_batch(src_ids)
    dec_in = pad_batch(tgt_ids, add_bos=True)
    dec_out = pad_batch(tgt_ids, add_eos=True)
    weights = (dec_out != PAD).astype(np.float64)
    n_tokens = weights.sum()

    states, enc_cache = encode(model, src, train_mode, rng)

    x = P["tgt_embedding"][dec_in]
    dec_caches, dec_drops = [], []
    for layer in range(model.num_layers):
        if p > 0.0:
            dm = _dropout_mask(rng, x.shape, p)
            x = x * dm
        else:
            dm = None
        dec_drops.append(dm)
        pre = f"decoder.{layer}"
        h0, c0 = states[layer]
        x, _, _, cache = lstm_forward(x, h0, c0, P[pre + ".W_ih"], P[pre + ".W_hh"], P[pre + ".b"])
        dec_caches.append(cache)
    top = x
    logits = top @ P["output.W"] + P["output.b"]
    logp = log_softmax(logits)
    T, B = dec_out.shape
    picked = np.take_along_axis(logp, dec_out[:, :, None], axis=2)[:, :, 0]
    loss = float(-(picked * weights).sum() / n_tokens)
    if not np.isfinite(loss):
        raise NumericOverflow(f"non-finite loss {loss}")
    if not compute_grads:
        return loss, None

    grads = {k: np.zeros_like(v) for k, v in P.items()}
    dlogits = np.exp(logp)
    np.put_along_axis(dlogits, dec_out[:, :, None],
                      np.take_along_axis(dlogits, dec_out[:, :, None], axis=2) - 1.0, axis=2)
    dlogits *= (weights / n_tokens)[:, :, None]
    V = dlogits.shape[2]
    grads["output.W"] = top.reshape(T * B, -1).T @ dlogits.reshape(T * B, V)
    grads["output.b"] = dlogits.sum(axis=(0, 1))
    dx = dlogits @ P["output.W"].T

    d_states = [None] * model.num_layers
    for layer in range(model.num_layers - 1, -1, -1):
        pre = f"decoder.{layer}"
        zeros = np.zeros((B, model.hidden_dim))
        dx, dh0, dc0, dW_ih, dW_hh, db = lstm_backward(dx, zeros, zeros, dec_caches[layer])
        grads[pre + ".W_ih"] += dW_ih
        grads[pre + ".W_hh"] += dW_hh
        grads[pre + ".b"] += db
        d_states[layer] = (dh0, dc0)
        if dec_drops[layer] is not None:
            dx = dx * dec_drops[layer]
    np.add.at(grads["tgt_embedding"], dec_in, dx)
    _encoder_backward(model, d_states, enc_cache, grads)
    return loss, grads


def greedy_decode(model, source_ids, max_len=60):
    """Argmax decoding for a list of source index lists."""
    P = model.params
    src = pad_batch(source_ids)
    states, _ = encode(model, src)
    B = src.shape[1]
    hs = [s[0] for s in states]
    cs = [s[1] for s in states]
    prev = np.full(B, BOS, dtype=np.int64)
    done = np.zeros(B, dtype=bool)
    out = [[] for _ in range(B)]
    projections = [
        (P[f"decoder.{k}.W_ih"], P[f"decoder.{k}.W_hh"], P[f"decoder.{k}.b"])
        for k in range(model.num_layers)
    ]
    for _ in range(max_len):
        x = P["tgt_embedding"][prev]
        for k, (W_ih, W_hh, b) in enumerate(projections):
            hs[k], cs[k], _ = lstm_step(x @ W_ih.T + b, hs[k], cs[k], W_hh)
            x = hs[k]
        nxt = np.argmax(x @ P["output.W"] + P["output.b"], axis=1)
        for b_ in np.flatnonzero(~done):
            if nxt[b_] == EOS:
                done[b_] = True
            else:
                out[b_].append(int(nxt[b_]))
        if done.all():
            break
        prev = nxt
    return out


def output_distribution(model, source_ids, target_ids):
    """Teacher-forced softmax outputs, shape ``(T, B, |V|)`` (for checks)."""
    P = model.params
    states, _ = encode(model, pad_batch(source_ids))
    x = P["tgt_embedding"][pad_batch(target_ids, add_bos=True)]
    for layer in range(model.num_layers):
        pre = f"decoder.{layer}"
        x, _, _, _ = lstm_forward(x, *states[layer], P[pre + ".W_ih"], P[pre + ".W_hh"], P[pre + ".b"])
    return np.exp(log_softmax(x @ P["output.W"] + P["output.b"]))
