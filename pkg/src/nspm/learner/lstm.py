"""Single LSTM layer over a padded batch, forward and backward.

Shapes: inputs ``(T, B, D)``, states ``(B, H)``.  Weights follow the gate
order i, f, g, o: ``W_ih`` is ``(4H, D)``, ``W_hh`` is ``(4H, H)``.
A ``(T, B)`` mask freezes the state on padded steps so the final state is
taken at each sequence's last real token.
"""
import numpy as np


def sigmoid(x):
    return 0.5 * (np.tanh(0.5 * x) + 1.0)


def lstm_step(x_proj, h, c, W_hh):
    """One step given the precomputed input projection ``x @ W_ih.T + b``."""
    H = h.shape[1]
    z = x_proj + h @ W_hh.T
    i = sigmoid(z[:, :H])
    f = sigmoid(z[:, H:2 * H])
    g = np.tanh(z[:, 2 * H:3 * H])
    o = sigmoid(z[:, 3 * H:])
    c_new = f * c + i * g
    tc = np.tanh(c_new)
    return o * tc, c_new, (i, f, g, o, tc)


def lstm_forward(x, h0, c0, W_ih, W_hh, b, mask=None, reverse=False):
    T, B, _ = x.shape
    H = W_hh.shape[1]
    x_proj = x @ W_ih.T + b
    hs = np.empty((T, B, H))
    cs = np.empty((T, B, H))
    gates = np.empty((T, 5, B, H))
    h_prev = np.empty((T, B, H))
    c_prev = np.empty((T, B, H))
    h, c = h0, c0
    steps = range(T - 1, -1, -1) if reverse else range(T)
    for t in steps:
        h_prev[t], c_prev[t] = h, c
        h_new, c_new, g = lstm_step(x_proj[t], h, c, W_hh)
        gates[t] = g
        if mask is not None:
            m = mask[t][:, None]
            h_new = m * h_new + (1.0 - m) * h
            c_new = m * c_new + (1.0 - m) * c
        hs[t], cs[t] = h_new, c_new
        h, c = h_new, c_new
    cache = (x, W_ih, W_hh, mask, reverse, gates, h_prev, c_prev)
    return hs, h, c, cache


def lstm_backward(dhs, dh_last, dc_last, cache):
    """Gradients w.r.t. inputs, initial states and weights.

    ``dhs`` is the upstream gradient on every output state (or None),
    ``dh_last``/``dc_last`` on the final state.
    """
    x, W_ih, W_hh, mask, reverse, gates, h_prev, c_prev = cache
    T, B, _ = x.shape
    H = W_hh.shape[1]
    dz = np.empty((T, B, 4 * H))
    dh = dh_last.copy()
    dc = dc_last.copy()
    steps = range(T) if reverse else range(T - 1, -1, -1)
    for t in steps:
        if dhs is not None:
            dh = dh + dhs[t]
        if mask is not None:
            m = mask[t][:, None]
            dh_new, dc_new = m * dh, m * dc
            dh_skip, dc_skip = (1.0 - m) * dh, (1.0 - m) * dc
        else:
            dh_new, dc_new = dh, dc
            dh_skip = dc_skip = 0.0
        i, f, g, o, tc = gates[t]
        dcn = dc_new + dh_new * o * (1.0 - tc * tc)
        dz_t = dz[t]
        dz_t[:, :H] = dcn * g * i * (1.0 - i)
        dz_t[:, H:2 * H] = dcn * c_prev[t] * f * (1.0 - f)
        dz_t[:, 2 * H:3 * H] = dcn * i * (1.0 - g * g)
        dz_t[:, 3 * H:] = dh_new * tc * o * (1.0 - o)
        dh = dz_t @ W_hh + dh_skip
        dc = dcn * f + dc_skip
    flat = dz.reshape(T * B, 4 * H)
    dW_ih = flat.T @ x.reshape(T * B, -1)
    dW_hh = flat.T @ h_prev.reshape(T * B, H)
    db = flat.sum(axis=0)
    dx = dz @ W_ih
    return dx, dh, dc, dW_ih, dW_hh, db
