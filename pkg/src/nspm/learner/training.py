"""Minibatch training, greedy translation and sequence accuracy."""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .network import forward_loss, greedy_decode

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    epochs: int = 10
    batch_size: int = 32
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    grad_clip_norm: Optional[float] = 5.0
    seed: int = 0
    eval_every: int = 1
    max_len: int = 60

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1 or self.eval_every < 1:
            raise ValueError("epochs, batch_size and eval_every must be positive")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be non-negative")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


@dataclass(frozen=True)
class CurvePoint:
    epoch: int
    dev_bleu: Optional[float]
    train_loss: float


class Adam:
    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for k, g in grads.items():
            m, v = self.m[k], self.v[k]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            params[k] -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


class SGD:
    def __init__(self, params, lr=0.1):
        self.lr = lr

    def step(self, params, grads):
        for k, g in grads.items():
            params[k] -= self.lr * g


def make_optimizer(params, config):
    if config.optimizer == "adam":
        return Adam(params, config.learning_rate, config.beta1, config.beta2, config.eps)
    return SGD(params, config.learning_rate)


def clip_by_global_norm(grads, max_norm):
    """Rescale ``grads`` in place so their joint L2 norm is at most ``max_norm``."""
    norm = float(np.sqrt(sum(float((g * g).sum()) for g in grads.values())))
    if max_norm and norm > max_norm:
        scale = max_norm / norm
        for g in grads.values():
            g *= scale
    return norm


def _to_ids(model, pairs):
    src = [model.source_vocab.encode(s) for s, _ in pairs]
    tgt = [model.target_vocab.encode(t) for _, t in pairs]
    return src, tgt


def translate_batch(model, sources, max_len=60, batch_size=256):
    """Greedy translations of a list of token lists."""
    out = []
    for start in range(0, len(sources), batch_size):
        chunk = sources[start:start + batch_size]
        ids = greedy_decode(model, [model.source_vocab.encode(s) for s in chunk], max_len)
        out.extend(model.target_vocab.decode(seq) for seq in ids)
    return out


def translate(model, nl, max_len=60):
    """Greedy translation of one token list (unknown words map to UNK)."""
    return translate_batch(model, [list(nl)], max_len)[0]


def sequence_accuracy(model, pairs, max_len=60):
    """(exact-sequence accuracy, token accuracy) of greedy outputs.

    Token accuracy counts gold positions whose predicted token matches.
    """
    preds = translate_batch(model, [s for s, _ in pairs], max_len)
    exact = hits = total = 0
    for pred, (_, gold) in zip(preds, pairs):
        gold = list(gold)
        exact += pred == gold
        hits += sum(p == g for p, g in zip(pred, gold))
        total += len(gold)
    return exact / len(pairs), hits / max(total, 1)


def train(model, dataset, dev_set=(), config=None, callback=None):
    """Train ``model`` in place on ``(source_tokens, target_tokens)`` pairs.

    Returns ``(model, curve)``; the curve has one point per evaluation
    epoch (every ``eval_every`` epochs and the last one).  ``callback``
    sees each new point; a truthy return value stops training early.
    """
    from ..evaluator import bleu_corpus

    config = config or TrainConfig()
    dataset = list(dataset)
    dev_set = list(dev_set)
    if not dataset:
        raise ValueError("training set is empty")
    rng = np.random.default_rng([config.seed, 1])
    src, tgt = _to_ids(model, dataset)
    optimizer = make_optimizer(model.params, config)
    curve: List[CurvePoint] = []
    n = len(dataset)
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            batch = ([src[i] for i in idx], [tgt[i] for i in idx])
            loss, grads = forward_loss(model, batch, train_mode=True, rng=rng)
            if config.grad_clip_norm:
                clip_by_global_norm(grads, config.grad_clip_norm)
            optimizer.step(model.params, grads)
            total += loss * len(idx)
        train_loss = total / n
        if epoch % config.eval_every == 0 or epoch == config.epochs:
            bleu = None
            if dev_set:
                preds = translate_batch(model, [s for s, _ in dev_set], config.max_len)
                bleu = bleu_corpus(preds, [list(t) for _, t in dev_set])
            curve.append(CurvePoint(epoch, bleu, train_loss))
            log.info("epoch %d loss %.4f dev_bleu %s", epoch, train_loss, bleu)
            if callback is not None and callback(curve[-1]):
                break
    return model, curve


def curve_to_csv(curve):
    lines = ["epoch,dev_bleu,train_loss\n"]
    for p in curve:
        bleu = "" if p.dev_bleu is None else repr(float(p.dev_bleu))
        lines.append(f"{p.epoch},{bleu},{float(p.train_loss)!r}\n")
    return "".join(lines)


def read_curve_csv(text):
    rows = text.strip().splitlines()
    if not rows or rows[0] != "epoch,dev_bleu,train_loss":
        raise ValueError("not a learning-curve CSV")
    curve = []
    for row in rows[1:]:
        epoch, bleu, loss = row.split(",")
        curve.append(CurvePoint(int(epoch), float(bleu) if bleu else None, float(loss)))
    return curve


def convergence_epoch(curve, tolerance=0.005):
    """First epoch whose dev BLEU is within ``tolerance`` of the final BLEU."""
    scored = [p for p in curve if p.dev_bleu is not None]
    if not scored:
        return None
    final = scored[-1].dev_bleu
    return next(p.epoch for p in scored if abs(p.dev_bleu - final) <= tolerance)
