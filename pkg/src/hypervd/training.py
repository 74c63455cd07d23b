"""MIL objective, Adam optimization, and the deterministic training loop.

A video is a bag of snippet instances with one binary label. The bag score
is the mean of the k largest snippet scores with k = floor(T/q) + 1, and the
objective is binary cross-entropy over bag scores: the (1-Y) term is kept so
normal videos push their hardest snippets down, without which negative bags
contribute no gradient at all.

Everything is deterministic given (config, seed): one RNG drives shuffling
and dropout in a fixed order, and gradient accumulation follows the fixed
reverse-topological order of the autodiff tape.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import ConfigError, GradientError
from .evaluation import average_precision
from .model import build_model

LOG_CLAMP = 1e-12


@dataclass
class VideoBag:
    """Per-video training unit: features plus the video-level label."""

    video_id: str
    visual: np.ndarray  # (T, D)
    audio: np.ndarray  # (T, d)
    label: int  # 1 violent, 0 normal
    frame_labels: np.ndarray | None = None  # (16*T,) for test-split videos


@dataclass
class TrainConfig:
    epochs: int = 50
    batch_size: int = 128
    lr0: float = 5e-4
    q: int = 16
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8

    def validate(self):
        if self.epochs < 1 or self.batch_size < 1 or self.q < 1:
            raise ConfigError("training: epochs, batch_size and q must be >= 1")
        if self.lr0 <= 0:
            raise ConfigError(f"training: lr0 must be > 0, got {self.lr0}")
        return self


def topk_count(t, q):
    """k = floor(T/q) + 1, clipped to T."""
    return min(t, t // q + 1)


def topk_mean(scores, q):
    """Mean of the k largest scores; ties resolved by original index order.

    Accepts a Tensor (differentiable) or a plain array (returns float).
    """
    if isinstance(scores, Tensor):
        data = scores.data
    else:
        data = np.asarray(scores, dtype=np.float64)
    t = data.shape[0]
    k = topk_count(t, q)
    idx = np.argsort(-data, kind="stable")[:k]
    if isinstance(scores, Tensor):
        return ad.mean(ad.take(scores, idx))
    return float(np.mean(data[idx]))


def mil_loss(bag_scores, labels):
    """Mean binary cross-entropy over bag scores, logs clamped at 1e-12."""
    labels = np.asarray(labels, dtype=np.float64)
    if not isinstance(bag_scores, Tensor):
        bag_scores = Tensor(np.asarray(bag_scores, dtype=np.float64))
    pos = labels * ad.log(ad.clamp_min(bag_scores, LOG_CLAMP))
    neg = (1.0 - labels) * ad.log(ad.clamp_min(1.0 - bag_scores, LOG_CLAMP))
    return -ad.mean(pos + neg)


def batch_loss(model, bags, q, *, training=False, rng=None):
    """Forward every bag and combine bag scores into one MIL loss tensor."""
    bag_scores = []
    labels = []
    for bag in bags:
        scores = model.forward(bag.visual, bag.audio, training=training, rng=rng)
        bag_scores.append(topk_mean(scores, q))
        labels.append(bag.label)
    return mil_loss(ad.stack1d(bag_scores), np.array(labels, dtype=np.float64))


def gradients(model, bags, q, *, training=False, rng=None):
    """Loss and per-parameter gradients for one batch of bags.

    Parameters that the loss does not reach get exact-zero gradients.
    Non-finite gradients raise GradientError naming the parameter.
    """
    params = model.parameters()
    for tensor in params.values():
        tensor.zero_grad()
    loss = batch_loss(model, bags, q, training=training, rng=rng)
    loss.backward()
    grads = {}
    for name, tensor in params.items():
        g = tensor.grad if tensor.grad is not None else np.zeros_like(tensor.data)
        if not np.all(np.isfinite(g)):
            raise GradientError(f"training: non-finite gradient for parameter {name!r}")
        grads[name] = g
    return float(loss.data), grads


class Adam:
    """Standard Adam with bias correction and no weight decay."""

    def __init__(self, params, beta1=0.9, beta2=0.999, eps=1e-8):
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {name: np.zeros_like(p.data) for name, p in params.items()}
        self.v = {name: np.zeros_like(p.data) for name, p in params.items()}

    def step(self, params, grads, lr):
        self.t += 1
        correction1 = 1.0 - self.beta1**self.t
        correction2 = 1.0 - self.beta2**self.t
        for name, p in params.items():
            g = grads[name]
            self.m[name] = self.beta1 * self.m[name] + (1.0 - self.beta1) * g
            self.v[name] = self.beta2 * self.v[name] + (1.0 - self.beta2) * (g * g)
            m_hat = self.m[name] / correction1
            v_hat = self.v[name] / correction2
            p.data = p.data - lr * m_hat / (np.sqrt(v_hat) + self.eps)


def cosine_lr(epoch, epochs, lr0):
    """Cosine annealing from lr0 at epoch 0 toward 0 at epoch == epochs."""
    return lr0 * (1.0 + math.cos(math.pi * epoch / epochs)) / 2.0


@dataclass
class EpochRecord:
    epoch: int
    lr: float
    train_loss: float
    eval_ap: float


@dataclass
class TrainResult:
    model: object
    history: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = -1
    best_ap: float = -1.0


def evaluate_frame_ap(model, bags, frames_per_snippet=16):
    """Frame-level AP over the concatenated frames of all bags."""
    scores = []
    labels = []
    for bag in bags:
        if bag.frame_labels is None:
            raise ConfigError(f"training: bag {bag.video_id!r} lacks frame labels for eval")
        snippet = model.forward(bag.visual, bag.audio, training=False).data
        scores.append(np.repeat(snippet, frames_per_snippet))
        labels.append(bag.frame_labels)
    return average_precision(np.concatenate(scores), np.concatenate(labels))


def train(model_cfg, train_cfg, train_bags, eval_bags):
    """Deterministic MIL training; retains the best-eval-AP parameters."""
    train_cfg.validate()
    labels = {bag.label for bag in train_bags}
    if labels != {0, 1}:
        raise ConfigError("training: need both violent and normal videos in the train set")
    model = build_model(model_cfg, seed=train_cfg.seed)
    params = model.parameters()
    rng = np.random.default_rng(train_cfg.seed)
    optimizer = Adam(params, train_cfg.beta1, train_cfg.beta2, train_cfg.adam_eps)
    result = TrainResult(model=model)
    best_params = None
    for epoch in range(train_cfg.epochs):
        lr = cosine_lr(epoch, train_cfg.epochs, train_cfg.lr0)
        order = rng.permutation(len(train_bags))
        loss_sum = 0.0
        for start in range(0, len(order), train_cfg.batch_size):
            batch = [train_bags[i] for i in order[start : start + train_cfg.batch_size]]
            loss, grads = gradients(model, batch, train_cfg.q, training=True, rng=rng)
            optimizer.step(params, grads, lr)
            loss_sum += loss * len(batch)
        train_loss = loss_sum / len(train_bags)
        eval_ap = evaluate_frame_ap(model, eval_bags)
        result.history.append(EpochRecord(epoch, lr, train_loss, eval_ap))
        if eval_ap > result.best_ap:
            result.best_ap = eval_ap
            result.best_epoch = epoch
            best_params = {name: p.data.copy() for name, p in params.items()}
    if best_params is not None:
        for name, p in params.items():
            p.data = best_params[name]
    return result


def write_history(path, history):
    """One row per epoch: epoch, lr, train_loss, eval_AP (tab-delimited)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("epoch\tlr\ttrain_loss\teval_ap\n")
        for rec in history:
            fh.write(f"{rec.epoch}\t{rec.lr!r}\t{rec.train_loss!r}\t{rec.eval_ap!r}\n")


# Finite-difference gradient verification ----------------------------------


@dataclass
class GradcheckReport:
    max_rel_err: float
    n_params: int
    worst_param: str
    passed: bool
    failures: list[str] = field(default_factory=list)


def gradcheck(model, bags, q, h=1e-5, tol=1e-4):
    """Compare every parameter gradient against central finite differences.

    Runs with dropout disabled (eval-mode forward); a parameter passes when
    |ad - fd| <= max(tol * max(|ad|, |fd|), 1e-8).
    """
    params = model.parameters()
    _, grads = gradients(model, bags, q, training=False)

    def loss_value():
        return float(batch_loss(model, bags, q, training=False).data)

    max_rel = 0.0
    worst = ""
    failures = []
    for name, p in params.items():
        flat = p.data.reshape(-1)
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + h
            up = loss_value()
            flat[i] = keep - h
            down = loss_value()
            flat[i] = keep
            fd = (up - down) / (2.0 * h)
            adg = grads[name].reshape(-1)[i]
            err = abs(adg - fd)
            # floor shields near-zero gradients from finite-difference noise;
            # rel <= tol is then exactly err <= max(tol*scale, 1e-8)
            rel = err / max(abs(adg), abs(fd), 1e-8 / tol)
            if rel > tol:
                failures.append(f"{name}[{i}]: ad={adg:.3e} fd={fd:.3e}")
            if rel > max_rel:
                max_rel = rel
                worst = f"{name}[{i}]"
    return GradcheckReport(
        max_rel_err=max_rel,
        n_params=sum(p.data.size for p in params.values()),
        worst_param=worst,
        passed=not failures,
        failures=failures,
    )
