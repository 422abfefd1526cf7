"""Minibatch first-order training with optional projection and regularization."""

import hashlib
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import ConfigurationError, ContractViolation, TrainingDivergedError
from ..rng import stream
from .network import Network, _forward_cache, backward, init_network, loss, project_restricted

REGULARIZATIONS = ("none", "early-stopping", "dropout")


@dataclass(frozen=True)
class TrainConfig:
    optimizer: str = "adam"
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 64
    epochs: int = 100
    regularization: str = "none"
    val_fraction: float = 0.2
    patience: int = 10
    dropout_rate: float = 0.2
    restriction: float = None
    seed: int = 0
    min_steps: int = 0

    def __post_init__(self):
        if self.optimizer not in ("adam", "sgd"):
            raise ConfigurationError(f"unknown optimizer {self.optimizer!r}")
        if self.regularization not in REGULARIZATIONS:
            raise ConfigurationError(f"unknown regularization {self.regularization!r}")
        if not 0 <= self.val_fraction <= 0.5:
            raise ConfigurationError("validation fraction must lie in [0, 0.5]")
        if not 0 <= self.dropout_rate < 1:
            raise ConfigurationError("dropout rate must lie in [0, 1)")
        if self.restriction is not None and self.restriction < 1:
            raise ConfigurationError("restriction alpha must be >= 1")
        if self.batch_size < 1 or self.epochs < 1 or self.lr <= 0 or self.min_steps < 0:
            raise ConfigurationError("batch size, epochs and step size must be positive")

    def hash(self):
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class Checkpoint:
    network: Network
    config_hash: str = ""
    train_risk: float = float("nan")
    val_risk: float = float("nan")
    epochs: int = 0
    seed: int = 0
    label: str = "erm"
    input_transform: str = "identity"
    trace: tuple = field(default=())

    def __eq__(self, other):
        if not isinstance(other, Checkpoint):
            return NotImplemented
        keys = ("config_hash", "epochs", "seed", "label", "input_transform")
        same_floats = all(
            np.array_equal(np.asarray(getattr(self, k)), np.asarray(getattr(other, k)), equal_nan=True)
            for k in ("train_risk", "val_risk", "trace"))
        return (self.network == other.network and same_floats
                and all(getattr(self, k) == getattr(other, k) for k in keys))


class _Adam:
    def __init__(self, cfg, shapes):
        self.cfg = cfg
        self.t = 0
        self.m = [np.zeros(s) for s in shapes]
        self.v = [np.zeros(s) for s in shapes]

    def step(self, params, grads):
        c = self.cfg
        self.t += 1
        b1t = 1.0 - c.beta1 ** self.t
        b2t = 1.0 - c.beta2 ** self.t
        for k, (p, g) in enumerate(zip(params, grads)):
            self.m[k] = c.beta1 * self.m[k] + (1.0 - c.beta1) * g
            self.v[k] = c.beta2 * self.v[k] + (1.0 - c.beta2) * g * g
            p -= c.lr * (self.m[k] / b1t) / (np.sqrt(self.v[k] / b2t) + c.eps)


class _SGD:
    def __init__(self, cfg, shapes):
        self.lr = cfg.lr

    def step(self, params, grads):
        for p, g in zip(params, grads):
            p -= self.lr * g


def split_validation(n, fraction, seed):
    """Seeded train/validation index split."""
    perm = stream(seed, "validation-split").permutation(n)
    n_val = int(round(fraction * n))
    return np.sort(perm[n_val:]), np.sort(perm[:n_val])


def train(x, theta, layer_dims, cfg, clip_bound=None, init=None, label=None, input_transform="identity"):
    """Fit a network to ``(x, theta)`` by minibatch descent.

    When ``cfg.restriction`` is set, every update is followed by
    ``project_restricted`` (projected descent onto the restricted class).
    With early stopping the returned weights are those of the epoch with the
    lowest validation risk (earliest on ties).  ``init`` overrides the
    He-normal initialization.  Small training sets run extra epochs until
    at least ``cfg.min_steps`` minibatch updates have been made.
    """
    x = np.asarray(x, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if theta.ndim == 1:
        theta = theta[:, None]
    layer_dims = tuple(int(v) for v in layer_dims)
    if x.ndim != 2 or x.shape[1] != layer_dims[0] or theta.shape != (x.shape[0], layer_dims[-1]):
        raise ContractViolation(
            f"data shapes {x.shape}/{theta.shape} do not match architecture {layer_dims}")

    if cfg.regularization == "early-stopping" and cfg.val_fraction > 0:
        tr_idx, va_idx = split_validation(x.shape[0], cfg.val_fraction, cfg.seed)
    else:
        tr_idx, va_idx = np.arange(x.shape[0]), np.arange(0)
    xt, tt = x[tr_idx], theta[tr_idx]
    xv, tv = x[va_idx], theta[va_idx]
    n = xt.shape[0]
    if cfg.batch_size > n:
        raise ConfigurationError(f"batch size {cfg.batch_size} exceeds training size {n}")

    net = init if init is not None else init_network(layer_dims, cfg.seed, clip_bound)
    if cfg.restriction is not None:
        net = project_restricted(net, cfg.restriction)
    weights = [np.array(w) for w in net.weights]
    biases = [np.array(b) for b in net.biases]
    params = weights + biases
    opt = (_Adam if cfg.optimizer == "adam" else _SGD)(cfg, [p.shape for p in params])
    rng = stream(cfg.seed, "train")
    use_dropout = cfg.regularization == "dropout" and cfg.dropout_rate > 0
    keep = 1.0 - cfg.dropout_rate

    def current():
        return Network(layer_dims, weights, biases, net.clip_bound)

    n_epochs = max(cfg.epochs, -(-cfg.min_steps // (n // cfg.batch_size)))
    trace = []
    best = (np.inf, None, 0)
    since_best = 0
    epoch = 0
    for epoch in range(1, n_epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n - cfg.batch_size + 1, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            snapshot = current()
            masks = None
            if use_dropout:
                masks = [(rng.random((idx.size, h)) < keep) / keep for h in layer_dims[1:-1]]
            gw, gb = backward(snapshot, xt[idx], tt[idx], masks)
            opt.step(params, gw + gb)
            if cfg.restriction is not None:
                projected = project_restricted(current(), cfg.restriction)
                for w, pw in zip(weights, projected.weights):
                    w[...] = pw
        snap = current()
        risk = loss(snap, xt, tt)
        if not np.isfinite(risk):
            raise TrainingDivergedError(f"training loss became non-finite at epoch {epoch}", epoch)
        trace.append(risk)
        if va_idx.size:
            vrisk = loss(snap, xv, tv)
            if vrisk < best[0]:
                best = (vrisk, snap, epoch)
                since_best = 0
            else:
                since_best += 1
                if since_best >= cfg.patience:
                    break

    if va_idx.size:
        vrisk, final, _ = best
        train_risk = loss(final, xt, tt)
    else:
        final = current()
        train_risk = trace[-1]
        vrisk = float("nan")
    return Checkpoint(final, cfg.hash(), float(train_risk), float(vrisk), epoch, cfg.seed,
                      label or ("restricted" if cfg.restriction else "erm"),
                      input_transform, tuple(trace))
