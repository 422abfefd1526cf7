"""Fully connected ReLU networks with optional output clipping.

Weights of layer ``l`` are stored as an ``(out, in)`` matrix, so row ``j``
holds the fan-in weights of output neuron ``j``.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, ContractViolation
from ..rng import stream


def relu(x):
    return np.maximum(x, 0.0)


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Network:
    layer_dims: tuple
    weights: tuple
    biases: tuple
    clip_bound: float = None
    activation: str = "relu"

    def __post_init__(self):
        dims = tuple(int(n) for n in self.layer_dims)
        object.__setattr__(self, "layer_dims", dims)
        object.__setattr__(self, "weights", tuple(_frozen(w) for w in self.weights))
        object.__setattr__(self, "biases", tuple(_frozen(b) for b in self.biases))
        if len(dims) < 2 or len(self.weights) != len(dims) - 1 or len(self.biases) != len(dims) - 1:
            raise ContractViolation("layer_dims, weights and biases disagree in length")
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (dims[l + 1], dims[l]) or b.shape != (dims[l + 1],):
                raise ContractViolation(
                    f"layer {l}: weight {w.shape} / bias {b.shape} vs dims {dims[l]}->{dims[l + 1]}")
        if self.activation != "relu":
            raise ConfigurationError(f"unsupported activation {self.activation!r}")
        if self.clip_bound is not None and not self.clip_bound > 0:
            raise ConfigurationError("clip bound must be positive")

    @property
    def input_dim(self):
        return self.layer_dims[0]

    @property
    def output_dim(self):
        return self.layer_dims[-1]

    @property
    def n_layers(self):
        return len(self.weights)

    @property
    def n_params(self):
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def replace(self, weights=None, biases=None):
        return Network(self.layer_dims,
                       self.weights if weights is None else weights,
                       self.biases if biases is None else biases,
                       self.clip_bound, self.activation)

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return (self.layer_dims == other.layer_dims
                and self.clip_bound == other.clip_bound
                and all(np.array_equal(a, b) for a, b in zip(self.weights, other.weights))
                and all(np.array_equal(a, b) for a, b in zip(self.biases, other.biases)))


def init_network(layer_dims, seed, clip_bound=None):
    """He-normal weights (variance 2 / fan-in) and zero biases."""
    rng = stream(seed, "init")
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_dims[:-1], layer_dims[1:]):
        weights.append(rng.standard_normal((fan_out, fan_in)) * np.sqrt(2.0 / fan_in))
        biases.append(np.zeros(fan_out))
    return Network(tuple(layer_dims), weights, biases, clip_bound)


def zero_network(layer_dims, clip_bound=None):
    return Network(tuple(layer_dims),
                   [np.zeros((o, i)) for i, o in zip(layer_dims[:-1], layer_dims[1:])],
                   [np.zeros(o) for o in layer_dims[1:]], clip_bound)


def clip(y, bound):
    """``relu(y + B) - relu(y - B) - B``: identity on ``[-B, B]``, ``+-B`` outside.

    Evaluated as a clamp; the ReLU form rounds and can land just outside
    the band.
    """
    return np.clip(y, -bound, bound)


def _as_batch(net, x):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xb = x[None, :] if single else x
    if xb.ndim != 2 or xb.shape[1] != net.input_dim:
        raise ContractViolation(f"input has shape {x.shape}, network expects length {net.input_dim}")
    return xb, single


def _forward_cache(net, xb, masks=None):
    acts, pres = [xb], []
    a = xb
    for l, (w, b) in enumerate(zip(net.weights, net.biases)):
        pre = a @ w.T + b
        pres.append(pre)
        if l < net.n_layers - 1:
            a = relu(pre)
            if masks is not None:
                a = a * masks[l]
            acts.append(a)
    out = pres[-1]
    y = out if net.clip_bound is None else clip(out, net.clip_bound)
    return y, acts, pres


def forward(net, x):
    """Network output for one input (``(D,)`` -> ``(p,)``) or a batch (``(n, D)`` -> ``(n, p)``)."""
    xb, single = _as_batch(net, x)
    y = _forward_cache(net, xb)[0]
    return y[0] if single else y


def loss(net, x, theta):
    """Mean squared Euclidean error over the batch."""
    xb, _ = _as_batch(net, x)
    theta = np.asarray(theta, dtype=float).reshape(xb.shape[0], net.output_dim)
    r = forward(net, xb) - theta
    return float(np.mean(np.sum(r * r, axis=1)))


def backward(net, x, theta, masks=None):
    """Exact gradient of ``loss`` with respect to every weight and bias.

    Returns ``(grad_weights, grad_biases)`` as lists matching the network.
    ReLU (and clipping) derivatives at kinks are taken as 0.  ``masks``
    are optional multiplicative dropout masks for the hidden layers.
    """
    xb, _ = _as_batch(net, x)
    n = xb.shape[0]
    theta = np.asarray(theta, dtype=float).reshape(n, net.output_dim)
    y, acts, pres = _forward_cache(net, xb, masks)
    delta = 2.0 * (y - theta) / n
    if net.clip_bound is not None:
        out = pres[-1]
        delta = delta * ((out + net.clip_bound > 0).astype(float) - (out - net.clip_bound > 0))
    gw = [None] * net.n_layers
    gb = [None] * net.n_layers
    for l in range(net.n_layers - 1, -1, -1):
        gw[l] = delta.T @ acts[l]
        gb[l] = delta.sum(axis=0)
        if l > 0:
            delta = (delta @ net.weights[l]) * (pres[l - 1] > 0)
            if masks is not None:
                delta = delta * masks[l - 1]
    return gw, gb


def _project_rows(w, alpha):
    w = np.array(w, dtype=float)
    norms = np.abs(w).sum(axis=1)
    for j in np.flatnonzero(norms > alpha):
        scale = alpha / norms[j]
        row = w[j] * scale
        # roundoff can leave the norm a hair above alpha; shrink until feasible
        while np.abs(row).sum() > alpha:
            scale = np.nextafter(scale, 0.0)
            row = w[j] * scale
        w[j] = row
    return w


def project_restricted(net, alpha):
    """Rescale every fan-in row whose L1 norm exceeds ``alpha`` onto the L1 sphere.

    Feasible rows are returned untouched, so the map is idempotent.
    """
    if not alpha >= 1:
        raise ConfigurationError(f"restriction alpha must be >= 1, got {alpha}")
    return net.replace(weights=[_project_rows(w, alpha) for w in net.weights])


def max_row_l1(net):
    return max(float(np.abs(w).sum(axis=1).max()) for w in net.weights)
