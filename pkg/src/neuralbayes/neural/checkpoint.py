"""Text checkpoint format.

A key/value header, a ``---`` separator, then one block per layer::

    layer 0 weight <rows> <cols>
    <row values ...>
    layer 0 bias <n>
    <values>

Floats are written with ``repr`` so they round-trip exactly.
"""

import os

import numpy as np

from ..errors import ContractViolation
from .network import Network
from .train import Checkpoint

_FMT = "neuralbayes-checkpoint 1"


def _floats(values):
    return " ".join(repr(float(v)) for v in np.ravel(values))


def dumps(ckpt):
    net = ckpt.network
    lines = [
        _FMT,
        "layer_dims: " + " ".join(str(n) for n in net.layer_dims),
        f"activation: {net.activation}",
        f"clip_bound: {'none' if net.clip_bound is None else repr(float(net.clip_bound))}",
        f"seed: {ckpt.seed}",
        f"config_hash: {ckpt.config_hash}",
        f"label: {ckpt.label}",
        f"input_transform: {ckpt.input_transform}",
        f"epochs: {ckpt.epochs}",
        f"train_risk: {ckpt.train_risk!r}",
        f"val_risk: {ckpt.val_risk!r}",
        "trace: " + _floats(ckpt.trace),
        "---",
    ]
    for l, (w, b) in enumerate(zip(net.weights, net.biases)):
        lines.append(f"layer {l} weight {w.shape[0]} {w.shape[1]}")
        lines.extend(_floats(row) for row in w)
        lines.append(f"layer {l} bias {b.shape[0]}")
        lines.append(_floats(b))
    return "\n".join(lines) + "\n"


def loads(text, expect_dims=None):
    lines = text.splitlines()
    if not lines or lines[0] != _FMT:
        raise ContractViolation("not a neuralbayes checkpoint")
    header = {}
    i = 1
    while lines[i] != "---":
        key, _, value = lines[i].partition(":")
        header[key.strip()] = value.strip()
        i += 1
    i += 1
    dims = tuple(int(v) for v in header["layer_dims"].split())
    if expect_dims is not None and tuple(expect_dims) != dims:
        raise ContractViolation(f"checkpoint dims {dims} do not match expected {tuple(expect_dims)}")
    weights, biases = [], []
    for l in range(len(dims) - 1):
        tag = lines[i].split()
        rows, cols = int(tag[3]), int(tag[4])
        if tag[:3] != ["layer", str(l), "weight"] or (rows, cols) != (dims[l + 1], dims[l]):
            raise ContractViolation(f"layer {l}: weight block {tag} does not match dims {dims}")
        w = np.array([[float(v) for v in lines[i + 1 + r].split()] for r in range(rows)]).reshape(rows, cols)
        i += 1 + rows
        tag = lines[i].split()
        if tag[:3] != ["layer", str(l), "bias"] or int(tag[3]) != dims[l + 1]:
            raise ContractViolation(f"layer {l}: bias block {tag} does not match dims {dims}")
        b = np.array([float(v) for v in lines[i + 1].split()])
        i += 2
        weights.append(w)
        biases.append(b)
    clip = header["clip_bound"]
    net = Network(dims, weights, biases, None if clip == "none" else float(clip), header["activation"])
    trace = tuple(float(v) for v in header.get("trace", "").split())
    return Checkpoint(net, header["config_hash"], float(header["train_risk"]),
                      float(header["val_risk"]), int(header["epochs"]), int(header["seed"]),
                      header["label"], header["input_transform"], trace)


def save(ckpt, path):
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(dumps(ckpt))
    os.replace(tmp, path)


def load(path, expect_dims=None):
    with open(path) as fh:
        return loads(fh.read(), expect_dims)
