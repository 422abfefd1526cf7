"""Flat binary and CSV persistence for simulated data.

Binary layout (little endian)::

    b"NEBL1"                  5-byte magic
    d, m, N, p, seed          five signed 64-bit integers
    theta block               N * p float64, row-major
    Z block                   N * (m * d) float64, row-major
"""

import csv
import os
import struct

import numpy as np

from ..errors import ConfigurationError

MAGIC = b"NEBL1"
_HEADER = struct.Struct("<5q")


def write_binary(path, theta, z, d, m, seed):
    theta = np.ascontiguousarray(theta, dtype="<f8")
    z = np.ascontiguousarray(z, dtype="<f8")
    n, p = theta.shape
    if z.shape != (n, m * d):
        raise ConfigurationError(f"Z block shape {z.shape} does not match N={n}, m*d={m * d}")
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_HEADER.pack(d, m, n, p, seed))
        fh.write(theta.tobytes())
        fh.write(z.tobytes())
    os.replace(tmp, path)


def read_binary(path):
    """Return a dict with keys d, m, N, p, seed, theta, z."""
    with open(path, "rb") as fh:
        if fh.read(len(MAGIC)) != MAGIC:
            raise ConfigurationError(f"{path}: not an NEBL1 file")
        d, m, n, p, seed = _HEADER.unpack(fh.read(_HEADER.size))
        theta = np.frombuffer(fh.read(8 * n * p), dtype="<f8").reshape(n, p)
        z = np.frombuffer(fh.read(8 * n * m * d), dtype="<f8").reshape(n, m * d)
        if fh.read(1):
            raise ConfigurationError(f"{path}: trailing bytes after data blocks")
    return {"d": d, "m": m, "N": n, "p": p, "seed": seed,
            "theta": theta.astype(float), "z": z.astype(float)}


def write_csv(path, theta, z, d, m):
    """Inspection mirror: one row per record, theta columns then z columns."""
    p = theta.shape[1]
    header = [f"theta{k}" for k in range(p)]
    header += [f"z{r}_{j}" for r in range(m) for j in range(d)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for t, x in zip(theta, z):
            w.writerow([repr(float(v)) for v in t] + [repr(float(v)) for v in x])
