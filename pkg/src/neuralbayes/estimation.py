"""Amortized estimation pipeline: simulate, fit, evaluate, decompose."""

import csv
import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, EvaluationError
from .models import io as model_io
from .neural import forward, train
from .rng import stream, stream_id


def exchangeable_log(x, m, d):
    """Canonical form for exchangeable coordinates and i.i.d. replicates.

    Logs, sorts the coordinates inside each replicate, then orders the
    replicates by their range.  Both reorderings leave the likelihood, and
    therefore the posterior mean, unchanged.
    """
    x = np.asarray(x, dtype=float)
    z = np.sort(np.log(x.reshape(x.shape[0], m, d)), axis=2)
    order = np.argsort(z[:, :, -1] - z[:, :, 0], axis=1, kind="stable")
    z = np.take_along_axis(z, order[:, :, None], axis=1)
    return z.reshape(x.shape[0], m * d)


def get_transform(name, m=None, d=None):
    """Input transform by name: ``identity``, ``log`` or ``exchangeable-log``."""
    if name == "identity":
        return lambda x: np.asarray(x, dtype=float)
    if name == "log":
        return lambda x: np.log(np.asarray(x, dtype=float))
    if name.startswith("exchangeable-log"):
        if m is None:
            _, m, d = name.split(":")
        return lambda x: exchangeable_log(x, int(m), int(d))
    raise ConfigurationError(f"unknown input transform {name!r}")


def model_hash(model, prior):
    blob = json.dumps({"model": model.to_dict(), "prior": prior.to_dict()}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class TrainingSet:
    """``x`` is ``(N, m*d)`` (replicate-major rows), ``theta`` is ``(N, p)``."""

    x: np.ndarray
    theta: np.ndarray
    m: int
    d: int
    seed: int
    split: str = "train"
    provenance: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def p(self):
        return self.theta.shape[1]

    def replicates(self):
        """View of ``x`` as ``(N, m, d)``."""
        return self.x.reshape(self.n, self.m, self.d)

    def stream_ids(self, index):
        return (stream_id(self.seed, f"{self.split}/prior", index),
                stream_id(self.seed, f"{self.split}/data", index))

    def subset(self, n):
        return TrainingSet(self.x[:n], self.theta[:n], self.m, self.d, self.seed, self.split,
                           dict(self.provenance, N=n))

    def save(self, path):
        model_io.write_binary(path, self.theta, self.x, self.d, self.m, self.seed)

    def to_csv(self, path):
        model_io.write_csv(path, self.theta, self.x, self.d, self.m)

    @classmethod
    def load(cls, path, split="train"):
        raw = model_io.read_binary(path)
        return cls(raw["z"], raw["theta"], raw["m"], raw["d"], raw["seed"], split,
                   {"m": raw["m"], "N": raw["N"], "seed": raw["seed"], "source": str(path)})


def _simulate_records(model, prior, m, seed, split, start, stop):
    x = np.empty((stop - start, m * model.d))
    theta = np.empty((stop - start, prior.p))
    for r, i in enumerate(range(start, stop)):
        t = prior.draw(stream(seed, f"{split}/prior", i))
        theta[r] = t
        x[r] = model.sample(t, m, stream(seed, f"{split}/data", i)).reshape(-1)
    return x, theta


def make_training_set(model, prior, m, n, seed, split="train", workers=1):
    """Simulate ``n`` independent ``(theta_i, Z_i)`` pairs.

    Record ``i`` draws ``theta_i`` from stream ``(seed, split/prior, i)`` and
    ``Z_i`` from ``(seed, split/data, i)``, so the output does not depend on
    ``workers``.
    """
    if m < 1 or n < 1:
        raise ConfigurationError("m and N must be >= 1")
    if workers > 1 and n >= 2 * workers:
        edges = np.linspace(0, n, workers + 1).astype(int)
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_simulate_records, *zip(*[
                (model, prior, m, seed, split, a, b) for a, b in zip(edges[:-1], edges[1:])])))
        x = np.concatenate([p[0] for p in parts])
        theta = np.concatenate([p[1] for p in parts])
    else:
        x, theta = _simulate_records(model, prior, m, seed, split, 0, n)
    prov = {"model": model.to_dict(), "prior": prior.to_dict(), "model_hash": model_hash(model, prior),
            "m": m, "N": n, "seed": seed, "split": split}
    return TrainingSet(x, theta, m, model.d, seed, split, prov)


class NeuralEstimator:
    """Callable wrapper applying the checkpoint's input transform before the network."""

    def __init__(self, checkpoint):
        self.checkpoint = checkpoint
        self.transform = get_transform(checkpoint.input_transform)

    def __call__(self, x):
        return forward(self.checkpoint.network, self.transform(np.asarray(x, dtype=float)))

    @property
    def label(self):
        return self.checkpoint.label


def fit_neural_estimator(data, hidden, cfg, clip_bound=None, label=None, input_transform="identity",
                         init=None):
    """Train a network ``m*d -> hidden... -> p`` on a training set.

    ``label`` defaults to ``restricted(alpha)``, ``regularized`` or ``erm``
    depending on the configuration.
    """
    if label is None:
        if cfg.restriction is not None:
            label = f"restricted({cfg.restriction:g})"
        elif cfg.regularization != "none":
            label = "regularized"
        else:
            label = "erm"
    if input_transform == "exchangeable-log":
        input_transform = f"exchangeable-log:{data.m}:{data.d}"
    dims = (data.x.shape[1], *hidden, data.p)
    x = get_transform(input_transform)(data.x)
    return train(x, data.theta, dims, cfg, clip_bound=clip_bound, init=init, label=label,
                 input_transform=input_transform)


@dataclass(frozen=True, eq=False)
class RiskEstimate:
    """Monte Carlo risk with per-record losses (for pointwise-risk plots)."""

    risk: float
    stderr: float
    losses: np.ndarray
    theta: np.ndarray
    estimates: np.ndarray

    @property
    def n(self):
        return self.losses.size


def _risk_from_losses(losses, theta, est):
    n = losses.size
    se = float(np.std(losses, ddof=1) / np.sqrt(n)) if n > 1 else float("nan")
    return RiskEstimate(float(np.mean(losses)), se, losses, theta, est)


def evaluate_on(estimator, data):
    """Risk of ``estimator`` on an existing set of ``(theta, Z)`` pairs."""
    est = np.asarray(estimator(data.x), dtype=float).reshape(data.n, data.p)
    bad = np.flatnonzero(~np.all(np.isfinite(est), axis=1))
    if bad.size:
        raise EvaluationError(f"non-finite estimate for input row {bad[0]}", row=int(bad[0]))
    losses = np.sum((est - data.theta) ** 2, axis=1)
    return _risk_from_losses(losses, data.theta, est)


def evaluate_risk(estimator, model, prior, m, n_test, seed, workers=1):
    """Monte Carlo estimate of the integrated risk on fresh test pairs."""
    if n_test < 100:
        raise ConfigurationError("n_test must be >= 100")
    return evaluate_on(estimator, make_training_set(model, prior, m, n_test, seed, "test", workers))


def decompose(test_set, bayes, proxy, trained):
    """Risk decomposition table on a shared test set.

    Parameters
    ----------
    test_set : TrainingSet
        Common test pairs; every estimator is evaluated on it (paired
        Monte Carlo).
    bayes, proxy : callable
        Bayes estimator and the optimal-network proxy.
    trained : dict
        ``label -> (estimator, training_set)`` for the fitted networks.

    Returns
    -------
    list of dict
        One row per trained estimator with the Bayes risk, approximation
        error ``R(proxy) - R(bayes)``, generalization error
        ``R(net) - R(proxy)`` and its three-way split
        ``[R(net) - R_N(net)] + [R_N(net) - R_N(proxy)] + [R_N(proxy) - R(proxy)]``.
        ``*_se`` columns are paired standard errors.
    """
    if bayes is None or proxy is None:
        raise ConfigurationError("decomposition needs both a Bayes baseline and an optimal proxy")
    rb = evaluate_on(bayes, test_set)
    rp = evaluate_on(proxy, test_set)
    n = test_set.n

    def paired_se(a, b):
        return float(np.std(a.losses - b.losses, ddof=1) / np.sqrt(n))

    rows = []
    for label, (est, train_set) in trained.items():
        rt = evaluate_on(est, test_set)
        train_net = evaluate_on(est, train_set)
        train_proxy = evaluate_on(proxy, train_set)
        row = {
            "label": label,
            "m": test_set.m,
            "N": train_set.n,
            "n_test": n,
            "bayes_risk": rb.risk,
            "bayes_se": rb.stderr,
            "proxy_risk": rp.risk,
            "proxy_se": rp.stderr,
            "proxy_train_risk": train_proxy.risk,
            "proxy_train_se": train_proxy.stderr,
            "test_risk": rt.risk,
            "test_se": rt.stderr,
            "train_risk": train_net.risk,
            "train_se": train_net.stderr,
            "approximation_error": rp.risk - rb.risk,
            "approximation_se": paired_se(rp, rb),
            "generalization_error": rt.risk - rp.risk,
            "generalization_se": paired_se(rt, rp),
            "gen_test_minus_train": rt.risk - train_net.risk,
            "gen_train_vs_proxy": train_net.risk - train_proxy.risk,
            "gen_proxy_train_minus_test": train_proxy.risk - rp.risk,
        }
        rows.append(row)
    return rows


@dataclass
class RiskReport:
    """Risk entries keyed by ``(label, m, N)``."""

    entries: dict = field(default_factory=dict)

    def add(self, label, m, n, train_risk, test):
        self.entries[(label, m, n)] = {"train_risk": float(train_risk), "test_risk": test.risk,
                                       "stderr": test.stderr, "n_test": test.n}

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["label", "m", "N", "train_risk", "test_risk", "stderr"])
            for (label, m, n), e in sorted(self.entries.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2])):
                w.writerow([label, m, n, repr(e["train_risk"]), repr(e["test_risk"]), repr(e["stderr"])])
