"""Experiment configuration: defaults per figure, YAML/JSON loading, hashing.

Schema (all keys optional except ``id`` and ``kind``)::

    id: decomposition          # run identifier, also the output subdirectory
    kind: decomposition        # figure4 | decomposition | linear | bounds
    model: {family: logistic, d: 5, prior: {kind: uniform, lower: [0], upper: [1]}}
    m_grid: [1, 2, 10]
    N_grid: [100, 1000]
    proxy_N: 10000             # training size of the optimal-network proxy
    architectures: [[32], [64, 64], [128, 64]]
    regularizations: [none, dropout, early-stopping]
    estimators: [bayes, optimal_proxy, erm, regularized, restricted]
    seeds: {train: 1, test: 2, val: 3, init: 0, mcmc: 4}
    train: {epochs: 100, batch_size: 64, lr: 0.001, ...}   # TrainConfig fields
    n_test: 500
    n_val: 2000
    clip_bound: 1.0
    restriction: 5.0
    input_transform: exchangeable-log
    mcmc: {chain_len: 20000, burn_in: 5000, proposal_scale: 0.5}
    quadrature_nodes: 256
    extra: {...}               # kind-specific settings
"""

import copy
import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from ..errors import ConfigurationError

KINDS = ("figure4", "decomposition", "linear", "bounds")

LOGISTIC = {"family": "logistic", "d": 5, "prior": {"kind": "uniform", "lower": [0.0], "upper": [1.0]}}
GRID = [[32], [64, 64], [128, 64]]
REGS = ["none", "dropout", "early-stopping"]


@dataclass
class ExperimentConfig:
    id: str
    kind: str
    model: dict = field(default_factory=lambda: copy.deepcopy(LOGISTIC))
    m_grid: list = field(default_factory=lambda: [10])
    N_grid: list = field(default_factory=lambda: [10000])
    proxy_N: int = 10000
    architectures: list = field(default_factory=lambda: copy.deepcopy(GRID))
    regularizations: list = field(default_factory=lambda: list(REGS))
    estimators: list = field(default_factory=lambda: ["bayes", "optimal_proxy", "erm", "regularized"])
    seeds: dict = field(default_factory=lambda: {"train": 1, "test": 2, "val": 3, "init": 0, "mcmc": 4})
    train: dict = field(default_factory=lambda: {"epochs": 100, "batch_size": 64, "lr": 1e-3,
                                                 "patience": 20, "dropout_rate": 0.2,
                                                 "min_steps": 15000})
    n_test: int = 500
    n_val: int = 2000
    clip_bound: float = 1.0
    restriction: float = 5.0
    input_transform: str = "exchangeable-log"
    mcmc: dict = field(default_factory=lambda: {"chain_len": 20000, "burn_in": 5000, "proposal_scale": 0.5})
    quadrature_nodes: int = 256
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown experiment kind {self.kind!r}")
        if not self.id or not isinstance(self.id, str):
            raise ConfigurationError("experiment id must be a non-empty string")
        for name in ("m_grid", "N_grid", "architectures", "regularizations", "estimators"):
            if not getattr(self, name):
                raise ConfigurationError(f"{name} must be non-empty")
        if self.n_test < 100:
            raise ConfigurationError("n_test must be >= 100")
        for key in ("train", "test", "val", "init", "mcmc"):
            self.seeds.setdefault(key, 0)

    def to_dict(self):
        return asdict(self)

    def hash(self):
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        if "id" not in d or "kind" not in d:
            raise ConfigurationError("config needs 'id' and 'kind'")
        base = default_config(d["kind"], d["id"]) if d["kind"] in KINDS else None
        if base is None:
            raise ConfigurationError(f"unknown experiment kind {d['kind']!r}")
        merged = base.to_dict()
        for k, v in d.items():
            if isinstance(v, dict) and isinstance(merged.get(k), dict):
                merged[k] = {**merged[k], **v}
            else:
                merged[k] = v
        return cls(**merged)


def load_config(path):
    """Read an :class:`ExperimentConfig` from a YAML or JSON file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text) if str(path).endswith(".json") else yaml.safe_load(text)
    except (ValueError, yaml.YAMLError) as exc:
        raise ConfigurationError(f"cannot parse config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigurationError("config must be a mapping")
    return ExperimentConfig.from_dict(data)


def default_config(kind, id=None):
    """Desk-scale defaults for each experiment kind."""
    id = id or kind
    if kind == "figure4":
        return ExperimentConfig(id=id, kind=kind, m_grid=[1, 10], N_grid=[10000],
                                estimators=["bayes", "mcmc", "optimal_proxy"])
    if kind == "decomposition":
        return ExperimentConfig(
            id=id, kind=kind, m_grid=list(range(1, 11)), N_grid=[100, 1000],
            estimators=["bayes", "optimal_proxy", "erm", "regularized", "restricted"],
            extra={"sweep_m": 10, "sweep_N": [100, 300, 1000, 3000, 10000],
                   "proxy_architecture": None, "proxy_regularization": None})
    if kind == "linear":
        return ExperimentConfig(
            id=id, kind=kind,
            model={"family": "linear-gaussian", "sigma": 1.0,
                   "prior": {"kind": "gaussian", "mean": [0.0], "stdev": [1.0]}},
            m_grid=[1, 2, 5, 10, 20, 50, 100, 200], N_grid=[100, 1000],
            architectures=[[]], regularizations=["none"], estimators=["bayes", "sparse", "erm"],
            n_test=10000, input_transform="identity",
            extra={"k": 10, "sweep_m": 40,
                   "sweep_N": [50, 100, 200, 500, 1000, 2000, 5000, 10000]})
    if kind == "bounds":
        return ExperimentConfig(
            id=id, kind=kind, m_grid=[1, 2, 10], N_grid=[10 ** k for k in range(3, 10)],
            estimators=["zeta"],
            extra={"B": 1.0, "p": 1, "d": 5, "L": 2, "delta": 0.05, "eps": 0.5,
                   "tails": [{"kind": "frechet"}, {"kind": "subgaussian", "S": 1.0}]})
    raise ConfigurationError(f"unknown experiment kind {kind!r}")
