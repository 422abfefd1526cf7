"""Command-line interface.

Verbs: ``simulate``, ``train``, ``evaluate``, ``mcmc``, ``bounds`` and
``reproduce <figure-id>``.  Exit codes: 0 success, 2 configuration error,
3 numeric failure, 4 reproduction mismatch.
"""

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import yaml

from ..baselines import logistic_posterior_mcmc, logistic_posterior_quadrature, write_jsonl
from ..errors import (
    ConfigurationError,
    ContractViolation,
    DomainError,
    ModelError,
    NumericalError,
    OrchestrationError,
    ReproductionError,
)
from ..estimation import NeuralEstimator, RiskReport, TrainingSet, evaluate_on, fit_neural_estimator, make_training_set
from ..models.families import model_from_config
from ..neural import TrainConfig
from ..neural import checkpoint as ckpt_io
from .config import KINDS, default_config, load_config
from .experiments import run_bounds_sweep
from .manifest import reproduce, run_experiment

log = logging.getLogger("neuralbayes")

SEED_ORDER = ("train", "test", "val", "init", "mcmc")


def _read_mapping(path):
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
        data = json.loads(text) if str(path).endswith(".json") else yaml.safe_load(text)
    except (OSError, ValueError, yaml.YAMLError) as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigurationError("config must be a mapping")
    return data


def _hidden(text):
    if text in (None, "", "linear"):
        return ()
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError as exc:
        raise ConfigurationError(f"bad hidden layout {text!r}") from exc


def cmd_simulate(args):
    cfg = _read_mapping(args.config)
    model_cfg = cfg.get("model", cfg)
    model, prior = model_from_config(model_cfg)
    m = int(args.m if args.m is not None else cfg.get("m", 1))
    n = int(args.n if args.n is not None else cfg.get("n", 1000))
    data = make_training_set(model, prior, m, n, args.seed, args.split, args.threads)
    out = Path(args.out or "data.bin")
    data.save(out)
    if args.csv:
        data.to_csv(out.with_suffix(".csv"))
    print(json.dumps({"out": str(out), "N": n, "m": m, "d": model.d, "p": prior.p, "seed": args.seed}))


def cmd_train(args):
    data = TrainingSet.load(args.data)
    opts = _read_mapping(args.config).get("train", {})
    opts.update({k: v for k, v in {"epochs": args.epochs, "lr": args.lr, "batch_size": args.batch_size,
                                    "regularization": args.regularization,
                                    "restriction": args.restriction}.items() if v is not None})
    try:
        cfg = TrainConfig(seed=args.seed, **opts)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from exc
    ck = fit_neural_estimator(data, _hidden(args.hidden), cfg, clip_bound=args.clip, input_transform=args.transform)
    out = Path(args.out or "model.ckpt")
    ckpt_io.save(ck, out)
    print(json.dumps({"out": str(out), "label": ck.label, "epochs": ck.epochs, "train_risk": ck.train_risk,
                      "val_risk": None if np.isnan(ck.val_risk) else ck.val_risk}))


def cmd_evaluate(args):
    ck = ckpt_io.load(args.checkpoint)
    data = TrainingSet.load(args.data, split="test")
    if ck.network.layer_dims[0] != data.x.shape[1]:
        raise ContractViolation(f"checkpoint expects {ck.network.layer_dims[0]} inputs, data has {data.x.shape[1]}")
    r = evaluate_on(NeuralEstimator(ck), data)
    if args.out:
        rep = RiskReport()
        rep.add(ck.label, data.m, 0, ck.train_risk, r)
        rep.to_csv(args.out)
    print(json.dumps({"label": ck.label, "m": data.m, "n_test": r.n, "risk": r.risk, "stderr": r.stderr}))


def cmd_mcmc(args):
    data = TrainingSet.load(args.data)
    rows = range(data.n) if args.record is None else [args.record]
    reps = data.replicates()
    out = []
    for i in rows:
        if args.method == "quadrature":
            s = logistic_posterior_quadrature(reps[i], nodes=args.nodes)
        else:
            s = logistic_posterior_mcmc(reps[i], args.chain_len, args.burn_in, args.proposal_scale,
                                        seed=args.seed + i)
        s.diagnostics["record"] = int(i)
        s.diagnostics["theta"] = [float(v) for v in data.theta[i]]
        out.append(s)
    if args.out:
        write_jsonl(args.out, out)
    else:
        for s in out:
            print(s.to_json())


def cmd_bounds(args):
    cfg = load_config(args.config) if args.config else default_config("bounds")
    if cfg.kind != "bounds":
        raise ConfigurationError("bounds verb needs a bounds config")
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    for f in run_bounds_sweep(cfg, out):
        print(f)


def cmd_reproduce(args):
    if args.manifest:
        new = reproduce(args.manifest, workers=args.threads)
        print(json.dumps({"reproduced": new["id"], "outputs": len(new["outputs"])}))
        return
    if args.figure is None:
        raise ConfigurationError("reproduce needs a figure id or --manifest")
    if args.config:
        cfg = load_config(args.config)
        if cfg.kind != args.figure:
            raise ConfigurationError(f"config kind {cfg.kind!r} does not match {args.figure!r}")
    else:
        cfg = default_config(args.figure)
    if args.seed_given:
        cfg = replace(cfg, seeds={k: args.seed + i for i, k in enumerate(SEED_ORDER)})
    man = run_experiment(cfg, args.out or "runs", workers=args.threads)
    print(json.dumps({"id": man["id"], "wall_clock_seconds": man["wall_clock_seconds"],
                      "outputs": sorted(man["outputs"])}))


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="base seed (default 0)")
    common.add_argument("--out", default=None, help="output file or directory")
    common.add_argument("--config", default=None, help="YAML or JSON config file")
    common.add_argument("--threads", type=int, default=1, help="worker processes")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="neuralbayes", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("simulate", parents=[common], help="simulate (theta, Z) pairs to a binary file")
    s.add_argument("--m", type=int)
    s.add_argument("--n", type=int)
    s.add_argument("--split", default="train")
    s.add_argument("--csv", action="store_true", help="also write a CSV mirror")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("train", parents=[common], help="train a network on a simulated data file")
    s.add_argument("--data", required=True)
    s.add_argument("--hidden", default="32", help="comma-separated widths, empty for none")
    s.add_argument("--epochs", type=int)
    s.add_argument("--lr", type=float)
    s.add_argument("--batch-size", type=int)
    s.add_argument("--regularization", choices=["none", "dropout", "early-stopping"])
    s.add_argument("--restriction", type=float)
    s.add_argument("--clip", type=float, default=None)
    s.add_argument("--transform", default="identity")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("evaluate", parents=[common], help="test risk of a checkpoint")
    s.add_argument("--checkpoint", required=True)
    s.add_argument("--data", required=True)
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("mcmc", parents=[common], help="posterior means for logistic data")
    s.add_argument("--data", required=True)
    s.add_argument("--record", type=int)
    s.add_argument("--method", choices=["mcmc", "quadrature"], default="mcmc")
    s.add_argument("--chain-len", type=int, default=20000)
    s.add_argument("--burn-in", type=int, default=5000)
    s.add_argument("--proposal-scale", type=float, default=0.5)
    s.add_argument("--nodes", type=int, default=256)
    s.set_defaults(func=cmd_mcmc)

    s = sub.add_parser("bounds", parents=[common], help="bound sweep CSV")
    s.set_defaults(func=cmd_bounds)

    s = sub.add_parser("reproduce", parents=[common], help="run a figure experiment or replay a manifest")
    s.add_argument("figure", nargs="?", choices=KINDS)
    s.add_argument("--manifest", default=None, help="manifest.json (or its directory) to replay")
    s.set_defaults(func=cmd_reproduce)
    return p


EXIT_CODES = (
    ((ConfigurationError, DomainError, ContractViolation), 2),
    ((NumericalError, ModelError, OrchestrationError), 3),
    ((ReproductionError,), 4),
)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    args.seed_given = args.seed is not None
    if args.seed is None:
        args.seed = 0
    try:
        args.func(args)
    except Exception as exc:
        for kinds, code in EXIT_CODES:
            if isinstance(exc, kinds):
                print(f"error: {exc}", file=sys.stderr)
                return code
        raise
    return 0


if __name__ == "__main__":
    sys.exit(main())
