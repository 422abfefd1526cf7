"""Experiment runners: Bayes-vs-neural scatter, risk decomposition, linear
model curves and bound sweeps.  Each writes CSVs (canonical) and SVGs
derived from them."""

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .. import bounds
from ..baselines import linear_bayes_estimator, linear_bayes_risks, mcmc_posterior_means, quadrature_estimator
from ..errors import ConfigurationError, OrchestrationError
from ..estimation import (
    NeuralEstimator,
    RiskReport,
    decompose,
    evaluate_on,
    fit_neural_estimator,
    make_training_set,
)
from ..models.families import model_from_config
from ..neural import TrainConfig
from ..neural import checkpoint as ckpt_io
from . import plots


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (list, tuple)):
        return "-".join(str(x) for x in v) or "linear"
    return str(v)


def write_csv(path, header, rows):
    """Atomic RFC-4180 CSV write; floats use shortest round-trip repr."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            vals = [r[h] for h in header] if isinstance(r, dict) else r
            for v in vals:
                if isinstance(v, (float, np.floating)) and not np.isfinite(v):
                    raise OrchestrationError(f"non-finite value in {path.name}")
            w.writerow([_fmt(v) for v in vals])
    os.replace(tmp, path)
    return path


def train_config(cfg, regularization="none", restriction=None):
    opts = dict(cfg.train)
    opts.setdefault("patience", 20)
    return TrainConfig(regularization=regularization, restriction=restriction, seed=cfg.seeds["init"], **opts)


def _fit_job(job):
    data, hidden, tcfg, clip, transform = job
    return fit_neural_estimator(data, tuple(hidden), tcfg, clip_bound=clip, input_transform=transform)


def _map(fn, jobs, workers):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(min(workers, len(jobs))) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def fit_grid(train_set, val_set, cfg, workers=1):
    """Fit every (architecture, regularization) pair and rank by validation risk.

    The validation set is simulated independently of the training set.
    Returns ``(best_index, rows, checkpoints)``; ties go to the earlier grid
    entry.
    """
    combos = [(tuple(a), r) for a in cfg.architectures for r in cfg.regularizations]
    jobs = [(train_set, a, train_config(cfg, r), cfg.clip_bound, cfg.input_transform) for a, r in combos]
    ckpts = _map(_fit_job, jobs, workers)
    rows = []
    for (arch, reg), ck in zip(combos, ckpts):
        val = evaluate_on(NeuralEstimator(ck), val_set)
        rows.append({"m": train_set.m, "N": train_set.n, "architecture": arch, "regularization": reg,
                     "epochs": ck.epochs, "train_risk": evaluate_on(NeuralEstimator(ck), train_set).risk,
                     "val_risk": val.risk, "val_se": val.stderr})
    best = int(np.argmin([r["val_risk"] for r in rows]))
    return best, rows, ckpts


def _sets(cfg, m, n_train, workers, train_split="train"):
    model, prior = model_from_config(cfg.model)
    tr = make_training_set(model, prior, m, n_train, cfg.seeds["train"], train_split, workers)
    va = make_training_set(model, prior, m, cfg.n_val, cfg.seeds["val"], "val", workers)
    te = make_training_set(model, prior, m, cfg.n_test, cfg.seeds["test"], "test", workers)
    return model, prior, tr, va, te


def _require_logistic(cfg):
    if cfg.model.get("family") != "logistic":
        raise ConfigurationError(f"{cfg.kind} needs the logistic model")


GRID_COLUMNS = ["m", "N", "architecture", "regularization", "epochs", "train_risk", "val_risk", "val_se"]


def run_figure4(cfg, out, workers=1):
    """Quadrature Bayes, MCMC and grid-best neural estimates on ``n_test`` test sets.

    Writes ``figure4_m{m}.csv`` (columns theta, bayes, mcmc, neural),
    ``figure4_grid.csv``, ``figure4_summary.csv``, the proxy checkpoints and
    one scatter SVG per ``m``.
    """
    _require_logistic(cfg)
    out = Path(out)
    n_train = cfg.N_grid[0]
    grid_rows, summary, files = [], [], []
    for m in cfg.m_grid:
        model, prior, tr, va, te = _sets(cfg, m, n_train, workers)
        best, rows, ckpts = fit_grid(tr, va, cfg, workers)
        grid_rows.extend(rows)
        ck = ckpts[best]
        ck_path = out / f"proxy_m{m}.ckpt"
        ckpt_io.save(ck, ck_path)
        if ck_path.stat().st_size == 0:
            raise OrchestrationError(f"missing trained checkpoint {ck_path}")
        neural = NeuralEstimator(ckpt_io.load(ck_path))
        bayes = quadrature_estimator(m, model.d, cfg.quadrature_nodes)
        rb = evaluate_on(bayes, te)
        rn = evaluate_on(neural, te)
        mc = cfg.mcmc
        if "mcmc" in cfg.estimators:
            seeds = [(cfg.seeds["mcmc"], i) for i in range(te.n)]
            mcmc_means, _, _ = mcmc_posterior_means(te.replicates(), seeds, mc["chain_len"], mc["burn_in"],
                                                    mc["proposal_scale"])
        else:
            mcmc_means = rb.estimates[:, 0]
        mcmc_losses = (mcmc_means - te.theta[:, 0]) ** 2
        csv_path = write_csv(out / f"figure4_m{m}.csv", ["theta", "bayes", "mcmc", "neural"],
                             [[t, b, c, n] for t, b, c, n in zip(te.theta[:, 0], rb.estimates[:, 0], mcmc_means,
                                                                  rn.estimates[:, 0])])
        svg_path = plots.figure4_svg(csv_path, out / f"figure4_m{m}.svg", m)
        files += [ck_path, csv_path, svg_path]
        gap = rn.estimates[:, 0] - rb.estimates[:, 0]
        summary.append({
            "m": m, "N": n_train, "architecture": rows[best]["architecture"],
            "regularization": rows[best]["regularization"],
            "bayes_risk": rb.risk, "bayes_se": rb.stderr,
            "mcmc_risk": float(mcmc_losses.mean()),
            "mcmc_se": float(mcmc_losses.std(ddof=1) / np.sqrt(te.n)),
            "neural_risk": rn.risk, "neural_se": rn.stderr,
            "ratio": rn.risk / rb.risk, "mean_sq_gap": float(np.mean(gap ** 2)),
        })
    files.append(write_csv(out / "figure4_grid.csv", GRID_COLUMNS, grid_rows))
    files.append(write_csv(out / "figure4_summary.csv", list(summary[0]), summary))
    return files


DECOMP_COLUMNS = [
    "label", "proxy", "m", "N", "n_test", "bayes_risk", "bayes_se", "proxy_risk", "proxy_se",
    "proxy_train_risk", "proxy_train_se", "test_risk", "test_se", "train_risk", "train_se",
    "approximation_error", "approximation_se", "generalization_error", "generalization_se",
    "gen_test_minus_train", "gen_train_vs_proxy", "gen_proxy_train_minus_test",
]


def _proxy_choice(cfg, workers):
    extra = cfg.extra
    if extra.get("proxy_architecture") is not None:
        return tuple(extra["proxy_architecture"]), extra.get("proxy_regularization") or "none", []
    m = extra.get("sweep_m", max(cfg.m_grid))
    _, _, tr, va, _ = _sets(cfg, m, cfg.proxy_N, workers, "proxy")
    best, rows, _ = fit_grid(tr, va, cfg, workers)
    return rows[best]["architecture"], rows[best]["regularization"], rows


def run_decomposition(cfg, out, workers=1):
    """Risk decomposition over ``m_grid`` x ``N_grid`` plus an N sweep.

    The optimal-network proxy uses the grid-best (by validation) layout,
    trained on ``proxy_N`` records per ``m``.  The restricted estimator is
    compared with a restricted proxy of the same layout.
    """
    _require_logistic(cfg)
    out = Path(out)
    arch, reg, grid_rows = _proxy_choice(cfg, workers)
    alpha = cfg.restriction
    variants = {"erm": ("none", None), "regularized": ("dropout", None), "restricted": ("none", alpha)}
    variants = {k: v for k, v in variants.items() if k in cfg.estimators}
    sweep_m = cfg.extra.get("sweep_m", max(cfg.m_grid))
    sweep_N = sorted(set(cfg.extra.get("sweep_N", [])) | set(cfg.N_grid))
    table, report = [], RiskReport()
    for m in cfg.m_grid:
        model, prior = model_from_config(cfg.model)
        te = make_training_set(model, prior, m, cfg.n_test, cfg.seeds["test"], "test", workers)
        proxy_set = make_training_set(model, prior, m, cfg.proxy_N, cfg.seeds["train"], "proxy", workers)
        n_list = sweep_N if m == sweep_m else list(cfg.N_grid)
        small = {n: make_training_set(model, prior, m, n, cfg.seeds["train"], f"train-N{n}", workers)
                 for n in n_list}
        jobs = [(proxy_set, arch, train_config(cfg, reg), cfg.clip_bound, cfg.input_transform)]
        if "restricted" in variants:
            jobs.append((proxy_set, arch, train_config(cfg, "none", alpha), cfg.clip_bound, cfg.input_transform))
        keys = []
        for n in n_list:
            for label, (r, a) in variants.items():
                keys.append((n, label))
                jobs.append((small[n], arch, train_config(cfg, r, a), cfg.clip_bound, cfg.input_transform))
        ckpts = _map(_fit_job, jobs, workers)
        proxy = NeuralEstimator(ckpts[0])
        rproxy = NeuralEstimator(ckpts[1]) if "restricted" in variants else None
        fitted = dict(zip(keys, ckpts[len(jobs) - len(keys):]))
        bayes = quadrature_estimator(m, model.d, cfg.quadrature_nodes)

        rp = evaluate_on(proxy, te)
        report.add("optimal_proxy", m, cfg.proxy_N, evaluate_on(proxy, proxy_set).risk, rp)
        for n in n_list:
            plain = {lab: (NeuralEstimator(fitted[(n, lab)]), small[n]) for lab in variants if lab != "restricted"}
            rows = [dict(r, proxy="optimal_proxy") for r in decompose(te, bayes, proxy, plain)] if plain else []
            if "restricted" in variants:
                restr = {"restricted": (NeuralEstimator(fitted[(n, "restricted")]), small[n])}
                rows += [dict(r, proxy="restricted_proxy") for r in decompose(te, bayes, rproxy, restr)]
            for r in rows:
                report.add(r["label"], m, n, r["train_risk"], evaluate_on(
                    NeuralEstimator(fitted[(n, r["label"])]), te))
            if n in cfg.N_grid:
                table.extend(rows)

    files = []
    if grid_rows:
        files.append(write_csv(out / "decomposition_grid.csv", GRID_COLUMNS, grid_rows))
    dec = write_csv(out / "decomposition.csv", DECOMP_COLUMNS, table)
    risks = out / "risks.csv"
    report.to_csv(risks)
    files += [dec, risks]
    files += plots.decomposition_svgs(dec, risks, out, sweep_m)
    return files


def _least_squares(x, y):
    a = np.column_stack([x, np.ones(len(x))])
    coef = np.linalg.lstsq(a, y, rcond=None)[0]
    return lambda z: np.column_stack([z, np.ones(len(z))]) @ coef


def _losses(est, data):
    r = evaluate_on(est, data)
    return r.risk, r.stderr


def run_linear_appendix(cfg, out, workers=1):
    """Normal-mean model: closed-form curves, sparse inputs and least-squares ERM.

    Writes ``linear_k.csv`` (risk vs m for k inputs and for all m inputs),
    ``linear_erm.csv`` (ERM risk vs m for each N) and ``linear_sweep.csv``
    (ERM risk vs N at fixed m).
    """
    if cfg.model.get("family") != "linear-gaussian":
        raise ConfigurationError("linear appendix needs the linear-gaussian model")
    model, prior = model_from_config(cfg.model)
    if prior.kind != "gaussian":
        raise ConfigurationError("linear appendix needs a gaussian prior")
    mu, gamma, sigma = prior.mean[0], prior.stdev[0], model.sigma
    out = Path(out)
    k = int(cfg.extra.get("k", 10))
    krows, erows, srows = [], [], []
    tests = {}

    def test_set(m):
        if m not in tests:
            tests[m] = make_training_set(model, prior, m, cfg.n_test, cfg.seeds["test"], "test", workers)
        return tests[m]

    for m in cfg.m_grid:
        te = test_set(m)
        kk = min(k, m)
        closed = linear_bayes_risks(mu, gamma, sigma, m, kk)
        full, full_se = _losses(linear_bayes_estimator(mu, gamma, sigma), te)
        sparse, sparse_se = _losses(linear_bayes_estimator(mu, gamma, sigma, kk), te)
        krows.append({"m": m, "k": kk, "bayes_closed": closed["bayes_risk"], "sparse_closed": closed["sparse_risk"],
                      "bayes_mc": full, "bayes_se": full_se, "sparse_mc": sparse, "sparse_se": sparse_se})
        for n in cfg.N_grid:
            tr = make_training_set(model, prior, m, n, cfg.seeds["train"], f"train-N{n}", workers)
            fit = _least_squares(tr.x, tr.theta)
            risk, se = _losses(fit, te)
            erows.append({"m": m, "N": n, "bayes_closed": closed["bayes_risk"],
                          "train_risk": evaluate_on(fit, tr).risk, "test_risk": risk, "stderr": se})
    sm = int(cfg.extra.get("sweep_m", 40))
    te = test_set(sm)
    bayes = linear_bayes_risks(mu, gamma, sigma, sm)["bayes_risk"]
    for n in cfg.extra.get("sweep_N", []):
        tr = make_training_set(model, prior, sm, n, cfg.seeds["train"], f"train-N{n}", workers)
        fit = _least_squares(tr.x, tr.theta)
        risk, se = _losses(fit, te)
        srows.append({"m": sm, "N": n, "bayes_closed": bayes, "train_risk": evaluate_on(fit, tr).risk,
                      "test_risk": risk, "stderr": se})
    kp = write_csv(out / "linear_k.csv", list(krows[0]), krows)
    ep = write_csv(out / "linear_erm.csv", list(erows[0]), erows)
    files = [kp, ep]
    if srows:
        sp = write_csv(out / "linear_sweep.csv", list(srows[0]), srows)
        files.append(sp)
    files += plots.linear_svgs(kp, ep, srows and sp, out, k)
    return files


def run_bounds_sweep(cfg, out, workers=1):
    """Every bound term over the N grid for each tail model and ``m``."""
    e = cfg.extra
    inputs = [bounds.BoundInputs(B=e["B"], p=e["p"], d=e["d"], m=m, L=e["L"],
                                 tail=bounds.Tail(**t), delta=e["delta"])
              for t in e["tails"] for m in cfg.m_grid]
    rows = bounds.sweep(cfg.N_grid, inputs, eps=e.get("eps", 0.5))
    path = Path(out) / "bounds.csv"
    tmp = path.with_name(path.name + ".tmp")
    bounds.write_sweep_csv(tmp, rows)
    os.replace(tmp, path)
    return [path, plots.bounds_svg(path, Path(out) / "bounds.svg")]


RUNNERS = {
    "figure4": run_figure4,
    "decomposition": run_decomposition,
    "linear": run_linear_appendix,
    "bounds": run_bounds_sweep,
}
