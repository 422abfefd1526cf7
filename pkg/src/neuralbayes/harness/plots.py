"""SVG figures generated from the experiment CSVs (and nothing else)."""

from pathlib import Path

import numpy as np

from .svg import Plot, floats, read_csv


def figure4_svg(csv_path, svg_path, m):
    c = read_csv(csv_path)
    theta = floats(c["theta"])
    p = Plot(f"Estimates vs true theta, m = {m}", "theta", "estimate")
    p.scatter(theta, floats(c["bayes"]), "Bayes (quadrature)")
    p.scatter(theta, floats(c["mcmc"]), "MCMC")
    p.scatter(theta, floats(c["neural"]), "neural")
    p.line([0.0, 1.0], [0.0, 1.0], "identity", dashed=True)
    p.save(svg_path)
    return Path(svg_path)


def _select(cols, **where):
    keep = np.ones(len(next(iter(cols.values()))), dtype=bool)
    for k, v in where.items():
        keep &= np.array([x == str(v) for x in cols[k]])
    return keep


def _first_per_m(cols, mask):
    seen, idx = set(), []
    for i in np.flatnonzero(mask):
        if cols["m"][i] not in seen:
            seen.add(cols["m"][i])
            idx.append(i)
    return np.array(idx, dtype=int)


def decomposition_svgs(dec_csv, risks_csv, out, sweep_m):
    out = Path(out)
    c = read_csv(dec_csv)
    files = []
    for n in sorted(set(c["N"]), key=int):
        m = floats(c["m"])
        p = Plot(f"Risks vs m, N = {n}", "m", "risk", logy=True)
        idx = _first_per_m(c, _select(c, N=n))
        p.line(m[idx], floats(c["bayes_risk"])[idx], "Bayes")
        idx = _first_per_m(c, _select(c, N=n, proxy="optimal_proxy"))
        if idx.size:
            p.line(m[idx], floats(c["proxy_risk"])[idx], "optimal proxy")
        for lab in ("erm", "regularized", "restricted"):
            s = _select(c, N=n, label=lab)
            if s.any():
                p.line(m[s], floats(c["test_risk"])[s], f"{lab} test")
                p.line(m[s], floats(c["train_risk"])[s], f"{lab} train", dashed=True)
        path = out / f"decomposition_N{n}.svg"
        p.save(path)
        files.append(path)

    r = read_csv(risks_csv)
    p = Plot(f"Training and test risk vs N, m = {sweep_m}", "N", "risk", logx=True, logy=True)
    for lab in sorted(set(r["label"])):
        s = _select(r, label=lab, m=sweep_m)
        if s.sum() > 1:
            n = floats(r["N"])[s]
            order = np.argsort(n, kind="stable")
            p.line(n[order], floats(r["test_risk"])[s][order], f"{lab} test")
            p.line(n[order], floats(r["train_risk"])[s][order], f"{lab} train", dashed=True)
    path = out / "risks_vs_N.svg"
    p.save(path)
    return files + [path]


def linear_svgs(k_csv, erm_csv, sweep_csv, out, k):
    out = Path(out)
    c = read_csv(k_csv)
    m = floats(c["m"])
    p = Plot("Risk vs m: all inputs and first k inputs", "m", "risk", logx=True, logy=True)
    p.line(m, floats(c["bayes_closed"]), "Bayes (closed form)")
    p.scatter(m, floats(c["bayes_mc"]), "Bayes (Monte Carlo)")
    p.line(m, floats(c["sparse_closed"]), f"k = {k} (closed form)", dashed=True)
    p.scatter(m, floats(c["sparse_mc"]), f"k = {k} (Monte Carlo)")
    files = [out / "linear_k.svg"]
    p.save(files[0])

    e = read_csv(erm_csv)
    p = Plot("ERM risk vs m", "m", "risk", logx=True, logy=True)
    p.line(m, floats(c["bayes_closed"]), "Bayes")
    for n in sorted(set(e["N"]), key=int):
        s = _select(e, N=n)
        p.line(floats(e["m"])[s], floats(e["test_risk"])[s], f"ERM N = {n}")
    files.append(out / "linear_erm.svg")
    p.save(files[-1])

    if sweep_csv:
        s = read_csv(sweep_csv)
        n = floats(s["N"])
        p = Plot(f"ERM risk vs N, m = {s['m'][0]}", "N", "risk", logx=True, logy=True)
        p.line(n, floats(s["test_risk"]), "ERM test")
        p.line(n, floats(s["train_risk"]), "ERM train", dashed=True)
        p.line(n, floats(s["bayes_closed"]), "Bayes")
        files.append(out / "linear_sweep.svg")
        p.save(files[-1])
    return files


def bounds_svg(csv_path, svg_path):
    c = read_csv(csv_path)
    p = Plot("Excess-risk bound vs N", "N", "zeta", logx=True, logy=True)
    keys = sorted({(t, m) for t, m in zip(c["tail"], c["m"])}, key=lambda x: (x[0], int(x[1])))
    for tail, m in keys:
        s = _select(c, tail=tail, m=m)
        p.line(floats(c["N"])[s], floats(c["zeta"])[s], f"{tail}, m = {m}")
    p.save(svg_path)
    return Path(svg_path)
