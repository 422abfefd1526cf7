"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The heavy runs (Bayes-vs-neural scatter at m = 10 and the full risk
decomposition) use the shipped default configurations and take several
minutes on one core.
"""

import math
import time

import numpy as np
import pytest
from scipy import integrate, stats

from neuralbayes.baselines import (
    covariance_separation_test,
    linear_bayes_estimator,
    linear_bayes_risks,
    mcmc_posterior_means,
    quadrature_posterior_means,
)
from neuralbayes.bounds import (
    BoundInputs,
    Tail,
    pseudo_robustness_bound,
    schedules,
    training_size_lower_bound,
    zeta,
    zeta2,
)
from neuralbayes.errors import ReproductionError
from neuralbayes.estimation import NeuralEstimator, evaluate_risk, fit_neural_estimator, make_training_set
from neuralbayes.harness.config import ExperimentConfig, default_config
from neuralbayes.harness.manifest import reproduce, run_experiment
from neuralbayes.harness.svg import floats, read_csv
from neuralbayes.models.families import LinearGaussianModel, LogisticModel
from neuralbayes.models.grf import GrfSpec, grf_covariance, grf_sample, grid_locations, matern
from neuralbayes.models.maxstable import (
    BrownResnickSpec,
    brown_resnick_sample,
    logistic_cdf,
    logistic_logdensity,
    logistic_sample,
    positive_stable,
)
from neuralbayes.models.priors import Prior
from neuralbayes.neural import TrainConfig
from neuralbayes.neural.network import backward, init_network, loss, max_row_l1
from oracles import FROZEN, mixed_fd_density, numeric_grad
from test_maxstable import DENSITY_POINTS
from test_neural import flat, kink_sensitive, unflat

pytestmark = pytest.mark.acceptance

FRECHET = stats.invweibull(1)
TIMINGS = {}
FIXTURE_TIMINGS = {}


class Verdict:
    """Named checks for one criterion; ``done()`` prints PASS/FAIL and asserts."""

    def __init__(self, name, capsys):
        self.name, self.capsys = name, capsys
        self.checks, self.notes = [], []
        self.t0 = time.perf_counter()
        self.reported = False

    def __call__(self, ok, detail):
        self.checks.append((bool(ok), detail))

    def note(self, detail):
        self.notes.append(detail)

    def report(self, error=None):
        self.reported = True
        elapsed = time.perf_counter() - self.t0
        TIMINGS[self.name] = elapsed
        failed = [d for ok, d in self.checks if not ok]
        status = "PASS" if self.checks and not failed and error is None else "FAIL"
        parts = [d for _, d in self.checks] + [f"[{n}]" for n in self.notes]
        if error is not None:
            parts.append(f"error: {error!r}")
        with self.capsys.disabled():
            print(f"\n{status} {self.name} ({elapsed:.1f} s): " + "; ".join(parts))
        return failed

    def done(self):
        failed = self.report()
        assert self.checks and not failed, "failed checks: " + "; ".join(failed)


@pytest.fixture
def verdict(capsys, request):
    v = Verdict(request.node.name, capsys)
    yield v
    if not v.reported:
        v.report(error="criterion did not complete")


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    return tmp_path_factory.mktemp("acceptance_runs")


@pytest.fixture(scope="module")
def figure4_run(runs):
    cfg = default_config("figure4")
    cfg.m_grid = [10]
    man = run_experiment(cfg, runs)
    FIXTURE_TIMINGS["figure4 run (06)"] = man["wall_clock_seconds"]
    return runs / cfg.id, man


def test_criterion_01_linear_closed_forms(verdict):
    r = linear_bayes_risks(0.0, 1.0, 1.0, 1, k=1)["bayes_risk"]
    a = linear_bayes_risks(0.0, 1.0, 1.0, 2, k=1)["approx_error"]
    verdict(abs(r - 0.5) <= 1e-12, f"bayes risk {r!r} vs 0.5")
    verdict(abs(a - 1 / 6) <= 1e-12, f"approx error {a!r} vs 1/6")
    verdict.done()


def test_criterion_02_linear_network(verdict):
    model, prior = LinearGaussianModel(1.0), Prior.gaussian([0.0], [1.0])
    data = make_training_set(model, prior, 1, 100_000, seed=1)
    cfg = TrainConfig(epochs=10, batch_size=100, lr=1e-3, seed=0)
    ck = fit_neural_estimator(data, (), cfg)
    slope, icpt = ck.network.weights[0][0, 0], ck.network.biases[0][0]
    verdict(abs(slope - 0.5) <= 0.03, f"slope {slope:.4f} vs 0.5 +- 0.03")
    verdict(abs(icpt) <= 0.03, f"intercept {icpt:.4f} vs 0 +- 0.03")
    r = evaluate_risk(NeuralEstimator(ck), model, prior, 1, 100_000, seed=2)
    verdict(abs(r.risk - 0.5) <= 3 * r.stderr, f"test risk {r.risk:.4f} +- {r.stderr:.4f} vs 0.5 (3 se)")
    verdict(all(np.isfinite(ck.trace)), "finite loss trace")
    verdict.done()


def test_criterion_03_logistic_density(verdict):
    worst = 0.0
    for z1, z2, theta in DENSITY_POINTS:
        fd = mixed_fd_density(z1, z2, theta)
        got = math.exp(logistic_logdensity(np.array([z1, z2]), theta))
        worst = max(worst, abs(got - fd) / abs(fd))
    verdict(worst <= 1e-4, f"max relative gap to finite differences {worst:.2e} over 10 points")
    u = np.linspace(math.log(0.01), math.log(1e8), 2401)
    U, V = np.meshgrid(u, u, indexing="ij")
    for theta in (0.3, 0.7):
        f = np.exp(logistic_logdensity(np.stack([np.exp(U), np.exp(V)], -1), theta) + U + V)
        total = integrate.simpson(integrate.simpson(f, x=u, axis=1), x=u)
        verdict(0.99 <= total <= 1.001, f"normalization theta={theta}: {total:.8f}")
    verdict.done()


def test_criterion_04_sampler_laws(verdict):
    z = logistic_sample(5, 0.5, 10_000, seed=41)
    p = min(stats.kstest(z[:, j], FRECHET.cdf).pvalue for j in range(5))
    verdict(p > 0.01, f"logistic margins KS min p {p:.3f}")
    spec = BrownResnickSpec(((0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (0.5, 2.0)))
    z = brown_resnick_sample(spec, (1.0, 1.0), 10_000, seed=42)
    p = min(stats.kstest(z[:, j], FRECHET.cdf).pvalue for j in range(spec.d))
    verdict(p > 0.01, f"Brown-Resnick margins KS min p {p:.3f}")
    n = 100_000
    hit = np.all(logistic_sample(2, 0.5, n, seed=43) <= 1.0, axis=1).mean()
    target = logistic_cdf([1.0, 1.0], 0.5)
    se = math.sqrt(target * (1 - target) / n)
    verdict(abs(hit - FROZEN["logistic_cdf_11_half"]) <= 3 * se, f"P(Z <= (1,1)) {hit:.5f} vs 0.24312 (3 se = {3 * se:.5f})")
    s_draws = positive_stable(0.5, n, seed=44)
    for s in (0.5, 1.0, 2.0):
        v = np.exp(-s * s_draws)
        gap = abs(v.mean() - math.exp(-math.sqrt(s)))
        verdict(gap <= 3 * v.std(ddof=1) / math.sqrt(n), f"Laplace s={s}: gap {gap:.1e}")
    verdict.done()


def test_criterion_05_mcmc_vs_quadrature(verdict):
    data = make_training_set(LogisticModel(5), Prior.uniform([0.0], [1.0]), 10, 20, seed=5, split="test")
    reps = data.replicates()
    q, deltas, _ = quadrature_posterior_means(reps)
    mc, rates, _ = mcmc_posterior_means(reps, [(4, i) for i in range(20)])
    gap = np.abs(mc - q)
    verdict(np.all(gap <= 0.01), f"max |mcmc - quadrature| {gap.max():.4f} over 20 datasets")
    verdict(np.all(deltas < 1e-8), f"max node-doubling delta {deltas.max():.1e}")
    verdict.note(f"acceptance rates {rates.min():.2f}-{rates.max():.2f}, outside 0.1-0.7 only warns")
    verdict.done()


def test_criterion_06_neural_matches_bayes(verdict, figure4_run):
    out, _ = figure4_run
    s = read_csv(out / "figure4_summary.csv")
    ratio, gap = float(s["ratio"][0]), float(s["mean_sq_gap"][0])
    verdict(gap <= 0.01, f"mean squared gap to quadrature {gap:.5f}")
    verdict(ratio <= 1.25, f"neural/Bayes risk ratio {ratio:.3f} (layout {s['architecture'][0]}, "
                           f"{s['regularization'][0]}; Bayes risk {float(s['bayes_risk'][0]):.5f})")
    verdict(float(s["m"][0]) == 10 and len(read_csv(out / "figure4_m10.csv")["theta"]) == 500, "m = 10, 500 test sets")
    verdict.done()


@pytest.fixture(scope="module")
def decomposition_run(runs):
    cfg = default_config("decomposition")
    man = run_experiment(cfg, runs)
    FIXTURE_TIMINGS["decomposition run (07)"] = man["wall_clock_seconds"]
    return runs / cfg.id, man


def test_criterion_07_decomposition_shape(verdict, decomposition_run):
    out, _ = decomposition_run
    c = read_csv(out / "decomposition.csv")
    m, n = floats(c["m"]), floats(c["N"])
    bayes, bse = floats(c["bayes_risk"]), floats(c["bayes_se"])
    ms = sorted(set(m))
    first = [int(np.flatnonzero(m == k)[0]) for k in ms]
    steps = [(bayes[j] - bayes[i], 3 * math.hypot(bse[i], bse[j])) for i, j in zip(first, first[1:])]
    verdict(all(d <= slack for d, slack in steps),
            "Bayes risk by m: " + ", ".join(f"{bayes[i]:.4f}" for i in first))

    for label in ("erm", "regularized", "restricted"):
        sel = (np.array(c["label"]) == label) & (m == 10)
        g = dict(zip(n[sel], floats(c["generalization_error"])[sel]))
        verdict(g[1000] < g[100], f"{label} generalization error at m=10: N=100 {g[100]:.4f}, N=1000 {g[1000]:.4f}")

    sel = np.array(c["proxy"]) == "optimal_proxy"
    gap = floats(c["gen_proxy_train_minus_test"])[sel]
    se = np.hypot(floats(c["proxy_train_se"])[sel], floats(c["proxy_se"])[sel])
    verdict(np.all(np.abs(gap) <= 3 * se), f"optimal_proxy train/test gap max |gap|/se {np.max(np.abs(gap) / se):.2f}")

    sel = np.array(c["label"]) == "restricted"
    d = floats(c["gen_train_vs_proxy"])[sel]
    verdict(np.all(d <= 1e-6), f"restricted R_N(net) - R_N(proxy) max {d.max():.5f}")
    verdict.done()


def test_criterion_08_restricted_rows(verdict):
    data = make_training_set(LogisticModel(5), Prior.uniform([0.0], [1.0]), 2, 2000, seed=8)
    worst = 0.0
    for opt, lr in (("sgd", 0.05), ("adam", 1e-2)):
        cfg = TrainConfig(optimizer=opt, lr=lr, epochs=5, batch_size=32, restriction=5.0, seed=1)
        ck = fit_neural_estimator(data, (64, 64), cfg, clip_bound=1.0, input_transform="log")
        worst = max(worst, max_row_l1(ck.network))
    verdict(worst <= 5.0 + 1e-12, f"max row L1 norm {worst!r}")
    verdict.done()


def test_criterion_09_gradients(verdict):
    worst, used = 0.0, 0
    for seed in range(20):
        rng = np.random.default_rng(900 + seed)
        dims = (int(rng.integers(2, 6)), *rng.integers(2, 8, size=rng.integers(1, 3)), int(rng.integers(1, 3)))
        net = init_network(dims, seed=seed, clip_bound=None if seed % 2 else 3.0)
        net = net.replace(biases=[rng.standard_normal(b.shape) * 0.1 for b in net.biases])
        x, t = rng.standard_normal((8, dims[0])), rng.standard_normal((8, dims[-1]))
        gw, gb = backward(net, x, t)
        analytic = np.concatenate([g.ravel() for g in gw] + [g.ravel() for g in gb])
        v0 = flat(net)
        numeric = numeric_grad(lambda v: loss(unflat(net, v), x, t), v0)
        ok = ~kink_sensitive(net, x, v0)
        rel = np.abs(analytic - numeric) / np.maximum(np.abs(numeric), 1e-6)
        worst = max(worst, rel[ok].max())
        used += ok.sum()
        assert net.n_params <= 200
    verdict(worst <= 1e-5, f"max relative error {worst:.1e} over {used} coordinates of 20 nets")
    verdict.done()


def test_criterion_10_bounds(verdict):
    got = pseudo_robustness_bound(0, 1, 0, 1, 2 / math.e, 100)
    verdict(abs(got - FROZEN["pseudo_robustness"]) <= 1e-6,
            f"pseudo-robustness {got:.7f} (independent arithmetic {FROZEN['pseudo_robustness']:.7f})")
    z2 = zeta2(2 / math.e, 8, 1, 1)
    verdict(abs(z2 - 1) <= 1e-12, f"zeta2 {z2!r}")
    s = schedules(1e6, 2, 1, 2)
    verdict(abs(s["xi"] - 1 / 6) <= 1e-12 and abs(s["kappa"] - 1 / 36) <= 1e-12 and s["identity_gap"] <= 1e-12,
            f"xi {s['xi']:.12f}, kappa {s['kappa']:.12f}, identity gap {s['identity_gap']:.1e}")
    n = training_size_lower_bound(0.5, 2, 1, 1)
    verdict(abs(n - 4096) <= 1e-9, f"training size bound {n!r}")
    for tail in (Tail("frechet"), Tail("subgaussian", 1.0)):
        inp = BoundInputs(B=1.0, p=1, d=1, m=2, L=2, tail=tail)
        z = np.array([zeta(0.05, 10.0 ** k, inp)["zeta"] for k in range(3, 10)])
        far = zeta(0.05, 1e300, inp)["zeta"]
        verdict(np.all(np.diff(z) < 0) and far < z[-1] * 1e-5,
                f"{tail.kind} zeta 1e3..1e9: {z[0]:.3g} -> {z[-1]:.3g}, at 1e300: {far:.2g}")
    verdict.done()


def test_criterion_11_gaussian_fields(verdict):
    spec = GrfSpec(grid_locations(2, 0.1), family="matern", nu=1.5)
    sigma = grf_covariance(spec, [0.2])
    emp = np.cov(grf_sample(spec, [0.2], 20_000, seed=111), rowvar=False)
    err = np.abs(emp - sigma).max()
    verdict(err <= 0.05, f"max covariance error {err:.4f}")
    h = np.linspace(0, 10, 1001)
    diff = max(np.abs(matern(h, lam, 0.5) - np.exp(-h / lam)).max() for lam in (0.1, 1.0, 7.0))
    verdict(diff <= 1e-12, f"Matern 1/2 vs exponential {diff:.1e}")
    delta = 0.1
    alt = sigma.copy()
    alt[0, 1] = alt[1, 0] = sigma[0, 1] + 2 * delta
    null_rej = alt_rej = 0
    for t in range(100):
        z = grf_sample(spec, [0.2], 10_000, seed=1_100_000 + t)
        null_rej += covariance_separation_test(z, sigma, delta)[0] == "reject"
        alt_rej += covariance_separation_test(z, alt, delta)[0] == "reject"
    verdict(null_rej <= 5, f"false rejections {null_rej}/100")
    verdict(alt_rej >= 95, f"detections at 2 delta {alt_rej}/100")
    verdict.done()


def test_criterion_12_reproducibility(verdict, runs, figure4_run, tmp_path):
    def replay(path, label):
        try:
            new = reproduce(path, scratch=tmp_path)
        except ReproductionError as exc:
            verdict(False, f"{label}: {exc}")
        else:
            verdict(True, f"{label}: {sum(k.endswith('.csv') for k in new['outputs'])} CSVs byte-identical")

    out, _ = figure4_run
    replay(out / "manifest.json", "figure4 m=10")
    for kind in ("linear", "bounds"):
        run_experiment(default_config(kind), runs)
        replay(runs / kind / "manifest.json", kind)
    small = ExperimentConfig.from_dict({
        "id": "decomposition-small", "kind": "decomposition", "m_grid": [1, 2], "N_grid": [100, 300],
        "proxy_N": 1000, "n_val": 200, "architectures": [[16]], "regularizations": ["none", "dropout"],
        "train": {"epochs": 3, "min_steps": 0}, "extra": {"sweep_m": 2, "sweep_N": [100, 300]}})
    run_experiment(small, runs)
    replay(runs / small.id / "manifest.json", "decomposition (reduced)")
    verdict.done()


def test_timing_report(capsys):
    total = sum(TIMINGS.values()) + sum(FIXTURE_TIMINGS.values())
    with capsys.disabled():
        state = "within" if total <= 1800 else "OVER"
        print(f"\nTIMING acceptance criteria total (including shared runs) {total:.0f} s ({state} the 1800 s budget); "
              + ", ".join(f"{k.split('_')[2]}: {v:.0f}s" for k, v in sorted(TIMINGS.items()))
              + "; " + ", ".join(f"{k}: {v:.0f}s" for k, v in FIXTURE_TIMINGS.items()))
