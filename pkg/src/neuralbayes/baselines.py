"""Reference Bayes estimators and the covariance-separation test."""

import json
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError, OracleFailureError, SamplerFailureError
from .models.maxstable import logistic_logdensity
from .models.partitions import MAX_DIM
from .rng import stream

ACCEPTANCE_WINDOW = (0.1, 0.7)


@dataclass
class PosteriorSummary:
    posterior_mean: np.ndarray
    method: str
    diagnostics: dict = field(default_factory=dict)

    def to_json(self):
        rec = asdict(self)
        rec["posterior_mean"] = [float(v) for v in np.atleast_1d(self.posterior_mean)]
        return json.dumps(rec, sort_keys=True, default=float)


def write_jsonl(path, summaries):
    with open(path, "w") as fh:
        for s in summaries:
            fh.write(s.to_json() + "\n")


# --------------------------------------------------------------------------
# normal mean with normal prior


def _check_linear(gamma, sigma):
    if not (gamma > 0 and sigma > 0):
        raise ConfigurationError("gamma and sigma must be positive")


def linear_bayes_coefficients(mu, gamma, sigma, m):
    """``(A, b)``: common slope and intercept of the posterior mean."""
    _check_linear(gamma, sigma)
    denom = m * gamma ** 2 + sigma ** 2
    return gamma ** 2 / denom, mu * sigma ** 2 / denom


def linear_bayes(z, mu, gamma, sigma):
    z = np.atleast_1d(np.asarray(z, dtype=float))
    a, b = linear_bayes_coefficients(mu, gamma, sigma, z.size)
    return PosteriorSummary(np.array([b + a * z.sum()]), "closed-form", {"A": a, "b": b})


def linear_bayes_estimator(mu, gamma, sigma, k=None):
    """Vectorized k-sparse linear estimator on batches ``(n, m)``.

    Uses the first ``k`` coordinates with the population-optimal
    coefficients for ``k`` replicates; ``k=None`` means all of them, which
    is the Bayes estimator.
    """
    def estimate(x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        kk = x.shape[1] if k is None else k
        a, b = linear_bayes_coefficients(mu, gamma, sigma, kk)
        return (b + a * x[:, :kk].sum(axis=1))[:, None]

    return estimate


def _linear_risk(gamma, sigma, k):
    return (gamma ** 2 * sigma ** 4 + k * sigma ** 2 * gamma ** 4) / (k * gamma ** 2 + sigma ** 2) ** 2


def linear_bayes_risks(mu, gamma, sigma, m, k=None):
    """Closed-form Bayes risk, pointwise risk and k-sparse approximation error.

    Returns a dict with ``bayes_risk``, ``pointwise_risk`` (a function of
    theta) and ``approx_error`` (risk of the best k-coefficient linear
    estimator minus the Bayes risk).
    """
    _check_linear(gamma, sigma)
    k = m if k is None else k
    if not 1 <= k <= m:
        raise DomainError(f"k must satisfy 1 <= k <= m, got k={k}, m={m}")
    denom = (m * gamma ** 2 + sigma ** 2) ** 2

    def pointwise_risk(theta):
        theta = np.asarray(theta, dtype=float)
        return (mu - theta) ** 2 * sigma ** 4 / denom + m * sigma ** 2 * gamma ** 4 / denom

    return {
        "bayes_risk": _linear_risk(gamma, sigma, m),
        "pointwise_risk": pointwise_risk,
        "approx_error": _linear_risk(gamma, sigma, k) - _linear_risk(gamma, sigma, m),
        "sparse_risk": _linear_risk(gamma, sigma, k),
    }


# --------------------------------------------------------------------------
# logistic model, uniform prior on (0, 1)


def _as_datasets(data):
    data = np.asarray(data, dtype=float)
    if data.ndim == 2:
        data = data[None]
    if data.ndim != 3:
        raise ConfigurationError("expected datasets of shape (m, d) or (n, m, d)")
    if data.shape[2] > MAX_DIM:
        raise DomainError(f"logistic posterior needs d <= {MAX_DIM}")
    # canonical row order: the likelihood is a product over replicates
    out = np.empty_like(data)
    for k, ds in enumerate(data):
        out[k] = ds[np.lexsort(ds.T[::-1])] if ds.shape[0] else ds
    return out


def _loglik(data, theta):
    """Log-likelihood of each dataset at each parameter value.

    ``data`` is ``(n, m, d)`` and ``theta`` is ``(n, K)`` or ``(1, K)``;
    returns ``(n, K)``.  Replicates are summed in a fixed order.
    """
    dens = logistic_logdensity(data[:, None, :, :], theta[..., None])
    ll = np.zeros(dens.shape[:2])
    for i in range(data.shape[1]):
        ll = ll + dens[..., i]
    return ll


def _gl_rule(nodes):
    x, w = np.polynomial.legendre.leggauss(nodes)
    return 0.5 * (x + 1.0), 0.5 * w


# dense near both ends of (0, 1), where the posterior can be very narrow
_SCAN = np.unique(np.concatenate([
    np.geomspace(1e-10, 1.0, 300, endpoint=False),
    np.linspace(0.0, 1.0, 401)[1:-1],
    1.0 - np.geomspace(1e-10, 0.1, 60),
]))
LOG_DROP = 40.0


def _brackets(data, chunk=64):
    """Interval holding all scan points within LOG_DROP of the best log-likelihood."""
    lo = np.empty(data.shape[0])
    hi = np.empty(data.shape[0])
    grid = np.concatenate([[0.0], _SCAN, [1.0]])
    for a in range(0, data.shape[0], chunk):
        ll = _loglik(data[a:a + chunk], _SCAN[None, :])
        keep = ll >= ll.max(axis=1, keepdims=True) - LOG_DROP
        first = keep.argmax(axis=1)
        last = keep.shape[1] - 1 - keep[:, ::-1].argmax(axis=1)
        # grid is offset by one relative to _SCAN: neighbours of the kept range
        lo[a:a + chunk] = grid[first]
        hi[a:a + chunk] = grid[last + 2]
    return lo, hi


def _quadrature_means(data, lo, hi, nodes, chunk=64):
    t, w = _gl_rule(nodes)
    out = np.empty(data.shape[0])
    for a in range(0, data.shape[0], chunk):
        l, h = lo[a:a + chunk, None], hi[a:a + chunk, None]
        theta = l + (h - l) * t[None, :]
        ll = _loglik(data[a:a + chunk], theta)
        ll = ll - ll.max(axis=1, keepdims=True)
        weights = w[None, :] * np.exp(ll)
        out[a:a + chunk] = np.sum(weights * theta, axis=1) / weights.sum(axis=1)
    return out


def quadrature_posterior_means(datasets, nodes=256, tol=1e-8, max_nodes=8192):
    """Posterior means under the uniform prior for a batch of datasets ``(n, m, d)``.

    A log-likelihood scan brackets the region within ``exp(-40)`` of the
    peak; a Gauss-Legendre rule on that bracket with log-sum-exp weights
    gives the mean.  The rule is doubled (for the datasets that still move)
    until successive results agree to ``tol``; at least one confirmation
    pass always runs.  Returns ``(means, deltas, nodes_used)`` where
    ``nodes_used`` is per dataset.
    """
    if nodes < 64:
        raise ConfigurationError("quadrature needs at least 64 nodes")
    data = _as_datasets(datasets)
    n_sets = data.shape[0]
    if data.shape[1] == 0:
        return np.full(n_sets, 0.5), np.zeros(n_sets), np.full(n_sets, nodes)
    lo, hi = _brackets(data)
    means = _quadrature_means(data, lo, hi, nodes)
    deltas = np.full(n_sets, np.inf)
    used = np.full(n_sets, nodes)
    todo = np.arange(n_sets)
    n = nodes
    while todo.size:
        if 2 * n > max_nodes:
            raise OracleFailureError(
                f"quadrature did not converge: node-doubling delta {deltas[todo].max():.3g} at {n} nodes")
        fine = _quadrature_means(data[todo], lo[todo], hi[todo], 2 * n)
        deltas[todo] = np.abs(fine - means[todo])
        done = deltas[todo] < tol
        still = todo[~done]
        means[still] = fine[~done]
        used[still] = 2 * n
        todo = still
        n *= 2
    return means, deltas, used


def logistic_posterior_quadrature(data, nodes=256, tol=1e-8):
    means, delta, used = quadrature_posterior_means(np.asarray(data, dtype=float)[None], nodes, tol)
    return PosteriorSummary(means, "quadrature",
                            {"nodes": int(used[0]), "confirm_nodes": 2 * int(used[0]),
                             "doubling_delta": float(delta[0])})


def quadrature_estimator(m, d, nodes=256):
    """Batch estimator ``(n, m*d) -> (n, 1)`` for risk evaluation."""
    def estimate(x):
        x = np.asarray(x, dtype=float)
        return quadrature_posterior_means(x.reshape(x.shape[0], m, d), nodes)[0][:, None]

    return estimate


def _log_target(data, eta):
    theta = 1.0 / (1.0 + np.exp(-eta))
    # uniform prior on theta, Jacobian theta * (1 - theta) on the logit scale
    return _loglik(data, theta[:, None])[:, 0] + np.log(theta) + np.log1p(-theta)


def mcmc_posterior_means(datasets, seeds, chain_len=20000, burn_in=5000, proposal_scale=0.5):
    """Random-walk Metropolis on logit(theta) for several datasets in lockstep.

    Chain ``k`` draws all its randomness from ``stream(seeds[k], "mcmc")``
    (or ``stream(seed, "mcmc", index)`` when ``seeds[k]`` is a pair), so its
    path does not depend on which other chains run alongside it.
    Returns ``(means, acceptance_rates, chains)``.
    """
    if not 0 <= burn_in < chain_len:
        raise ConfigurationError("need 0 <= burn_in < chain_len")
    data = _as_datasets(datasets)
    k = data.shape[0]
    if len(seeds) != k:
        raise ConfigurationError("one seed per dataset required")
    steps = np.empty((k, chain_len))
    logu = np.empty((k, chain_len))
    for c, s in enumerate(seeds):
        rng = stream(s[0], "mcmc", s[1]) if isinstance(s, tuple) else stream(s, "mcmc")
        steps[c] = proposal_scale * rng.standard_normal(chain_len)
        logu[c] = np.log(rng.random(chain_len))
    eta = np.zeros(k)
    cur = _log_target(data, eta)
    chains = np.empty((k, chain_len))
    accepted = np.zeros(k, dtype=int)
    for t in range(chain_len):
        prop = eta + steps[:, t]
        new = _log_target(data, prop)
        acc = logu[:, t] < new - cur
        eta = np.where(acc, prop, eta)
        cur = np.where(acc, new, cur)
        accepted += acc
        chains[:, t] = 1.0 / (1.0 + np.exp(-eta))
    rates = accepted / chain_len
    if np.any(accepted == 0):
        raise SamplerFailureError(f"no proposal accepted for chain(s) {np.flatnonzero(accepted == 0)}")
    return chains[:, burn_in:].mean(axis=1), rates, chains


def _batch_means_se(x, n_batches=50):
    b = np.array_split(x, n_batches)
    means = np.array([v.mean() for v in b])
    return float(means.std(ddof=1) / np.sqrt(n_batches))


def logistic_posterior_mcmc(data, chain_len=20000, burn_in=5000, proposal_scale=0.5, seed=0):
    means, rates, chains = mcmc_posterior_means(np.asarray(data, dtype=float)[None], [seed],
                                                chain_len, burn_in, proposal_scale)
    rate = float(rates[0])
    diag = {"chain_len": chain_len, "burn_in": burn_in, "proposal_scale": proposal_scale,
            "acceptance_rate": rate, "mc_stderr": _batch_means_se(chains[0, burn_in:]),
            "warning": None}
    lo, hi = ACCEPTANCE_WINDOW
    if not lo <= rate <= hi:
        diag["warning"] = f"acceptance rate {rate:.3f} outside [{lo}, {hi}]"
        warnings.warn(diag["warning"], RuntimeWarning, stacklevel=2)
    return PosteriorSummary(means, "mcmc", diag)


# --------------------------------------------------------------------------


def covariance_separation_test(samples, sigma0, delta):
    """Threshold test on the entrywise max deviation of the empirical covariance.

    Rejects iff ``max |Sigma_hat - sigma0| > delta``.  Returns
    ``(decision, statistic)`` with decision ``"accept"`` or ``"reject"``.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[0] < 2:
        raise ConfigurationError("need an (m, d) sample with m >= 2")
    sigma_hat = np.atleast_2d(np.cov(samples, rowvar=False))
    stat = float(np.max(np.abs(sigma_hat - np.asarray(sigma0, dtype=float))))
    return ("reject" if stat > delta else "accept"), stat
