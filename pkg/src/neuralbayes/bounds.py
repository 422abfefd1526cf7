"""Closed-form generalization bounds and rate schedules for restricted networks.

All functions are pure.  Quantities that overflow double precision (the
covering number, ``alpha ** L``) are carried in log space.
"""

import csv
import math
from dataclasses import dataclass

from scipy.special import log_ndtr

from .errors import ConfigurationError, DomainError

LOG2 = math.log(2.0)
LOG_HUGE = math.log(1e300)


class DegenerateRateError(DomainError):
    """Raised when the rate exponents are not positive (``m*d + p <= 2``)."""


@dataclass(frozen=True)
class Tail:
    """Bound on ``P(max_j |Z_j| > M)`` over ``dim`` coordinates.

    ``subgaussian`` uses ``2 * dim * (1 - Phi(M / sqrt(S)))`` and ``frechet``
    uses ``dim * (1 - exp(-1 / M))`` for unit Frechet margins.
    """

    kind: str
    S: float = 1.0

    def __post_init__(self):
        if self.kind not in ("subgaussian", "frechet"):
            raise ConfigurationError(f"unknown tail model {self.kind!r}")
        if not self.S > 0:
            raise ConfigurationError("tail scale S must be positive")

    def probability(self, M, dim):
        if self.kind == "subgaussian":
            p = 2.0 * dim * math.exp(log_ndtr(-M / math.sqrt(self.S)))
        else:
            p = dim * -math.expm1(-1.0 / M)
        return min(p, 1.0)


@dataclass(frozen=True)
class BoundInputs:
    """Inputs shared by the bound calculators.

    ``alpha``, ``M`` and ``gamma`` default to the N-dependent schedules when
    left as ``None``.  The loss bound ``E = 4 p B**2`` is derived.
    """

    B: float
    p: int
    d: int
    m: int
    L: int
    tail: Tail = None
    delta: float = 0.05
    N: float = 1000
    alpha: float = None
    M: float = None
    gamma: float = None

    def __post_init__(self):
        if not (self.B > 0 and self.p >= 1 and self.d >= 1 and self.m >= 1):
            raise ConfigurationError("B, p, d and m must be positive")
        if self.L < 1:
            raise ConfigurationError("networks need at least one layer")
        if not 0 < self.delta < 1:
            raise ConfigurationError("delta must lie in (0, 1)")
        if not self.N >= 1:
            raise ConfigurationError("N must be at least 1")

    @property
    def D(self):
        return self.m * self.d

    @property
    def E(self):
        return 4.0 * self.p * self.B ** 2


def log_covering_number(B, p, M, D, gamma):
    """Natural log of :func:`covering_number_bound`."""
    if not gamma > 0:
        raise DomainError("covering radius must be positive")
    return p * math.log(math.ceil(2.0 * B / gamma)) + D * math.log(math.ceil(2.0 * M / gamma))


def covering_number_bound(B, p, M, D, gamma):
    """Count of axis-aligned cells of side ``gamma`` covering ``[-B,B]^p x [-M,M]^D``.

    Returns an exact integer.  Use :func:`log_covering_number` for huge values.
    """
    if not gamma > 0:
        raise DomainError("covering radius must be positive")
    return math.ceil(2.0 * B / gamma) ** p * math.ceil(2.0 * M / gamma) ** D


def _sqrt_count_term(log_k, delta, N):
    # sqrt((2 K log 2 + 2 log(2/delta)) / N) without forming K
    c = 2.0 * math.log(2.0 / delta)
    if log_k < LOG_HUGE:
        return math.sqrt((2.0 * math.exp(log_k) * LOG2 + c) / N)
    log_term = 0.5 * (log_k + math.log(2.0 * LOG2 + c * math.exp(-log_k)) - math.log(N))
    return math.exp(log_term) if log_term < LOG_HUGE else math.inf


def pseudo_robustness_bound(eps, E, p_out, K, delta, N, log_k=None):
    """High-probability bound on ``|R(phi) - R_N(phi)|`` for a pseudo-robust learner.

    ``eps + E * (p_out + sqrt(log(2/delta) / (2N)) + sqrt((2K log 2 + 2 log(2/delta)) / N))``

    Pass ``log_k`` instead of ``K`` when the partition count overflows.
    """
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    if N < 1:
        raise DomainError("N must be at least 1")
    if log_k is None:
        log_k = math.log(K)
    return eps + E * (p_out + math.sqrt(math.log(2.0 / delta) / (2.0 * N)) + _sqrt_count_term(log_k, delta, N))


def robustness_constant(B, p, alpha, L):
    """Lipschitz-type constant ``4 B p (alpha**L + 1)``."""
    if L < 1:
        raise DomainError("layer count must be at least 1")
    if alpha < 1:
        raise DomainError("alpha must be at least 1")
    return 4.0 * B * p * (alpha ** L + 1.0)


def rate_exponents(D, p):
    """Midpoint exponents ``(xi, kappa)`` for input dimension ``D`` and ``p``."""
    q = D + p
    if q <= 2:
        raise DegenerateRateError(f"rates degenerate for m*d + p = {q} <= 2")
    xi = 1.0 / (2.0 * q)
    kappa = (1.0 - 2.0 / q) / (4.0 * q)
    return xi, kappa


def schedules(N, D, p, L):
    """N-dependent input radius, covering radius and weight bound.

    Returns a dict with ``xi``, ``kappa``, ``M``, ``gamma``, ``alpha`` and
    ``identity_gap``, the residual of the exponent identity
    ``(1 - 2 xi)/(D + p) - xi - kappa = kappa``.
    """
    xi, kappa = rate_exponents(D, p)
    m_exp = (1.0 - 2.0 * xi) / (D + p) - xi - kappa
    gap = abs(m_exp - kappa)
    if gap > 1e-12:
        raise AssertionError(f"exponent identity violated by {gap:g}")
    return {
        "xi": xi,
        "kappa": kappa,
        "M": N ** m_exp,
        "gamma": N ** (-xi - kappa),
        "alpha": N ** (kappa / L),
        "identity_gap": gap,
    }


def zeta2(delta, N, p, B):
    """Hoeffding deviation ``p B**2 sqrt(8 log(2/delta) / N)``."""
    return p * B ** 2 * math.sqrt(8.0 * math.log(2.0 / delta) / N)


def zeta(delta, N, inputs, p_out=None, K=None):
    """Excess-risk bound terms at confidence ``delta`` and training size ``N``.

    Parameters
    ----------
    delta, N : float
        Failure probability and training size.
    inputs : BoundInputs
        ``alpha``, ``M`` and ``gamma`` fall back to :func:`schedules`.
    p_out, K : float, optional
        Override the tail probability and the covering number.

    Returns
    -------
    dict
        ``zeta1``, ``zeta2`` and ``zeta`` evaluated at ``delta / 2``, the four
        ``zeta1`` terms ``A``-``D``, and the schedule values used.
    """
    if p_out is None and inputs.tail is None:
        raise ConfigurationError("a tail model is required")
    sch = None
    if inputs.alpha is None or inputs.M is None or inputs.gamma is None:
        sch = schedules(N, inputs.D, inputs.p, inputs.L)
    alpha = inputs.alpha if inputs.alpha is not None else sch["alpha"]
    M = inputs.M if inputs.M is not None else sch["M"]
    gamma = inputs.gamma if inputs.gamma is not None else sch["gamma"]
    B, p, E = inputs.B, inputs.p, inputs.E
    if p_out is None:
        p_out = inputs.tail.probability(M, inputs.D)
    log_k = math.log(K) if K is not None else log_covering_number(B, p, M, inputs.D, gamma)
    h = delta / 2.0

    # alpha ** L can overflow for large L
    log_a = inputs.L * math.log(alpha)
    term_a = 4.0 * p * B * gamma * (math.exp(log_a) + 1.0) if log_a < LOG_HUGE else math.inf
    term_b = E * p_out
    term_c = E * math.sqrt(math.log(2.0 / h) / (2.0 * N))
    term_d = E * _sqrt_count_term(log_k, h, N)
    z1 = term_a + term_b + term_c + term_d
    z2 = zeta2(h, N, p, B)
    return {
        "N": N, "delta": delta, "alpha": alpha, "M": M, "gamma": gamma,
        "log_K": log_k, "p_out": p_out,
        "A": term_a, "B": term_b, "C": term_c, "D": term_d,
        "zeta1": z1, "zeta2": z2, "zeta": z1 + z2,
    }


def log_training_size_lower_bound(eps, m, d, p):
    q = m * d + p
    return -q * math.log(eps) + LOG2 * q * q


def training_size_lower_bound(eps, m, d, p):
    """Training size ``eps**-(md+p) * exp(log 2 * (md+p)**2)``.

    Returned as a float, ``inf`` when it overflows.
    """
    if not 0 < eps < 1:
        raise DomainError("eps must lie in (0, 1)")
    lb = log_training_size_lower_bound(eps, m, d, p)
    if lb >= 709.0:
        return math.inf
    q = m * d + p
    return eps ** -q * 2.0 ** (q * q)


SWEEP_COLUMNS = ["tail", "B", "p", "d", "m", "L", "N", "delta", "xi", "kappa", "identity_gap",
                 "alpha", "M", "gamma", "log_K", "p_out", "A", "B_term", "C", "D",
                 "zeta1", "zeta2", "zeta", "log_N_lower"]


def sweep(grid_N, inputs_list, eps=0.5):
    """Rows of every intermediate term over ``N`` for each set of inputs."""
    rows = []
    for inp in inputs_list:
        for N in grid_N:
            sch = schedules(N, inp.D, inp.p, inp.L)
            z = zeta(inp.delta, N, inp)
            rows.append({
                "tail": inp.tail.kind if inp.tail else "none",
                "B": inp.B, "p": inp.p, "d": inp.d, "m": inp.m, "L": inp.L, "N": N,
                "delta": inp.delta, "xi": sch["xi"], "kappa": sch["kappa"],
                "identity_gap": sch["identity_gap"], "alpha": z["alpha"], "M": z["M"],
                "gamma": z["gamma"], "log_K": z["log_K"], "p_out": z["p_out"],
                "A": z["A"], "B_term": z["B"], "C": z["C"], "D": z["D"],
                "zeta1": z["zeta1"], "zeta2": z["zeta2"], "zeta": z["zeta"],
                "log_N_lower": log_training_size_lower_bound(eps, inp.m, inp.d, inp.p),
            })
    return rows


def write_sweep_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS)
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(float(v)) if isinstance(v, float) else v) for k, v in r.items()})
