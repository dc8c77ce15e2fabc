"""Analytical symbol-error probabilities of OOFSK with energy combining.

Given the MAP threshold ``tau`` and the transmitted-tone energy density
``f`` (noncentral chi-square, ``2L`` degrees of freedom, total squared mean
``xi``, per-entry variance ``sy2``):

    Pc1 = int_tau^inf [1 - S(x)]^{M-1} f(x) dx,   S(x) = e^{-x} sum_{l<L} x^l / l!
    Pc0 = (1 - S(tau))^M
    Pe  = 1 - (v Pc1 + (1 - v) Pc0)

``Pc1`` is available two ways: direct adaptive quadrature, and a binomial /
multinomial expansion whose terms have closed forms except for a
finite-interval remainder on ``[0, tau]``. Terms whose tail is tiny next to
the closed form are summed from a positive Poisson-gamma series instead. The
magnitude-known receiver reuses the same code with ``sy2 = 1`` and
``xi = A^2 chi``, and its average over the fading is a one-dimensional integral over ``chi``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import quadrature
from .detector import solve_thresholds
from .errors import ConfigError, NumericError
from .model import Knowledge, SystemConfig
from .specfun import (
    chi2_cdf_2L,
    chi2_sf_2L,
    log_kummer_poly_negz,
    log_ncx2_pdf,
    multinomial_coeffs,
)

__all__ = [
    "Method",
    "ErrorReport",
    "pc1_unknown_integral",
    "pc1_unknown_hypergeom",
    "pc0",
    "pe_unknown",
    "pe_known_conditional",
    "pe_known_average",
    "error_probability",
    "asymptotic_pe",
    "entropy_bits",
    "ebn0_db",
    "snr_from_ebn0_db",
]

EPSABS = 1e-17
EPSREL = 1e-12
# the fading average only needs its inner integrals a little more accurate
# than the outer one
OUTER_EPSREL = 1e-7
INNER_EPSREL = 1e-9
# the multinomial expansion cancels badly beyond this many tones
MAX_EXPANSION_M = 32


class Method(str, enum.Enum):
    INTEGRAL = "integral"
    HYPERGEOM = "hypergeom"
    CONDITIONAL = "conditional"
    AVERAGED = "averaged"
    MONTE_CARLO = "montecarlo"


@dataclass(frozen=True)
class ErrorReport:
    """Error probability with its two conditional correct-detection parts.

    For analytical methods ``pe == 1 - (v pc1 + (1 - v) pc0)``. Monte Carlo
    reports carry the empirical frequencies instead, with ``stderr`` and the
    raw counts.
    """

    pe: float
    pc1: float
    pc0: float
    method: Method
    stderr: float = 0.0
    n_trials: int = 0
    n_errors: int = 0

    def __post_init__(self):
        for name in ("pe", "pc1", "pc0"):
            value = getattr(self, name)
            # a simulation may never send one class of symbol
            if name != "pe" and self.method is Method.MONTE_CARLO and math.isnan(value):
                continue
            if not (0.0 <= value <= 1.0):
                raise NumericError(f"{name}={value!r} outside [0, 1]")
        if self.stderr < 0:
            raise ValueError("stderr must be nonnegative")


# -- integration helpers ---------------------------------------------------


def _signal_moments(L: int, xi: float, sy2: float) -> tuple[float, float]:
    mean = xi + L * sy2
    sd = math.sqrt(L * sy2 * sy2 + 2.0 * xi * sy2)
    return mean, sd


def _edges(lo: float, hi: float, mean: float, sd: float) -> list[float]:
    pts = [mean + k * sd for k in (-8, -4, -2, -1, 0, 1, 2, 4, 8)]
    return [lo] + sorted({p for p in pts if lo < p < hi}) + [hi]


# -- correct-detection probabilities ---------------------------------------


def _pc1_integral(M: int, L: int, xi: float, sy2: float, tau: float,
                  epsrel: float = EPSREL) -> tuple[float, float]:
    """``(Pc1, 1 - Pc1)`` by direct quadrature.

    The miss probability is integrated separately as
    ``int_0^tau f + int_tau^inf (1 - (1 - S)^{M-1}) f`` so that tiny error
    rates keep their relative accuracy.
    """
    if math.isinf(tau):
        return 0.0, 1.0
    mean, sd = _signal_moments(L, xi, sy2)

    def log_parts(x):
        s = chi2_sf_2L(x, L)
        log_f = log_ncx2_pdf(x, L, xi, sy2)
        with np.errstate(divide="ignore"):
            log_keep = (M - 1) * np.log1p(-s)
            log_hit = log_keep + log_f
            log_miss = np.log(-np.expm1(log_keep)) + log_f
        return log_hit, log_miss

    # hit + miss integrands sum to the density, so its tail bounds both
    top = quadrature.log_tail_limit(lambda x: log_ncx2_pdf(x, L, xi, sy2), max(tau, mean), sd)
    hit = miss = 0.0
    if top is not None:
        vals, _ = quadrature.integrate(
            lambda x: np.exp(np.vstack(log_parts(x))), _edges(tau, top, mean, sd),
            epsabs=EPSABS, epsrel=epsrel,
        )
        hit, miss = float(vals[0]), float(vals[1])
    if tau > 0:
        below, _ = quadrature.integrate(
            lambda x: np.exp(log_ncx2_pdf(x, L, xi, sy2)), _edges(0.0, tau, mean, sd),
            epsabs=EPSABS, epsrel=epsrel,
        )
        miss += below
    hit = min(max(hit, 0.0), 1.0)
    miss = min(max(miss, 0.0), 1.0)
    # report whichever side is small enough to carry full relative precision
    if hit <= 0.5:
        return hit, 1.0 - hit
    return 1.0 - miss, miss


def _closed_log_moment(n: int, i: int, L: int, xi: float, sy2: float) -> float:
    # ln int_0^inf x^i e^{-n x} f(x) dx
    #   = -xi n / (1 + n sy2) + ln[(i+L-1)! / (L-1)!] + i ln sy2
    #     - (i+L) ln(1 + n sy2) + ln F(-i, L; -xi / (sy2 (1 + n sy2)))
    a = 1.0 + n * sy2
    z = xi / (sy2 * a)
    return (
        -xi * n / a
        + math.lgamma(i + L) - math.lgamma(L)
        + i * math.log(sy2)
        - (i + L) * math.log(a)
        + log_kummer_poly_negz(i, L, z)
    )


def _tail_log_moment(n: int, i: int, L: int, xi: float, sy2: float, tau: float) -> float:
    # ln int_tau^inf x^i e^{-n x} f(x) dx from the Poisson mixture of gammas
    # f = sum_k Pois(k; xi/sy2) Gamma(L + k, sy2): every term is positive, so
    # this keeps full relative accuracy when the tail is tiny
    lam = xi / sy2
    spread = 40.0 * math.sqrt(lam) + 40.0
    k = np.arange(max(0, int(lam - spread)), int(lam + spread) + 1, dtype=float)
    b = sy2 / (1.0 + n * sy2)
    m = L + k + i
    with np.errstate(divide="ignore"):
        log_pois = -lam + special.xlogy(k, lam) - special.gammaln(k + 1.0)
        logs = (log_pois + m * math.log(b) + special.gammaln(m) - (L + k) * math.log(sy2)
                - special.gammaln(L + k) + np.log(special.gammaincc(m, tau / b)))
    top = np.max(logs)
    if not np.isfinite(top):
        return -math.inf
    return float(top + math.log(np.sum(np.exp(logs - top))))


def _pc1_expansion(M: int, L: int, xi: float, sy2: float, tau: float) -> float:
    if math.isinf(tau):
        return 0.0
    coeffs = [multinomial_coeffs(n, L) for n in range(M)]
    pairs = [(n, i) for n in range(M) for i in range(len(coeffs[n]))]
    weights = np.array([
        (-1) ** n * math.comb(M - 1, n) * coeffs[n][i] for n, i in pairs
    ])
    closed = np.array([math.exp(_closed_log_moment(n, i, L, xi, sy2)) for n, i in pairs])
    if tau <= 0:
        return math.fsum(weights * closed)

    ns = np.array([p[0] for p in pairs], dtype=float)
    iis = np.array([p[1] for p in pairs], dtype=float)

    def remainder(x):
        log_f = log_ncx2_pdf(x, L, xi, sy2)
        with np.errstate(divide="ignore"):
            logs = iis[:, None] * np.log(x)[None, :] - ns[:, None] * x[None, :] + log_f[None, :]
        return np.exp(logs)

    mean, sd = _signal_moments(L, xi, sy2)
    below, _ = quadrature.integrate(remainder, _edges(0.0, tau, mean, sd),
                                    epsabs=1e-17, epsrel=1e-14)
    tails = closed - below
    # closed - remainder cancels once the tail holds little of the moment
    for j in np.nonzero(below > 0.5 * closed)[0]:
        n, i = pairs[j]
        tails[j] = math.exp(_tail_log_moment(n, i, L, xi, sy2, tau))
    return math.fsum(weights * tails)


def _pc0(M: int, L: int, tau: float) -> tuple[float, float]:
    """``(Pc0, 1 - Pc0)`` from the central chi-square CDF at ``tau``."""
    if math.isinf(tau):
        return 1.0, 0.0
    if tau <= 0:
        return 0.0, 1.0
    sf = chi2_sf_2L(tau, L)
    log_cdf = math.log1p(-sf) if sf < 0.5 else math.log(chi2_cdf_2L(tau, L))
    return math.exp(M * log_cdf), -math.expm1(M * log_cdf)


def pc0(config_or_tau, M: int | None = None, L: int | None = None) -> float:
    """Correct-detection probability of the silent symbol.

    Accepts either a :class:`SystemConfig` (distribution-only threshold) or
    a threshold ``tau`` together with ``M`` and ``L``.
    """
    if isinstance(config_or_tau, SystemConfig):
        cfg = config_or_tau
        tau = _unknown_tau(cfg)
        return _pc0(cfg.M, cfg.L, tau)[0]
    if M is None or L is None:
        raise TypeError("pc0(tau, M, L) needs M and L")
    if config_or_tau < 0:
        raise ValueError("tau must be nonnegative")
    return _pc0(M, L, float(config_or_tau))[0]


def _unknown_tau(config: SystemConfig) -> float:
    return float(solve_thresholds(config.M, config.L, config.v, [config.xi], config.sigma_y2)[0])


def _known_tau(config: SystemConfig, xi: float) -> float:
    return float(solve_thresholds(config.M, config.L, config.v, [xi], 1.0)[0])


def pc1_unknown_integral(config: SystemConfig) -> float:
    """``Pc1`` for the distribution-only receiver by direct quadrature."""
    tau = _unknown_tau(config)
    return _pc1_integral(config.M, config.L, config.xi, config.sigma_y2, tau)[0]


def pc1_unknown_hypergeom(config: SystemConfig) -> float:
    """``Pc1`` from the binomial/multinomial expansion with closed-form moments.

    Each term ``int_tau^inf x^i e^{-n x} f(x) dx`` is the full-range moment
    (a terminating confluent hypergeometric polynomial) minus a remainder
    over ``[0, tau]``. For ``M > 32`` the alternating sum loses too many
    digits and the direct integral is used instead.
    """
    tau = _unknown_tau(config)
    if config.M > MAX_EXPANSION_M:
        return _pc1_integral(config.M, config.L, config.xi, config.sigma_y2, tau)[0]
    value = _pc1_expansion(config.M, config.L, config.xi, config.sigma_y2, tau)
    return min(max(value, 0.0), 1.0)


def _report(v: float, c1: tuple[float, float], c0: tuple[float, float], method: Method) -> ErrorReport:
    pc1, miss1 = c1
    pc0_, miss0 = c0
    pe = v * miss1 + (1.0 - v) * miss0
    return ErrorReport(pe=min(max(pe, 0.0), 1.0), pc1=pc1, pc0=pc0_, method=method)


def pe_unknown(config: SystemConfig, method: Method | str = Method.INTEGRAL) -> ErrorReport:
    """Error probability of the distribution-only receiver (independent fading)."""
    method = Method(method)
    tau = _unknown_tau(config)
    if method is Method.INTEGRAL:
        c1 = _pc1_integral(config.M, config.L, config.xi, config.sigma_y2, tau)
    elif method is Method.HYPERGEOM:
        p = pc1_unknown_hypergeom(config)
        c1 = (p, 1.0 - p)
    else:
        raise ValueError(f"method {method.value!r} does not apply to pe_unknown")
    return _report(config.v, c1, _pc0(config.M, config.L, tau), method)


def _conditional(config: SystemConfig, chi: float, method: Method) -> tuple[tuple, tuple]:
    xi = config.amplitude2 * chi
    tau = _known_tau(config, xi)
    if method is Method.HYPERGEOM and config.M <= MAX_EXPANSION_M:
        p = min(max(_pc1_expansion(config.M, config.L, xi, 1.0, tau), 0.0), 1.0)
        c1 = (p, 1.0 - p)
    else:
        c1 = _pc1_integral(config.M, config.L, xi, 1.0, tau)
    return c1, _pc0(config.M, config.L, tau)


def pe_known_conditional(config: SystemConfig, chi: float,
                         method: Method | str = Method.INTEGRAL) -> ErrorReport:
    """Error probability given the channel energy ``chi = sum_l |h_l|^2``."""
    if chi < 0:
        raise ValueError("chi must be nonnegative")
    c1, c0 = _conditional(config, chi, Method(method))
    return _report(config.v, c1, c0, Method.CONDITIONAL)


def pe_known_average(config: SystemConfig) -> ErrorReport:
    """Magnitude-known error probability averaged over the fading energy.

    ``chi`` is noncentral chi-square with ``2L`` degrees of freedom, squared
    mean ``L |d|^2`` and per-antenna variance ``sigma^2``. Only independent
    antennas are supported.
    """
    if config.rho != 0.0:
        raise ConfigError("analytical averaging needs independent antennas (rho = 0); "
                          "use Monte Carlo for correlated fading", field="rho")
    if config.v == 1.0:
        # tau = 0 for every realization, so the rule ignores the fading
        # and the average is the distribution-only result
        tau = _unknown_tau(config)
        c1 = _pc1_integral(config.M, config.L, config.xi, config.sigma_y2, tau)
        return _report(config.v, c1, _pc0(config.M, config.L, tau), Method.AVERAGED)
    s2 = config.L * config.mean_power
    var = config.sigma2
    if var == 0.0:
        c1, c0 = _conditional(config, s2, Method.INTEGRAL)
        return _report(config.v, c1, c0, Method.AVERAGED)

    def log_density(chi):
        return log_ncx2_pdf(chi, config.L, s2, var)

    mean, sd = _signal_moments(config.L, s2, var)
    top = quadrature.log_tail_limit(log_density, mean, sd, drop=math.log(1e-10) - 10.0)

    def integrand(chis):
        out = np.zeros((4, len(chis)))
        weights = np.exp(log_density(chis))
        live = np.nonzero(weights > 0.0)[0]
        xis = config.amplitude2 * chis[live]
        # one vectorized threshold solve per batch of nodes
        taus = solve_thresholds(config.M, config.L, config.v, xis, 1.0)
        for j, xi, tau in zip(live, xis, taus):
            h1, m1 = _pc1_integral(config.M, config.L, float(xi), 1.0, float(tau),
                                   epsrel=INNER_EPSREL)
            h0, m0 = _pc0(config.M, config.L, float(tau))
            out[:, j] = weights[j] * np.array([h1, m1, h0, m0])
        return out

    vals, _ = quadrature.integrate(integrand, _edges(0.0, top, mean, sd),
                                   epsabs=1e-16, epsrel=OUTER_EPSREL)
    mass = vals[0] + vals[1]
    h1, m1, h0, m0 = (vals / mass).tolist()
    return _report(config.v, (min(h1, 1.0), max(m1, 0.0)), (min(h0, 1.0), max(m0, 0.0)),
                   Method.AVERAGED)


def error_probability(config: SystemConfig, method: Method | str | None = None) -> ErrorReport:
    """Analytical error probability for whichever receiver ``config`` describes."""
    if config.rho != 0.0:
        raise ConfigError("analytical results need independent antennas (rho = 0)", field="rho")
    if config.knowledge is Knowledge.MAGNITUDE:
        return pe_known_average(config)
    return pe_unknown(config, method or Method.INTEGRAL)


# -- limits and rate normalization -----------------------------------------


def asymptotic_pe(v: float, M: int) -> float:
    """Low-SNR limit of the distribution-only error probability.

    ``v`` below the hinge ``M/(M+1)`` gives ``v``; above it ``(M - v)/M``.
    The hinge itself is left undetermined and raises ValueError.
    """
    if not (0.0 < v <= 1.0):
        raise ValueError(f"v must lie in (0, 1], got {v}")
    hinge = M / (M + 1.0)
    if v == hinge:
        raise ValueError(f"low-SNR limit is not determined at v = M/(M+1) = {hinge}")
    return v if v < hinge else (M - v) / M


def entropy_bits(v: float, M: int) -> float:
    """Source entropy ``v log2(M/v) + (1-v) log2(1/(1-v))`` in bits/symbol."""
    if not (0.0 <= v <= 1.0):
        raise ValueError(f"v must lie in [0, 1], got {v}")
    if v == 0.0:
        return 0.0
    return (v * math.log2(M / v) - special.xlogy(1.0 - v, 1.0 - v) / math.log(2.0)) + 0.0


def ebn0_db(config: SystemConfig) -> float:
    """Per-bit SNR in dB: symbol SNR divided by the source entropy."""
    return 10.0 * math.log10(config.snr / entropy_bits(config.v, config.M))


def snr_from_ebn0_db(ebn0: float, v: float, M: int) -> float:
    """Linear symbol SNR giving per-bit SNR ``ebn0`` dB."""
    return 10.0 ** (ebn0 / 10.0) * entropy_bits(v, M)
