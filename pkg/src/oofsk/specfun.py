"""Log-domain special functions used by the OOFSK error-rate formulas.

Everything here returns natural logs where magnitudes can overflow, and
accepts numpy arrays for ``x`` so quadrature and detection can evaluate
whole grids at once.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

__all__ = [
    "log_bessel_i",
    "confluent_hypergeometric_poly",
    "log_kummer_poly_negz",
    "chi2_cdf_2L",
    "chi2_sf_2L",
    "multinomial_coeffs",
    "log_ncx2_pdf",
]

# below this argument the power series is summed, above it the
# exponentially scaled evaluation takes over
SERIES_CUTOFF = 30.0


def _logsumexp(a: np.ndarray, axis=None):
    # scipy's version carries array-API overhead that dominates on the
    # small arrays evaluated here; rows that are all -inf stay -inf
    peak = np.max(a, axis=axis, keepdims=True)
    peak = np.where(np.isfinite(peak), peak, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(a - peak), axis=axis, keepdims=True)) + peak
    return np.squeeze(out, axis=axis) if axis is not None else out.reshape(())


def _log_bessel_series(order: int, x: np.ndarray) -> np.ndarray:
    # ln I_n(x) = n ln(x/2) + ln sum_k (x^2/4)^k / (k! (n+k)!)
    # at x = 30 the terms peak near k = 15 and are < 1e-17 of the peak by k = 90
    k = np.arange(0, 120, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_q = 2.0 * np.log(x / 2.0)
        log_terms = (
            k[None, :] * log_q[:, None]
            - special.gammaln(k + 1.0)[None, :]
            - special.gammaln(k + order + 1.0)[None, :]
        )
    # x = 0 gives 0 * -inf in the k = 0 column
    log_terms[:, 0] = -special.gammaln(order + 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        lead = order * np.log(x / 2.0) if order > 0 else np.zeros_like(x)
    return lead + _logsumexp(log_terms, axis=1)


def log_bessel_i(order: int, x, scaled: bool = False):
    """Natural log of the modified Bessel function ``I_order(x)``.

    Uses the power series for ``x < 30`` and ``ln(ive(order, x)) + x`` above,
    so the result stays finite far beyond the point where ``I_order``
    overflows. ``I_n(0) = 0`` for ``n > 0`` is reported as ``-inf``.

    ``scaled=True`` returns ``ln(e^{-x} I_order(x))`` without ever forming
    the large exponent, which keeps full precision for big arguments.

    Raises ValueError for a negative order or negative argument.
    """
    if order < 0 or int(order) != order:
        raise ValueError(f"Bessel order must be a nonnegative integer, got {order}")
    order = int(order)
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError("Bessel argument must be nonnegative")
    flat = np.atleast_1d(arr).ravel()
    out = np.empty_like(flat)
    small = flat < SERIES_CUTOFF
    if np.any(small):
        out[small] = _log_bessel_series(order, flat[small])
        if scaled:
            out[small] -= flat[small]
    if np.any(~small):
        big = flat[~small]
        out[~small] = np.log(special.ive(order, big)) + (0.0 if scaled else big)
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def confluent_hypergeometric_poly(i: int, c: int, z: float) -> float:
    """Kummer's ``F(-i, c; z)`` for a nonpositive integer first argument.

    The series terminates after ``i + 1`` terms, so this is an exact finite
    sum: ``sum_k (-i)_k / (c)_k * z^k / k!``.
    """
    if c <= 0:
        raise ValueError(f"c must be a positive integer, got {c}")
    if i < 0:
        raise ValueError(f"i must be nonnegative, got {i}")
    term = 1.0
    total = 1.0
    for k in range(i):
        term *= (k - i) / (c + k) * z / (k + 1)
        total += term
    return total


def log_kummer_poly_negz(i: int, c: int, z: float) -> float:
    """``ln F(-i, c; -z)`` for ``z >= 0``.

    With a negated argument every term of the terminating series is
    positive, ``F(-i, c; -z) = sum_k C(i, k) z^k / (c)_k``, so the sum is
    taken with logsumexp and never overflows.
    """
    if z < 0:
        raise ValueError("z must be nonnegative")
    if z == 0 or i == 0:
        return 0.0
    k = np.arange(i + 1, dtype=float)
    log_terms = (
        special.gammaln(i + 1.0) - special.gammaln(k + 1.0) - special.gammaln(i - k + 1.0)
        + k * math.log(z)
        - (special.gammaln(c + k) - special.gammaln(c))
    )
    return float(_logsumexp(log_terms))


def _poisson_head(x: np.ndarray, L: int) -> np.ndarray:
    # e^{-x} sum_{l<L} x^l / l!, summed as logs so large x does not overflow
    ell = np.arange(L, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_terms = ell[None, :] * np.log(x)[:, None] - special.gammaln(ell + 1.0)[None, :]
    log_terms[:, 0] = 0.0
    return np.exp(_logsumexp(log_terms, axis=1) - x)


def _poisson_tail(x: np.ndarray, L: int) -> np.ndarray:
    # e^{-x} sum_{l>=L} x^l / l!; only used for x <= L where terms shrink fast
    n_terms = int(L + 10.0 * math.sqrt(L) + 60)
    ell = np.arange(L, L + n_terms, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_terms = ell[None, :] * np.log(x)[:, None] - special.gammaln(ell + 1.0)[None, :]
    return np.exp(_logsumexp(log_terms, axis=1) - x)


def chi2_cdf_2L(x, L: int):
    """CDF of a sum of ``L`` unit-mean exponentials (chi-square, 2L dof, scale 1/2).

    ``1 - e^{-x} sum_{l<L} x^l/l!``. For ``x <= L`` the complementary
    Poisson tail ``e^{-x} sum_{l>=L} x^l/l!`` is summed instead, which
    avoids cancellation when the CDF is tiny.
    """
    if L < 1:
        raise ValueError(f"L must be >= 1, got {L}")
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0):
        raise ValueError("x must be nonnegative")
    flat = np.atleast_1d(arr).ravel()
    out = np.zeros_like(flat)
    lower = (flat <= L) & (flat > 0)
    upper = flat > L
    if np.any(lower):
        out[lower] = _poisson_tail(flat[lower], L)
    if np.any(upper):
        out[upper] = 1.0 - _poisson_head(flat[upper], L)
    out[np.isinf(flat)] = 1.0
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def chi2_sf_2L(x, L: int):
    """Survival function ``e^{-x} sum_{l<L} x^l/l!`` matching :func:`chi2_cdf_2L`."""
    arr = np.asarray(x, dtype=float)
    flat = np.atleast_1d(arr).ravel()
    out = np.ones_like(flat)
    lower = (flat <= L) & (flat > 0)
    upper = flat > L
    if np.any(lower):
        out[lower] = 1.0 - _poisson_tail(flat[lower], L)
    if np.any(upper):
        out[upper] = _poisson_head(flat[upper], L)
    out[np.isinf(flat)] = 0.0
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def multinomial_coeffs(n: int, L: int) -> list[float]:
    """Coefficients ``c_{i,n}`` of ``x^i`` in ``(sum_{l<L} x^l/l!)^n``.

    Built with the recursion ``c_{i,n} = sum_q c_{q,n-1} / (i-q)!`` where
    ``q`` runs over ``[i-L+1, i]`` intersected with ``[0, (n-1)(L-1)]``.
    Returns a list of length ``n(L-1) + 1``.
    """
    if n < 0 or L < 1:
        raise ValueError(f"need n >= 0 and L >= 1, got n={n}, L={L}")
    inv_fact = [1.0 / math.factorial(j) for j in range(L)]
    prev = [1.0]
    for m in range(1, n + 1):
        top_prev = (m - 1) * (L - 1)
        cur = []
        for i in range(m * (L - 1) + 1):
            lo = max(i - L + 1, 0)
            hi = min(i, top_prev)
            cur.append(math.fsum(prev[q] * inv_fact[i - q] for q in range(lo, hi + 1)))
        prev = cur
    return prev


def log_ncx2_pdf(x, L: int, xi: float, scale: float):
    """Log density of the combined energy of ``L`` complex Gaussian entries.

    The entries have total squared mean ``xi`` and per-entry variance
    ``scale``:

        f(x) = (1/scale) (x/xi)^{(L-1)/2} exp(-(x+xi)/scale) I_{L-1}(2 sqrt(x xi)/scale)

    ``xi = 0`` falls back to the central form ``x^{L-1} e^{-x/scale} / (scale^L (L-1)!)``.
    """
    arr = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        if xi == 0.0:
            out = (L - 1) * np.log(arr) - arr / scale - L * math.log(scale) - math.lgamma(L)
            if L == 1:
                out = np.where(arr >= 0, out, -np.inf)
        else:
            root = np.sqrt(np.maximum(arr, 0.0))
            arg = 2.0 * root * math.sqrt(xi) / scale
            # -(x + xi)/s + ln I(z) = -(sqrt(x) - sqrt(xi))^2 / s + ln(e^{-z} I(z));
            # the scaled form avoids cancelling two large terms
            scaled = log_bessel_i(L - 1, arg, scaled=True)
            out = (
                -math.log(scale)
                + 0.5 * (L - 1) * (np.log(arr) - math.log(xi))
                - (root - math.sqrt(xi)) ** 2 / scale
                + scaled
            )
            if L > 1:
                # limit at x = 0 is 0 for L > 1 (and -inf - inf combos become nan)
                out = np.where(arr > 0, out, -np.inf)
            else:
                out = np.where(arr >= 0, out, -np.inf)
    if np.ndim(out) == 0:
        return float(out)
    return out
