"""MAP detection of OOFSK symbols from combined tone energies.

Both receivers reduce to the same rule: pick the strongest tone, and
declare the silent symbol unless that energy strictly exceeds a threshold.
The threshold inverts

    g(x) = x^{-(L-1)/2} exp(x t) I_{L-1}(2 sqrt(x xi) / sy2),   t = (sy2 - 1) / sy2,

which is increasing in ``x``. The magnitude-known receiver is the special
case ``sy2 = 1`` (no tilt) with ``xi`` built from the actual fading.

Internally the root is found for ``g(x) / g(0+)``, whose log starts at
zero; the common factors ``xi^{(L-1)/2} / (sy2^{L-1} (L-1)!)`` cancel
between ``g`` and its target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericError
from .model import Knowledge, SystemConfig
from .specfun import log_bessel_i

__all__ = [
    "DetectorContext",
    "log_g1",
    "log_g1_limit",
    "threshold_unknown",
    "threshold_known",
    "solve_thresholds",
    "detect",
]

MAX_DOUBLINGS = 200
MAX_BISECTIONS = 200
LOG_TOL = 1e-12


@dataclass(frozen=True)
class DetectorContext:
    mode: Knowledge
    M: int
    L: int
    xi: float
    sigma_y2: float
    tau: float

    def __post_init__(self):
        if self.mode is Knowledge.MAGNITUDE and self.sigma_y2 != 1.0:
            raise ValueError("magnitude-known detection requires sigma_y2 == 1")

    @classmethod
    def from_config(cls, config: SystemConfig, xi: float | None = None) -> "DetectorContext":
        """Context for ``config``.

        In magnitude-known mode ``xi`` must be supplied (``A^2 sum |h_l|^2``);
        in distribution-only mode it defaults to ``config.xi``.
        """
        if config.knowledge is Knowledge.MAGNITUDE:
            if xi is None:
                raise ValueError("magnitude-known context needs the realized xi")
            return cls(Knowledge.MAGNITUDE, config.M, config.L, float(xi), 1.0,
                       threshold_known(config, xi))
        xi = config.xi if xi is None else float(xi)
        return cls(Knowledge.DISTRIBUTION, config.M, config.L, xi, config.sigma_y2,
                   _threshold(config.M, config.L, config.v, xi, config.sigma_y2))


def _log_g_normalized(x, L: int, xi, sigma_y2: float):
    # ln[g(x) / g(0+)] = x t + ln[I_{L-1}(z) (L-1)! / (z/2)^{L-1}],  z = 2 sqrt(x xi) / sy2
    x, xi = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(xi, dtype=float))
    tilt = (sigma_y2 - 1.0) / sigma_y2
    z = 2.0 * np.sqrt(x * xi) / sigma_y2
    out = np.array(tilt * x, dtype=float)
    nz = z > 0
    if np.any(nz):
        zz = z[nz]
        bessel = log_bessel_i(L - 1, zz)
        if L > 1:
            bessel = bessel - (L - 1) * np.log(zz / 2.0) + math.lgamma(L)
        out[nz] += bessel
    if out.ndim == 0:
        return float(out)
    return out


def log_g1_limit(ctx: DetectorContext) -> float:
    """``ln lim_{x->0} g(x) = ln[xi^{(L-1)/2} / (sy2^{L-1} (L-1)!)]``."""
    if ctx.xi <= 0:
        raise ValueError("g is defined for xi > 0 only")
    L = ctx.L
    return 0.5 * (L - 1) * math.log(ctx.xi) - (L - 1) * math.log(ctx.sigma_y2) - math.lgamma(L)


def log_g1(x, ctx: DetectorContext):
    """``ln g(x)`` evaluated entirely in the log domain (``x > 0``)."""
    if ctx.xi <= 0:
        raise ValueError("g is defined for xi > 0 only")
    if np.any(np.asarray(x) <= 0):
        raise ValueError("x must be positive")
    return log_g1_limit(ctx) + _log_g_normalized(x, ctx.L, ctx.xi, ctx.sigma_y2)


def _log_target(M: int, L: int, v: float, xi, sigma_y2: float):
    # ln(T / g(0+)) = ln(M (1 - v) / v) + L ln sy2 + xi / sy2
    return math.log(M * (1.0 - v) / v) + L * math.log(sigma_y2) + np.asarray(xi) / sigma_y2


def solve_thresholds(M: int, L: int, v: float, xi, sigma_y2: float) -> np.ndarray:
    """Vectorized MAP threshold for an array of ``xi`` values.

    Returns 0 where the target lies below ``g(0+)`` and ``inf`` in the
    degenerate ``xi = 0, sy2 = 1`` case when the silent symbol is a priori
    more likely than every tone.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    tau = np.zeros_like(xi)
    if v >= 1.0:
        return tau
    target = _log_target(M, L, v, xi, sigma_y2)
    tilt = (sigma_y2 - 1.0) / sigma_y2
    active = target > 0
    flat = active & (xi == 0) & (tilt == 0)
    tau[flat] = np.inf
    active &= ~flat
    # xi = 0 with a tilt has the closed form x t = target
    linear = active & (xi == 0)
    tau[linear] = target[linear] / tilt
    active &= ~linear
    if not np.any(active):
        return tau

    idx = np.nonzero(active)[0]
    xs, tg = xi[idx], target[idx]
    lo = np.zeros_like(xs)
    hi = np.ones_like(xs)
    for _ in range(MAX_DOUBLINGS):
        short = _log_g_normalized(hi, L, xs, sigma_y2) < tg
        if not np.any(short):
            break
        lo = np.where(short, hi, lo)
        hi = np.where(short, 2.0 * hi, hi)
    else:
        raise NumericError("threshold bracket did not close after 200 doublings")

    done = np.zeros(len(xs), dtype=bool)
    mid = 0.5 * (lo + hi)
    for _ in range(MAX_BISECTIONS):
        mid = np.where(done, mid, 0.5 * (lo + hi))
        diff = _log_g_normalized(mid, L, xs, sigma_y2) - tg
        done |= np.abs(diff) <= LOG_TOL
        done |= (mid <= lo) | (mid >= hi)
        below = diff < 0
        lo = np.where(~done & below, mid, lo)
        hi = np.where(~done & ~below, mid, hi)
        if np.all(done):
            break
    tau[idx] = mid
    return tau


def _threshold(M, L, v, xi, sigma_y2) -> float:
    return float(solve_thresholds(M, L, v, np.array([xi]), sigma_y2)[0])


def threshold_unknown(config: SystemConfig) -> float:
    """MAP threshold when only the fading statistics are known."""
    return _threshold(config.M, config.L, config.v, config.xi, config.sigma_y2)


def threshold_known(config: SystemConfig, xi: float) -> float:
    """MAP threshold when the fading magnitudes are known, ``xi = A^2 sum |h_l|^2``."""
    if xi < 0:
        raise ValueError("xi must be nonnegative")
    return _threshold(config.M, config.L, config.v, xi, 1.0)


def detect(r, ctx_or_tau) -> int | np.ndarray:
    """Decide the transmitted symbol from energies ``r`` (last axis = tones).

    Returns the 1-based index of the largest energy if it strictly exceeds
    the threshold, else 0. Exact ties go to the lowest index. ``ctx_or_tau``
    is a :class:`DetectorContext`, a scalar threshold, or an array of
    per-row thresholds.
    """
    tau = ctx_or_tau.tau if isinstance(ctx_or_tau, DetectorContext) else ctx_or_tau
    r = np.asarray(r, dtype=float)
    best = np.argmax(r, axis=-1)
    peak = np.take_along_axis(r, best[..., None], axis=-1)[..., 0]
    out = np.where(peak > tau, best + 1, 0)
    if out.ndim == 0:
        return int(out)
    return out
