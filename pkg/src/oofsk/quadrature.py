"""Vectorized adaptive Gauss-Kronrod (7/15) quadrature.

All panels still being refined are evaluated in a single call of the
integrand, which receives a flat array of abscissae. Integrands may be
vector valued: return shape ``(k, n)`` for ``n`` abscissae.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial import legendre

from .errors import NumericError

__all__ = ["integrate", "log_tail_limit"]


def _kronrod_rule():
    gauss, gauss_w = legendre.leggauss(7)
    # the eight Kronrod abscissae added to the 7-point Gauss rule
    extra = np.array([0.991455371120813, 0.864864423359769, 0.586087235467691, 0.207784955007898])
    nodes = np.sort(np.concatenate([gauss, extra, -extra]))
    # weights from exactness on Legendre polynomials of degree < 15
    vander = np.array([legendre.legval(nodes, [0] * j + [1]) for j in range(15)])
    rhs = np.zeros(15)
    rhs[0] = 2.0
    kronrod_w = np.linalg.solve(vander, rhs)
    gauss_full = np.zeros(15)
    for x, w in zip(gauss, gauss_w):
        gauss_full[np.argmin(np.abs(nodes - x))] = w
    return nodes, kronrod_w, gauss_full


NODES, KRONROD_W, GAUSS_W = _kronrod_rule()


def _eval_panels(f, a, b):
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = (mid[:, None] + half[:, None] * NODES[None, :]).ravel()
    y = np.asarray(f(x), dtype=float)
    scalar = y.ndim == 1
    y = y.reshape((1 if scalar else y.shape[0], len(a), 15))
    k = np.einsum("cpn,n->cp", y, KRONROD_W) * half
    g = np.einsum("cpn,n->cp", y, GAUSS_W) * half
    return k, np.abs(k - g), scalar


def integrate(f, points, epsabs=1e-14, epsrel=1e-12, limit=4000, per_component=True):
    """Integrate ``f`` over ``[points[0], points[-1]]``.

    ``points`` are initial panel edges (interior entries act as
    breakpoints). Panels are bisected until the summed Kronrod-Gauss
    difference meets ``max(epsabs, epsrel * |I|)``, checked per component
    when ``per_component`` is true and against the largest component
    otherwise. Returns ``(value, error)``.
    """
    edges = np.asarray(sorted(set(float(p) for p in points)), dtype=float)
    if len(edges) < 2:
        raise ValueError("need at least two distinct points")
    a, b = edges[:-1], edges[1:]
    k, e, scalar = _eval_panels(f, a, b)
    done_val = np.zeros(k.shape[0])
    done_err = np.zeros(k.shape[0])
    n_panels = len(a)
    while True:
        total = done_val + k.sum(axis=1)
        err = done_err + e.sum(axis=1)
        if per_component:
            target = np.maximum(epsabs, epsrel * np.abs(total))
        else:
            target = np.full_like(total, max(epsabs, epsrel * np.abs(total).max()))
        if np.all(err <= target):
            break
        # differences at the level of accumulated roundoff cannot shrink further
        floor = 50.0 * np.finfo(float).eps * (np.abs(done_val) + np.abs(k).sum(axis=1))
        if np.all(err <= np.maximum(target, floor)):
            break
        # a panel is good enough when its error is within its share of the budget
        width = (b - a) / (edges[-1] - edges[0])
        share = target[:, None] * np.maximum(width[None, :], 1.0 / (4 * len(a)))
        bad = np.any(e > share, axis=0)
        if not np.any(bad):
            bad = np.zeros(len(a), dtype=bool)
            bad[np.argmax((e / target[:, None]).max(axis=0))] = True
        done_val += k[:, ~bad].sum(axis=1)
        done_err += e[:, ~bad].sum(axis=1)
        n_panels += int(bad.sum())
        if n_panels > limit:
            raise NumericError(
                f"quadrature did not converge within {limit} panels (error {err}, target {target})"
            )
        ba, bb = a[bad], b[bad]
        mid = 0.5 * (ba + bb)
        a = np.concatenate([ba, mid])
        b = np.concatenate([mid, bb])
        if np.any(b - a <= 4 * np.finfo(float).eps * np.maximum(np.abs(a), 1.0)):
            # roundoff floor: accept what we have
            k, e, _ = _eval_panels(f, a, b)
            total = done_val + k.sum(axis=1)
            err = done_err + e.sum(axis=1)
            break
        k, e, _ = _eval_panels(f, a, b)
    if scalar:
        return float(total[0]), float(err[0])
    return total, err


def log_tail_limit(log_f, start: float, step: float, drop: float = np.log(1e-16),
                   patience: int = 3) -> float | None:
    """Point past which ``exp(log_f)`` stays negligible.

    Samples ``start + step (2^k - 1)`` and returns the first point after
    which the integrand has been below ``exp(drop)`` times its running
    maximum for ``patience`` consecutive samples. None means the
    integrand vanished at every sample.
    """
    ks = np.arange(0, 80)
    xs = start + step * (2.0 ** ks - 1.0)
    vals = np.asarray(log_f(xs), dtype=float)
    running = np.maximum.accumulate(vals)
    if running[-1] == -np.inf:
        return None
    quiet = vals <= running + drop
    quiet[0] = False
    count = 0
    for i in range(1, len(xs)):
        count = count + 1 if quiet[i] else 0
        if count >= patience:
            return float(xs[i])
    raise NumericError("could not locate the integrand tail")
