"""OOFSK transmitter, Rician channel and correlator-bank statistics.

Waveforms are never simulated. With ``T_s = N_0 = 1`` the correlator
output for antenna ``l`` and tone ``m`` is

    Y[l, m] = A h_l e^{j theta} + n[l, m]   if m is the transmitted tone
    Y[l, m] = n[l, m]                        otherwise

with ``A^2 = snr / v`` and ``n`` unit-variance circular complex Gaussian.
Every draw function accepts an optional ``size`` so the Monte Carlo engine
can generate whole batches at once; arrays carry the trial axis first.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

__all__ = [
    "Knowledge",
    "Normalization",
    "SystemConfig",
    "draw_symbol",
    "draw_channel",
    "correlator_outputs",
    "combine_energies",
    "channel_covariance",
    "channel_energy",
]


class Knowledge(str, enum.Enum):
    """What the receiver knows about the fading."""

    DISTRIBUTION = "distribution"
    MAGNITUDE = "magnitude"

    @classmethod
    def parse(cls, text: str) -> "Knowledge":
        key = str(text).strip().lower()
        aliases = {
            "distribution": cls.DISTRIBUTION,
            "distributiononly": cls.DISTRIBUTION,
            "unknown": cls.DISTRIBUTION,
            "magnitude": cls.MAGNITUDE,
            "magnitudeknown": cls.MAGNITUDE,
            "known": cls.MAGNITUDE,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ConfigError(f"unknown channel knowledge {text!r}", field="knowledge") from None


class Normalization(str, enum.Enum):
    """How the Rician factor ``K`` splits into mean and diffuse power.

    ``UNIT_POWER`` keeps ``|d|^2 + sigma^2 = 1`` so ``snr`` is the average
    received SNR per antenna. ``UNIT_DIFFUSE`` fixes ``sigma^2 = 1`` and
    ``|d|^2 = K``, so the average received SNR is ``(K + 1) snr``; the
    published crossover and duty-cycle numbers follow this convention.
    The two coincide for Rayleigh fading.
    """

    UNIT_POWER = "unit_power"
    UNIT_DIFFUSE = "unit_diffuse"

    @classmethod
    def parse(cls, text: str) -> "Normalization":
        key = str(text).strip().lower().replace("-", "_")
        try:
            return cls(key)
        except ValueError:
            raise ConfigError(f"unknown normalization {text!r}", field="normalization") from None


@dataclass(frozen=True)
class SystemConfig:
    """All model parameters of one operating point.

    ``snr`` is the linear average symbol SNR ``P T_s / N_0``. ``rician_K``
    may be ``math.inf`` for a deterministic (unfaded) channel under the
    default unit-power normalization (see :class:`Normalization`). All
    antennas share the same real positive mean.
    """

    M: int
    v: float
    L: int
    snr: float
    rician_K: float = 1.0
    rho: float = 0.0
    knowledge: Knowledge = Knowledge.DISTRIBUTION
    normalization: Normalization = Normalization.UNIT_POWER

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 2:
            raise ConfigError(f"M must be an integer >= 2, got {self.M}", field="M")
        if int(self.L) != self.L or self.L < 1:
            raise ConfigError(f"L must be an integer >= 1, got {self.L}", field="L")
        if not (0.0 < self.v <= 1.0):
            raise ConfigError(f"v must lie in (0, 1], got {self.v}", field="v")
        if not (self.snr >= 0.0) or math.isinf(self.snr):
            raise ConfigError(f"snr must be finite and nonnegative, got {self.snr}", field="snr")
        if not (self.rician_K >= 0.0):
            raise ConfigError(f"K must be nonnegative, got {self.rician_K}", field="K")
        if self.L > 1 and not (-1.0 / (self.L - 1) < self.rho < 1.0):
            raise ConfigError(
                f"rho={self.rho} does not give a positive definite covariance for L={self.L}",
                field="rho",
            )
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "L", int(self.L))
        if not isinstance(self.knowledge, Knowledge):
            object.__setattr__(self, "knowledge", Knowledge.parse(self.knowledge))
        if not isinstance(self.normalization, Normalization):
            object.__setattr__(self, "normalization", Normalization.parse(self.normalization))
        if self.normalization is Normalization.UNIT_DIFFUSE and math.isinf(self.rician_K):
            raise ConfigError("K = inf needs unit-power normalization", field="K")

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)

    @property
    def amplitude2(self) -> float:
        """Peak amplitude squared, ``A^2 = snr / v``."""
        return self.snr / self.v

    @property
    def mean_power(self) -> float:
        """``|d_l|^2``: ``K / (K + 1)``, or ``K`` under unit-diffuse normalization."""
        if self.normalization is Normalization.UNIT_DIFFUSE:
            return float(self.rician_K)
        if math.isinf(self.rician_K):
            return 1.0
        return self.rician_K / (self.rician_K + 1.0)

    @property
    def sigma2(self) -> float:
        """Diffuse fading variance: ``1 / (K + 1)``, or 1 under unit-diffuse."""
        if self.normalization is Normalization.UNIT_DIFFUSE:
            return 1.0
        if math.isinf(self.rician_K):
            return 0.0
        return 1.0 / (self.rician_K + 1.0)

    @property
    def mean_vector(self) -> np.ndarray:
        return np.full(self.L, math.sqrt(self.mean_power), dtype=complex)

    @property
    def sigma_y2(self) -> float:
        """Variance of the signal-bearing correlator output, ``A^2 sigma^2 + 1``."""
        return self.amplitude2 * self.sigma2 + 1.0

    @property
    def xi(self) -> float:
        """``A^2 sum_l |d_l|^2``."""
        return self.amplitude2 * channel_energy(self.mean_vector)

    @property
    def snr_db(self) -> float:
        return 10.0 * math.log10(self.snr) if self.snr > 0 else -math.inf


def channel_energy(h: np.ndarray) -> np.ndarray:
    """``sum_l |h_l|^2`` over the last axis."""
    h = np.asarray(h)
    return np.sum(h.real**2 + h.imag**2, axis=-1)


def channel_covariance(config: SystemConfig) -> np.ndarray:
    """Equi-correlated covariance ``sigma^2 [(1 - rho) I + rho 11^T]``."""
    L = config.L
    cov = (1.0 - config.rho) * np.eye(L) + config.rho * np.ones((L, L))
    return config.sigma2 * cov


def _channel_factor(config: SystemConfig) -> np.ndarray:
    if config.sigma2 == 0.0:
        return np.zeros((config.L, config.L))
    try:
        return np.linalg.cholesky(channel_covariance(config))
    except np.linalg.LinAlgError:
        raise ConfigError("channel covariance is not positive definite", field="rho") from None


def _complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    z = rng.standard_normal(tuple(shape) + (2,))
    return (z[..., 0] + 1j * z[..., 1]) * math.sqrt(0.5)


def draw_symbol(config: SystemConfig, rng: np.random.Generator, size=None):
    """Draw transmitted symbol indices: 0 w.p. ``1 - v``, each tone w.p. ``v/M``."""
    n = 1 if size is None else int(size)
    u = rng.random(n)
    on = u < config.v
    # reuse the uniform for the tone index so one draw per trial suffices
    tone = np.minimum((u / config.v * config.M).astype(np.int64), config.M - 1) + 1
    symbols = np.where(on, tone, 0)
    return int(symbols[0]) if size is None else symbols


def draw_channel(config: SystemConfig, rng: np.random.Generator, size=None) -> np.ndarray:
    """Draw fading vectors ``h = d + C w`` with ``C C^H`` the channel covariance.

    Returns shape ``(L,)`` or ``(size, L)``.
    """
    factor = _channel_factor(config)
    n = 1 if size is None else int(size)
    w = _complex_normal(rng, (n, config.L))
    h = config.mean_vector[None, :] + w @ factor.T
    return h[0] if size is None else h


def correlator_outputs(
    config: SystemConfig,
    symbol,
    h: np.ndarray,
    rng: np.random.Generator,
    noise: bool = True,
) -> np.ndarray:
    """Correlator bank outputs ``Y`` of shape ``(L, M)`` (or ``(n, L, M)``).

    ``symbol`` is 0 for the silent symbol or a tone index in ``1..M``.
    A fresh uniform phase is drawn per symbol. ``noise=False`` keeps only the
    deterministic signal term; it exists for tests.
    """
    batched = np.ndim(symbol) > 0
    symbols = np.atleast_1d(np.asarray(symbol, dtype=np.int64))
    n = len(symbols)
    h = np.asarray(h, dtype=complex).reshape(n, config.L)
    theta = rng.uniform(0.0, 2.0 * math.pi, n)
    y = np.zeros((n, config.L, config.M), dtype=complex)
    amp = math.sqrt(config.amplitude2)
    on = symbols > 0
    rows = np.nonzero(on)[0]
    y[rows, :, symbols[rows] - 1] = amp * h[rows] * np.exp(1j * theta[rows])[:, None]
    if noise:
        y += _complex_normal(rng, y.shape)
    return y if batched else y[0]


def combine_energies(y: np.ndarray) -> np.ndarray:
    """Equal-gain energy combining, ``r_m = sum_l |y[l, m]|^2``.

    Works on ``(L, M)`` or batched ``(n, L, M)`` input.
    """
    y = np.asarray(y)
    return np.sum(y.real**2 + y.imag**2, axis=-2)
