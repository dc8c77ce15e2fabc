import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from oofsk.errors import ConfigError
from oofsk.model import (
    Knowledge,
    Normalization,
    SystemConfig,
    channel_covariance,
    channel_energy,
    combine_energies,
    correlator_outputs,
    draw_channel,
    draw_symbol,
)


def cfg(**kw):
    base = dict(M=8, v=0.5, L=2, snr=4.0, rician_K=1.0)
    base.update(kw)
    return SystemConfig(**base)


@pytest.mark.parametrize("field,kw", [
    ("M", {"M": 1}), ("M", {"M": 2.5}), ("L", {"L": 0}), ("v", {"v": 0.0}), ("v", {"v": 1.2}),
    ("snr", {"snr": -1.0}), ("snr", {"snr": math.inf}), ("K", {"rician_K": -0.1}),
    ("rho", {"rho": 1.0}), ("rho", {"L": 3, "rho": -0.5}),
])
def test_invalid_configs_name_the_field(field, kw):
    with pytest.raises(ConfigError) as info:
        cfg(**kw)
    assert info.value.field == field


def test_knowledge_aliases():
    assert Knowledge.parse("known") is Knowledge.MAGNITUDE
    assert Knowledge.parse("DistributionOnly") is Knowledge.DISTRIBUTION
    assert cfg(knowledge="unknown").knowledge is Knowledge.DISTRIBUTION
    with pytest.raises(ConfigError):
        Knowledge.parse("psychic")


def test_unit_power_normalization():
    c = cfg(rician_K=3.0)
    assert c.mean_power == pytest.approx(0.75)
    assert c.sigma2 == pytest.approx(0.25)
    assert c.amplitude2 == pytest.approx(8.0)
    assert c.sigma_y2 == pytest.approx(3.0)
    assert c.xi == pytest.approx(8.0 * 2 * 0.75)
    deterministic = cfg(rician_K=math.inf)
    assert (deterministic.mean_power, deterministic.sigma2) == (1.0, 0.0)


def test_unit_diffuse_normalization():
    c = cfg(rician_K=4.0, normalization="unit_diffuse")
    assert c.normalization is Normalization.UNIT_DIFFUSE
    assert (c.mean_power, c.sigma2) == (4.0, 1.0)
    rayleigh = [cfg(rician_K=0.0, normalization=n) for n in Normalization]
    assert rayleigh[0].sigma2 == rayleigh[1].sigma2 == 1.0
    with pytest.raises(ConfigError):
        cfg(rician_K=math.inf, normalization="unit_diffuse")


def test_symbol_frequencies():
    rng = np.random.default_rng(1)
    s = draw_symbol(cfg(M=8, v=0.1), rng, size=10**6)
    assert np.mean(s == 0) == pytest.approx(0.9, abs=1e-3)
    s = draw_symbol(cfg(M=2, v=0.5), rng, size=10**6)
    assert np.mean(s == 1) == pytest.approx(0.25, abs=2e-3)
    assert np.mean(s == 2) == pytest.approx(0.25, abs=2e-3)
    assert not np.any(draw_symbol(cfg(v=1.0), rng, size=10**5) == 0)
    assert isinstance(draw_symbol(cfg(), rng), int)


def test_symbol_tones_uniform_chi_square():
    rng = np.random.default_rng(7)
    s = draw_symbol(cfg(M=8, v=0.3), rng, size=400_000)
    counts = np.bincount(s, minlength=9)
    expected = 400_000 * np.array([0.7] + [0.3 / 8] * 8)
    assert stats.chisquare(counts, expected).pvalue > 1e-3


def test_deterministic_channel():
    rng = np.random.default_rng(0)
    h = draw_channel(cfg(rician_K=math.inf), rng, size=5)
    np.testing.assert_array_equal(h, np.ones((5, 2), dtype=complex))


def test_channel_power_and_correlation():
    rng = np.random.default_rng(2)
    h = draw_channel(cfg(rician_K=1.0), rng, size=10**6)
    assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, abs=5e-3)
    c = cfg(rician_K=1 / 8, rho=0.25)
    h = draw_channel(c, rng, size=10**6)
    w = h - c.mean_vector
    corr = np.mean(w[:, 0] * np.conj(w[:, 1])) / np.sqrt(
        np.mean(np.abs(w[:, 0]) ** 2) * np.mean(np.abs(w[:, 1]) ** 2))
    assert corr.real == pytest.approx(0.25, abs=0.01)
    assert abs(corr.imag) < 0.01


def test_covariance_is_equicorrelated():
    c = cfg(L=3, rician_K=1.0, rho=0.2)
    cov = channel_covariance(c)
    np.testing.assert_allclose(np.diag(cov), 0.5)
    np.testing.assert_allclose(cov[0, 1], 0.1)


def test_noise_free_outputs():
    c = cfg(M=4, L=2, v=0.25, snr=1.0)
    rng = np.random.default_rng(3)
    h = np.array([0.6 + 0.8j, 2.0])
    y = correlator_outputs(c, 3, h, rng, noise=False)
    assert y.shape == (2, 4)
    np.testing.assert_allclose(np.abs(y[:, 2]) ** 2, c.amplitude2 * np.abs(h) ** 2)
    assert np.all(y[:, [0, 1, 3]] == 0)
    assert np.all(correlator_outputs(c, 0, h, rng, noise=False) == 0)


def test_combine_energies_examples():
    assert np.all(combine_energies(np.zeros((2, 3))) == 0)
    y = np.array([[3 + 4j], [0]])
    assert combine_energies(y)[0] == 25.0


def test_signal_entry_variance():
    c = cfg(M=2, L=1, v=0.5, snr=2.0, rician_K=1.0)
    n = 10**6
    sent = np.ones(n, dtype=np.int64)
    rng = np.random.default_rng(4)
    h = draw_channel(c, rng, size=n)
    y = correlator_outputs(c, sent, h, rng)[:, 0, 0]
    # replaying the same stream without noise recovers the phase
    rng = np.random.default_rng(4)
    h = draw_channel(c, rng, size=n)
    clean = correlator_outputs(c, sent, h, rng, noise=False)[:, 0, 0]
    phase = clean / (math.sqrt(c.amplitude2) * h[:, 0])
    z = y / phase
    assert np.var(z) == pytest.approx(c.amplitude2 * c.sigma2 + 1.0, rel=0.01)
    assert np.mean(np.abs(y - clean) ** 2) == pytest.approx(1.0, rel=0.01)


def test_silent_symbol_energy_statistics():
    c = cfg(M=4, L=2)
    rng = np.random.default_rng(5)
    n = 10**5
    y = correlator_outputs(c, np.zeros(n, dtype=np.int64), np.zeros((n, 2)), rng)
    r = combine_energies(y)
    assert r.mean() == pytest.approx(2.0, abs=0.02)
    ks = stats.kstest(r[:, 1], stats.gamma(a=2).cdf)
    assert ks.statistic < 1.63 / math.sqrt(n)


@pytest.mark.parametrize("K,L,snr", [(1.0, 2, 3.0), (0.0, 3, 1.0), (4.0, 1, 10.0)])
def test_signal_energy_matches_noncentral_chi_square(K, L, snr):
    c = cfg(M=2, L=L, v=0.5, snr=snr, rician_K=K)
    rng = np.random.default_rng(6)
    n = 10**5
    h = draw_channel(c, rng, size=n)
    r = combine_energies(correlator_outputs(c, np.ones(n, dtype=np.int64), h, rng))[:, 0]
    s = c.sigma_y2
    if c.xi > 0:
        ref = stats.ncx2(2 * L, 2 * c.xi / s, scale=s / 2)
    else:
        ref = stats.chi2(2 * L, scale=s / 2)
    ks = stats.kstest(r, ref.cdf)
    assert ks.statistic < 1.63 / math.sqrt(n)


def test_average_transmitted_energy_is_snr():
    c = cfg(M=8, v=0.2, snr=5.0, rician_K=math.inf)
    rng = np.random.default_rng(8)
    n = 10**6
    s = draw_symbol(c, rng, size=n)
    y = correlator_outputs(c, s, np.ones((n, 2)), rng, noise=False)
    per_antenna = combine_energies(y).sum(axis=1) / c.L
    assert per_antenna.mean() == pytest.approx(c.snr, rel=0.01)


@given(st.integers(1, 6), st.integers(2, 6))
def test_energies_nonnegative(L, M):
    rng = np.random.default_rng(L * 10 + M)
    y = rng.standard_normal((L, M)) + 1j * rng.standard_normal((L, M))
    r = combine_energies(y)
    assert r.shape == (M,)
    assert np.all(r >= 0)
    np.testing.assert_allclose(r, channel_energy(y.T))
