"""Seeded Monte Carlo estimation of OOFSK symbol error rates.

Trials are grouped into fixed-size chunks. Chunk ``k`` draws from Philox
streams seeded by ``SeedSequence(seed, spawn_key=(k, purpose))`` with one
purpose each for symbols, fading and phase/noise, so a chunk's outcome
depends only on ``(config, seed, k)``. Worker count and scheduling order
therefore never change the result, and two configs run with the same seed
share their random numbers (useful for comparing curves).

The detector is the one derived for independent antennas even when the
simulated channel is correlated.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .analytic import ErrorReport, Method
from .detector import detect, solve_thresholds
from .model import (
    Knowledge,
    SystemConfig,
    channel_energy,
    combine_energies,
    correlator_outputs,
    draw_channel,
    draw_symbol,
)

__all__ = ["SimPlan", "Tally", "run", "confidence_interval"]

SYMBOLS, CHANNEL, NOISE = 0, 1, 2
# known-magnitude thresholds are memoized on ln(xi) rounded to this many places
CACHE_DECIMALS = 3
_TAU_CACHE: dict[tuple, float] = {}


@dataclass(frozen=True)
class SimPlan:
    """What to simulate.

    ``batch`` is the chunk size; changing it changes which random numbers
    land in which trial, so it is part of the reproducibility key.
    ``min_errors`` > 0 turns on auto-extension: chunks are added (doubling
    the trial count each round) until that many errors were seen or
    ``max_trials`` is reached.
    """

    config: SystemConfig
    n_trials: int
    seed: int = 0
    batch: int = 50_000
    min_errors: int = 0
    max_trials: int | None = None

    def __post_init__(self):
        if int(self.n_trials) != self.n_trials or self.n_trials < 1:
            raise ValueError(f"n_trials must be a positive integer, got {self.n_trials}")
        if int(self.batch) != self.batch or self.batch < 1:
            raise ValueError(f"batch must be a positive integer, got {self.batch}")
        if self.min_errors < 0:
            raise ValueError("min_errors must be nonnegative")
        if self.max_trials is not None and self.max_trials < self.n_trials:
            raise ValueError("max_trials must be at least n_trials")


@dataclass
class Tally:
    trials: int = 0
    errors: int = 0
    sent1: int = 0
    correct1: int = 0
    sent0: int = 0
    correct0: int = 0

    def __iadd__(self, other: "Tally") -> "Tally":
        for name in self.__dataclass_fields__:
            setattr(self, name, getattr(self, name) + getattr(other, name))
        return self


@dataclass(frozen=True)
class _Job:
    config: SystemConfig
    seed: int
    chunk: int
    n: int
    force_symbol: int | None = None
    noise: bool = True
    tau: float | None = field(default=None)


def _streams(seed: int, chunk: int) -> list[np.random.Generator]:
    entropy = int(seed) & (2**64 - 1)
    return [
        np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy, spawn_key=(chunk, p))))
        for p in (SYMBOLS, CHANNEL, NOISE)
    ]


def known_thresholds(config: SystemConfig, xi: np.ndarray, exact: bool = False) -> np.ndarray:
    """Magnitude-known thresholds for realized ``xi = A^2 sum |h_l|^2``.

    Unless ``exact``, ``xi`` is quantized to ``exp(round(ln xi, 3))`` and
    results are memoized per process.
    """
    xi = np.asarray(xi, dtype=float)
    M, L, v = config.M, config.L, config.v
    if exact:
        uniq, inverse = np.unique(xi, return_inverse=True)
        return solve_thresholds(M, L, v, uniq, 1.0)[inverse]
    with np.errstate(divide="ignore"):
        keys = np.round(np.log(xi), CACHE_DECIMALS)
    uniq, inverse = np.unique(keys, return_inverse=True)
    missing = [k for k in uniq.tolist() if (M, L, v, k) not in _TAU_CACHE]
    if missing:
        solved = solve_thresholds(M, L, v, np.exp(np.array(missing)), 1.0)
        for k, t in zip(missing, solved.tolist()):
            _TAU_CACHE[(M, L, v, k)] = t
    values = np.array([_TAU_CACHE[(M, L, v, k)] for k in uniq.tolist()])
    return values[inverse]


def _run_chunk(job: _Job) -> Tally:
    cfg = job.config
    rng_sym, rng_ch, rng_noise = _streams(job.seed, job.chunk)
    if job.force_symbol is None:
        symbols = draw_symbol(cfg, rng_sym, job.n)
    else:
        symbols = np.full(job.n, int(job.force_symbol), dtype=np.int64)
    h = draw_channel(cfg, rng_ch, job.n)
    r = combine_energies(correlator_outputs(cfg, symbols, h, rng_noise, noise=job.noise))
    if cfg.knowledge is Knowledge.MAGNITUDE:
        xi = cfg.amplitude2 * channel_energy(h)
        # a deterministic channel has one exact xi, so no quantization is needed
        tau = known_thresholds(cfg, xi, exact=cfg.sigma2 == 0.0)
    else:
        tau = job.tau
    decided = np.asarray(detect(r, tau))
    on = symbols > 0
    right = decided == symbols
    return Tally(
        trials=job.n,
        errors=int(np.count_nonzero(~right)),
        sent1=int(np.count_nonzero(on)),
        correct1=int(np.count_nonzero(right & on)),
        sent0=int(np.count_nonzero(~on)),
        correct0=int(np.count_nonzero(right & ~on)),
    )


def _run_chunks(jobs: list[_Job], workers: int) -> Tally:
    total = Tally()
    if workers <= 1 or len(jobs) == 1:
        for job in jobs:
            total += _run_chunk(job)
        return total
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # tally addition is commutative, but keep chunk order anyway
        for part in pool.map(_run_chunk, jobs):
            total += part
    return total


def _chunk_sizes(start: int, stop: int, batch: int):
    # trials [start, stop) split on the fixed grid of multiples of batch
    t = start
    while t < stop:
        k = t // batch
        end = min((k + 1) * batch, stop)
        yield k, t - k * batch, end - t
        t = end


def _jobs(plan: SimPlan, start: int, stop: int, force_symbol, noise, tau) -> list[_Job]:
    jobs = []
    for k, offset, n in _chunk_sizes(start, stop, plan.batch):
        if offset:
            raise ValueError("trial ranges must start on a chunk boundary")
        jobs.append(_Job(plan.config, plan.seed, k, n, force_symbol, noise, tau))
    return jobs


def run(plan: SimPlan, force_symbol: int | None = None, noise: bool = True,
        workers: int = 1) -> ErrorReport:
    """Simulate ``plan`` and report empirical error and detection rates.

    ``force_symbol`` transmits only that symbol (0 for silence) and
    ``noise=False`` removes the receiver noise; both are test hooks.
    Conditional rates with no transmissions of their class are NaN.
    """
    cfg = plan.config
    if force_symbol is not None and not (0 <= force_symbol <= cfg.M):
        raise ValueError(f"force_symbol must lie in 0..{cfg.M}")
    tau = None
    if cfg.knowledge is Knowledge.DISTRIBUTION:
        tau = float(solve_thresholds(cfg.M, cfg.L, cfg.v, [cfg.xi], cfg.sigma_y2)[0])

    # extensions start on chunk boundaries so earlier chunks are reused verbatim
    first = plan.n_trials
    if plan.min_errors > 0 and first % plan.batch:
        first = math.ceil(first / plan.batch) * plan.batch
        if plan.max_trials is not None:
            first = min(first, plan.max_trials)
    tally = _run_chunks(_jobs(plan, 0, first, force_symbol, noise, tau), workers)
    cap = plan.max_trials if plan.max_trials is not None else plan.n_trials
    while plan.min_errors > 0 and tally.errors < plan.min_errors and tally.trials < cap:
        stop = min(2 * tally.trials, cap)
        tally += _run_chunks(_jobs(plan, tally.trials, stop, force_symbol, noise, tau), workers)
    return report_from_tally(tally)


def report_from_tally(tally: Tally) -> ErrorReport:
    n = tally.trials
    pe = tally.errors / n
    pc1 = tally.correct1 / tally.sent1 if tally.sent1 else math.nan
    pc0 = tally.correct0 / tally.sent0 if tally.sent0 else math.nan
    return ErrorReport(
        pe=pe, pc1=pc1, pc0=pc0, method=Method.MONTE_CARLO,
        stderr=math.sqrt(pe * (1.0 - pe) / n), n_trials=n, n_errors=tally.errors,
    )


def confidence_interval(report: ErrorReport, level: float = 0.95) -> tuple[float, float]:
    """Normal-approximation interval for ``report.pe``, clipped to ``[0, 1]``.

    With zero observed errors the point estimate has no spread, so the
    upper end falls back to the rule-of-three bound ``3 / n``.
    """
    if not (0.0 < level < 1.0):
        raise ValueError(f"level must lie in (0, 1), got {level}")
    if report.n_trials <= 0:
        raise ValueError("confidence intervals need a Monte Carlo report")
    half = stats.norm.ppf(0.5 + 0.5 * level) * report.stderr
    low = max(report.pe - half, 0.0)
    high = min(report.pe + half, 1.0)
    if report.n_errors == 0:
        high = min(3.0 / report.n_trials, 1.0)
    return low, high
