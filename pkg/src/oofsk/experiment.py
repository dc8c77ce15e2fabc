"""Experiment settings, parameter sweeps, CSV output and figure presets.

Settings are flat ``key = value`` pairs (the same keys in config files, on
the command line and in JSON reports):

    M, v, L, K, rho, snr_db | ebn0_db, knowledge, normalization,
    engine, trials, seed, max_trials

Exactly one of ``snr_db`` and ``ebn0_db`` must be present. ``K`` and
``rho`` accept fractions such as ``1/8``; ``K`` also accepts ``inf``.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import montecarlo
from .analytic import ErrorReport, ebn0_db, entropy_bits, error_probability, snr_from_ebn0_db
from .detector import solve_thresholds
from .errors import ConfigError
from .model import Knowledge, Normalization, SystemConfig

__all__ = [
    "Engine",
    "Axis",
    "Settings",
    "Curve",
    "SweepSpec",
    "SweepRow",
    "Crossover",
    "parse_settings",
    "settings_from_mapping",
    "format_settings",
    "evaluate",
    "report_point",
    "run_sweep",
    "sweep_csv",
    "read_sweep_csv",
    "crossover",
    "figure_spec",
    "CSV_HEADER",
]

CSV_HEADER = ("axis", "curve_id", "pe", "pc1", "pc0", "stderr", "engine")
KEY_ORDER = ("M", "v", "L", "K", "rho", "snr_db", "ebn0_db", "knowledge", "normalization",
             "engine", "trials", "seed", "max_trials")
DEFAULTS = {"K": 1.0, "rho": 0.0, "knowledge": "distribution", "normalization": "unit_power",
            "engine": "analytic", "trials": 10**6, "seed": 0}


class Engine(str, enum.Enum):
    ANALYTIC = "analytic"
    SIMULATE = "simulate"
    BOTH = "both"

    def parts(self) -> tuple["Engine", ...]:
        if self is Engine.BOTH:
            return (Engine.ANALYTIC, Engine.SIMULATE)
        return (self,)


class Axis(str, enum.Enum):
    EBN0_DB = "ebn0_db"
    SNR_DB = "snr_db"
    DUTY_CYCLE = "v"


# -- settings ----------------------------------------------------------------


def _number(key: str, text) -> float:
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return float(text)
    s = str(text).strip()
    try:
        if s.lower() in ("inf", "+inf", "infinity"):
            return math.inf
        return float(Fraction(s)) if "/" in s else float(s)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"{key}: expected a number, got {text!r}", field=key) from None


def _integer(key: str, text) -> int:
    value = _number(key, text)
    if not math.isfinite(value) or value != int(value):
        raise ConfigError(f"{key}: expected an integer, got {text!r}", field=key)
    return int(value)


def _enum(kind, key: str, text):
    try:
        if kind is Knowledge:
            return Knowledge.parse(text)
        if kind is Normalization:
            return Normalization.parse(text)
        return kind(str(text).strip().lower())
    except (ValueError, ConfigError):
        raise ConfigError(f"{key}: unknown value {text!r}", field=key) from None


_PARSERS = {
    "M": _integer, "L": _integer, "trials": _integer, "seed": _integer, "max_trials": _integer,
    "v": _number, "K": _number, "rho": _number, "snr_db": _number, "ebn0_db": _number,
    "knowledge": lambda k, t: _enum(Knowledge, k, t),
    "normalization": lambda k, t: _enum(Normalization, k, t),
    "engine": lambda k, t: _enum(Engine, k, t),
}


@dataclass(frozen=True)
class Settings:
    """A validated operating point plus how to evaluate it.

    ``values`` keeps the parsed key/value pairs (including which of
    ``snr_db``/``ebn0_db`` was given) so settings print back verbatim.
    """

    config: SystemConfig
    engine: Engine
    trials: int
    seed: int
    max_trials: int | None
    values: tuple = field(repr=False)

    def as_dict(self) -> dict:
        return dict(self.values)

    def with_values(self, **changes) -> "Settings":
        merged = self.as_dict()
        if "snr_db" in changes:
            merged.pop("ebn0_db", None)
        if "ebn0_db" in changes:
            merged.pop("snr_db", None)
        merged.update(changes)
        return settings_from_mapping(merged)


def _canonical(key: str, value):
    if isinstance(value, enum.Enum):
        return value.value
    return value


def settings_from_mapping(mapping) -> Settings:
    """Validate a mapping of setting keys to values (strings or numbers)."""
    parsed = {}
    for key, raw in mapping.items():
        if key not in _PARSERS:
            raise ConfigError(f"unknown setting {key!r}", field=str(key))
        parsed[key] = _PARSERS[key](key, raw)
    for key in ("M", "v", "L"):
        if key not in parsed:
            raise ConfigError(f"missing required setting {key!r}", field=key)
    has_snr, has_ebn0 = "snr_db" in parsed, "ebn0_db" in parsed
    if has_snr == has_ebn0:
        raise ConfigError("give exactly one of snr_db and ebn0_db", field="snr_db")
    full = {**{k: _PARSERS[k](k, v) for k, v in DEFAULTS.items()}, **parsed}

    v, M = full["v"], full["M"]
    if not (0.0 < v <= 1.0):
        raise ConfigError(f"v must lie in (0, 1], got {v}", field="v")
    if M < 2:
        raise ConfigError(f"M must be an integer >= 2, got {M}", field="M")
    if has_snr:
        db = full["snr_db"]
        snr = 10.0 ** (db / 10.0)
    else:
        db = full["ebn0_db"]
        snr = snr_from_ebn0_db(db, v, M)
    if not math.isfinite(db):
        key = "snr_db" if has_snr else "ebn0_db"
        raise ConfigError(f"{key} must be finite", field=key)
    config = SystemConfig(M=M, v=v, L=full["L"], snr=snr, rician_K=full["K"], rho=full["rho"],
                          knowledge=full["knowledge"], normalization=full["normalization"])
    if full["trials"] < 1:
        raise ConfigError("trials must be positive", field="trials")
    max_trials = full.get("max_trials")
    if max_trials is not None and max_trials < full["trials"]:
        raise ConfigError("max_trials must be at least trials", field="max_trials")
    ordered = tuple((k, _canonical(k, full[k])) for k in KEY_ORDER if k in full)
    return Settings(config, full["engine"], full["trials"], full["seed"], max_trials, ordered)


def parse_settings(text: str, overrides=None) -> Settings:
    """Parse ``key = value`` lines (``#`` starts a comment), then apply overrides."""
    mapping = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {number}: expected key = value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in mapping:
            raise ConfigError(f"line {number}: {key!r} given twice", field=key)
        mapping[key] = value
    overrides = dict(overrides or {})
    if "snr_db" in overrides and "ebn0_db" in overrides:
        raise ConfigError("give exactly one of snr_db and ebn0_db", field="snr_db")
    for key, value in overrides.items():
        if key == "snr_db":
            mapping.pop("ebn0_db", None)
        if key == "ebn0_db":
            mapping.pop("snr_db", None)
        mapping[key] = value
    return settings_from_mapping(mapping)


def format_value(value) -> str:
    if isinstance(value, float):
        if math.isinf(value):
            return "inf"
        return repr(value)
    return str(value)


def format_settings(settings: Settings) -> str:
    """Settings as config-file text that parses back to the same settings."""
    return "".join(f"{k} = {format_value(v)}\n" for k, v in settings.values)


# -- evaluation ----------------------------------------------------------------


def evaluate(settings: Settings, engine: Engine) -> ErrorReport:
    """One engine's report for one operating point."""
    if engine is Engine.ANALYTIC:
        return error_probability(settings.config)
    if engine is Engine.SIMULATE:
        plan = montecarlo.SimPlan(
            settings.config, settings.trials, seed=settings.seed,
            min_errors=100 if settings.max_trials else 0,
            max_trials=settings.max_trials,
        )
        return montecarlo.run(plan)
    raise ValueError(f"evaluate needs a single engine, got {engine}")


def _report_fields(report: ErrorReport) -> dict:
    out = {"pe": report.pe, "pc1": report.pc1, "pc0": report.pc0}
    if report.n_trials:
        out.update(stderr=report.stderr, n_trials=report.n_trials, n_errors=report.n_errors)
    return out


def report_point(settings: Settings) -> dict:
    """Everything worth knowing about one operating point, JSON ready.

    ``tau`` is the distribution-only threshold, or for the magnitude-known
    receiver the threshold at the average channel energy
    ``L (|d|^2 + sigma^2)``.
    """
    cfg = settings.config
    if cfg.knowledge is Knowledge.MAGNITUDE:
        mean_xi = cfg.amplitude2 * cfg.L * (cfg.mean_power + cfg.sigma2)
        tau = float(solve_thresholds(cfg.M, cfg.L, cfg.v, [mean_xi], 1.0)[0])
    else:
        tau = float(solve_thresholds(cfg.M, cfg.L, cfg.v, [cfg.xi], cfg.sigma_y2)[0])
    out = {
        "config": settings.as_dict(),
        "snr_db": cfg.snr_db,
        "ebn0_db": ebn0_db(cfg) if cfg.snr > 0 else -math.inf,
        "entropy_bits": entropy_bits(cfg.v, cfg.M),
        "xi": cfg.xi,
        "sigma_y2": cfg.sigma_y2,
        "tau": tau,
        "results": {},
    }
    for engine in settings.engine.parts():
        out["results"][engine.value] = _report_fields(evaluate(settings, engine))
    return out


# -- sweeps ------------------------------------------------------------------


@dataclass(frozen=True)
class Curve:
    """Setting overrides defining one curve, e.g. ``(("v", 0.5), ("L", 8))``."""

    changes: tuple

    @classmethod
    def parse(cls, text: str) -> "Curve":
        pairs = []
        for item in filter(None, (p.strip() for p in text.replace(";", ",").split(","))):
            if "=" not in item:
                raise ConfigError(f"curve entry {item!r} is not key=value")
            key, value = (s.strip() for s in item.split("=", 1))
            pairs.append((key, value))
        return cls(tuple(pairs))

    @property
    def curve_id(self) -> str:
        if not self.changes:
            return "base"
        return ";".join(f"{k}={_short(v)}" for k, v in self.changes)


def _short(value) -> str:
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, float):
        return format_value(value)
    return str(value)


@dataclass(frozen=True)
class SweepSpec:
    """A grid of operating points: ``points`` axis values times ``curves``."""

    base: dict
    axis: Axis
    start: float
    stop: float
    points: int
    curves: tuple = (Curve(()),)
    engine: Engine = Engine.ANALYTIC

    def __post_init__(self):
        object.__setattr__(self, "axis", Axis(self.axis))
        object.__setattr__(self, "engine", Engine(self.engine))
        if int(self.points) != self.points or self.points < 2:
            raise ConfigError(f"a sweep needs at least 2 points, got {self.points}", field="points")
        if self.start == self.stop:
            raise ConfigError("sweep endpoints must differ", field="range")
        if self.axis is Axis.DUTY_CYCLE:
            for end in (self.start, self.stop):
                if not (0.0 < end <= 1.0):
                    raise ConfigError(f"duty-cycle range must lie in (0, 1], got {end}",
                                      field="range")

    def axis_values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, int(self.points))

    def settings_at(self, x: float, curve: Curve) -> Settings:
        mapping = dict(self.base)
        for key, value in curve.changes:
            if key in ("snr_db", "ebn0_db"):
                mapping.pop("snr_db", None)
                mapping.pop("ebn0_db", None)
            mapping[key] = value
        if self.axis is not Axis.DUTY_CYCLE:
            mapping.pop("snr_db", None)
            mapping.pop("ebn0_db", None)
        mapping[self.axis.value] = float(x)
        return settings_from_mapping(mapping)


@dataclass(frozen=True)
class SweepRow:
    axis: float
    curve_id: str
    engine: Engine
    report: ErrorReport


def _evaluate_job(job):
    settings, engine = job
    return evaluate(settings, engine)


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[SweepRow]:
    """Evaluate every (axis point, curve, engine) combination.

    Rows come back axis-major, then curve, then engine. All settings are
    validated before any work starts. Every curve at a given axis point
    uses the same seed, so simulated curves share their random numbers.
    """
    labels, jobs = [], []
    for x in spec.axis_values():
        for curve in spec.curves:
            settings = spec.settings_at(x, curve)
            for engine in spec.engine.parts():
                if engine is Engine.ANALYTIC and settings.config.rho != 0.0:
                    raise ConfigError("analytical results need independent antennas (rho = 0); "
                                      "use engine = simulate", field="rho")
                labels.append((float(x), curve.curve_id, engine))
                jobs.append((settings, engine))
    if workers <= 1:
        reports = [_evaluate_job(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_evaluate_job, jobs))
    return [SweepRow(x, cid, eng, rep) for (x, cid, eng), rep in zip(labels, reports)]


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def sweep_csv(rows: list[SweepRow]) -> str:
    """CSV text with LF line endings and 12 significant digits."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        r = row.report
        writer.writerow([_fmt(row.axis), row.curve_id, _fmt(r.pe), _fmt(r.pc1), _fmt(r.pc0),
                         _fmt(r.stderr), row.engine.value])
    return buf.getvalue()


def read_sweep_csv(text: str) -> list[dict]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_HEADER:
        raise ConfigError(f"not a sweep CSV (header {reader.fieldnames})")
    rows = []
    for rec in reader:
        rows.append({
            "axis": float(rec["axis"]), "curve_id": rec["curve_id"], "pe": float(rec["pe"]),
            "pc1": float(rec["pc1"]), "pc0": float(rec["pc0"]),
            "stderr": float(rec["stderr"]), "engine": rec["engine"],
        })
    return rows


# -- crossovers ----------------------------------------------------------------


@dataclass(frozen=True)
class Crossover:
    """Axis values where ``pe_a - pe_b`` changes sign."""

    points: tuple

    @property
    def ambiguous(self) -> bool:
        return len(self.points) > 1

    @property
    def value(self) -> float | None:
        return self.points[0] if len(self.points) == 1 else None


def crossover(axis, pe_a, pe_b) -> Crossover:
    """Locate sign changes of ``pe_a - pe_b`` by linear interpolation of
    ``log10 pe`` against the axis.

    Points where either curve is zero or undefined are skipped. A run of
    exact ties between opposite signs counts as one crossing at its middle;
    identical curves have no crossing.
    """
    axis = np.asarray(axis, dtype=float)
    a = np.asarray(pe_a, dtype=float)
    b = np.asarray(pe_b, dtype=float)
    if not (axis.shape == a.shape == b.shape) or axis.ndim != 1:
        raise ValueError("axis and both curves must be 1-D arrays of equal length")
    order = np.argsort(axis, kind="stable")
    axis, a, b = axis[order], a[order], b[order]
    ok = (a > 0) & (b > 0) & np.isfinite(a) & np.isfinite(b)
    axis, a, b = axis[ok], a[ok], b[ok]
    d = np.log10(a) - np.log10(b)
    nonzero = np.nonzero(d != 0.0)[0]
    found = []
    for i, j in zip(nonzero[:-1], nonzero[1:]):
        if np.sign(d[i]) == np.sign(d[j]):
            continue
        if j == i + 1:
            found.append(float(axis[i] + (axis[j] - axis[i]) * d[i] / (d[i] - d[j])))
        else:
            found.append(float(0.5 * (axis[i + 1] + axis[j - 1])))
    return Crossover(tuple(found))


# -- figure presets ------------------------------------------------------------

FIGURES = (1, 2, 3, 4, 5, 6)


def _grid(*axes):
    out = [()]
    for key, values in axes:
        out = [prev + ((key, v),) for prev in out for v in values]
    return tuple(Curve(c) for c in out)


def figure_spec(number: int, trials: int | None = None, seed: int = 0,
                points: int | None = None) -> SweepSpec:
    """Sweep reproducing one of the six published error-rate figures.

    All presets use the unit-diffuse normalization (``sigma^2 = 1``,
    ``|d|^2 = K``), the convention under which the published crossover
    and duty-cycle numbers are reproduced. Figures 3 and 5 are simulated
    at ``trials`` per point (default 10^6), auto-extending up to 4x to
    collect 100 errors.
    """
    trials = 10**6 if trials is None else int(trials)
    common = {"normalization": "unit_diffuse", "seed": seed, "trials": trials,
              "max_trials": 4 * trials}
    duty = (0.1, 0.2, 0.5, 0.8, 1.0)
    if number in (1, 4):
        knowledge = "distribution" if number == 1 else "magnitude"
        base = {"M": 8, "v": 1.0, "L": 2, "K": 1.0, "ebn0_db": 0.0, "knowledge": knowledge, **common}
        return SweepSpec(base, Axis.EBN0_DB, -10.0, 15.0, points or 26,
                         _grid(("L", (2, 8)), ("v", duty)))
    if number == 2:
        base = {"M": 8, "v": 1.0, "L": 2, "K": 1.0, "snr_db": 0.0, **common}
        return SweepSpec(base, Axis.DUTY_CYCLE, 0.02, 1.0, points or 50,
                         _grid(("K", (1.0, 4.0)), ("snr_db", (0.0, 5.0))))
    if number in (3, 5):
        knowledge = "distribution" if number == 3 else "magnitude"
        base = {"M": 4, "v": 1.0, "L": 2, "K": "1/8", "snr_db": 0.0, "knowledge": knowledge,
                **common}
        return SweepSpec(base, Axis.SNR_DB, -10.0, 20.0, points or 16,
                         _grid(("rho", ("1/4", 0.0)), ("v", (0.2, 0.5, 0.8, 1.0))),
                         engine=Engine.SIMULATE)
    if number == 6:
        base = {"M": 8, "v": 1.0, "L": 2, "K": 0.0, "ebn0_db": 0.0, **common}
        return SweepSpec(base, Axis.EBN0_DB, -10.0, 20.0, points or 31,
                         _grid(("v", (0.5, 0.1)), ("knowledge", ("magnitude", "distribution"))))
    raise ConfigError(f"no figure preset {number}; choose from 1-6", field="figure")
