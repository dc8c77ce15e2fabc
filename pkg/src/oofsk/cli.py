"""Command-line front-end.

    oofsk point [CONFIG] [--set key=value ...] [--json]
    oofsk sweep CONFIG --axis ebn0_db --range -10 15 26 --curve v=0.5 --curve v=1 [-o out.csv]
    oofsk figure N [-o out.csv] [--trials T] [--seed S] [--points P]
    oofsk crossover RESULTS.csv --a CURVE --b CURVE [--engine analytic]

Exit status is 0 on success, 2 for configuration or usage errors (the
message names the offending setting) and 3 when a numerical routine fails.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from .errors import ConfigError, NumericError
from .experiment import (
    Axis,
    Curve,
    Engine,
    SweepSpec,
    crossover,
    figure_spec,
    parse_settings,
    read_sweep_csv,
    report_point,
    run_sweep,
    sweep_csv,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
# results never depend on the worker count, so use every core by default
DEFAULT_WORKERS = os.cpu_count() or 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _overrides(items) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"expected key=value, got {item!r}")
        key, value = (s.strip() for s in item.split("=", 1))
        out[key] = value
    return out


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None


def _write_text(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc.strerror}", field="output") from None


def _json_float(x):
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    return _json_float(obj)


def _print_report(rep: dict) -> None:
    cfg = rep["config"]
    print("config:  " + ", ".join(f"{k}={v}" for k, v in cfg.items()))
    for key in ("snr_db", "ebn0_db", "entropy_bits", "xi", "sigma_y2", "tau"):
        print(f"{key:<13}{rep[key]:.12g}")
    for engine, res in rep["results"].items():
        line = "  ".join(f"{k}={v:.12g}" for k, v in res.items())
        print(f"{engine:<13}{line}")


def cmd_point(args) -> int:
    text = _read_text(args.config) if args.config else ""
    settings = parse_settings(text, _overrides(args.set))
    rep = report_point(settings)
    if args.json:
        print(json.dumps(_jsonable(rep), indent=2))
    else:
        _print_report(rep)
    return EXIT_OK


def _check_workers(n: int) -> None:
    if n < 1:
        raise ConfigError(f"workers must be positive, got {n}", field="workers")


def cmd_sweep(args) -> int:
    _check_workers(args.workers)
    settings = parse_settings(_read_text(args.config), _overrides(args.set))
    start, stop, points = args.range
    engine = Engine(args.engine) if args.engine else settings.engine
    curves = tuple(Curve.parse(c) for c in args.curve) or (Curve(()),)
    spec = SweepSpec(settings.as_dict(), Axis(args.axis), float(start), float(stop),
                     _points(points), curves, engine)
    _write_text(args.output, sweep_csv(run_sweep(spec, workers=args.workers)))
    return EXIT_OK


def _points(text) -> int:
    value = float(text)
    if value != int(value):
        raise ConfigError(f"points must be an integer, got {text}", field="points")
    return int(value)


def cmd_figure(args) -> int:
    _check_workers(args.workers)
    spec = figure_spec(args.number, trials=args.trials, seed=args.seed, points=args.points)
    _write_text(args.output, sweep_csv(run_sweep(spec, workers=args.workers)))
    return EXIT_OK


def cmd_crossover(args) -> int:
    rows = read_sweep_csv(_read_text(args.results))
    curves = {}
    for row in rows:
        if row["engine"] == args.engine:
            curves.setdefault(row["curve_id"], {})[row["axis"]] = row["pe"]
    for name in (args.a, args.b):
        if name not in curves:
            raise ConfigError(f"no curve {name!r} with engine {args.engine} in {args.results}",
                              field="curve")
    axis = sorted(set(curves[args.a]) & set(curves[args.b]))
    result = crossover(axis, [curves[args.a][x] for x in axis], [curves[args.b][x] for x in axis])
    if not result.points:
        print("none")
    for x in result.points:
        print(f"{x:.12g}")
    if result.ambiguous:
        print(f"ambiguous: {len(result.points)} crossings", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="oofsk", description="OOFSK error-rate analysis and simulation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("point", help="report a single operating point")
    p.add_argument("config", nargs="?", help="settings file (key = value lines), '-' for stdin")
    p.add_argument("-s", "--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override one setting; repeat for more")
    p.add_argument("--json", action="store_true", help="print a JSON report")
    p.set_defaults(func=cmd_point)

    p = sub.add_parser("sweep", help="sweep one axis and write CSV")
    p.add_argument("config")
    p.add_argument("-s", "--set", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--axis", required=True, choices=[a.value for a in Axis])
    p.add_argument("--range", required=True, nargs=3, metavar=("START", "STOP", "POINTS"),
                   type=float)
    p.add_argument("--curve", action="append", default=[],
                   help="comma-separated overrides for one curve; repeat for more")
    p.add_argument("--engine", choices=[e.value for e in Engine])
    p.add_argument("-o", "--output")
    p.add_argument("--workers", type=int, default=DEFAULT_WORKERS)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("figure", help="run a figure preset and write CSV")
    p.add_argument("number", type=int, choices=range(1, 7))
    p.add_argument("-o", "--output")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--points", type=int)
    p.add_argument("--workers", type=int, default=DEFAULT_WORKERS)
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("crossover", help="find where two curves of a sweep CSV cross")
    p.add_argument("results")
    p.add_argument("--a", required=True, help="curve_id of the first curve")
    p.add_argument("--b", required=True, help="curve_id of the second curve")
    p.add_argument("--engine", default="analytic")
    p.set_defaults(func=cmd_crossover)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        where = f" [{exc.field}]" if exc.field else ""
        print(f"oofsk: configuration error{where}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"oofsk: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
