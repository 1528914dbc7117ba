"""Command-line entry point: config files, figure recipes and CSV output.

Usage::

    bd2d sweep-epsilon scenario.cfg --eps 10:100:10 -o clusters.csv
    bd2d availability scenario.cfg --sweep n_nodes=200,500,1000 -o avail.csv
    bd2d optimize scenario.cfg --bruteforce --grid-step 0.25
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import logging
import sys

import numpy as np

from .availability import (
    BRUTEFORCE_MAX_CATALOG,
    Intensity,
    ObjectiveSpec,
    objective_value,
    optimize_bruteforce,
    optimize_greedy,
)
from .clustering import sweep_epsilon
from .popularity import zipf_pmf
from .simulation import (
    SWEEP_AXES,
    ScenarioConfig,
    replication_points,
    run_sweep,
    run_experiment,
    write_results_csv,
)

log = logging.getLogger("bd2d")

FIELDS = {f.name: f for f in dataclasses.fields(ScenarioConfig)}
_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


class ConfigError(ValueError):
    pass


def _coerce(key, raw):
    default = FIELDS[key].default
    if isinstance(default, bool):
        v = raw.lower()
        if v in _TRUE:
            return True
        if v in _FALSE:
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def parse_config(text: str) -> ScenarioConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment. Missing keys take defaults."""
    values, where = {}, {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _coerce(key, raw)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {key}: {exc}") from None
        where[key] = lineno
    return _build(values, where)


def _build(values, where=None):
    try:
        return ScenarioConfig(**values)
    except ValueError as exc:
        msg = str(exc)
        for key, lineno in (where or {}).items():
            if msg.startswith(key) or f"({key}" in msg:
                raise ConfigError(f"line {lineno}: {msg}") from None
        raise ConfigError(msg) from None


def render_config(cfg: ScenarioConfig) -> str:
    lines = []
    for name in FIELDS:
        v = getattr(cfg, name)
        if isinstance(v, bool):
            v = "true" if v else "false"
        elif isinstance(v, float):
            v = repr(v)
        lines.append(f"{name} = {v}")
    return "\n".join(lines) + "\n"


def parse_range(spec: str) -> list[float]:
    """``start:stop:step`` with both ends inclusive."""
    try:
        start, stop, step = (float(p) for p in spec.split(":"))
    except ValueError:
        raise ValueError(f"range must be start:stop:step, got {spec!r}") from None
    if start < 1:
        raise ValueError("range start must be >= 1")
    if step <= 0:
        raise ValueError("range step must be positive")
    if stop < start:
        raise ValueError(f"range {spec!r} is descending")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(count)]


def parse_sweep(spec: str):
    axis, sep, raw = spec.partition("=")
    axis = axis.strip()
    if not sep or not raw.strip():
        raise ValueError(f"sweep must be axis=v1,v2,..., got {spec!r}")
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; expected one of {sorted(SWEEP_AXES)}")
    field = SWEEP_AXES[axis]
    return axis, [_coerce(field, v.strip()) for v in raw.split(",")]


def _load(args) -> ScenarioConfig:
    with open(args.config) as fh:
        cfg = parse_config(fh.read())
    if args.set:
        overrides = {}
        for item in args.set:
            key, sep, raw = item.partition("=")
            key = key.strip()
            if not sep or key not in FIELDS:
                raise ConfigError(f"--set: bad override {item!r}")
            try:
                overrides[key] = _coerce(key, raw.strip())
            except ValueError as exc:
                raise ConfigError(f"--set {key}: {exc}") from None
        cfg = _build({**dataclasses.asdict(cfg), **overrides})
    return cfg


def _emit(text: str, path: str | None):
    if path in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def cmd_sweep_epsilon(args) -> int:
    cfg = _load(args)
    eps = parse_range(args.eps)
    rows = []
    sweep_epsilon(lambda r: replication_points(cfg, r), eps, cfg.min_bsn,
                  cfg.replications, per_replication=rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["epsilon_m", "replication", "n_clusters", "n_outliers"])
    for e, r, k, o in rows:
        w.writerow([format(e, "g"), r, k, o])
    _emit(buf.getvalue(), args.output)
    return 0


def cmd_availability(args) -> int:
    cfg = _load(args)
    if args.sweep:
        axis, values = parse_sweep(args.sweep)
        results = run_sweep(cfg, axis, values, args.workers)
    else:
        results = [run_experiment(cfg, args.workers)]
    for res in results:
        log.info("%s n=%d beta_pop=%g S_t=%g eps=%g: availability %.4f, self %.4f",
                 res.config.policy, res.config.n_nodes, res.config.beta_pop,
                 res.config.segment_s, res.config.epsilon_max,
                 res.mean_availability, res.mean_self_request)
    _emit(write_results_csv(results), args.output)
    return 0


def objective_spec(cfg: ScenarioConfig) -> ObjectiveSpec:
    """Objective for a scenario: one request per node, capacity in segments."""
    density = cfg.n_nodes / cfg.area.size
    return ObjectiveSpec(
        request=zipf_pmf(cfg.catalog_size, cfg.beta_req),
        requests=cfg.n_nodes,
        intensity=Intensity(density, cfg.epsilon_max),
        capacity=cfg.cache_capacity_s / cfg.segment_s,
    )


def cmd_optimize(args) -> int:
    cfg = _load(args)
    spec = objective_spec(cfg)
    if args.bruteforce and cfg.catalog_size > BRUTEFORCE_MAX_CATALOG:
        raise ConfigError(
            f"--bruteforce refused: catalog_size={cfg.catalog_size} exceeds "
            f"{BRUTEFORCE_MAX_CATALOG}")
    greedy = optimize_greedy(spec)
    cols = [greedy]
    if args.bruteforce:
        cols.append(optimize_bruteforce(spec, args.grid_step))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rank", "Q"] + (["Q_bruteforce"] if args.bruteforce else []))
    for i in range(cfg.catalog_size):
        w.writerow([i + 1] + [repr(float(c[i])) for c in cols])
    w.writerow(["objective"] + [repr(objective_value(c, spec)) for c in cols])
    _emit(buf.getvalue(), args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bd2d", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("config", help="scenario file of 'key = value' lines")
        sp.add_argument("-o", "--output", default="-", help="output CSV path (default stdout)")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config key; may repeat")
        sp.add_argument("-v", "--verbose", action="store_true", help="log per-experiment means")

    sp = sub.add_parser("sweep-epsilon", help="cluster and outlier counts versus epsilon")
    common(sp)
    sp.add_argument("--eps", required=True, help="start:stop:step in meters, inclusive")
    sp.set_defaults(func=cmd_sweep_epsilon)

    sp = sub.add_parser("availability", help="availability and self-request ratios")
    common(sp)
    sp.add_argument("--sweep", help="axis=v1,v2,... over one scenario parameter")
    sp.add_argument("--workers", type=int, default=None,
                    help="parallel replications (default: B2D2D_THREADS or CPU count)")
    sp.set_defaults(func=cmd_availability)

    sp = sub.add_parser("optimize", help="greedy (and brute-force) cache probabilities")
    common(sp)
    sp.add_argument("--bruteforce", action="store_true")
    sp.add_argument("--grid-step", type=float, default=0.25)
    sp.set_defaults(func=cmd_optimize)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"bd2d: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"bd2d: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
