"""Command-line front end: ``msfq <command> [--config FILE] [--set key=value ...]``.

Exit codes: 0 ok, 1 validate failure, 2 config error, 3 numerical error,
4 oracle FAIL.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__, bloch, checks, coherent, sweep
from .errors import ConfigError, DomainError, NumericalError
from .params import SensorConfig, derive
from .rwa import DEFAULT_EPSILON, rwa_ratios

EXIT_OK, EXIT_VALIDATE, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_ORACLE = 0, 1, 2, 3, 4
COMMANDS = ("derive", "coherent", "bloch", "rwa-map", "sweep", "oracle", "validate")

SWEEP_KEYS = {f.name for f in dataclasses.fields(sweep.SweepSpec)} - {"fixed", "epsilon", "threads"}
SERIES_DEFAULTS = {"periods": 6.0, "points": 301}


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def load_config(path) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must be a mapping at top level")
    return doc


def apply_override(doc: dict, item: str) -> None:
    """Apply one ``dotted.key=value`` assignment in place; the value is parsed as YAML."""
    key, sep, raw = item.partition("=")
    if not sep or not key:
        raise ConfigError(f"--set expects key=value, got {item!r}")
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{key}: cannot parse value {raw!r}") from exc
    parts = key.split(".")
    node = doc
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError(f"{key}: {p} is not a section")
    node[parts[-1]] = value


def _number(key: str, v, allow_none: bool = False):
    if v is None and allow_none:
        return None
    if isinstance(v, str):
        # PyYAML reads exponent-only forms such as 1e-3 as strings
        try:
            return float(v)
        except ValueError:
            raise ConfigError(f"{key}: expected a number, got {v!r}") from None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {v!r}")
    return float(v)


def sensor_from_doc(doc: dict) -> SensorConfig:
    fields = SensorConfig.field_names()
    values = {}
    for k, v in doc.items():
        if k in ("sweep", "series"):
            continue
        if k not in fields:
            raise ConfigError(f"unknown key {k!r}; allowed: {', '.join(fields + ['sweep', 'series'])}")
        values[k] = _number(k, v, allow_none=(k == "pump_ratio"))
    return SensorConfig(**values)


def _sweep_from_doc(doc: dict, cfg: SensorConfig, epsilon: float, threads: int) -> sweep.SweepSpec:
    sec = doc.get("sweep") or {}
    if not isinstance(sec, dict):
        raise ConfigError("sweep: expected a mapping")
    kwargs = {}
    for k, v in sec.items():
        key = f"sweep.{k}"
        if k not in SWEEP_KEYS:
            raise ConfigError(f"unknown key {key!r}; allowed: {', '.join(sorted(SWEEP_KEYS))}")
        if k in ("figure", "out"):
            kwargs[k] = str(v)
        elif k in ("gamma0_set", "r_curves"):
            if not isinstance(v, (list, tuple)):
                v = [v]
            kwargs[k] = tuple(_number(key, x) for x in v)
        elif k in ("n_time", "r_opt_points"):
            if isinstance(v, bool) or not isinstance(v, int):
                raise ConfigError(f"{key}: expected an integer, got {v!r}")
            kwargs[k] = v
        elif k == "axes":
            if not isinstance(v, dict):
                raise ConfigError("sweep.axes: expected a mapping")
            axes = {}
            for name, ax in v.items():
                if not isinstance(ax, dict):
                    raise ConfigError(f"sweep.axes.{name}: expected a mapping")
                axes[name] = {}
                for kk, vv in ax.items():
                    path = f"sweep.axes.{name}.{kk}"
                    if kk == "scale":
                        axes[name][kk] = str(vv)
                    elif kk == "points":
                        axes[name][kk] = int(_number(path, vv))
                    else:
                        axes[name][kk] = _number(path, vv)
            kwargs["axes"] = axes
        else:
            kwargs[k] = _number(key, v)
    return sweep.SweepSpec(fixed=cfg, epsilon=epsilon, threads=threads, **kwargs)


def _series_from_doc(doc: dict) -> dict:
    sec = dict(SERIES_DEFAULTS)
    for k, v in (doc.get("series") or {}).items():
        if k not in SERIES_DEFAULTS:
            raise ConfigError(f"unknown key 'series.{k}'; allowed: periods, points")
        sec[k] = _number(f"series.{k}", v)
    if sec["periods"] <= 0 or int(sec["points"]) < 2:
        raise ConfigError("series: need periods > 0 and points >= 2")
    sec["points"] = int(sec["points"])
    return sec


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, float, np.integer, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


def _emit(text: str, out) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_rows(columns, rows, out, fmt: str) -> None:
    if fmt == "json":
        text = json.dumps({"columns": list(columns), "rows": _jsonable(rows)}, indent=1) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        w.writerows([[repr(float(x)) for x in row] for row in rows])
        text = buf.getvalue()
    _emit(text, out)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_derive(cfg, doc, args) -> int:
    p = derive(cfg)
    out = p.as_dict()
    out.update(p.scaled())
    if p.D > 0:
        rep = rwa_ratios(p.D, p.r, p.omega_b, args.epsilon)
        out.update(rwa_ratios=list(rep.ratios), rwa_max_ratio=rep.max_ratio, rwa_valid=rep.valid)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in out.items():
            w.writerow([k, json.dumps(_jsonable(v))])
        _emit(buf.getvalue(), args.out)
    else:
        _emit(json.dumps(_jsonable(out), indent=1) + "\n", args.out)
    return EXIT_OK


def _time_grid(omega_b: float, series: dict) -> np.ndarray:
    return np.linspace(0.0, series["periods"] * math.pi / omega_b, series["points"])


def cmd_coherent(cfg, doc, args) -> int:
    p = derive(cfg)
    rp = coherent.RabiParams(p.omega_b, p.Omega_g)
    ts = _time_grid(p.omega_b, _series_from_doc(doc))
    P = coherent.excited_population(rp, ts)
    fq = coherent.qfi_exact(rp, p.kappa_g, ts)
    fc = coherent.cfi_population_exact(rp, p.kappa_g, ts)
    fw = coherent.qfi_weak(p.m, p.omega, p.r, p.omega_b, ts)
    rows = list(zip(ts, ts * p.omega_b, P, fq, fc, fw))
    _emit_rows(("t", "omega_b_t", "P1", "F_Q", "F_C", "F_Q_weak"), rows, args.out, args.format)
    return EXIT_OK


def cmd_bloch(cfg, doc, args) -> int:
    p = derive(cfg)
    d = bloch.drift_matrix(p.omega_b, p.Omega_g, p.gamma0, p.r)
    ts = _time_grid(p.omega_b, _series_from_doc(doc))
    _emit_rows(bloch.TIME_SERIES_COLUMNS, bloch.time_series(d, p.kappa_g, ts), args.out, args.format)
    return EXIT_OK


def cmd_rwa_map(cfg, doc, args) -> int:
    spec = _sweep_from_doc(doc, cfg, args.epsilon, args.threads)
    spec.out = args.out or spec.out
    for t in sweep.figA1_data(spec):
        print(sweep.write_table(t, spec.out, args.format))
    return EXIT_OK


def cmd_sweep(cfg, doc, args) -> int:
    spec = _sweep_from_doc(doc, cfg, args.epsilon, args.threads)
    if args.figure:
        spec.figure = args.figure
        spec.__post_init__()
    spec.out = args.out or spec.out
    for path in sweep.run_sweep(spec, args.format):
        print(path)
    return EXIT_OK


def _report(results, out) -> bool:
    ok = all(r.passed for r in results)
    doc = {"status": "PASS" if ok else "FAIL", "checks": [r.as_dict() for r in results]}
    _emit(json.dumps(_jsonable(doc), indent=1) + "\n", out)
    return ok


def cmd_oracle(cfg, doc, args) -> int:
    return EXIT_OK if _report(checks.run_oracle(), args.out) else EXIT_ORACLE


def cmd_validate(cfg, doc, args) -> int:
    return EXIT_OK if _report(checks.run_validate(), args.out) else EXIT_VALIDATE


HANDLERS = {"derive": cmd_derive, "coherent": cmd_coherent, "bloch": cmd_bloch,
            "rwa-map": cmd_rwa_map, "sweep": cmd_sweep, "oracle": cmd_oracle,
            "validate": cmd_validate}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="msfq",
        description="Squeezed-Fock-qubit gravimeter: derived parameters, Fisher information, "
                    "RWA maps, figure tables and brute-force oracles.",
        epilog="Exit codes: 0 ok, 1 validate failure, 2 config error, 3 numerical error, "
               "4 oracle FAIL.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("command", choices=COMMANDS, help="what to run")
    parser.add_argument("--config", metavar="PATH",
                        help="YAML file: SensorConfig fields at top level plus optional "
                             "'sweep' and 'series' sections")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config entry; dotted keys reach sections, e.g. r=0.5 or "
                             "sweep.figure=fig2 (repeatable)")
    parser.add_argument("--out", metavar="PATH",
                        help="output file (derive, coherent, bloch, oracle, validate) or directory "
                             "(rwa-map, sweep); default stdout or the configured sweep.out")
    parser.add_argument("--format", choices=("csv", "json"), default=None,
                        help="output format (default: json for derive, csv otherwise)")
    parser.add_argument("--threads", type=int, default=1, metavar="N",
                        help="worker threads for sweeps (default 1)")
    parser.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON, metavar="E",
                        help=f"RWA validity threshold (default {DEFAULT_EPSILON})")
    parser.add_argument("--figure", choices=sweep.FIGURES + ("all",),
                        help="sweep only: figure to regenerate (overrides sweep.figure)")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.format is None:
        args.format = "json" if args.command == "derive" else "csv"
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        if not args.epsilon > 0:
            raise ConfigError("--epsilon must be positive")
        doc = load_config(args.config)
        for item in args.overrides:
            apply_override(doc, item)
        cfg = sensor_from_doc(doc)
        # reject bad sections up front whichever command runs
        _sweep_from_doc(doc, cfg, args.epsilon, args.threads)
        _series_from_doc(doc)
        return HANDLERS[args.command](cfg, doc, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, DomainError) as exc:
        print(f"numerical error in {args.command} ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
