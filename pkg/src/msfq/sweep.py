"""Tabulated data for the sensitivity, decoherence, RWA and readout-angle figures.

Each panel becomes one :class:`Table`; :func:`write_table` emits it as CSV
with a ``#``-prefixed YAML-style header holding the fixed parameters, or as
JSON. Float formatting uses ``repr`` so repeated runs are byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
import dataclasses
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import bloch, coherent
from .errors import ConfigError
from .params import (SensorConfig, anharmonicity, critical_duffing, gravity_coupling,
                     omega_b_from_fraction)
from .rwa import DEFAULT_EPSILON, grid_ratios, rwa_boundary, rwa_ratios

FIGURES = ("fig1", "fig2", "figA1", "figC1")
SENS_UNIT = "m s^-2 s^1/2"


@dataclass(frozen=True)
class GridAxis:
    name: str
    min: float
    max: float
    points: int
    scale: str = "linear"

    def __post_init__(self):
        if self.name not in SensorConfig.field_names():
            raise ConfigError(f"axis {self.name!r}: not a SensorConfig field")
        if self.points < 2:
            raise ConfigError(f"axis {self.name}: points must be >= 2, got {self.points}")
        if self.scale not in ("linear", "log"):
            raise ConfigError(f"axis {self.name}: scale must be 'linear' or 'log'")
        if self.scale == "log" and self.min <= 0:
            raise ConfigError(f"axis {self.name}: log scale needs min > 0")
        if not self.max > self.min:
            raise ConfigError(f"axis {self.name}: need max > min")

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.min, self.max, self.points)
        return np.linspace(self.min, self.max, self.points)


DEFAULT_AXES = {
    "fig1": {"r": GridAxis("r", 0.0, 1.4, 57), "d_frac": GridAxis("d_frac", 0.0, 0.999, 38)},
    "fig2": {"r": GridAxis("r", 0.0, 3.0, 61)},
    "figA1": {"r": GridAxis("r", 0.0, 2.0, 41), "d_frac": GridAxis("d_frac", 0.0, 0.95, 39)},
    "figC1": {"r": GridAxis("r", 0.1, 1.4, 14),
              "gamma0_ratio": GridAxis("gamma0_ratio", 1e-5, 5e-3, 7, "log")},
}


@dataclass
class SweepSpec:
    """What to compute and where to put it.

    ``axes`` maps a SensorConfig field name to a :class:`GridAxis` or to a
    partial dict of its fields; either overrides the per-figure defaults in
    :data:`DEFAULT_AXES`.
    ``gamma0_set`` lists the damping rates (in units of omega) of the
    decoherence panels; ``n_time`` is the number of time samples per curve.
    """

    figure: str = "fig1"
    axes: dict = field(default_factory=dict)
    fixed: SensorConfig = field(default_factory=SensorConfig)
    out: str = "sweep_out"
    gamma0_set: tuple = (1e-4, 1e-3, 5e-3)
    r_curves: tuple = (0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4)
    n_time: int = 301
    r_opt_min: float = 0.1
    r_opt_max: float = 1.4
    r_opt_points: int = 27
    epsilon: float = DEFAULT_EPSILON
    threads: int = 1

    def __post_init__(self):
        if self.figure not in FIGURES + ("all",):
            raise ConfigError(f"figure: expected one of {FIGURES + ('all',)}, got {self.figure!r}")
        for name, ax in self.axes.items():
            if isinstance(ax, GridAxis):
                continue
            if name not in SensorConfig.field_names():
                raise ConfigError(f"axis {name!r}: not a SensorConfig field")
            bad = set(ax) - {"min", "max", "points", "scale"}
            if bad:
                raise ConfigError(f"axis {name}: unknown keys {sorted(bad)}")
            probe = {"min": 0.5, "max": 1.0, "points": 2, **ax}
            GridAxis(name, probe["min"], probe["max"], probe["points"], probe.get("scale", "linear"))
        if self.n_time < 2 or self.r_opt_points < 2:
            raise ConfigError("n_time and r_opt_points must be >= 2")
        if any(g < 0 for g in self.gamma0_set):
            raise ConfigError("gamma0_set entries must be >= 0")
        if not self.epsilon > 0:
            raise ConfigError("epsilon must be positive")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")

    def axis(self, figure: str, name: str) -> np.ndarray:
        """Grid of ``name`` for ``figure``; partial overrides fill in from the defaults."""
        ax = self.axes.get(name)
        if not isinstance(ax, GridAxis):
            ax = dataclasses.replace(DEFAULT_AXES[figure][name], **(ax or {}))
        return ax.values()


@dataclass
class Table:
    name: str
    columns: list  # (name, unit) pairs
    rows: list
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        i = [c for c, _ in self.columns].index(name)
        return np.array([row[i] for row in self.rows], dtype=float)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _yaml_scalar(x) -> str:
    if x is None:
        return "null"
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_yaml_scalar(v) for v in x) + "]"
    return str(x)


def to_csv(t: Table) -> str:
    buf = io.StringIO()
    buf.write(f"# table: {t.name}\n")
    for k, v in t.meta.items():
        if isinstance(v, dict):
            buf.write(f"# {k}:\n")
            for kk, vv in v.items():
                buf.write(f"#   {kk}: {_yaml_scalar(vv)}\n")
        else:
            buf.write(f"# {k}: {_yaml_scalar(v)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"{c} [{u}]" if u else c for c, u in t.columns])
    for row in t.rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def to_json(t: Table) -> str:
    def clean(x):
        if isinstance(x, (bool, np.bool_)):
            return bool(x)
        x = float(x)
        return x if math.isfinite(x) else str(x)

    doc = {"table": t.name, "meta": t.meta,
           "columns": [{"name": c, "unit": u} for c, u in t.columns],
           "rows": [[clean(x) for x in row] for row in t.rows]}
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


def write_table(t: Table, out_dir, fmt: str = "csv") -> Path:
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {fmt!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{t.name}.{fmt}"
    path.write_text(to_csv(t) if fmt == "csv" else to_json(t))
    return path


def _pmap(fn, items, threads: int) -> list:
    items = list(items)
    if threads <= 1:
        return [fn(x) for x in items]
    # map() keeps input order, so output does not depend on scheduling
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def _meta(spec: SensorConfig, **extra) -> dict:
    return {"fixed": asdict(spec), **extra}


def _valid(r: float, d_frac: float, eps: float) -> bool:
    return max(grid_ratios(r, d_frac)) < eps


# ---------------------------------------------------------------------------
# coherent panels
# ---------------------------------------------------------------------------


def fig1_data(spec: SweepSpec) -> list[Table]:
    cfg = spec.fixed
    delta = cfg.delta_ratio * cfg.omega
    mq, mcq = coherent.benchmarks(cfg.m, cfg.omega, 10)
    eps = spec.epsilon

    def dg(r, d):
        wb = omega_b_from_fraction(delta, r, d)
        return coherent.sensitivity_coherent(cfg.m, cfg.omega, r, wb)[1]

    rows_a = [(r, dg(r, cfg.d_frac), mq, mcq, max(grid_ratios(r, cfg.d_frac)), _valid(r, cfg.d_frac, eps))
              for r in spec.axis("fig1", "r")]
    a = Table("fig1a", [("r", ""), ("sqrtT_dg", SENS_UNIT), ("mq", SENS_UNIT), ("mcq_N10", SENS_UNIT),
                        ("max_ratio", ""), ("rwa_valid", "")], rows_a,
              _meta(cfg, epsilon=eps))

    dfr = spec.axis("fig1", "d_frac")
    rows_b, rows_c, rows_d = [], [], []
    for r in spec.r_curves:
        D_crit = critical_duffing(delta, delta * math.tanh(2 * r), r) if r > 0 else math.inf
        for d in dfr:
            ok = _valid(r, d, eps)
            rows_b.append((r, d, dg(r, d), ok))
            rows_c.append((r, d, omega_b_from_fraction(delta, r, d) / cfg.omega, ok))
            ub = anharmonicity(d * D_crit, r) / cfg.omega if r > 0 else math.nan
            rows_d.append((r, d, ub, ok))
    meta = _meta(cfg, epsilon=eps)
    b = Table("fig1b", [("r", ""), ("d_frac", ""), ("sqrtT_dg", SENS_UNIT), ("rwa_valid", "")], rows_b, meta)
    c = Table("fig1c", [("r", ""), ("d_frac", ""), ("omega_b_over_omega", ""), ("rwa_valid", "")], rows_c, meta)
    d = Table("fig1d", [("r", ""), ("d_frac", ""), ("U_b_over_omega", ""), ("rwa_valid", "")], rows_d, meta)
    return [a, b, c, d]


# ---------------------------------------------------------------------------
# decoherent panels
# ---------------------------------------------------------------------------


def _drift(cfg: SensorConfig, r: float, gamma0: float):
    delta = cfg.delta_ratio * cfg.omega
    wb = omega_b_from_fraction(delta, r, cfg.d_frac)
    _, kappa = gravity_coupling(cfg.m, cfg.omega, r, cfg.force_offset)
    return bloch.drift_matrix(wb, 0.0, gamma0, r), kappa


def fig2_data(spec: SweepSpec) -> list[Table]:
    cfg = spec.fixed
    delta = cfg.delta_ratio * cfg.omega
    eps = spec.epsilon
    meta = _meta(cfg, epsilon=eps, gamma0_set=list(spec.gamma0_set))

    rs = spec.axis("fig2", "r")
    rows_a, rows_star = [], []
    for g in spec.gamma0_set:
        for r in rs:
            xi = bloch.xi_ratio(g * cfg.omega, delta, r, cfg.d_frac)
            rows_a.append((g, r, xi, _valid(r, cfg.d_frac, eps)))
        r_star = bloch.crossover_squeezing(g * cfg.omega, delta, cfg.d_frac, r_max=float(rs[-1]))
        rows_star.append((g, math.nan if r_star is None else r_star))
    a = Table("fig2a", [("gamma0_ratio", ""), ("r", ""), ("Xi", ""), ("rwa_valid", "")], rows_a, meta)
    a_star = Table("fig2a_rstar", [("gamma0_ratio", ""), ("r_star", "")], rows_star, meta)

    d0, _ = _drift(cfg, cfg.r, 0.0)
    t_grid = np.linspace(0.0, 6 * math.pi / d0.omega_b, spec.n_time)

    def curve(g):
        d, kappa = _drift(cfg, cfg.r, g * cfg.omega)
        return [(g, t, t * d.omega_b, bloch.qfi_at(d, kappa, t)) for t in t_grid]

    rows_b = [row for part in _pmap(curve, (0.0, *spec.gamma0_set), spec.threads) for row in part]
    b = Table("fig2b", [("gamma0_ratio", ""), ("t", "s"), ("omega_b_t", "rad"), ("F_Q", "(m s^-2)^-2")],
              rows_b, _meta(cfg, epsilon=eps, r=cfg.r))

    r_opt = np.linspace(spec.r_opt_min, spec.r_opt_max, spec.r_opt_points)
    jobs = [(g, r) for g in spec.gamma0_set for r in r_opt]

    def optimum(job):
        g, r = job
        d, kappa = _drift(cfg, r, g * cfg.omega)
        t_opt, val = bloch.optimal_time_decoherent(d, kappa)
        t_coh, coh = coherent.sensitivity_coherent(cfg.m, cfg.omega, r, d.omega_b)
        return g, r, t_opt, val, t_coh, coh, _valid(r, cfg.d_frac, eps)

    res = _pmap(optimum, jobs, spec.threads)
    c = Table("fig2c", [("gamma0_ratio", ""), ("r", ""), ("sqrtT_dg_dec", SENS_UNIT),
                        ("sqrtT_dg_coh", SENS_UNIT), ("rwa_valid", "")],
              [(g, r, val, coh, ok) for g, r, _, val, _, coh, ok in res], meta)
    d = Table("fig2d", [("gamma0_ratio", ""), ("r", ""), ("t_opt_dec", "s"), ("t_ref_pi_over_omega_b", "s"),
                        ("rwa_valid", "")],
              [(g, r, t, tc, ok) for g, r, t, _, tc, _, ok in res], meta)
    return [a, a_star, b, c, d]


# ---------------------------------------------------------------------------
# RWA map and readout angles
# ---------------------------------------------------------------------------


def figA1_data(spec: SweepSpec) -> list[Table]:
    cfg = spec.fixed
    delta = cfg.delta_ratio * cfg.omega
    eps = spec.epsilon
    rows, bound = [], []
    for r in spec.axis("figA1", "r"):
        A_p = delta * math.tanh(2 * r)
        bd = rwa_boundary(r, eps, delta, A_p)
        for d in spec.axis("figA1", "d_frac"):
            ratios = grid_ratios(r, d)
            rows.append((r, d, max(ratios), max(ratios) < eps,
                         omega_b_from_fraction(delta, r, d) / cfg.omega, bd.fraction))
        if bd.status == "ok":
            wb = math.sqrt(delta**2 - A_p**2) * (1.0 - bd.fraction)
            at_bound = rwa_ratios(bd.D_rwa, r, wb, eps).max_ratio
        else:
            at_bound = math.nan
        bound.append((r, bd.fraction, at_bound, bd.status == "ok"))
    meta = _meta(cfg, epsilon=eps)
    grid = Table("figA1", [("r", ""), ("d_frac", ""), ("max_ratio", ""), ("rwa_valid", ""),
                           ("omega_b_over_omega", ""), ("d_rwa_frac", "")], rows, meta)
    edge = Table("figA1_boundary", [("r", ""), ("d_rwa_frac", ""), ("max_ratio_at_boundary", ""),
                                    ("binding", "")], bound, meta)
    return [grid, edge]


def figC1_data(spec: SweepSpec) -> list[Table]:
    """SLD readout angles at the decoherent optimal time on a (gamma0, r) grid."""
    cfg = spec.fixed
    eps = spec.epsilon
    jobs = [(g, r) for g in spec.axis("figC1", "gamma0_ratio") for r in spec.axis("figC1", "r")]

    def angles(job):
        g, r = job
        d, kappa = _drift(cfg, r, g * cfg.omega)
        t_opt, _ = bloch.optimal_time_decoherent(d, kappa)
        s = bloch.propagate_with_sensitivity(d, t_opt)
        ax = bloch.sld_axis(s)
        fq = bloch.qfi_mixed(s, kappa)
        fc = bloch.cfi_axis(s, ax.n, kappa)
        return (g, r, t_opt, ax.theta_opt, ax.phi_opt, float(np.linalg.norm(ax.n)), fc / fq,
                _valid(r, cfg.d_frac, eps))

    rows = _pmap(angles, jobs, spec.threads)
    return [Table("figC1", [("gamma0_ratio", ""), ("r", ""), ("t_opt_dec", "s"), ("theta_opt", "rad"),
                            ("phi_opt", "rad"), ("n_norm", ""), ("cfi_over_qfi", ""), ("rwa_valid", "")],
                  rows, _meta(cfg, epsilon=eps))]


PANELS = {"fig1": fig1_data, "fig2": fig2_data, "figA1": figA1_data, "figC1": figC1_data}


def run_sweep(spec: SweepSpec, fmt: str = "csv") -> list[Path]:
    """Compute the requested figure(s) and write one file per panel."""
    figs = FIGURES if spec.figure == "all" else (spec.figure,)
    paths = []
    for f in figs:
        for t in PANELS[f](spec):
            paths.append(write_table(t, spec.out, fmt))
    return paths

