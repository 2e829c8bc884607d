"""Self-test batteries behind the ``validate`` and ``oracle`` commands.

Every check is deterministic (fixed RNG seed) and returns a
:class:`CheckResult`; nothing here raises on a failed comparison.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import bloch, coherent, oracle, rwa
from .numerics import ToleranceSet, expm_small, find_root, minimize_scalar, ode_integrate
from .params import (SensorConfig, critical_duffing, derive, pump_from_squeeze,
                     qubit_frequency, squeeze_from_pump)

log = logging.getLogger(__name__)
SEED = 20260
REFERENCE_SPECTRUM = dict(delta=0.05, r=0.5, d_frac=0.1, dim=80)
REFERENCE_PROJECTION = dict(r=1.0, d_frac=0.2, gamma0_ratio=1e-4)


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float = math.nan
    bound: float = math.nan
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def as_dict(self) -> dict:
        d = asdict(self)
        d["status"] = "PASS" if self.passed else "FAIL"
        for k in ("value", "bound"):
            if not math.isfinite(d[k]):
                d[k] = None
        return d


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        log.info("%s: %s", res.name, "PASS" if res.passed else "FAIL")
        return res
    wrapper.__name__ = fn.__name__
    return wrapper


def _rel(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


# ---------------------------------------------------------------------------
# module invariants
# ---------------------------------------------------------------------------


@_timed
def check_params(seed: int = SEED) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(50):
        r = rng.uniform(0.05, 2.0)
        delta = rng.uniform(0.01, 0.2)
        A_p = delta * pump_from_squeeze(r)
        worst = max(worst, abs(squeeze_from_pump(A_p / delta) - r) / r)
        Dc = critical_duffing(delta, A_p, r)
        worst = max(worst, abs(qubit_frequency(delta, A_p, Dc, r)) / delta)
    d = derive(SensorConfig())
    fig = abs(d.omega_b / d.omega - 0.05 / math.cosh(2.0) * 0.8)
    return CheckResult("params.identities", worst < 1e-10 and fig < 1e-14, worst, 1e-10,
                       {"omega_b_over_omega": d.omega_b / d.omega})


@_timed
def check_coherent(seed: int = SEED) -> CheckResult:
    rng = np.random.default_rng(seed + 1)
    fd_err, excess, opt = 0.0, 0.0, 1.0
    for _ in range(100):
        wb = rng.uniform(0.1, 2.0)
        p = coherent.RabiParams(wb, wb * rng.uniform(-1.0, 1.0))
        t = rng.uniform(0.1, 20.0) / wb
        fq = float(coherent.qfi_exact(p, 1.0, t))
        fd_err = max(fd_err, abs(coherent.qfi_pure_fd(p, 1.0, t) - fq) / max(fq, 1e-12))
        excess = max(excess, coherent.cfi_population_exact(p, 1.0, t) - fq)
        w = coherent.RabiParams(wb, wb * rng.uniform(0.0, 1e-3))
        fqw = float(coherent.qfi_exact(w, 1.0, t))
        if fqw > 0:
            opt = min(opt, coherent.cfi_population_exact(w, 1.0, t) / fqw)
    ok = fd_err < 1e-6 and excess <= 1e-10 and opt >= 1 - 1e-4
    return CheckResult("coherent.qfi_cfi", ok, fd_err, 1e-6,
                       {"cfi_minus_qfi_max": excess, "weak_cfi_over_qfi_min": opt})


@_timed
def check_rwa(seed: int = SEED) -> CheckResult:
    rng = np.random.default_rng(seed + 2)
    worst_root, worst_eps = 0.0, 0.0
    for _ in range(20):
        r = rng.uniform(0.05, 2.0)
        eps = rng.uniform(0.02, 0.5)
        delta = 0.05
        A_p = delta * math.tanh(2 * r)
        bd = rwa.rwa_boundary(r, eps, delta, A_p)
        ana = rwa.boundary_analytic(r, eps, delta, A_p)
        worst_root = max(worst_root, _rel(bd.per_condition, np.minimum(ana, bd.D_crit)))
        if bd.status == "ok":
            wb = qubit_frequency(delta, A_p, bd.D_rwa, r)
            worst_eps = max(worst_eps, abs(rwa.rwa_ratios(bd.D_rwa, r, wb).max_ratio - eps) / eps)
    return CheckResult("rwa.boundary", worst_root < 1e-10 and worst_eps < 1e-6, worst_root, 1e-10,
                       {"max_ratio_at_boundary_rel": worst_eps})


@_timed
def check_numerics(seed: int = SEED) -> CheckResult:
    rng = np.random.default_rng(seed + 3)
    worst = 0.0
    for _ in range(30):
        M = rng.normal(size=(5, 5)) * rng.uniform(0.1, 10.0)
        w, V = np.linalg.eig(M)
        ref = (V * np.exp(w)) @ np.linalg.inv(V)
        worst = max(worst, float(np.max(np.abs(expm_small(M) - ref.real)) / np.max(np.abs(ref))))
    y = ode_integrate(lambda t, y: -y, np.array([1.0]), 3.0, ToleranceSet(1e-11, 1e-13))
    ode = abs(y[0] - math.exp(-3.0)) / math.exp(-3.0)
    root = abs(find_root(lambda x: x * x - 2.0, 0.0, 2.0) - math.sqrt(2.0))
    xm, _ = minimize_scalar(lambda x: (x - 0.3) ** 2, 0.0, 1.0)
    ok = worst < 1e-10 and ode < 1e-9 and root < 1e-14 and abs(xm - 0.3) < 1e-7
    return CheckResult("numerics.kernels", ok, worst, 1e-10,
                       {"ode_rel": ode, "root_abs": root, "argmin_abs": abs(xm - 0.3)})


def _random_drift(rng):
    wb = rng.uniform(0.2, 2.0)
    Om = rng.uniform(-0.5, 0.5) * wb
    g0 = rng.choice([0.0, rng.uniform(1e-4, 0.3)]) * wb
    r = rng.uniform(0.0, 1.5)
    return bloch.drift_matrix(wb, Om, g0, r)


@_timed
def check_bloch(seed: int = SEED, draws: int = 10) -> CheckResult:
    rng = np.random.default_rng(seed + 4)
    ode_err, norm_excess, fd_err, sat_err = 0.0, 0.0, 0.0, 0.0
    for _ in range(draws):
        d = _random_drift(rng)
        ts = np.linspace(0.0, 10 * math.pi / d.omega_b, 21)
        ref = bloch.propagate_with_sensitivity_ode(d, ts)
        for t, w in zip(ts, ref):
            s = bloch.propagate_with_sensitivity(d, t)
            got = np.concatenate([s.v, s.u])
            scale = max(1.0, float(np.max(np.abs(w))))
            ode_err = max(ode_err, float(np.max(np.abs(got - w))) / scale)
            norm_excess = max(norm_excess, float(np.linalg.norm(s.v)) - 1.0)
        t = ts[7]
        h = 1e-6 * max(d.omega_b, d.rates[1], abs(d.Omega), 1e-3)
        vp = bloch.propagate(bloch.drift_matrix(d.omega_b, d.Omega + h, d.gamma0, d.r), bloch.V0, t)
        vm = bloch.propagate(bloch.drift_matrix(d.omega_b, d.Omega - h, d.gamma0, d.r), bloch.V0, t)
        u = bloch.propagate_with_sensitivity(d, t).u
        fd_err = max(fd_err, float(np.max(np.abs((vp - vm) / (2 * h) - u))) / max(np.max(np.abs(u)), 1e-12))
    for _ in range(100):
        v = rng.normal(size=3)
        v *= rng.uniform(0.0, 0.999) / np.linalg.norm(v)
        s = bloch.BlochState(v, rng.normal(size=3))
        ax = bloch.sld_axis(s)
        sat_err = max(sat_err, abs(bloch.cfi_axis(s, ax.n, 1.0) - bloch.qfi_mixed(s, 1.0))
                      / bloch.qfi_mixed(s, 1.0))
    ok = ode_err < 1e-8 and norm_excess <= 1e-9 and fd_err < 1e-6 and sat_err < 1e-8
    return CheckResult("bloch.propagation", ok, ode_err, 1e-8,
                       {"norm_excess": norm_excess, "fd_rel": fd_err, "sld_rel": sat_err})


def coherent_grid(omega_b: float, n: int = 200) -> np.ndarray:
    """Bin midpoints on (0, 6 pi / omega_b); avoids the exact QFI zeros at 2 pi k."""
    return (np.arange(n) + 0.5) * (6 * math.pi / n) / omega_b


@_timed
def check_coherent_limit() -> CheckResult:
    cfg = SensorConfig()
    p = derive(cfg)
    d = bloch.drift_matrix(p.omega_b, 0.0, 0.0, p.r)
    ts = coherent_grid(p.omega_b)
    fm = np.array([bloch.qfi_at(d, p.kappa_g, t) for t in ts])
    fe = coherent.qfi_exact(coherent.RabiParams(p.omega_b, 0.0), p.kappa_g, ts)
    err = _rel(fm, fe)
    return CheckResult("bloch.coherent_limit", err < 1e-8, err, 1e-8)


@_timed
def check_steady_state() -> CheckResult:
    worst = 0.0
    for r in (0.0, 0.5, 1.0):
        d = bloch.drift_matrix(1.0, 0.0, 0.05, r)
        t = 50.0 / min(d.rates)
        v = bloch.propagate(d, bloch.V0, t)
        worst = max(worst, float(np.max(np.abs(v - np.array([0.0, 0.0, -1.0 / math.cosh(2 * r)])))))
    return CheckResult("bloch.steady_state", worst < 1e-10, worst, 1e-10)


@_timed
def check_fock_operators() -> CheckResult:
    ops = oracle.build_operators(40)
    comm = ops.a @ ops.a_dag - ops.a_dag @ ops.a
    c_err = float(np.max(np.abs(comm[:-1, :-1] - np.eye(39))))
    ph = {}
    for r in (0.25, 0.5, 1.0):
        S = oracle.build_squeeze(r, math.pi, 80)
        n = float(np.real(S[:, 0].conj() @ (np.arange(80) * S[:, 0])))
        ph[r] = abs(n - math.sinh(r) ** 2)
    # squeezed |n> spreads over ~n cosh 2r levels, so unitarity of the leading
    # dim/2 block only holds at weak squeezing
    S = oracle.build_squeeze(0.25, math.pi, 160)
    unit = float(np.max(np.abs((S.conj().T @ S - np.eye(160))[:80, :80])))
    ok = c_err < 1e-10 and max(ph.values()) < 1e-6 and unit < 1e-8
    return CheckResult("oracle.fock_operators", ok, max(ph.values()), 1e-6,
                       {"commutator": c_err, "unitarity": unit})


@_timed
def check_spectrum_trend() -> CheckResult:
    """Gap errors shrink as d_frac decreases (sampled deep inside the RWA region)."""
    delta, r = 0.05, 0.5
    A_p = delta * math.tanh(2 * r)
    Dc = critical_duffing(delta, A_p, r)
    grid = (0.005, 0.01, 0.02, 0.03)
    errs = [max(oracle.spectrum_check(delta, A_p, f * Dc, r, 80).rel_errors) for f in grid]
    ok = all(a < b for a, b in zip(errs, errs[1:]))
    return CheckResult("oracle.spectrum_trend", ok, errs[-1], math.nan,
                       {"d_frac": list(grid), "max_rel_error": errs})


@_timed
def check_master_equation() -> CheckResult:
    t = np.linspace(0.0, 300.0, 31)
    me = oracle.b_space_master_equation(0.01, 0.0015, 0.0005, 1e-3, 0.8, 5, t)
    ok = me.trace_deviation <= 1e-8 and me.hermiticity_error <= 1e-10 and me.min_eigenvalue >= -1e-8
    return CheckResult("oracle.master_equation_physicality", ok, me.trace_deviation, 1e-8,
                       {"hermiticity": me.hermiticity_error, "min_eigenvalue": me.min_eigenvalue})


VALIDATE_BATTERY = (check_params, check_coherent, check_rwa, check_numerics, check_bloch,
                    check_coherent_limit, check_steady_state, check_fock_operators,
                    check_spectrum_trend, check_master_equation)


def run_validate() -> list[CheckResult]:
    return [fn() for fn in VALIDATE_BATTERY]


# ---------------------------------------------------------------------------
# brute-force oracle suite
# ---------------------------------------------------------------------------


@_timed
def oracle_spectrum_harmonic() -> CheckResult:
    delta, r = 0.05, 0.5
    A_p = delta * math.tanh(2 * r)
    rep = oracle.spectrum_check(delta, A_p, 0.0, r, 80)
    target = math.sqrt(delta**2 - A_p**2)
    err = max(abs(g - target) / target for g in rep.gaps)
    return CheckResult("spectrum.D0", err <= 1e-8, err, 1e-8, rep.as_dict())


@_timed
def oracle_spectrum_reference(delta: float = 0.05, r: float = 0.5, d_frac: float = 0.1,
                              dim: int = 80) -> CheckResult:
    A_p = delta * math.tanh(2 * r)
    D = d_frac * critical_duffing(delta, A_p, r)
    rep = oracle.spectrum_check(delta, A_p, D, r, dim)
    bound = 5 * rep.max_ratio
    err = max(rep.rel_errors)
    return CheckResult("spectrum.rwa_reference", err <= bound, err, bound, rep.as_dict())


@_timed
def oracle_amplitude_damping(gamma0: float = 0.7) -> CheckResult:
    t = np.linspace(0.0, 5.0 / gamma0, 41)
    me = oracle.b_space_master_equation(1.0, 0.0, 0.0, gamma0, 0.0, 4, t, initial_level=1)
    err = float(np.max(np.abs(me.populations[:, 1] - np.exp(-gamma0 * t))))
    return CheckResult("master.amplitude_damping", err <= 1e-6, err, 1e-6)


@_timed
def oracle_coherent_projection(G_ratio: float = 0.05) -> CheckResult:
    rep = oracle.projection_consistency(gamma0_ratio=0.0, G_ratio=G_ratio, **{
        k: v for k, v in REFERENCE_PROJECTION.items() if k != "gamma0_ratio"})
    ok = rep.max_deviation <= 1e-4
    return CheckResult("master.coherent_two_level", ok, rep.max_deviation, 1e-4,
                       {"max_leakage": rep.max_leakage})


@_timed
def oracle_projection(G_ratio: float = 0.05) -> CheckResult:
    rep = oracle.projection_consistency(G_ratio=G_ratio, **REFERENCE_PROJECTION)
    d = rep.as_dict()
    for k in ("t", "leakage", "deviation"):
        d.pop(k)
    return CheckResult("projection.weak_drive", rep.passed, rep.max_deviation, rep.threshold, d)


@_timed
def oracle_projection_violation(G_ratio: float = 1.0) -> CheckResult:
    """Strong drive must be flagged: this check passes when the report FAILs."""
    rep = oracle.projection_consistency(G_ratio=G_ratio, **REFERENCE_PROJECTION)
    d = rep.as_dict()
    for k in ("t", "leakage", "deviation"):
        d.pop(k)
    return CheckResult("projection.violation_flagged", not rep.passed, rep.max_deviation,
                       rep.threshold, d)


ORACLE_SUITE = (oracle_spectrum_harmonic, oracle_spectrum_reference, oracle_amplitude_damping,
                oracle_coherent_projection, oracle_projection, oracle_projection_violation)


def run_oracle() -> list[CheckResult]:
    return [fn() for fn in ORACLE_SUITE]
