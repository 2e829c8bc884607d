"""Damped squeezed-qubit dynamics in Bloch form and the decoherent Fisher information.

The projected master equation reduces to the affine flow v' = A(Omega) v + b
with anisotropic rates (Gamma_x, Gamma_y, Gamma_z). The Omega-derivative
u = dv/dOmega obeys u' = A u + A_Omega v and is propagated together with v as
one 6-dimensional linear system. ``kappa_g`` converts Omega-information into
g-information throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError
from .numerics import ToleranceSet, expm_small, find_root, minimize_scalar, ode_integrate
from .params import decoherence_rates

V0 = np.array([0.0, 0.0, -1.0])  # |0>_s
A_OMEGA = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, -1.0, 0.0]])
PURE_GUARD = 1e-12


@dataclass(frozen=True)
class DriftSystem:
    A: np.ndarray
    b: np.ndarray
    Omega: float
    omega_b: float
    gamma0: float
    rates: tuple[float, float, float]
    r: float = 0.0

    def augmented(self) -> tuple[np.ndarray, np.ndarray]:
        """Generator and source of the joint (v, u) flow."""
        M = np.zeros((6, 6))
        M[:3, :3] = self.A
        M[3:, :3] = A_OMEGA
        M[3:, 3:] = self.A
        return M, np.concatenate([self.b, np.zeros(3)])


@dataclass(frozen=True)
class BlochState:
    v: np.ndarray
    u: np.ndarray


@dataclass(frozen=True)
class ReadoutAxis:
    n: np.ndarray
    theta_opt: float
    phi_opt: float


def drift_matrix(omega_b: float, Omega: float, gamma0: float, r: float) -> DriftSystem:
    gx, gy, gz, _, _ = decoherence_rates(gamma0, r)
    A = np.array([
        [-gx, omega_b, 0.0],
        [-omega_b, -gy, Omega],
        [0.0, -Omega, -gz],
    ])
    return DriftSystem(A, np.array([0.0, 0.0, -gamma0]), Omega, omega_b, gamma0, (gx, gy, gz), r)


def steady_state(d: DriftSystem) -> np.ndarray:
    if d.gamma0 == 0.0:
        raise NumericalError("steady_state: no damping, A is singular")
    return np.linalg.solve(d.A, -d.b)


def _affine_flow(G: np.ndarray, src: np.ndarray, w0: np.ndarray, t: float) -> np.ndarray:
    # w' = G w + src as one homogeneous flow on (w, 1); equal to the steady-state
    # form w_ss + e^{Gt}(w0 - w_ss) but free of the A^{-1} solve, which is
    # ill-conditioned when gamma0 << omega_b
    n = len(w0)
    big = np.zeros((n + 1, n + 1))
    big[:n, :n] = G
    big[:n, n] = src
    return (expm_small(big * t) @ np.append(w0, 1.0))[:n]


def propagate(d: DriftSystem, v0, t: float) -> np.ndarray:
    """v(t) = v_ss + e^{At}(v0 - v_ss), evaluated through the augmented affine flow."""
    if t < 0:
        raise ValueError("t must be non-negative")
    v0 = np.asarray(v0, dtype=float)
    if d.gamma0 == 0.0:
        return expm_small(d.A * t) @ v0
    return _affine_flow(d.A, d.b, v0, t)


def propagate_with_sensitivity(d: DriftSystem, t: float, v0=V0) -> BlochState:
    """(v, u) at time ``t`` from v(0) = v0, u(0) = 0 via the augmented exponential."""
    if t < 0:
        raise ValueError("t must be non-negative")
    M, src = d.augmented()
    w0 = np.concatenate([np.asarray(v0, dtype=float), np.zeros(3)])
    if d.gamma0 == 0.0:
        w = expm_small(M * t) @ w0
    else:
        w = _affine_flow(M, src, w0, t)
    return BlochState(w[:3], w[3:])


def propagate_with_sensitivity_ode(d: DriftSystem, t, v0=V0, tol: ToleranceSet | None = None):
    """Same as :func:`propagate_with_sensitivity` by adaptive Runge-Kutta.

    ``t`` may be a scalar or an increasing array; returns an array of shape
    (6,) or (len(t), 6) holding (v, u).
    """
    M, src = d.augmented()
    w0 = np.concatenate([np.asarray(v0, dtype=float), np.zeros(3)])
    tol = tol or ToleranceSet(rel_tol=1e-12, abs_tol=1e-14)
    return ode_integrate(lambda _t, w: M @ w + src, w0, t, tol)


def sensitivity_quadrature(d: DriftSystem, t: float, panels: int = 10_000, v0=V0) -> np.ndarray:
    """u(t) = int_0^t exp(A(t-tau)) A_Omega v(tau) dtau by composite Simpson."""
    if panels % 2:
        panels += 1
    h = t / panels
    step = expm_small(d.A * h)
    # v(tau_k) on the uniform grid by repeated one-step propagation
    vss = steady_state(d) if d.gamma0 else np.zeros(3)
    vs = np.empty((panels + 1, 3))
    vs[0] = v0
    for k in range(panels):
        vs[k + 1] = vss + step @ (vs[k] - vss)
    integrand = np.empty((panels + 1, 3))
    back = np.eye(3)
    for k in range(panels, -1, -1):
        integrand[k] = back @ (A_OMEGA @ vs[k])
        back = back @ step
    weights = np.ones(panels + 1)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    return h / 3.0 * weights @ integrand


def _pure_limit(vv: float) -> bool:
    if vv > 1.0 + 1e-9:
        raise NumericalError(f"Bloch vector outside the ball (|v|^2 = {vv})")
    return 1.0 - vv < PURE_GUARD


def qfi_mixed(s: BlochState, kappa_g: float) -> float:
    """Qubit QFI kappa_g^2 [u.u + (v.u)^2 / (1 - v.v)]."""
    v, u = s.v, s.u
    vv, uu, vu = float(v @ v), float(u @ u), float(v @ u)
    if _pure_limit(vv):
        # pure states keep |v| = 1, so v.u vanishes and the ratio tends to zero
        return kappa_g**2 * uu
    return kappa_g**2 * (uu + vu * vu / (1.0 - vv))


def cfi_axis(s: BlochState, n, kappa_g: float) -> float:
    """CFI of the two-outcome projective measurement along unit vector ``n``."""
    n = np.asarray(n, dtype=float)
    nv, nu = float(n @ s.v), float(n @ s.u)
    den = 1.0 - nv * nv
    if den <= 1e-15:
        if nu == 0.0:
            return 0.0
        raise DomainError("readout axis along a pure Bloch vector: CFI is a 0/0 limit")
    return kappa_g**2 * nu * nu / den


def sld_direction(s: BlochState) -> np.ndarray:
    v, u = s.v, s.u
    vv = float(v @ v)
    if _pure_limit(vv):
        return u.copy()
    return u + float(v @ u) / (1.0 - vv) * v


def sld_axis(s: BlochState) -> ReadoutAxis:
    ell = sld_direction(s)
    norm = float(np.linalg.norm(ell))
    if norm == 0.0:
        raise DomainError("state carries no information: SLD direction undefined")
    n = ell / norm
    return ReadoutAxis(n, math.acos(max(-1.0, min(1.0, n[2]))), math.atan2(n[1], n[0]))


def qfi_at(d: DriftSystem, kappa_g: float, t: float) -> float:
    return qfi_mixed(propagate_with_sensitivity(d, t), kappa_g)


def _time_grid(t_max: float, n_lin: int = 2000, n_log: int = 400) -> np.ndarray:
    lin = np.linspace(t_max / n_lin, t_max, n_lin)
    logs = np.geomspace(t_max * 1e-5, t_max, n_log)
    return np.unique(np.concatenate([lin, logs]))


def optimal_time_decoherent(d: DriftSystem, kappa_g: float, t_max: float | None = None,
                            n_grid: int = 2000) -> tuple[float, float]:
    """Global minimiser of sqrt(t / F_Q(t)) on (0, t_max].

    Returns ``(t_opt_dec, sqrt(T) dg)``. Dense hybrid grid, then
    golden-section refinement between the neighbours of the best grid point.
    """
    if t_max is None:
        t_max = 6.0 * math.pi / d.omega_b
    ts = _time_grid(t_max, n_lin=n_grid)

    def objective(t):
        F = qfi_at(d, kappa_g, t)
        return math.sqrt(t / F) if F > 0 else math.inf

    vals = np.array([objective(t) for t in ts])
    if not np.any(np.isfinite(vals)):
        raise NumericalError("optimal_time_decoherent: QFI vanishes on the whole grid")
    i = int(np.argmin(vals))
    lo = ts[i - 1] if i > 0 else 0.5 * ts[0]
    hi = ts[i + 1] if i + 1 < len(ts) else ts[i]
    if hi <= lo:
        return float(ts[i]), float(vals[i])
    return minimize_scalar(objective, lo, hi, ToleranceSet(rel_tol=1e-9, abs_tol=1e-300))


def first_qfi_peak(d: DriftSystem, kappa_g: float, t_max: float | None = None,
                   n_grid: int = 4000) -> tuple[float, float]:
    """Time and value of the first local maximum of F_Q(t)."""
    if t_max is None:
        t_max = 6.0 * math.pi / d.omega_b
    ts = np.linspace(t_max / n_grid, t_max, n_grid)
    F = np.array([qfi_at(d, kappa_g, t) for t in ts])
    for i in range(1, len(ts) - 1):
        if F[i] > F[i - 1] and F[i] >= F[i + 1]:
            t, neg = minimize_scalar(lambda x: -qfi_at(d, kappa_g, x), ts[i - 1], ts[i + 1],
                                     ToleranceSet(rel_tol=1e-12, abs_tol=1e-300))
            return t, -neg
    raise NumericalError("first_qfi_peak: no interior maximum on the grid")


def xi_ratio(gamma0: float, delta: float, r: float, d_frac: float) -> float:
    """Gamma_eff / omega_b at D = d_frac * D_crit (gamma0, delta in common units)."""
    omega_b = delta / math.cosh(2 * r) * (1.0 - d_frac)
    return 0.5 * gamma0 * math.exp(2 * r) / omega_b


def crossover_squeezing(gamma0: float, delta: float, d_frac: float, r_max: float = 3.0,
                        n_check: int = 400) -> float | None:
    """Squeezing r* where Xi crosses 1, or ``None`` if Xi < 1 on [0, r_max]."""
    if gamma0 == 0.0:
        return None
    rs = np.linspace(0.0, r_max, n_check)
    xs = np.array([xi_ratio(gamma0, delta, r, d_frac) for r in rs])
    if np.any(np.diff(xs) <= 0):
        raise NumericalError("crossover_squeezing: Xi(r) not increasing on the scan range")
    if xs[-1] < 1.0:
        return None
    if xs[0] >= 1.0:
        return 0.0
    return find_root(lambda r: xi_ratio(gamma0, delta, r, d_frac) - 1.0, 0.0, r_max)


TIME_SERIES_COLUMNS = ("t", "x", "y", "z", "ux", "uy", "uz", "F_Q", "F_C_z", "F_C_opt",
                       "theta_opt", "phi_opt")


def time_series(d: DriftSystem, kappa_g: float, t_grid) -> list[tuple]:
    """Rows of :data:`TIME_SERIES_COLUMNS`; undefined readout quantities become NaN."""
    rows = []
    z_hat = np.array([0.0, 0.0, 1.0])
    for t in np.asarray(t_grid, dtype=float):
        s = propagate_with_sensitivity(d, t)
        fq = qfi_mixed(s, kappa_g)
        try:
            fz = cfi_axis(s, z_hat, kappa_g)
        except DomainError:
            fz = math.nan
        try:
            ax = sld_axis(s)
            fopt = cfi_axis(s, ax.n, kappa_g)
            th, ph = ax.theta_opt, ax.phi_opt
        except DomainError:
            fopt, th, ph = math.nan, math.nan, math.nan
        rows.append((float(t), *map(float, s.v), *map(float, s.u), fq, fz, fopt, th, ph))
    return rows
