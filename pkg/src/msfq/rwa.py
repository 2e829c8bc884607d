"""Rotating-wave-approximation validity of the effective squeezed-qubit model.

Three non-number-conserving Duffing terms are dropped when moving to the
effective Hamiltonian. Each is compared with the frequency at which it
rotates; the ratios below must all stay under a threshold ``epsilon``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .numerics import ToleranceSet, find_root
from .params import _quartic_weight, qubit_frequency

DEFAULT_EPSILON = 0.1


def _weights(r: float) -> tuple[float, float, float]:
    """Per-unit-D strengths of the dropped terms divided by their rotation frequency."""
    s2, c2 = math.sinh(2 * r), math.cosh(2 * r)
    return (s2 * s2 / 16.0, math.sinh(4 * r) / 4.0, s2 * (3.0 * c2 - 2.0) / 4.0)


@dataclass(frozen=True)
class RwaReport:
    ratio_quartic: float
    ratio_cubic: float
    ratio_quadratic: float
    epsilon: float = DEFAULT_EPSILON

    @property
    def ratios(self) -> tuple[float, float, float]:
        return (self.ratio_quartic, self.ratio_cubic, self.ratio_quadratic)

    @property
    def max_ratio(self) -> float:
        return max(self.ratios)

    @property
    def valid(self) -> bool:
        # boundary points count as violated
        return all(x < self.epsilon for x in self.ratios)


def rwa_ratios(D: float, r: float, omega_b: float, epsilon: float = DEFAULT_EPSILON) -> RwaReport:
    if omega_b <= 0:
        raise DomainError(f"qubit gap closed (omega_b={omega_b})")
    q = _weights(r)
    return RwaReport(*(D * qk / omega_b for qk in q), epsilon=epsilon)


@dataclass(frozen=True)
class RwaBoundary:
    """Largest D keeping all three conditions; ``status`` flags the degenerate cases.

    ``status`` is ``"ok"``, ``"never_binding"`` (no condition bites below
    D_crit, D_rwa = D_crit) or ``"unbounded"`` (r = 0: D_crit infinite and
    every condition vacuous, D_rwa = inf).
    """

    D_rwa: float
    D_crit: float
    per_condition: tuple[float, float, float]
    binding: int | None
    status: str

    @property
    def fraction(self) -> float:
        if not math.isfinite(self.D_crit):
            return math.inf
        return self.D_rwa / self.D_crit


def boundary_analytic(r: float, epsilon: float, delta: float, A_p: float) -> tuple[float, float, float]:
    """Closed-form per-condition roots eps*delta_b / (q_k + eps*w)."""
    delta_b = math.sqrt(delta * delta - A_p * A_p)
    w = _quartic_weight(r)
    return tuple(epsilon * delta_b / (qk + epsilon * w) for qk in _weights(r))


def rwa_boundary(r: float, epsilon: float, delta: float, A_p: float,
                 tol: ToleranceSet | None = None) -> RwaBoundary:
    """Safe-operation Duffing strength, found by bisection on each condition."""
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    if r < 0:
        raise DomainError(f"r must be non-negative, got {r}")
    if delta <= A_p:
        raise DomainError("need delta > A_p")
    w = _quartic_weight(r)
    if w == 0.0:
        return RwaBoundary(math.inf, math.inf, (math.inf,) * 3, None, "unbounded")
    D_crit = math.sqrt(delta * delta - A_p * A_p) / w
    if math.isinf(epsilon):
        return RwaBoundary(D_crit, D_crit, (D_crit,) * 3, None, "never_binding")
    tol = tol or ToleranceSet(rel_tol=1e-15, abs_tol=1e-300, max_iter=400)
    roots = []
    for qk in _weights(r):
        def excess(D, qk=qk):
            return D * qk - epsilon * qubit_frequency(delta, A_p, D, r)
        if excess(D_crit) <= 0:
            roots.append(D_crit)
        else:
            roots.append(find_root(excess, 0.0, D_crit, tol))
    k = int(np.argmin(roots))
    status = "ok" if roots[k] < D_crit else "never_binding"
    return RwaBoundary(roots[k], D_crit, tuple(roots), k if status == "ok" else None, status)


@dataclass
class RwaMap:
    r: np.ndarray
    d_frac: np.ndarray
    max_ratio: np.ndarray  # shape (len(r), len(d_frac))
    valid: np.ndarray
    omega_b_over_omega: np.ndarray
    boundary_fraction: np.ndarray  # D_RWA / D_crit per r
    epsilon: float

    def rows(self):
        for i, r in enumerate(self.r):
            for j, d in enumerate(self.d_frac):
                yield (float(r), float(d), float(self.max_ratio[i, j]), bool(self.valid[i, j]),
                       float(self.omega_b_over_omega[i, j]))


def grid_ratios(r: float, d_frac: float) -> tuple[float, float, float]:
    """The three ratios at D = d_frac * D_crit, written scale-free.

    D / omega_b = d_frac / ((1 - d_frac) w(r)); at r = 0 the cubic and
    quadratic ratios diverge for any d_frac > 0 because D_crit does.
    """
    if d_frac == 0.0:
        return (0.0, 0.0, 0.0)
    w = _quartic_weight(r)
    if w == 0.0:
        return (1.0 / 32.0 * d_frac / (1.0 - d_frac), math.inf, math.inf)
    k = d_frac / ((1.0 - d_frac) * w)
    return tuple(k * qk for qk in _weights(r))


def classify_grid(r_grid, dfrac_grid, epsilon: float = DEFAULT_EPSILON,
                  delta: float = 0.05, omega: float = 1.0) -> RwaMap:
    """Validity map over (r, D/D_crit); ``delta`` and ``omega`` in the same units."""
    r_grid = np.asarray(r_grid, dtype=float)
    dfrac_grid = np.asarray(dfrac_grid, dtype=float)
    if np.any(dfrac_grid < 0) or np.any(dfrac_grid >= 1):
        raise DomainError("d_frac values must lie in [0, 1)")
    shape = (len(r_grid), len(dfrac_grid))
    mr = np.empty(shape)
    wb = np.empty(shape)
    frac = np.empty(len(r_grid))
    for i, r in enumerate(r_grid):
        A_p = delta * math.tanh(2 * r)
        for j, d in enumerate(dfrac_grid):
            mr[i, j] = max(grid_ratios(r, d))
            wb[i, j] = delta / math.cosh(2 * r) * (1 - d) / omega
        frac[i] = rwa_boundary(r, epsilon, delta, A_p).fraction
    return RwaMap(r_grid, dfrac_grid, mr, mr < epsilon, wb, frac, epsilon)
