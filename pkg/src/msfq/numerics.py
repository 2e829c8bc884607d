"""Small dense numerical kernels shared by the physics modules.

Everything here works on tiny systems (a handful of dimensions up to the
64-dimensional vectorised density matrices of the Fock-space oracle), so the
implementations favour clarity over raw speed.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NumericalError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ToleranceSet:
    """Relative/absolute tolerances plus an iteration cap."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_iter: int = 200

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("rel_tol and abs_tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


# ---------------------------------------------------------------------------
# matrix exponential
# ---------------------------------------------------------------------------

# (6,6) diagonal Padé coefficients of exp(x): c_k = (12-k)! 6! / (12! k! (6-k)!)
_PADE6 = np.array(
    [
        math.factorial(12 - k) * math.factorial(6)
        / (math.factorial(12) * math.factorial(k) * math.factorial(6 - k))
        for k in range(7)
    ]
)
# scaled norm bound; truncation error of the [6/6] approximant is ~1e-17 here
_THETA6 = 0.5


def expm_small(M) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a [6/6] Padé approximant.

    Intended for n <= 8 (larger inputs work but are not what this is tuned for).
    Real input gives real output; complex input is accepted as well.
    """
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise NumericalError("expm_small: non-finite matrix entries")
    n = M.shape[0]
    dtype = np.result_type(M.dtype, np.float64)
    ident = np.eye(n, dtype=dtype)
    norm = np.linalg.norm(M, 1)
    if norm == 0.0:
        return ident
    s = max(0, int(math.ceil(math.log2(norm / _THETA6))))
    X = M.astype(dtype) / 2.0**s

    X2 = X @ X
    X4 = X2 @ X2
    X6 = X4 @ X2
    c = _PADE6
    U = X @ (c[1] * ident + c[3] * X2 + c[5] * X4)
    V = c[0] * ident + c[2] * X2 + c[4] * X4 + c[6] * X6
    R = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        R = R @ R
    return R


# ---------------------------------------------------------------------------
# adaptive Runge-Kutta (Dormand-Prince 5(4))
# ---------------------------------------------------------------------------

_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_DP_E = _DP_B5 - _DP_B4


def rk_step(f, t, y, h, k1=None):
    """One Dormand-Prince step.

    Returns ``(y5, err, k7)`` where ``y5`` is the fifth-order solution, ``err``
    the embedded error estimate and ``k7`` the derivative at the new point
    (first-same-as-last, reusable as the next ``k1``).
    """
    k = [None] * 7
    k[0] = f(t, y) if k1 is None else k1
    for i in range(1, 7):
        yi = y
        for j, a in enumerate(_DP_A[i]):
            if a != 0.0:
                yi = yi + h * a * k[j]
        k[i] = f(t + _DP_C[i] * h, yi)
    y5 = y + h * sum(b * ki for b, ki in zip(_DP_B5, k) if b != 0.0)
    err = h * sum(e * ki for e, ki in zip(_DP_E, k) if e != 0.0)
    return y5, err, k[6]


def ode_integrate(
    f: Callable[[float, np.ndarray], np.ndarray],
    y0,
    t,
    tol: ToleranceSet | None = None,
    t0: float = 0.0,
    max_steps: int = 1_000_000,
) -> np.ndarray:
    """Integrate ``y' = f(t, y)`` from ``t0`` with adaptive step control.

    ``t`` is either a scalar end time (the state there is returned) or an
    increasing 1-D array of output times (an array of states with a leading
    time axis is returned). The local error is kept below
    ``abs_tol + rel_tol * |y|`` in RMS norm. Complex states are fine.
    """
    tol = tol or ToleranceSet(rel_tol=1e-10, abs_tol=1e-12)
    y = np.array(y0, dtype=np.result_type(np.asarray(y0).dtype, np.float64))
    scalar = np.ndim(t) == 0
    t_out = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(np.diff(t_out) < 0) or t_out[0] < t0:
        raise ValueError("output times must be increasing and >= t0")
    out = np.empty((len(t_out),) + y.shape, dtype=y.dtype)

    t_cur = t0
    span = t_out[-1] - t0
    k1 = f(t_cur, y)
    scale = tol.abs_tol + tol.rel_tol * np.abs(y)
    d0 = np.sqrt(np.mean(np.abs(y / scale) ** 2))
    d1 = np.sqrt(np.mean(np.abs(k1 / scale) ** 2))
    h = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-6
    if span > 0:
        h = min(h, span)

    steps = 0
    for i, t_target in enumerate(t_out):
        while t_cur < t_target:
            if steps >= max_steps:
                raise NumericalError("ode_integrate: exceeded max_steps")
            h = min(h, t_target - t_cur)
            if h <= 1e-14 * max(1.0, abs(t_cur)) and t_target - t_cur > h:
                raise NumericalError(f"ode_integrate: step size underflow at t={t_cur}")
            y_new, err, k_new = rk_step(f, t_cur, y, h, k1)
            scale = tol.abs_tol + tol.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
            err_norm = float(np.sqrt(np.mean(np.abs(err / scale) ** 2)))
            steps += 1
            if err_norm <= 1.0:
                t_cur = t_target if h == t_target - t_cur else t_cur + h
                y, k1 = y_new, k_new
                factor = 5.0 if err_norm == 0 else min(5.0, 0.9 * err_norm**-0.2)
            else:
                factor = max(0.2, 0.9 * err_norm**-0.2)
            h *= factor
        out[i] = y
    return out[0] if scalar else out


# ---------------------------------------------------------------------------
# scalar root finding and minimisation
# ---------------------------------------------------------------------------


def find_root(fn: Callable[[float], float], lo: float, hi: float, tol: ToleranceSet | None = None) -> float:
    """Bisection on a bracketing interval ``[lo, hi]``.

    Stops when the bracket is narrower than ``abs_tol + rel_tol*|x|``, when an
    exact zero is hit, or when floating point cannot split the bracket further.
    """
    tol = tol or ToleranceSet(rel_tol=1e-15, abs_tol=1e-300)
    if not lo < hi:
        raise ValueError(f"invalid bracket [{lo}, {hi}]")
    f_lo, f_hi = fn(lo), fn(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        raise NumericalError(f"find_root: no sign change on [{lo}, {hi}] ({f_lo}, {f_hi})")
    for _ in range(tol.max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = fn(mid)
        if f_mid == 0.0:
            return mid
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
        if hi - lo <= tol.abs_tol + tol.rel_tol * abs(mid):
            break
    root = lo if abs(f_lo) <= abs(f_hi) else hi
    log.debug("find_root: x=%r residual=%r", root, fn(root))
    return root


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def minimize_scalar(
    fn: Callable[[float], float], lo: float, hi: float, tol: ToleranceSet | None = None
) -> tuple[float, float]:
    """Golden-section search for the minimum of a unimodal ``fn`` on ``[lo, hi]``.

    Returns ``(argmin, fn(argmin))``.
    """
    tol = tol or ToleranceSet(rel_tol=1e-10, abs_tol=1e-300)
    if not lo < hi:
        raise ValueError(f"invalid bracket [{lo}, {hi}]")
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(tol.max_iter):
        if b - a <= tol.abs_tol + tol.rel_tol * abs(0.5 * (a + b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fn(d)
    x = c if fc < fd else d
    fx = min(fc, fd)
    # the bracket ends may beat the interior probes when the minimum sits on an edge
    for edge in (lo, hi):
        fe = fn(edge)
        if fe < fx:
            x, fx = edge, fe
    return x, fx
