"""Truncated Fock-space brute force for the effective squeezed-qubit model.

Two independent checks live here:

* exact diagonalisation of the rotating-frame Duffing Hamiltonian with the
  two-phonon pump, compared with the effective (omega_b, U_b) ladder;
* a Lindblad simulation in the squeezed (b) mode basis with several levels,
  compared with the two-level Bloch solution of :mod:`msfq.bloch`.

Units: hbar = 1 and every frequency in the same unit (typically the trap
frequency, so omega = 1).
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg

from . import bloch
from .errors import NumericalError, TruncationError
from .numerics import ToleranceSet, ode_integrate
from .rwa import grid_ratios

log = logging.getLogger(__name__)


@dataclass
class FockOperators:
    dim: int
    a: np.ndarray
    a_dag: np.ndarray
    n_op: np.ndarray
    S: np.ndarray | None = None


def build_operators(dim: int) -> FockOperators:
    if dim < 2:
        raise ValueError("dim must be >= 2")
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)
    return FockOperators(dim, a, a.conj().T, np.diag(np.arange(dim, dtype=float)).astype(complex))


def min_squeeze_dim(r: float) -> int:
    return 20 + math.ceil(20 * math.sinh(r) ** 2)


def bogoliubov_residual(S: np.ndarray, ops: FockOperators, r: float, theta: float,
                        levels: int | None = None) -> float:
    """max |S a S^dag - (cosh r a + e^{i theta} sinh r a^dag)| on the lowest ``levels`` block."""
    k = ops.dim // 2 if levels is None else levels
    lhs = S @ ops.a @ S.conj().T
    rhs = math.cosh(r) * ops.a + np.exp(1j * theta) * math.sinh(r) * ops.a_dag
    return float(np.max(np.abs((lhs - rhs)[:k, :k])))


def build_squeeze(r: float, theta: float, dim: int, check_levels: int = 6) -> np.ndarray:
    """Squeeze operator S with S a S^dag = cosh r a + e^{i theta} sinh r a^dag.

    The exponential is taken in a padded space of 2*dim + 40 levels and the
    leading dim x dim block returned, so the low columns S|n> are free of
    edge reflections from the truncated generator. The generator is first
    taken as (xi a^dag^2 - xi^* a^2)/2 with xi = r e^{i theta}; if that
    orientation fails the Bogoliubov check on the lowest ``check_levels``
    levels its sign is flipped and the flip logged.
    """
    if dim < min_squeeze_dim(r):
        raise TruncationError(f"dim={dim} too small for r={r}; need >= {min_squeeze_dim(r)}")
    if r == 0.0:
        return np.eye(dim, dtype=complex)
    work = build_operators(2 * dim + 40)
    xi = r * np.exp(1j * theta)
    gen = 0.5 * (xi * work.a_dag @ work.a_dag - np.conj(xi) * work.a @ work.a)
    S = scipy.linalg.expm(gen)
    res = bogoliubov_residual(S, work, r, theta, check_levels)
    if res > 1e-6:
        S_flip = scipy.linalg.expm(-gen)
        res_flip = bogoliubov_residual(S_flip, work, r, theta, check_levels)
        if res_flip < res:
            log.info("build_squeeze: generator sign flipped (residual %.3g -> %.3g)", res, res_flip)
            S, res = S_flip, res_flip
    if res > 1e-4:
        raise TruncationError(f"Bogoliubov residual {res:.3g} too large; increase dim")
    return S[:dim, :dim]


def rotating_hamiltonian(delta: float, A_p: float, D: float, theta: float, dim: int) -> np.ndarray:
    ops = build_operators(dim)
    a, ad = ops.a, ops.a_dag
    return (delta * ops.n_op - D * ad @ ad @ a @ a
            + 0.5 * A_p * (np.exp(-1j * theta) * a @ a + np.exp(1j * theta) * ad @ ad))


@dataclass
class SpectrumReport:
    delta: float
    A_p: float
    D: float
    r: float
    dim: int
    gaps: tuple[float, float]
    predicted: tuple[float, float]
    rel_errors: tuple[float, float]
    overlaps: tuple[float, float, float]
    top_population: float
    max_ratio: float

    def as_dict(self) -> dict:
        return asdict(self)


def spectrum_check(delta: float, A_p: float, D: float, r: float, dim: int,
                   theta: float = math.pi) -> SpectrumReport:
    """Exact lowest squeezed-Fock gaps against (omega_b, omega_b - 2 U_b).

    Dense Hermitian eigensolve of the full truncated H_rot. The quartic term
    is unbounded below, so the truncated spectrum also holds deep high-n
    states; the three relevant eigenstates are picked by maximal overlap with
    S|n>, n = 0, 1, 2. ``top_population`` is the weight of the picked ground
    state in the top 20% of levels (a hybridisation diagnostic). Adequacy of
    ``dim`` itself is judged on the reference states S|n>.
    """
    from .params import anharmonicity, qubit_frequency
    from .rwa import rwa_ratios

    S = build_squeeze(r, theta, dim)
    cut = int(math.floor(0.8 * dim))
    support = float(np.max(np.sum(np.abs(S[cut:, :3]) ** 2, axis=0)))
    if support > 1e-10:
        raise TruncationError(f"squeezed reference states reach the top 20% of levels ({support:.2e}); "
                              "increase dim")
    H = rotating_hamiltonian(delta, A_p, D, theta, dim)
    evals, evecs = np.linalg.eigh(H)
    picked, overlaps = [], []
    for n in range(3):
        ov = np.abs(evecs.conj().T @ S[:, n]) ** 2
        k = int(np.argmax(ov))
        picked.append(k)
        overlaps.append(float(ov[k]))
    if len(set(picked)) < 3:
        raise NumericalError("spectrum_check: squeezed Fock states map onto the same eigenstate")
    top = float(np.sum(np.abs(evecs[cut:, picked[0]]) ** 2))
    E = evals[picked]
    gaps = (float(E[1] - E[0]), float(E[2] - E[1]))
    wb = qubit_frequency(delta, A_p, D, r)
    Ub = anharmonicity(D, r)
    pred = (wb, wb - 2 * Ub)
    rel = tuple(abs(g - p) / abs(p) for g, p in zip(gaps, pred))
    max_ratio = rwa_ratios(D, r, wb).max_ratio if D > 0 and wb > 0 else 0.0
    return SpectrumReport(delta, A_p, D, r, dim, gaps, pred, rel, tuple(overlaps), top, max_ratio)


# ---------------------------------------------------------------------------
# open-system oracle
# ---------------------------------------------------------------------------


def _lindblad_superop(H: np.ndarray, L: np.ndarray, gamma0: float) -> np.ndarray:
    # row-major vec: vec(A X B) = kron(A, B.T) vec(X)
    n = H.shape[0]
    eye = np.eye(n)
    LdL = L.conj().T @ L
    sup = -1j * (np.kron(H, eye) - np.kron(eye, H.T))
    sup += gamma0 * (np.kron(L, L.conj()) - 0.5 * np.kron(LdL, eye) - 0.5 * np.kron(eye, LdL.T))
    return sup


def qubit_bloch(rho: np.ndarray) -> np.ndarray:
    """Bloch vector of the {|0>, |1>} block in the convention of :mod:`msfq.bloch`."""
    return np.array([2 * rho[0, 1].real, -2 * rho[0, 1].imag, (rho[1, 1] - rho[0, 0]).real])


@dataclass
class MasterEquationResult:
    t: np.ndarray
    populations: np.ndarray  # (n_t, levels)
    bloch: np.ndarray  # (n_t, 3)
    leakage: np.ndarray  # population in levels >= 2
    trace_deviation: float
    hermiticity_error: float
    min_eigenvalue: float


def b_space_master_equation(omega_b: float, U_b: float, G: float, gamma0: float, r: float,
                            levels: int, t_grid, initial_level: int = 0,
                            tol: ToleranceSet | None = None) -> MasterEquationResult:
    """Lindblad dynamics of the b mode with jump cosh r b + sinh r b^dag (theta = pi)."""
    if levels < 4:
        raise ValueError("levels must be >= 4")
    ops = build_operators(levels)
    b, bd = ops.a, ops.a_dag
    H = omega_b * ops.n_op - U_b * bd @ bd @ b @ b + G * (b + bd)
    L = math.cosh(r) * b + math.sinh(r) * bd
    sup = _lindblad_superop(H, L, gamma0)
    rho0 = np.zeros((levels, levels), dtype=complex)
    rho0[initial_level, initial_level] = 1.0
    t_grid = np.asarray(t_grid, dtype=float)
    tol = tol or ToleranceSet(rel_tol=1e-10, abs_tol=1e-13)
    traj = ode_integrate(lambda _t, y: sup @ y, rho0.ravel(), t_grid, tol)
    rhos = traj.reshape(len(t_grid), levels, levels)

    tr = np.einsum("kii->k", rhos)
    trace_dev = float(np.max(np.abs(tr - 1.0)))
    if trace_dev > 1e-8:
        raise NumericalError(f"master equation lost trace ({trace_dev:.2e})")
    herm = float(np.max(np.abs(rhos - np.conj(np.transpose(rhos, (0, 2, 1))))))
    min_eig = min(float(np.linalg.eigvalsh(0.5 * (R + R.conj().T))[0]) for R in rhos)
    pops = np.real(np.einsum("kii->ki", rhos))
    return MasterEquationResult(
        t=t_grid,
        populations=pops,
        bloch=np.array([qubit_bloch(R) for R in rhos]),
        leakage=pops[:, 2:].sum(axis=1),
        trace_deviation=trace_dev,
        hermiticity_error=herm,
        min_eigenvalue=min_eig,
    )


@dataclass
class ProjectionReport:
    inputs: dict
    max_deviation: float
    max_leakage: float
    threshold: float
    passed: bool
    t: list = field(default_factory=list)
    leakage: list = field(default_factory=list)
    deviation: list = field(default_factory=list)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["status"] = "PASS" if self.passed else "FAIL"
        return d


def projection_consistency(r: float = 1.0, d_frac: float = 0.2, gamma0_ratio: float = 1e-4,
                           G_ratio: float = 0.05, delta_ratio: float = 0.05, levels: int = 6,
                           t_grid=None, n_t: int = 61) -> ProjectionReport:
    """Multi-level b-mode simulation against the two-level Bloch solution.

    Frequencies in units of the trap frequency; ``G_ratio`` is G / U_b and the
    qubit drive is Omega = 2 G. PASS iff the worst Bloch-vector deviation is
    at most max(1e-3, 10 * worst leakage).
    """
    omega_b = delta_ratio / math.cosh(2 * r) * (1 - d_frac)
    w = 8 * math.cosh(r) ** 2 * math.sinh(r) ** 2 + 4 * math.sinh(r) ** 4
    D = d_frac * delta_ratio / math.cosh(2 * r) / w
    U_b = 0.25 * D * (3 * math.cosh(4 * r) + 1)
    G = G_ratio * U_b
    if t_grid is None:
        t_grid = np.linspace(0.0, 3 * math.pi / omega_b, n_t)
    t_grid = np.asarray(t_grid, dtype=float)
    me = b_space_master_equation(omega_b, U_b, G, gamma0_ratio, r, levels, t_grid)
    d = bloch.drift_matrix(omega_b, 2 * G, gamma0_ratio, r)
    two_level = np.array([bloch.propagate(d, bloch.V0, t) for t in t_grid])
    dev = np.max(np.abs(me.bloch - two_level), axis=1)
    max_dev = float(dev.max())
    max_leak = float(me.leakage.max())
    threshold = max(1e-3, 10 * max_leak)
    inputs = dict(r=r, d_frac=d_frac, gamma0_ratio=gamma0_ratio, G_ratio=G_ratio,
                  delta_ratio=delta_ratio, levels=levels, omega_b=omega_b, U_b=U_b, G=G,
                  rwa_max_ratio=max(grid_ratios(r, d_frac)))
    return ProjectionReport(inputs, max_dev, max_leak, threshold, max_dev <= threshold,
                            t_grid.tolist(), me.leakage.tolist(), dev.tolist())
