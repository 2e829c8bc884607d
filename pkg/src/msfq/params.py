"""Physical inputs and the derived effective parameters of the squeezed-Fock qubit.

All quantities are SI: masses in kg, angular frequencies and rates in rad/s,
forces in N. Ratios (``delta_ratio``, ``d_frac``, ``gamma0_ratio``) are
dimensionless and taken relative to the trap frequency ``omega`` or to
``D_crit``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields

from .errors import ConfigError, DomainError

HBAR = 1.054571817e-34  # J s


def _quartic_weight(r: float) -> float:
    """Coefficient 8 cosh^2 r sinh^2 r + 4 sinh^4 r multiplying D in omega_b."""
    c, s = math.cosh(r), math.sinh(r)
    return 8.0 * c * c * s * s + 4.0 * s**4


def squeeze_from_pump(pump_ratio: float) -> float:
    """Squeezing r solving tanh(2r) = A_p / delta."""
    if not 0.0 <= pump_ratio < 1.0:
        raise DomainError(f"pump ratio must lie in [0, 1), got {pump_ratio}")
    return 0.5 * math.atanh(pump_ratio)


def pump_from_squeeze(r: float) -> float:
    if r < 0:
        raise DomainError(f"squeezing must be non-negative, got {r}")
    return math.tanh(2.0 * r)


def qubit_frequency(delta: float, A_p: float, D: float, r: float) -> float:
    """Squeezed-qubit splitting omega_b; may come out <= 0 past D_crit."""
    if delta < A_p:
        raise DomainError(f"delta ({delta}) < A_p ({A_p}): no real Bogoliubov frequency")
    return math.sqrt(delta * delta - A_p * A_p) - D * _quartic_weight(r)


def anharmonicity(D: float, r: float) -> float:
    return 0.25 * D * (3.0 * math.cosh(4.0 * r) + 1.0)


def critical_duffing(delta: float, A_p: float, r: float) -> float:
    """Duffing strength closing the qubit gap; ``math.inf`` at r = 0."""
    if delta <= A_p:
        raise DomainError(f"need delta > A_p, got delta={delta}, A_p={A_p}")
    w = _quartic_weight(r)
    if w == 0.0:
        return math.inf
    return math.sqrt(delta * delta - A_p * A_p) / w


def omega_b_from_fraction(delta: float, r: float, d_frac: float) -> float:
    """omega_b at D = d_frac * D_crit with A_p = delta tanh 2r.

    Equals delta sech(2r) (1 - d_frac); finite also in the r -> 0 limit where
    D itself diverges.
    """
    return delta / math.cosh(2.0 * r) * (1.0 - d_frac)


def gravity_coupling(m: float, omega: float, r: float, force_offset: float = 0.0) -> tuple[float, float]:
    """Return ``(Omega_g, kappa_g)``.

    ``Omega_g`` is the gravity-induced Rabi coupling of the residual force
    ``mg - F`` and ``kappa_g`` its derivative with respect to g.
    """
    if m <= 0 or omega <= 0:
        raise DomainError("mass and trap frequency must be positive")
    x0 = zero_point_amplitude(m, omega)
    er = math.exp(r)
    return 2.0 * er * force_offset * x0 / HBAR, 2.0 * m * x0 * er / HBAR


def zero_point_amplitude(m: float, omega: float) -> float:
    return math.sqrt(HBAR / (2.0 * m * omega))


def decoherence_rates(gamma0: float, r: float, omega_b: float | None = None):
    """Anisotropic qubit decay rates produced by squeezed mechanical damping.

    Returns ``(Gamma_x, Gamma_y, Gamma_z, Gamma_eff, Xi)``; ``Xi`` needs
    ``omega_b`` and is ``None`` when it is omitted.
    """
    if gamma0 < 0:
        raise DomainError(f"gamma0 must be non-negative, got {gamma0}")
    gx = 0.5 * gamma0 * math.exp(-2.0 * r)
    gy = 0.5 * gamma0 * math.exp(2.0 * r)
    gz = gamma0 * math.cosh(2.0 * r)
    xi = None
    if omega_b is not None:
        if omega_b <= 0:
            raise DomainError(f"qubit gap closed (omega_b={omega_b}); Xi undefined")
        xi = gy / omega_b
    return gx, gy, gz, gy, xi


@dataclass(frozen=True)
class SensorConfig:
    """Raw sensor inputs.

    Either ``r`` or ``pump_ratio`` (= A_p/delta) fixes the squeezing; when
    ``pump_ratio`` is given it wins and ``r`` is recomputed from it.
    """

    m: float = 1e-9
    omega: float = 2 * math.pi * 1e3
    delta_ratio: float = 0.05
    r: float = 1.0
    d_frac: float = 0.2
    gamma0_ratio: float = 0.0
    theta: float = math.pi
    force_offset: float = 0.0
    g_nominal: float = 9.81
    pump_ratio: float | None = None

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None and f.name == "pump_ratio":
                continue
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigError(f"{f.name}: expected a finite number, got {v!r}")
        if self.m <= 0:
            raise ConfigError(f"m: must be > 0, got {self.m}")
        if self.omega <= 0:
            raise ConfigError(f"omega: must be > 0, got {self.omega}")
        if self.delta_ratio <= 0:
            raise ConfigError(f"delta_ratio: must be > 0, got {self.delta_ratio}")
        if self.pump_ratio is not None:
            if not 0.0 <= self.pump_ratio < 1.0:
                raise ConfigError(f"pump_ratio: must lie in [0, 1), got {self.pump_ratio}")
            object.__setattr__(self, "r", squeeze_from_pump(self.pump_ratio))
        if self.r < 0:
            raise ConfigError(f"r: must be >= 0, got {self.r}")
        if not 0.0 <= self.d_frac < 1.0:
            raise ConfigError(f"d_frac: must lie in [0, 1), got {self.d_frac}")
        if self.gamma0_ratio < 0:
            raise ConfigError(f"gamma0_ratio: must be >= 0, got {self.gamma0_ratio}")
        if self.r == 0 and self.d_frac > 0:
            raise ConfigError("d_frac > 0 needs r > 0 (D_crit is infinite at r = 0)")

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def replace(self, **changes) -> SensorConfig:
        d = asdict(self)
        if "r" in changes and "pump_ratio" not in changes:
            d["pump_ratio"] = None
        d.update(changes)
        return SensorConfig(**d)


@dataclass(frozen=True)
class DerivedParams:
    m: float
    omega: float
    r: float
    gamma0: float
    A_p: float
    delta: float
    omega_b: float
    U_b: float
    D: float
    D_crit: float
    x0: float
    Omega_g: float
    kappa_g: float
    Gamma_x: float
    Gamma_y: float
    Gamma_z: float
    Gamma_eff: float
    Xi: float
    d_frac: float = field(default=math.nan)

    def as_dict(self) -> dict:
        return asdict(self)

    def scaled(self) -> dict:
        """Frequencies and rates expressed in units of the trap frequency."""
        keys = ("A_p", "delta", "omega_b", "U_b", "D", "D_crit", "Omega_g",
                "Gamma_x", "Gamma_y", "Gamma_z", "Gamma_eff")
        return {f"{k}_over_omega": getattr(self, k) / self.omega for k in keys}


def derive(cfg: SensorConfig) -> DerivedParams:
    """Derived parameters from the figure-style inputs (delta/omega, r, D/D_crit)."""
    delta = cfg.delta_ratio * cfg.omega
    A_p = delta * pump_from_squeeze(cfg.r)
    if cfg.r > 0:
        D_crit = critical_duffing(delta, A_p, cfg.r)
        D = cfg.d_frac * D_crit
    else:
        D_crit, D = math.inf, 0.0
    return _assemble(cfg.m, cfg.omega, delta, A_p, D, cfg.r, cfg.gamma0_ratio * cfg.omega,
                     cfg.force_offset, D_crit, cfg.d_frac)


def derive_raw(m: float, omega: float, delta: float, A_p: float, D: float,
               gamma0: float = 0.0, force_offset: float = 0.0) -> DerivedParams:
    """Derived parameters from raw (delta, A_p, D) in rad/s; D > 0 allowed at r = 0."""
    if m <= 0 or omega <= 0 or delta <= 0:
        raise DomainError("m, omega and delta must be positive")
    if not 0 <= A_p < delta:
        raise DomainError(f"need 0 <= A_p < delta, got A_p={A_p}, delta={delta}")
    if D < 0:
        raise DomainError(f"D must be >= 0, got {D}")
    r = squeeze_from_pump(A_p / delta)
    D_crit = critical_duffing(delta, A_p, r)
    d_frac = D / D_crit if math.isfinite(D_crit) else 0.0
    return _assemble(m, omega, delta, A_p, D, r, gamma0, force_offset, D_crit, d_frac)


def _assemble(m, omega, delta, A_p, D, r, gamma0, force_offset, D_crit, d_frac) -> DerivedParams:
    omega_b = qubit_frequency(delta, A_p, D, r)
    if omega_b <= 0:
        raise DomainError(f"qubit gap closed: omega_b = {omega_b}")
    Omega_g, kappa_g = gravity_coupling(m, omega, r, force_offset)
    gx, gy, gz, geff, xi = decoherence_rates(gamma0, r, omega_b)
    return DerivedParams(
        m=m, omega=omega, r=r, gamma0=gamma0, A_p=A_p, delta=delta,
        omega_b=omega_b, U_b=anharmonicity(D, r), D=D, D_crit=D_crit,
        x0=zero_point_amplitude(m, omega), Omega_g=Omega_g, kappa_g=kappa_g,
        Gamma_x=gx, Gamma_y=gy, Gamma_z=gz, Gamma_eff=geff, Xi=xi, d_frac=d_frac,
    )
