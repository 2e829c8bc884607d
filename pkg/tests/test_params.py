import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from msfq.errors import ConfigError, DomainError
from msfq.params import (HBAR, SensorConfig, anharmonicity, critical_duffing, decoherence_rates, derive,
                         derive_raw, gravity_coupling, omega_b_from_fraction, pump_from_squeeze,
                         qubit_frequency, squeeze_from_pump)

OMEGA = 2 * math.pi * 1e3


def test_squeeze_from_pump_values():
    assert squeeze_from_pump(0.0) == 0.0
    assert squeeze_from_pump(math.tanh(2.0)) == pytest.approx(1.0, rel=1e-14)
    assert squeeze_from_pump(0.5) == pytest.approx(0.27465307216702745, rel=1e-14)
    with pytest.raises(DomainError):
        squeeze_from_pump(1.0)


@given(st.floats(0.0, 0.999))
def test_pump_round_trip(x):
    assert abs(pump_from_squeeze(squeeze_from_pump(x)) - x) <= 1e-13


def test_qubit_frequency_reference_point():
    delta = 0.05 * OMEGA
    A_p = delta * math.tanh(2.0)
    Dc = critical_duffing(delta, A_p, 1.0)
    assert Dc / OMEGA == pytest.approx(3.916e-4, rel=1e-3)
    wb = qubit_frequency(delta, A_p, 0.2 * Dc, 1.0)
    assert wb / OMEGA == pytest.approx(0.010632, rel=1e-4)
    assert qubit_frequency(delta, A_p, Dc, 1.0) == pytest.approx(0.0, abs=1e-12 * delta)
    assert qubit_frequency(delta, 0.0, 123.0, 0.0) == delta
    with pytest.raises(DomainError):
        qubit_frequency(1.0, 2.0, 0.0, 0.5)


def test_anharmonicity_values():
    assert anharmonicity(3.0, 0.0) == 3.0
    assert anharmonicity(0.0, 0.7) == 0.0
    assert anharmonicity(7.832e-5, 1.0) == pytest.approx(1.624e-3, rel=1e-3)


def test_critical_duffing_sentinel_and_domain():
    assert critical_duffing(1.0, 0.0, 0.0) == math.inf
    with pytest.raises(DomainError):
        critical_duffing(1.0, 1.0, 0.5)


def test_gravity_coupling():
    Om, k1 = gravity_coupling(1e-9, OMEGA, 1.0)
    assert Om == 0.0
    assert k1**2 == pytest.approx(2e-9 * math.e**2 / (HBAR * OMEGA), rel=1e-12)
    assert k1**2 == pytest.approx(2.230e22, rel=1e-3)
    _, k0 = gravity_coupling(1e-9, OMEGA, 0.0)
    assert k1 / k0 == pytest.approx(math.e, rel=1e-14)
    Om, _ = gravity_coupling(1e-9, OMEGA, 0.3, force_offset=1e-20)
    assert Om > 0


@given(st.floats(0.0, 1.0), st.floats(0.0, 2.5))
def test_decoherence_rate_identities(g, r):
    gx, gy, gz, geff, xi = decoherence_rates(g, r)
    assert gz == pytest.approx(gx + gy, rel=1e-12, abs=1e-300)
    assert gx * gy == pytest.approx((g / 2) ** 2, rel=1e-12, abs=1e-300)
    assert geff == gy and xi is None


def test_decoherence_xi_reference():
    *_, xi = decoherence_rates(1e-4, 1.0, 0.010632089153363193)
    assert xi == pytest.approx(0.0347, abs=1e-4)
    r0 = decoherence_rates(2.0, 0.0, 4.0)
    assert r0 == (1.0, 1.0, 2.0, 1.0, 0.25)
    with pytest.raises(DomainError):
        decoherence_rates(1.0, 0.5, 0.0)


def test_monotonicity_on_grids():
    delta = 0.05
    dfr = np.linspace(0.0, 0.99, 50)
    rs = np.linspace(0.0, 2.0, 50)
    wb_d = [omega_b_from_fraction(delta, 0.7, d) for d in dfr]
    wb_r = [omega_b_from_fraction(delta, r, 0.2) for r in rs]
    ub_r = [anharmonicity(1.0, r) for r in rs]
    assert np.all(np.diff(wb_d) < 0) and np.all(np.diff(wb_r) < 0) and np.all(np.diff(ub_r) > 0)


def test_derive_defaults_and_invariants():
    p = derive(SensorConfig())
    assert p.A_p == pytest.approx(math.tanh(2.0) * p.delta, rel=1e-15)
    assert p.omega_b / p.omega == pytest.approx(0.05 / math.cosh(2.0) * 0.8, rel=1e-13)
    assert p.scaled()["U_b_over_omega"] == pytest.approx(1.624e-3, rel=1e-3)
    p = derive(SensorConfig(gamma0_ratio=1e-4))
    assert p.Gamma_z == pytest.approx(p.Gamma_x + p.Gamma_y, rel=1e-14)
    assert p.Xi == pytest.approx(0.0347, abs=1e-4)


def test_pump_ratio_overrides_r():
    cfg = SensorConfig(pump_ratio=math.tanh(1.0), r=3.0)
    assert cfg.r == pytest.approx(0.5, rel=1e-14)
    assert cfg.replace(r=0.2).pump_ratio is None


@pytest.mark.parametrize("bad", [
    {"m": 0.0}, {"omega": -1.0}, {"delta_ratio": 0.0}, {"r": -1.0}, {"d_frac": 1.0},
    {"gamma0_ratio": -1e-3}, {"pump_ratio": 1.0}, {"r": 0.0, "d_frac": 0.1}, {"m": float("nan")},
    {"r": True},
])
def test_config_rejects(bad):
    with pytest.raises(ConfigError):
        SensorConfig(**bad)


def test_derive_raw_allows_duffing_at_zero_squeezing():
    p = derive_raw(1e-9, OMEGA, 0.05 * OMEGA, 0.0, 0.01 * OMEGA)
    assert p.r == 0.0 and p.D_crit == math.inf and p.omega_b == 0.05 * OMEGA
    assert p.U_b == pytest.approx(0.01 * OMEGA)
    with pytest.raises(DomainError):
        derive_raw(1e-9, OMEGA, 0.05 * OMEGA, 0.06 * OMEGA, 0.0)
