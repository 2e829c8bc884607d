import math

import numpy as np
import pytest

from msfq import coherent, sweep
from msfq.errors import ConfigError
from msfq.params import SensorConfig


def small(figure, **kw):
    base = dict(figure=figure, n_time=41, r_opt_points=4, threads=2)
    base.update(kw)
    return sweep.SweepSpec(**base)


def test_grid_axis_validation():
    assert len(sweep.GridAxis("r", 0.0, 1.0, 5).values()) == 5
    np.testing.assert_allclose(sweep.GridAxis("gamma0_ratio", 1e-4, 1e-2, 3, "log").values(),
                               [1e-4, 1e-3, 1e-2])
    for bad in (dict(name="x"), dict(points=1), dict(scale="cubic"), dict(min=1.0, max=0.5)):
        args = dict(name="r", min=0.0, max=1.0, points=3, scale="linear") | bad
        with pytest.raises(ConfigError):
            sweep.GridAxis(**args)
    with pytest.raises(ConfigError):
        sweep.GridAxis("r", 0.0, 1.0, 3, "log")


def test_partial_axis_override_merges_defaults():
    spec = sweep.SweepSpec(axes={"r": {"points": 5}})
    np.testing.assert_allclose(spec.axis("fig1", "r"), np.linspace(0.0, 1.4, 5))
    with pytest.raises(ConfigError):
        sweep.SweepSpec(axes={"r": {"step": 0.1}})
    with pytest.raises(ConfigError):
        sweep.SweepSpec(figure="fig9")


def test_fig1_sensitivity_curve():
    a, b, c, d = sweep.fig1_data(small("fig1"))
    dg = a.column("sqrtT_dg")
    assert np.all(np.diff(dg) < 0)
    r = a.column("r")
    i = int(np.argmin(np.abs(r - 1.0)))
    assert r[i] == pytest.approx(1.0) and dg[i] == pytest.approx(4.8502e-11, rel=1e-4)
    cfg = SensorConfig()
    assert a.column("mcq_N10")[0] == pytest.approx(coherent.benchmarks(cfg.m, cfg.omega, 10)[1])
    assert {t.name for t in (a, b, c, d)} == {"fig1a", "fig1b", "fig1c", "fig1d"}


def test_fig1c_gap_closes_near_critical_duffing():
    _, _, c, _ = sweep.fig1_data(small("fig1"))
    wb = c.column("omega_b_over_omega")
    r, dfr = c.column("r"), c.column("d_frac")
    for rv in np.unique(r):
        sel = r == rv
        assert np.all(np.diff(wb[sel]) < 0)
        assert wb[sel][-1] < 0.01 * wb[sel][0]
        assert dfr[sel][-1] == pytest.approx(0.999)


def test_fig2_crossover_and_peaks():
    a, a_star, b, c, d = sweep.fig2_data(small("fig2"))
    for g in (1e-4, 1e-3, 5e-3):
        xi = a.column("Xi")[a.column("gamma0_ratio") == g]
        assert np.all(np.diff(xi) > 0) and np.sum(np.diff(xi >= 1.0) != 0) == 1
    rs = a_star.column("r_star")
    assert np.all(np.diff(rs) < 0)
    np.testing.assert_allclose(rs, [1.844, 1.267, 0.858], atol=2e-3)

    # without damping the QFI peaks sit at odd multiples of pi
    sel = b.column("gamma0_ratio") == 0.0
    x, F = b.column("omega_b_t")[sel], b.column("F_Q")[sel]
    peaks = [x[i] for i in range(1, len(x) - 1) if F[i] > F[i - 1] and F[i] >= F[i + 1]]
    assert len(peaks) == 3
    np.testing.assert_allclose(np.array(peaks) / math.pi, [1, 3, 5], atol=0.1)


def test_fig2cd_optimum_not_later_than_reference():
    _, _, _, c, d = sweep.fig2_data(small("fig2"))
    assert np.all(d.column("t_opt_dec") <= d.column("t_ref_pi_over_omega_b") * (1 + 1e-9))
    assert np.all(c.column("sqrtT_dg_dec") > 0)


def test_figA1_boundary():
    spec = small("figA1", axes={"r": {"min": 0.2, "points": 7}, "d_frac": {"points": 6}})
    grid, edge = sweep.figA1_data(spec)
    assert len(grid.rows) == 42
    ok = edge.column("binding") == 1.0
    assert ok.any()
    np.testing.assert_allclose(edge.column("max_ratio_at_boundary")[ok], spec.epsilon, rtol=1e-6)


def test_figC1_readout_axis():
    spec = small("figC1", axes={"r": {"points": 3}, "gamma0_ratio": {"points": 3}})
    (t,) = sweep.figC1_data(spec)
    np.testing.assert_allclose(t.column("n_norm"), 1.0, atol=1e-12)
    np.testing.assert_allclose(t.column("cfi_over_qfi"), 1.0, rtol=1e-8)
    theta = t.column("theta_opt")
    assert np.all((theta >= 0) & (theta <= math.pi))


def test_csv_layout_and_determinism(tmp_path):
    spec = small("figA1", axes={"r": {"min": 0.2, "points": 4}, "d_frac": {"points": 3}})
    first = [p.read_bytes() for p in (sweep.write_table(t, tmp_path / "a") for t in sweep.figA1_data(spec))]
    second = [p.read_bytes() for p in (sweep.write_table(t, tmp_path / "b") for t in sweep.figA1_data(spec))]
    assert first == second
    lines = first[0].decode().splitlines()
    assert lines[0].startswith("# ")
    header = next(line for line in lines if not line.startswith("#"))
    assert header.split(",")[0].startswith("r")


def test_json_output(tmp_path):
    spec = small("figA1", axes={"r": {"min": 0.2, "points": 3}, "d_frac": {"points": 3}})
    paths = sweep.run_sweep(spec.__class__(**{**spec.__dict__, "out": str(tmp_path)}), fmt="json")
    assert all(p.suffix == ".json" for p in paths) and len(paths) == 2
