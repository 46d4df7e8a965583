import io
import math

import numpy as np
import pytest

from qfpmem import (
    VDC,
    Capacitor,
    Circuit,
    Inductor,
    MemristorParams,
    Resistor,
    SolverConfig,
    Waveform,
    assemble,
    build_ideal_cell,
    build_packaged_cell,
    dc_operating_point,
    parse_netlist,
    square_wave,
    transient,
)
from qfpmem.errors import MissingSignal, SingularMatrix, SingularTopology, StepUnderflow
from oracles import max_relative_error, ramp_step_response, rc_circuit, rl_circuit

MP = MemristorParams()


# -- assembly -------------------------------------------------------------------

def test_unknown_counts():
    ideal = build_ideal_cell(MP, src=VDC("VIN", "in", "0", 0.5))
    packaged = build_packaged_cell(MP, src=VDC("VIN", "in", "0", 0.5))
    assert assemble(ideal).n == 4
    assert assemble(packaged).n == 6
    sys = assemble(packaged)
    assert list(sys.index) == ["v(in)", "v(n1)", "v(a)", "v(b)", "i(L1)", "i(VIN)"]


def test_resistor_stamp_pattern():
    c = parse_netlist("t\nV1 a 0 1\nR1 a b 1\nR2 b 0 1\n")
    A = assemble(c).A
    na, nb = 0, 1
    assert A[na, na] == 1.0 and A[nb, nb] == 2.0
    assert A[na, nb] == A[nb, na] == -1.0
    # resistive block is symmetric
    assert np.array_equal(A[:2, :2], A[:2, :2].T)


def test_capacitor_isolated_node():
    c = parse_netlist("t\nV1 a 0 1\nR1 a 0 1\nC1 a b 1p\nC2 b 0 1p\n")
    with pytest.raises(SingularTopology):
        assemble(c)
    with pytest.raises(SingularTopology):
        transient(c, tstop=1e-9)


def test_parallel_sources_are_singular():
    c = parse_netlist("t\nV1 a 0 1\nV2 a 0 2\nR1 a 0 1\n")
    with pytest.raises(SingularMatrix):
        dc_operating_point(c)


# -- DC ---------------------------------------------------------------------------

@pytest.mark.parametrize("x0, expected", [(1.0, 1.4560e-3), (0.0, 1.6980e-4)])
def test_dc_series_current(x0, expected):
    c = build_ideal_cell(MP, src=VDC("VIN", "in", "0", 0.5), x0=x0)
    op = dc_operating_point(c)
    assert op["i(M1)"][0] == pytest.approx(expected, rel=1e-4)
    assert op["i(VIN)"][0] == pytest.approx(-expected, rel=1e-4)
    assert op.meta["kcl_residual"] < SolverConfig().abstol_i


def test_dc_zero_source():
    c = build_packaged_cell(MP, src=VDC("VIN", "in", "0", 0.0), x0=0.3)
    op = dc_operating_point(c)
    assert all(np.all(v == 0.0) for k, v in op.signals.items() if not k.startswith("x("))


def test_dc_packaged_matches_ideal():
    src = VDC("VIN", "in", "0", 0.5)
    a = dc_operating_point(build_packaged_cell(MP, src=src, x0=0.5))
    b = dc_operating_point(build_ideal_cell(MP, src=src, x0=0.5))
    assert a["i(M1)"][0] == pytest.approx(b["i(M1)"][0], rel=1e-12)


# -- transient --------------------------------------------------------------------

def _step_cfg(tau, edge):
    per = 10 * tau + 2 * edge
    return SolverConfig(method="trapezoidal", steps_per_period=int(round(200 * per / tau)))


def test_rl_step_closed_form():
    c, tau, edge = rl_circuit()
    wf = transient(c, _step_cfg(tau, edge), tstop=10 * tau)
    exact = ramp_step_response(wf.t, tau, 0.5 / 20.0, edge)
    assert max_relative_error(wf.t, wf["i(L1)"], exact, tau / 200) < 5e-3
    assert wf["i(L1)"][-1] == pytest.approx(0.025, rel=1e-4)


def test_rc_step_closed_form():
    c, tau, edge = rc_circuit()
    wf = transient(c, _step_cfg(tau, edge), tstop=10 * tau)
    exact = ramp_step_response(wf.t, tau, 0.5, edge)
    assert max_relative_error(wf.t, wf["v(a)"], exact, tau / 200) < 5e-3


def _decay_error(method, n_per_tau):
    r, l, i0 = 20.0, 1.2e-9, 0.025
    tau = l / r
    c = Circuit("decay", (VDC("V1", "in", "0", 0.0), Resistor("R1", "in", "a", r), Inductor("L1", "a", "0", l, i0)))
    grid = np.linspace(0.0, 5 * tau, 5 * n_per_tau + 1)
    wf = transient(c, SolverConfig(method=method), tstop=5 * tau, use_ic=True, fixed_times=grid)
    return np.abs(wf["i(L1)"] - i0 * np.exp(-wf.t / tau)).max()


@pytest.mark.parametrize("method, min_order", [("trapezoidal", 1.8), ("backward_euler", 0.9)])
def test_convergence_order(method, min_order):
    errs = [_decay_error(method, n) for n in (20, 40, 80, 160)]
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(orders) >= min_order, orders


def test_passivity_backward_euler():
    c = parse_netlist(
        "lc tank\nV1 in 0 0\nR1 in a 5\nL1 a b 1n IC=10m\nC1 b 0 1p IC=0.2\n"
    )
    wf = transient(c, SolverConfig(method="backward_euler"), tstop=1e-9, use_ic=True)
    energy = 0.5 * 1e-12 * wf["v(b)"] ** 2 + 0.5 * 1e-9 * wf["i(L1)"] ** 2
    assert energy[0] == pytest.approx(0.5 * 1e-12 * 0.04 + 0.5 * 1e-9 * 1e-4)
    assert np.all(np.diff(energy) <= 1e-15 * energy[0])
    assert energy[-1] < 0.5 * energy[0]


def test_zero_input_gives_zero_currents():
    c = build_packaged_cell(MP, src=square_wave(1e8, 0.0), x0=0.4)
    wf = transient(c, tstop=2e-8)
    for name in ("i(M1)", "i(L1)", "i(VIN)"):
        assert np.all(wf[name] == 0.0)
    # equal set and reset rates at zero bias relax x toward one half
    assert np.all(np.diff(wf["x(M1)"]) >= 0) and wf["x(M1)"][-1] < 0.5


def test_kcl_residual_and_finite_output():
    cfg = SolverConfig()
    wf = transient(build_packaged_cell(MP, src=square_wave(1e7, 0.5)), cfg, tstop=2e-7)
    assert wf.meta["max_kcl_residual"] < cfg.abstol_i
    assert all(np.isfinite(v).all() for v in wf.signals.values())
    assert np.all(np.diff(wf.t) > 0)


def test_breakpoints_are_on_the_grid():
    src = square_wave(1e8, 0.5)
    wf = transient(build_ideal_cell(MP, src=src), tstop=1e-8)
    for corner in (src.tr, src.tr + src.pw, src.tr + src.pw + src.tf):
        assert np.min(np.abs(wf.t - corner)) < 1e-22


def test_memristor_current_is_ohmic():
    wf = transient(build_ideal_cell(MP, src=square_wave(1e7, 0.5)), tstop=1e-7)
    v = wf["v(a)"] - wf["v(b)"]
    # the recorded current uses the conductance in force during each step
    x_prev = np.concatenate([[wf["x(M1)"][0]], wf["x(M1)"][:-1]])
    g = x_prev / MP.r_on + (1 - x_prev) / MP.r_off
    assert np.allclose(wf["i(M1)"], g * v, rtol=1e-12, atol=1e-18)
    assert wf["x(M1)"][-1] > 0.2


@pytest.mark.parametrize("mode", ["deterministic", "stochastic"])
def test_determinism(mode):
    mp = MemristorParams(mode=mode, seed=11)
    c = build_packaged_cell(mp, src=square_wave(1e7, 0.5))
    a = transient(c, tstop=3e-7)
    b = transient(c, tstop=3e-7)
    assert np.array_equal(a.t, b.t)
    for name in a.names:
        assert np.array_equal(a[name], b[name])
    assert a.to_csv_string() == b.to_csv_string()


def test_step_underflow():
    c, tau, edge = rc_circuit()
    cfg = SolverConfig(reltol=1e-12, abstol_v=1e-15, dt_min=tau / 10)
    with pytest.raises(StepUnderflow):
        transient(c, cfg, tstop=10 * tau)


def test_fixed_grid_is_followed_exactly():
    grid = np.linspace(0, 1e-8, 57)
    wf = transient(build_ideal_cell(MP, src=square_wave(1e8, 0.5)), tstop=1e-8, fixed_times=grid)
    assert np.array_equal(wf.t, grid)
    with pytest.raises(ValueError):
        transient(build_ideal_cell(MP), tstop=1e-8, fixed_times=grid[::-1])


def test_tstop_required():
    with pytest.raises(ValueError):
        transient(build_ideal_cell(MP))


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(steps_per_period=99)
    with pytest.raises(ValueError):
        SolverConfig(reltol=0)
    with pytest.raises(ValueError):
        SolverConfig(method="gear")


# -- waveform ---------------------------------------------------------------------

def test_waveform_csv_round_trip():
    wf = transient(build_packaged_cell(MP, src=square_wave(1e8, 0.5)), tstop=1e-8)
    text = wf.to_csv_string()
    assert text.splitlines()[0] == "t," + ",".join(wf.names)
    back = Waveform.from_csv(io.StringIO(text))
    assert np.array_equal(back.t, wf.t)
    for name in wf.names:
        assert np.array_equal(back[name], wf[name])


def test_waveform_validation():
    with pytest.raises(ValueError):
        Waveform([0.0, 1.0, 1.0], {})
    with pytest.raises(ValueError):
        Waveform([0.0, 1.0], {"a": [1.0]})
    with pytest.raises(MissingSignal):
        Waveform([0.0], {"a": [1.0]})["b"]
