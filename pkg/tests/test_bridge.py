import numpy as np
import pytest

from diraclab import nonlinearity
from diraclab.bridge import (
    BridgeResidual,
    GronwallSeries,
    bridge_residual,
    chain_rule_dW,
    gronwall_monitor,
)
from diraclab.dynamics import SpinorState1D, Trajectory, integrate
from diraclab.grids import Grid1D

G = Grid1D(-40.0, 40.0, 1601)


def psi_state(amp=0.15):
    p1 = amp * np.exp(-(G.x + 3.0) ** 2 / 4.0) * (1.0 + 0.3j)
    p2 = amp * 0.6 * np.exp(-(G.x - 2.0) ** 2 / 5.0) * (0.5 - 0.8j)
    return SpinorState1D(G, "spinor_psi", np.vstack([p1, p2]))


def substride(tr, step):
    return Trajectory(tr.times[::step], tr.states[::step],
                      tr.boundary_mass[::step], tr.max_abs[::step])


@pytest.fixture(scope="module")
def quartic_traj():
    return integrate(psi_state(), nonlinearity.quartic_harmonic(),
                     t_end=10.0, dt=0.01, m=1.0, sample_stride=2)


def test_residuals_sit_at_time_sampling_floor(quartic_traj):
    model = nonlinearity.quartic_harmonic()
    res = bridge_residual(quartic_traj, 250, model, m=1.0)
    # dt_s = 0.02; the floor is quadratic in it
    assert res.u0_max <= 5e-5
    assert res.v0_max <= 5e-5
    assert res.nlkg_defect_1 <= 5e-5
    assert res.nlkg_defect_2 <= 5e-5


def test_residual_order_in_sample_spacing(quartic_traj):
    model = nonlinearity.quartic_harmonic()
    u0 = {}
    nlkg = {}
    for step, k in [(8, 30), (4, 60), (2, 120)]:  # all at t = 4.8
        res = bridge_residual(substride(quartic_traj, step), k, model, m=1.0)
        u0[step] = res.u0_max
        nlkg[step] = res.nlkg_defect_1
    assert np.log2(u0[8] / u0[4]) >= 1.8
    assert np.log2(u0[4] / u0[2]) >= 1.8
    assert np.log2(nlkg[8] / nlkg[4]) >= 1.8
    assert np.log2(nlkg[4] / nlkg[2]) >= 1.8


def test_gronwall_quantity_stays_at_floor(quartic_traj):
    model = nonlinearity.quartic_harmonic()
    gw = gronwall_monitor(quartic_traj, model, m=1.0)
    assert gw.m_max <= 10.0 * gw.m_first
    assert gw.m_max <= 1e-8
    assert gw.times[0] == pytest.approx(0.02)
    assert gw.times[-1] == pytest.approx(9.98)
    # the quotient series exists where M is above its own floor
    assert gw.ratio.size > 0
    d = gw.to_dict()
    assert len(d["M"]) == len(gw.times)
    assert "m_first" in repr(gw) or "GronwallSeries" in repr(gw)


def test_corrupted_sample_is_detected(quartic_traj):
    model = nonlinearity.quartic_harmonic()
    clean = gronwall_monitor(quartic_traj, model, m=1.0)
    states = [SpinorState1D(G, "spinor_psi", st.fields.copy(), t=st.t)
              for st in quartic_traj.states]
    states[250].fields[0] += 1e-3 * np.exp(-G.x ** 2 / 4.0)
    tr = Trajectory(quartic_traj.times, states,
                    quartic_traj.boundary_mass, quartic_traj.max_abs)
    corrupted = gronwall_monitor(tr, model, m=1.0)
    jump = np.max(np.abs(corrupted.values - clean.values))
    assert jump >= 1e-6


def test_zero_trajectory_gives_exact_zeros():
    model = nonlinearity.quartic_harmonic()
    states = [SpinorState1D(G, "spinor_psi",
                            np.zeros((2, G.n_points), dtype=complex), t=t)
              for t in (0.0, 0.1, 0.2)]
    tr = Trajectory([0.0, 0.1, 0.2], states, [0.0] * 3, [0.0] * 3)
    res = bridge_residual(tr, 1, model, m=1.0)
    assert res.u0_max == 0.0
    assert res.v0_max == 0.0
    assert res.nlkg_defect_1 == 0.0
    assert res.nlkg_defect_2 == 0.0
    gw = gronwall_monitor(tr, model, m=1.0)
    assert np.all(gw.values == 0.0)


def test_non_harmonic_models_are_refused(quartic_traj):
    for bad in (nonlinearity.soler(), nonlinearity.thirring_psi()):
        with pytest.raises(ValueError, match="mixed-gradient"):
            bridge_residual(quartic_traj, 10, bad, m=1.0)
        with pytest.raises(ValueError, match="defect"):
            gronwall_monitor(quartic_traj, bad, m=1.0)


def test_linear_run_floor():
    model = nonlinearity.zero_model("spinor_psi")
    tr = integrate(psi_state(), model, t_end=4.0, dt=0.01, m=1.0,
                   sample_stride=2)
    res = bridge_residual(tr, 100, model, m=1.0)
    assert res.u0_max <= 5e-5
    assert res.nlkg_defect_1 <= 5e-5
    gw = gronwall_monitor(tr, model, m=1.0)
    assert gw.m_max <= 10.0 * gw.m_first


def test_chain_rule_matches_direct_differencing(quartic_traj):
    model = nonlinearity.quartic_harmonic()
    c1, c2, d1, d2 = chain_rule_dW(quartic_traj, 250, model)
    scale = max(np.max(np.abs(d1)), np.max(np.abs(d2)))
    assert np.max(np.abs(c1 - d1)) <= 5e-5
    assert np.max(np.abs(c2 - d2)) <= 5e-5
    assert scale > 1e-3  # the comparison is not vacuous


def test_bridge_input_validation(quartic_traj):
    model = nonlinearity.quartic_harmonic()
    with pytest.raises(IndexError):
        bridge_residual(quartic_traj, 0, model, m=1.0)
    with pytest.raises(IndexError):
        bridge_residual(quartic_traj, len(quartic_traj) - 1, model, m=1.0)
    with pytest.raises(ValueError, match="model"):
        bridge_residual(quartic_traj, 10, None, m=1.0)
    u = np.exp(-G.x ** 2).astype(complex)
    lab_states = [SpinorState1D(G, "lab_uv", np.vstack([u, u]), t=t)
                  for t in (0.0, 0.1, 0.2)]
    lab_tr = Trajectory([0.0, 0.1, 0.2], lab_states, [0.0] * 3, [0.0] * 3)
    with pytest.raises(ValueError, match="spinor-frame"):
        bridge_residual(lab_tr, 1, model, m=1.0)
    sts = [psi_state() for _ in range(3)]
    uneven = Trajectory([0.0, 0.1, 0.3], sts, [0.0] * 3, [0.0] * 3)
    with pytest.raises(ValueError, match="uniformly"):
        gronwall_monitor(uneven, model, m=1.0)


def test_residual_report_plumbing(quartic_traj):
    model = nonlinearity.quartic_harmonic()
    res = bridge_residual(quartic_traj, 250, model, m=1.0)
    assert isinstance(res, BridgeResidual)
    assert res.t == pytest.approx(5.0)
    assert res.u0.shape == (G.n_points,)
    d = res.to_dict()
    assert set(d) == {"t", "u0_max", "v0_max", "nlkg_defect_1",
                      "nlkg_defect_2"}
    assert "BridgeResidual" in repr(res)
