import numpy as np
import pytest

from diraclab import exact, nonlinearity, weights
from diraclab.dynamics import (
    RadialSpinorState,
    SpinorState1D,
    Trajectory,
    integrate,
)
from diraclab.grids import Grid1D, RadialGrid, quad
from diraclab.virials import (
    ScalingTriple,
    coercivity_estimate,
    coercivity_forms,
    default_alpha,
    functional_H,
    functional_I,
    functionals_J1_to_J4,
    identity_ids,
    origin_flux_radial,
    rhs_H,
    rhs_I,
    rhs_J1_to_J4,
    rhs_J_combined_1d,
    rhs_K_3d,
    rhs_K_combined_closed,
    verify_identity,
    weight_closed_forms,
    window_flux_1d,
)


# ---------------------------------------------------------------------------
# shared states and trajectories

G_LAB = Grid1D(-30.0, 30.0, 1201)
G_PSI = G_LAB


def lab_state(grid=None):
    g = G_LAB if grid is None else grid
    u = np.exp(-(g.x + 4.0) ** 2 / 5.0) * (1.0 + 0.2j)
    v = 0.8 * np.exp(-(g.x - 3.0) ** 2 / 6.0) * (0.3 - 0.9j)
    return SpinorState1D(g, "lab_uv", np.vstack([u, v]))


def psi_state(amp, grid=None):
    g = G_PSI if grid is None else grid
    p1 = amp * np.exp(-(g.x + 3.0) ** 2 / 4.0) * (1.0 + 0.3j)
    p2 = amp * 0.6 * np.exp(-(g.x - 2.0) ** 2 / 5.0) * (0.5 - 0.8j)
    return SpinorState1D(g, "spinor_psi", np.vstack([p1, p2]))


def bump_even(r, c, w, a):
    return a * (np.exp(-((r - c) / w) ** 2) + np.exp(-((r + c) / w) ** 2))


def bump_odd(r, c, w, a):
    return a * (np.exp(-((r - c) / w) ** 2) - np.exp(-((r + c) / w) ** 2))


def annular_state(grid, scale=1.0):
    # parity-symmetrized bumps: origin Taylor data vanishes to ~1e-7,
    # which keeps the identity defect at the time-sampling floor
    r = grid.r
    return RadialSpinorState(grid, np.vstack([
        bump_even(r, 6.0, 1.5, 1.0 * scale),
        bump_even(r, 5.0, 1.8, 0.6 * scale),
        bump_odd(r, 6.5, 1.6, 0.8 * scale),
        bump_odd(r, 5.5, 1.5, 0.7 * scale)]))


def origin_state(grid, scale=1.0):
    r = grid.r
    return RadialSpinorState(grid, np.vstack([
        scale * np.exp(-r ** 2 / 3.0),
        scale * 0.5 * r ** 2 * np.exp(-r ** 2 / 4.0),
        scale * 0.8 * r * np.exp(-r ** 2 / 3.5),
        scale * 0.54 * r * np.exp(-r ** 2 / 2.5)]))


@pytest.fixture(scope="module")
def thirring_traj():
    return integrate(lab_state(), nonlinearity.thirring(), t_end=2.0,
                     dt=0.01, m=1.0, sample_stride=2)


@pytest.fixture(scope="module")
def gross_neveu_traj():
    return integrate(lab_state(), nonlinearity.gross_neveu(), t_end=2.0,
                     dt=0.01, m=1.0, sample_stride=2)


@pytest.fixture(scope="module")
def soler_psi_traj():
    return integrate(psi_state(0.6), nonlinearity.soler(), t_end=2.0,
                     dt=0.01, m=1.0, sample_stride=2)


@pytest.fixture(scope="module")
def radial_linear_traj():
    rg = RadialGrid(40.0, 1600)
    return integrate(annular_state(rg), nonlinearity.zero_model("spinor_psi"),
                     t_end=2.0, dt=0.01, m=0.0, sample_stride=2)


@pytest.fixture(scope="module")
def radial_soler_traj():
    rg = RadialGrid(40.0, 1600)
    return integrate(annular_state(rg, 0.6), nonlinearity.soler(),
                     t_end=2.0, dt=0.01, m=1.0, sample_stride=2)


def stream_traj(t_lo, t_hi, n_samp, grid):
    def u0(x):
        return np.exp(-x * x / 9.0) * (1.0 + 0.4j)

    def v0(x):
        return 0.7 * np.exp(-(x - 1.0) ** 2 / 7.0) * (0.6 - 1.0j)

    ts = np.linspace(t_lo, t_hi, n_samp)
    sts = [exact.massless_free(u0, v0, t, grid) for t in ts]
    zeros = [0.0] * n_samp
    return Trajectory(ts, sts, zeros, zeros)


# ---------------------------------------------------------------------------
# weight closed forms

def test_weight_closed_forms_match_composition():
    w = weights.r32_weight()
    forms = weight_closed_forms()
    r = np.linspace(0.01, 50.0, 20000)
    composed = {
        "phi_prime": w.dphi(r),
        "advect": 2.0 * w.sing("phi_over_r", r) - w.dphi(r),
        "phi_over_r": w.sing("phi_over_r", r),
        "zero_order_even": 0.5 * (w.sing("dphi_over_r2", r)
                                  + 0.5 * w.d3phi(r)
                                  - w.sing("d2phi_over_r", r)),
        "zero_order_odd": 0.5 * (2.0 * w.sing("phi_over_r3", r)
                                 + w.sing("dphi_over_r2", r)
                                 + 0.5 * w.d3phi(r)
                                 - w.sing("d2phi_over_r", r)),
        "cross_even_w": 2.0 * w.sing("phi_over_r2", r)
            - 0.5 * w.d2phi(r) - w.sing("dphi_over_r", r),
        "cross_odd_w": -0.5 * (w.d2phi(r) - 2.0 * w.sing("dphi_over_r", r)),
    }
    assert set(forms) == set(composed)
    for key, f in forms.items():
        got = f(r)
        ref = composed[key]
        rel = np.max(np.abs(got - ref) / np.abs(ref))
        assert rel <= 1e-10, key


def test_weight_closed_forms_spot_values_at_one():
    forms = weight_closed_forms()
    one = np.array([1.0])
    expected = {
        "phi_prime": 0.5,
        "advect": 0.5,
        "phi_over_r": 0.5,
        "zero_order_even": 0.3125,
        "zero_order_odd": 0.8125,
        "cross_even_w": 0.5625,
        "cross_odd_w": 0.5625,
    }
    for key, val in expected.items():
        assert float(forms[key](one)[0]) == pytest.approx(val, rel=1e-12)


def test_weight_closed_forms_positive_on_half_line():
    forms = weight_closed_forms()
    r = np.linspace(0.01, 50.0, 20000)
    for key, f in forms.items():
        assert np.min(f(r)) > 0.0, key


def test_weight_closed_forms_unknown_name():
    with pytest.raises(ValueError, match="closed-form"):
        weight_closed_forms("no_such_weight")


# ---------------------------------------------------------------------------
# scaling presets

def test_constant_scaling_drift():
    sc = ScalingTriple.constant(lam=2.5, theta=0.7)
    assert sc.check(3.0) == (1.0, 2.5)
    assert sc.rho(2.0) == pytest.approx(1.4)
    assert sc.rho_dot(11.0) == pytest.approx(0.7)
    assert sc.lam_dot(5.0) == 0.0


def test_log_window_scaling():
    sc = ScalingTriple.log_window()
    t = np.exp(2.0)
    assert sc.lam(t) == pytest.approx(t / 4.0, rel=1e-14)
    # derivative cross-checked by finite differences
    eps = 1e-6
    fd = (sc.lam(t + eps) - sc.lam(t - eps)) / (2.0 * eps)
    assert sc.lam_dot(t) == pytest.approx(fd, rel=1e-8)
    with pytest.raises(ValueError):
        sc.lam(0.5)


def test_exterior_scaling_chases_slower_than_edge():
    sc = ScalingTriple.exterior(b=0.5, t0=4.0)
    assert sc.check(2.0) == (2.0, 1.0)
    assert sc.rho(4.0) == pytest.approx(-(1.0 + 0.5) * 4.0)
    assert sc.rho_dot(3.0) == pytest.approx(-1.25)
    # center speed strictly above the region-edge speed
    assert sc.rho_dot(3.0) > -(1.0 + 0.5)


def test_scaling_rejects_bad_parameters():
    with pytest.raises(ValueError):
        ScalingTriple.constant(lam=0.0)
    with pytest.raises(ValueError):
        ScalingTriple.exterior(b=-1.0, t0=4.0)
    bad = ScalingTriple(mu=lambda t: -1.0, lam=lambda t: 1.0,
                        rho=lambda t: 0.0, mu_dot=lambda t: 0.0,
                        lam_dot=lambda t: 0.0, rho_dot=lambda t: 0.0)
    with pytest.raises(ValueError):
        bad.check(0.0)


def test_default_alpha_split():
    split = default_alpha("lab_uv")
    assert np.array_equal(split.alpha_r, np.diag([1.0, -1.0]))
    assert np.allclose(split.alpha_i, 0.0)
    full = default_alpha("spinor_psi").matrix
    assert np.allclose(full, np.array([[0.0, 1j], [-1j, 0.0]]))
    assert np.allclose(full, full.conj().T)
    with pytest.raises(ValueError):
        default_alpha("unknown_frame")


# ---------------------------------------------------------------------------
# identities on the analytic massless stream (no integrator error at all)

def test_stream_identities_at_fd_floor():
    g = Grid1D(-80.0, 80.0, 3201)
    tr = stream_traj(0.0, 2.0, 401, g)
    for ident, kw in [("K_window_charge", {}),
                      ("J_chiral_balance", {"m": 0.0}),
                      ("I_weighted_charge", {})]:
        rep = verify_identity(tr, ident, **kw)
        assert rep.passed, ident
        assert rep.max_defect <= 1e-5, ident


def test_stream_weighted_charge_with_drifting_window():
    g = Grid1D(-80.0, 80.0, 3201)
    tr = stream_traj(0.0, 2.0, 401, g)
    sc = ScalingTriple.constant(lam=2.5, theta=0.7)
    rep = verify_identity(tr, "I_weighted_charge", scaling=sc)
    assert rep.passed
    assert rep.max_defect <= 1e-5


def test_stream_log_window_identity():
    g = Grid1D(-80.0, 80.0, 3201)
    tr = stream_traj(10.0, 12.0, 401, g)
    rep = verify_identity(tr, "I_weighted_charge",
                          scaling=ScalingTriple.log_window())
    assert rep.passed
    assert rep.max_defect <= 1e-8


def test_exterior_window_is_monotone_with_nonpositive_rate():
    g = Grid1D(-80.0, 80.0, 3201)
    tr = stream_traj(2.0, 4.0, 401, g)
    half = weights.half_tanh(side=+1)
    ext = ScalingTriple.exterior(b=0.25, t0=4.0)
    rep = verify_identity(tr, "I_weighted_charge", weight=half, scaling=ext)
    assert rep.passed
    rhs_vals = [rhs_I(st, half, ext) for st in tr.states]
    assert max(rhs_vals) <= 0.0
    ivals = [functional_I(st, half, ext) for st in tr.states]
    assert np.max(np.diff(ivals)) < 0.0
    assert ivals[0] == pytest.approx(0.737641, abs=1e-5)
    assert ivals[-1] == pytest.approx(0.616236, abs=1e-5)


# ---------------------------------------------------------------------------
# identities along integrated 1D runs

def test_lab_identities_thirring(thirring_traj):
    for ident in ("K_window_charge", "J_chiral_balance",
                  "I_weighted_charge"):
        rep = verify_identity(thirring_traj, ident, m=1.0,
                              model=nonlinearity.thirring())
        assert rep.passed, ident
    rep = verify_identity(thirring_traj, "K_window_charge", m=1.0,
                          model=nonlinearity.thirring())
    assert rep.max_defect <= 2e-4


def test_lab_identities_bec():
    model = nonlinearity.bec_resonance()
    tr = integrate(lab_state(), model, t_end=2.0, dt=0.01, m=0.5,
                   sample_stride=2)
    for ident in ("K_window_charge", "J_chiral_balance",
                  "I_weighted_charge"):
        rep = verify_identity(tr, ident, m=0.5, model=model)
        assert rep.passed, ident


def test_chiral_balance_needs_flux_term_for_gross_neveu(gross_neveu_traj):
    # the potential flux 2*int phi*[Im(u W1~) - Im(v W2~)] vanishes only
    # under the realness hypothesis; gross_neveu violates it on purpose
    model = nonlinearity.gross_neveu()
    rep = verify_identity(gross_neveu_traj, "J_chiral_balance", m=1.0,
                          model=model)
    assert rep.passed
    rep_bare = verify_identity(gross_neveu_traj, "J_chiral_balance", m=1.0,
                               model=None)
    assert not rep_bare.passed
    assert rep_bare.max_defect >= 5e-3


def test_psi_quartet_identities_soler(soler_psi_traj):
    model = nonlinearity.soler()
    for ident in ("I_weighted_charge", "J1", "J2", "J3", "J4",
                  "J_quartet_combined", "H_sech_1d"):
        rep = verify_identity(soler_psi_traj, ident, m=1.0, model=model)
        assert rep.passed, ident
        assert rep.max_defect <= 1e-4, ident


def test_psi_quartet_identities_quartic():
    model = nonlinearity.quartic_harmonic()
    tr = integrate(psi_state(0.18), model, t_end=2.0, dt=0.01, m=1.0,
                   sample_stride=1)
    for ident in ("I_weighted_charge", "J1", "J4", "J_quartet_combined",
                  "H_sech_1d"):
        rep = verify_identity(tr, ident, m=1.0, model=model)
        assert rep.passed, ident


def test_combined_quartet_rhs_equals_alternating_sum(soler_psi_traj):
    w = weights.tanh_1d()
    model = nonlinearity.soler()
    st = soler_psi_traj.states[len(soler_psi_traj.states) // 2]
    comb = rhs_J_combined_1d(st, w, m=1.0, model=model)
    four = rhs_J1_to_J4(st, w, m=1.0, model=model)
    alt = four[0] - four[1] + four[2] - four[3]
    assert abs(comb - alt) <= 1e-7
    jvals = functionals_J1_to_J4(st, w, m=1.0)
    assert jvals.shape == (4,)


# ---------------------------------------------------------------------------
# radial identities

RADIAL_IDS = ("K1_3d", "tK1_3d", "K2_3d", "tK2_3d", "K_combined_3d",
              "H_radial_r2")


def test_radial_identities_linear(radial_linear_traj):
    for ident in RADIAL_IDS:
        rep = verify_identity(radial_linear_traj, ident, m=0.0)
        assert rep.passed, ident
        assert rep.max_defect <= 3e-4, ident


def test_radial_identities_soler(radial_soler_traj):
    model = nonlinearity.soler()
    for ident in RADIAL_IDS:
        rep = verify_identity(radial_soler_traj, ident, m=1.0, model=model)
        assert rep.passed, ident


def test_radial_k1_origin_active_meets_stated_tolerance():
    # origin-active even/odd data puts an r^{1/2}-type integrand under
    # the midpoint rule; the quadrature error near r_0 dominates, so
    # this check carries the coarser 3e-4 relative tolerance
    rg = RadialGrid(40.0, 3200)
    tr = integrate(origin_state(rg), nonlinearity.zero_model("spinor_psi"),
                   t_end=2.0, dt=0.00625, m=0.0, sample_stride=4)
    rep = verify_identity(tr, "K1_3d", m=0.0)
    scale = float(np.max(np.abs(rep.rhs)))
    assert rep.max_defect / scale <= 3e-4
    assert rep.passed


def test_radial_h_ratio_bound_small_amplitude():
    rg = RadialGrid(40.0, 1600)
    tr = integrate(origin_state(rg, 0.05), nonlinearity.soler(), t_end=2.0,
                   dt=0.01, m=1.0, sample_stride=2)
    ratios = [abs(rhs_H(st, "radial_r2")) / functional_H(st, "radial_r2")
              for st in tr.states]
    assert 0.0 < max(ratios) <= 10.0


def test_radial_combined_closed_form_on_origin_flat_data():
    rg = RadialGrid(40.0, 1600)
    r = rg.r
    st = RadialSpinorState(rg, 0.4 * np.vstack([
        r ** 2 * np.exp(-r ** 2 / 3.0),
        0.5 * r ** 2 * np.exp(-r ** 2 / 4.0),
        0.8 * r * np.exp(-r ** 2 / 3.5),
        0.6 * r ** 3 * np.exp(-r ** 2 / 2.5)]))
    w = weights.r32_weight()
    for model in (None, nonlinearity.soler()):
        dk = rhs_K_3d(st, w, m=1.0, model=model)
        gen = dk[0] + dk[1] - dk[2] - dk[3]
        clo = rhs_K_combined_closed(st, w, m=1.0, model=model)
        assert abs(gen - clo) <= 1e-4


def test_radial_combined_closed_form_needs_origin_flat_even_parts():
    # with phi11(0) != 0 the closed form sheds a divergent boundary
    # term and departs from the exact alternating sum by O(1)
    rg = RadialGrid(40.0, 1600)
    st = origin_state(rg, 0.4)
    w = weights.r32_weight()
    dk = rhs_K_3d(st, w, m=1.0)
    gen = dk[0] + dk[1] - dk[2] - dk[3]
    clo = rhs_K_combined_closed(st, w, m=1.0)
    assert abs(gen - clo) >= 0.5


# ---------------------------------------------------------------------------
# exact soliton stream: integrator error excluded, quadrature isolated

def test_soliton_stream_identities_exact():
    g = Grid1D(-60.0, 60.0, 2401)
    ts = np.linspace(0.0, 1.0, 101)
    sols = [exact.thirring_soliton(exact.SolitonParams(omega=0.5, t=t), g)
            for t in ts]
    tr = Trajectory(ts, sols, [0.0] * 101, [0.0] * 101)
    model = nonlinearity.thirring()
    for ident in ("K_window_charge", "J_chiral_balance"):
        rep = verify_identity(tr, ident, m=1.0, model=model)
        assert rep.passed, ident
        assert rep.max_defect <= 1e-12, ident


def test_wrong_mass_is_detected():
    tr = integrate(lab_state(), nonlinearity.zero_model("lab_uv"),
                   t_end=2.0, dt=0.01, m=1.0, sample_stride=2)
    assert verify_identity(tr, "J_chiral_balance", m=1.0).passed
    rep = verify_identity(tr, "J_chiral_balance", m=-1.0)
    assert not rep.passed
    assert rep.max_defect >= 1.0


# ---------------------------------------------------------------------------
# defect refinement under simultaneous (dt, h) halving

def test_defect_shrinks_under_refinement():
    cases = [("K_window_charge", "lab", nonlinearity.thirring(), 1.0),
             ("J_quartet_combined", "psi", nonlinearity.soler(), 1.0)]
    for ident, kind, model, m in cases:
        defects = []
        for n, dt in [(1201, 0.02), (2401, 0.01)]:
            g = Grid1D(-30.0, 30.0, n)
            st = lab_state(g) if kind == "lab" else psi_state(0.6, g)
            tr = integrate(st, model, t_end=1.0, dt=dt, m=m,
                           sample_stride=2)
            defects.append(verify_identity(tr, ident, m=m,
                                           model=model).max_defect)
        assert defects[0] / defects[1] >= 3.0, ident


# ---------------------------------------------------------------------------
# coercivity of the window Hessian

def test_coercivity_estimate_positive():
    for L, lo in [(1.0, 0.6), (5.0, 0.35), (20.0, 0.14)]:
        c = coercivity_estimate(L)
        assert lo <= c < 1.0, L


def test_coercivity_fails_without_odd_symmetry():
    # sech(x/L) is the kernel direction; a slightly flatter even
    # profile pushes the form negative, so oddness is essential
    b0, _ = coercivity_forms(1.0)
    g = Grid1D(-25.0, 25.0, 4001)
    kappa = (np.sqrt(3.0) - 1.0) / 2.0
    assert b0(np.cosh(g.x) ** (-kappa), g) < -0.1
    assert abs(b0(1.0 / np.cosh(g.x), g)) <= 1e-6


def test_coercivity_quotient_near_one_far_from_well():
    b0, ref = coercivity_forms(1.0)
    g = Grid1D(-25.0, 25.0, 4001)
    z = np.exp(-(np.abs(g.x) - 15.0) ** 2 / 0.5) * np.sign(g.x)
    assert b0(z, g) / ref(z, g) == pytest.approx(1.0, abs=1e-3)


def test_coercivity_input_validation():
    with pytest.raises(ValueError):
        coercivity_estimate(0.0)
    with pytest.raises(ValueError):
        coercivity_forms(-2.0)
    with pytest.raises(ValueError):
        coercivity_estimate(1.0, grid=Grid1D(0.0, 10.0, 101))


# ---------------------------------------------------------------------------
# flux monitors

def test_window_flux_matches_direct_quadrature():
    st = lab_state()
    lam = 3.0
    window = 1.0 / np.cosh(G_LAB.x / lam) ** 2
    direct = quad(window * st.density(), G_LAB) / lam
    assert window_flux_1d(st, lam) == pytest.approx(direct, rel=1e-13)
    with pytest.raises(ValueError):
        window_flux_1d(st, 0.0)


def test_origin_flux_radial_frozen_value():
    rg = RadialGrid(40.0, 1600)
    val = origin_flux_radial(origin_state(rg, 0.5))
    assert val == pytest.approx(6.977387, rel=1e-5)
    assert val > 0.0


# ---------------------------------------------------------------------------
# report plumbing and error paths

def test_identity_registry_names():
    assert identity_ids() == (
        "H_radial_r2", "H_sech_1d", "I_weighted_charge", "J1", "J2", "J3",
        "J4", "J_chiral_balance", "J_quartet_combined", "K1_3d",
        "K2_3d", "K_combined_3d", "K_window_charge", "tK1_3d", "tK2_3d")


def test_report_rows_and_dict(thirring_traj):
    rep = verify_identity(thirring_traj, "K_window_charge", m=1.0,
                          model=nonlinearity.thirring())
    rows = rep.rows()
    assert len(rows) == len(thirring_traj.times) - 2
    t, f, fd, rhs, defect = rows[0]
    assert defect == pytest.approx(abs(fd - rhs))
    d = rep.to_dict()
    assert d["identity"] == "K_window_charge"
    assert d["passed"] is True
    assert d["n_samples"] == len(rows)
    assert "pass" in repr(rep)


def test_zero_trajectory_passes_via_atol():
    z = np.zeros((2, G_LAB.n_points), dtype=complex)
    sts = [SpinorState1D(G_LAB, "lab_uv", z, t=t) for t in (0.0, 0.1, 0.2)]
    tr = Trajectory([0.0, 0.1, 0.2], sts, [0.0] * 3, [0.0] * 3)
    rep = verify_identity(tr, "K_window_charge")
    assert rep.passed
    assert rep.max_defect == 0.0


def test_verify_identity_error_paths(thirring_traj):
    with pytest.raises(KeyError, match="K_window_charge"):
        verify_identity(thirring_traj, "no_such_identity")
    two = Trajectory([0.0, 1.0], [lab_state(), lab_state()],
                     [0.0] * 2, [0.0] * 2)
    with pytest.raises(ValueError, match="3 samples"):
        verify_identity(two, "K_window_charge")
    sts = [lab_state() for _ in range(3)]
    uneven = Trajectory([0.0, 0.1, 0.3], sts, [0.0] * 3, [0.0] * 3)
    with pytest.raises(ValueError, match="uniformly"):
        verify_identity(uneven, "K_window_charge")


def test_model_arity_is_checked_against_state_frame(thirring_traj):
    # thirring is a lab-frame potential; psi-frame runs must refuse it
    tr = integrate(psi_state(0.3), nonlinearity.zero_model("spinor_psi"),
                   t_end=0.1, dt=0.01, m=0.0, sample_stride=1)
    with pytest.raises(ValueError, match="arity"):
        verify_identity(tr, "J1", m=0.0, model=nonlinearity.thirring())
