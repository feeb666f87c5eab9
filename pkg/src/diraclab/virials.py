"""Weighted virial functionals and their analytic time derivatives.

Everything here follows one pattern: a functional F of the fields built
from a smooth weight, and a closed-form expression for dF/dt along the
flow. The pairing of the two is checked by ``verify_identity``, which
compares centered finite differences of F against the analytic rate on
a sampled trajectory and reports pointwise defects.

Functionals on the line come in two frames. The lab-frame pair
(``functional_K_1d``, ``functional_J_1d``) weighs the charge density and
the chiral balance; the frame-agnostic ``functional_I`` carries a full
scaling triple (amplitude, width, center) and covers moving windows.
The quartet functionals pair first derivatives of the four real field
components against transport brackets; their radial counterparts do the
same on the half line with the geometric 2/r terms and singular weight
quotients kept in closed form.

Sign conventions for the analytic rates were fixed the only way that
means anything: by driving the defect of the finite-difference check to
the quadrature floor on resolved runs. Where a rate needs a nonlinear
flux term, passing the model adds it exactly; omitting the model states
that the coupling's flux vanishes pointwise (true for every
gauge-invariant diagonal coupling shipped here).
"""

import numpy as np

from .algebra import split_alpha
from .dynamics import RadialSpinorState, SpinorState1D
from .grids import Grid1D, deriv1, quad
from .weights import r2_over_1pr4_weight, r32_weight, sech_1d, tanh_1d

__all__ = [
    "ScalingTriple",
    "VirialReport",
    "default_alpha",
    "functional_I",
    "rhs_I",
    "functional_K_1d",
    "rhs_K_1d",
    "functional_J_1d",
    "rhs_J_1d",
    "functionals_J1_to_J4",
    "rhs_J1_to_J4",
    "rhs_J_combined_1d",
    "functionals_K_3d",
    "rhs_K_3d",
    "rhs_K_combined_closed",
    "weight_closed_forms",
    "functional_H",
    "rhs_H",
    "verify_identity",
    "identity_ids",
    "coercivity_estimate",
    "coercivity_forms",
    "window_flux_1d",
    "origin_flux_radial",
]

_SIGMA3 = np.array([[1.0, 0.0], [0.0, -1.0]])
_ALPHA_PSI = np.array([[0.0, 1.0j], [-1.0j, 0.0]])


class ScalingTriple:
    """Time maps (mu, lambda, rho) entering the weighted charge.

    Each slot is a callable of t; the ``*_dot`` companions are their
    analytic derivatives. mu scales the amplitude, lambda the window
    width, rho the window center. mu and lambda must stay positive on
    the run interval; ``check`` enforces that at each evaluation.
    """

    def __init__(self, mu, lam, rho, mu_dot, lam_dot, rho_dot):
        self.mu = mu
        self.lam = lam
        self.rho = rho
        self.mu_dot = mu_dot
        self.lam_dot = lam_dot
        self.rho_dot = rho_dot

    def check(self, t):
        mu = float(self.mu(t))
        lam = float(self.lam(t))
        if mu <= 0.0 or lam <= 0.0:
            raise ValueError(
                f"scaling needs mu, lambda > 0, got ({mu}, {lam}) at t={t}")
        return mu, lam

    @staticmethod
    def constant(lam=1.0, theta=0.0):
        """Unit amplitude, fixed width, center drifting at speed theta."""
        lam = float(lam)
        theta = float(theta)
        if lam <= 0.0:
            raise ValueError("lam must be positive")
        return ScalingTriple(
            mu=lambda t: 1.0, lam=lambda t: lam, rho=lambda t: theta * t,
            mu_dot=lambda t: 0.0, lam_dot=lambda t: 0.0,
            rho_dot=lambda t: theta)

    @staticmethod
    def log_window():
        """Width lambda(t) = t/log^2 t, defined for t > 1 (used from t=10)."""
        def lam(t):
            if t <= 1.0:
                raise ValueError("log window needs t > 1")
            return t / np.log(t) ** 2

        def lam_dot(t):
            ell = np.log(t)
            return (1.0 - 2.0 / ell) / ell ** 2

        zero = lambda t: 0.0
        return ScalingTriple(mu=lambda t: 1.0, lam=lam, rho=zero,
                             mu_dot=zero, lam_dot=lam_dot, rho_dot=zero)

    @staticmethod
    def exterior(b, t0, lam=1.0):
        """Half-amplitude window chasing the region x >= (1+b)t.

        The center moves at speed -(1+b/2), strictly slower than the
        region edge -(1+b) it was launched from at t0, which is what
        makes the windowed mass monotone on 2 <= t <= t0.
        """
        b = float(b)
        t0 = float(t0)
        lam = float(lam)
        if b <= 0.0:
            raise ValueError("b must be positive")
        if lam <= 0.0:
            raise ValueError("lam must be positive")
        theta = -(1.0 + b)
        theta_tilde = -(1.0 + 0.5 * b)
        zero = lambda t: 0.0
        return ScalingTriple(
            mu=lambda t: 2.0, lam=lambda t: lam,
            rho=lambda t: theta * t0 - theta_tilde * (t0 - t),
            mu_dot=zero, lam_dot=zero, rho_dot=lambda t: theta_tilde)


class VirialReport:
    """Defect table for one identity along a sampled trajectory.

    Stores, per interior sample: time, functional value, centered
    finite difference, analytic right-hand side, and their absolute
    difference. Passes iff max defect <= max(atol, rtol * max|RHS|).
    The default atol is 1e-9 times the functional's own scale so that
    identically-zero runs pass without a relative reference.
    """

    def __init__(self, identity, times, values, fd, rhs,
                 rtol=1e-3, atol=None):
        self.identity = str(identity)
        self.times = np.asarray(times, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.fd = np.asarray(fd, dtype=float)
        self.rhs = np.asarray(rhs, dtype=float)
        self.defect = np.abs(self.fd - self.rhs)
        self.rtol = float(rtol)
        if atol is None:
            scale = 1.0
            if self.values.size:
                scale = max(1.0, float(np.max(np.abs(self.values))))
            atol = 1e-9 * scale
        self.atol = float(atol)
        rhs_scale = float(np.max(np.abs(self.rhs))) if self.rhs.size else 0.0
        self.threshold = max(self.atol, self.rtol * rhs_scale)
        self.max_defect = float(np.max(self.defect)) if self.defect.size else 0.0
        self.passed = self.max_defect <= self.threshold

    def rows(self):
        """(t, F, FD, RHS, defect) tuples, one per interior sample."""
        return list(zip(self.times, self.values, self.fd,
                        self.rhs, self.defect))

    def to_dict(self):
        return {
            "identity": self.identity,
            "passed": bool(self.passed),
            "max_defect": self.max_defect,
            "threshold": self.threshold,
            "rtol": self.rtol,
            "atol": self.atol,
            "n_samples": int(self.times.size),
            "t_first": float(self.times[0]) if self.times.size else None,
            "t_last": float(self.times[-1]) if self.times.size else None,
        }

    def __repr__(self):
        tag = "pass" if self.passed else "FAIL"
        return (f"VirialReport({self.identity!r}, {tag}, "
                f"max_defect={self.max_defect:.3e}, "
                f"threshold={self.threshold:.3e})")


def default_alpha(kind):
    """Transport matrix split for a 1D representation.

    The lab frame advects the two components in opposite directions
    (real diagonal); the spinor frame couples them antisymmetrically
    (purely imaginary off-diagonal).
    """
    if kind == "lab_uv":
        return split_alpha(_SIGMA3)
    if kind in ("spinor_psi", "real4"):
        return split_alpha(_ALPHA_PSI)
    raise ValueError(f"no transport matrix for kind {kind!r}")


def _require_1d(state, who):
    if not isinstance(state, SpinorState1D):
        raise TypeError(f"{who} needs a SpinorState1D")


def _require_lab(state, who):
    _require_1d(state, who)
    if state.kind != "lab_uv":
        raise ValueError(f"{who} is a lab-frame functional; map frames first")


def _require_spinor(state, who):
    _require_1d(state, who)
    if state.kind == "lab_uv":
        raise ValueError(f"{who} lives in the spinor frame; map frames first")


def _require_radial(state, who):
    if not isinstance(state, RadialSpinorState):
        raise TypeError(f"{who} needs a RadialSpinorState")


def _require_model(model, state, who):
    if model is None:
        return
    # diagonal couplings share one functional form across geometries,
    # so spinor-frame states accept either spinor tag
    if isinstance(state, RadialSpinorState) or state.kind != "lab_uv":
        wanted = ("spinor_psi", "radial_phi")
    else:
        wanted = ("lab_uv",)
    if model.arity not in wanted:
        raise ValueError(
            f"{who}: model {model.name!r} has arity {model.arity!r}, "
            f"state wants one of {wanted!r}")


def _real_pair(state):
    """Real and imaginary component stacks (2, n) of a 1D state."""
    if state.kind == "real4":
        f = state.fields
        return np.vstack([f[0], f[2]]), np.vstack([f[1], f[3]])
    f = state.fields
    return np.ascontiguousarray(f.real), np.ascontiguousarray(f.imag)


def _charge_flux(state, model):
    """Pointwise rate the coupling pumps charge density.

    Zero for any coupling invariant under a common phase; kept exact
    here so non-invariant models can still be verified.
    """
    if state.kind == "lab_uv":
        w1, w2 = model.grad(state.u, state.v)
        return (np.conj(state.u) * w1).imag + (np.conj(state.v) * w2).imag
    p1, p2 = state.psi1, state.psi2
    w1, w2 = model.grad(p1, p2)
    return (np.conj(p2) * w2).imag - (np.conj(p1) * w1).imag


# ---------------------------------------------------------------------------
# weighted charge with a scaling triple

def functional_I(state, weight, scaling, t=None):
    """Weighted charge (1/mu) * integral of phi((x+rho)/lam) |psi|^2."""
    _require_1d(state, "functional_I")
    t = state.t if t is None else float(t)
    mu, lam = scaling.check(t)
    s = (state.grid.x + scaling.rho(t)) / lam
    return quad(weight.phi(s) * state.density(), state.grid) / mu


def rhs_I(state, weight, scaling, t=None, split=None, model=None):
    """Analytic d/dt of ``functional_I`` along the flow.

    Four groups: amplitude drift, center drift, width drift, and the
    transport quadratic u1.a_r.u1 + u2.a_r.u2 - 2 u1.a_i.u2 built from
    the real/imaginary parts of the spinor. No mass term appears; the
    mass current is orthogonal to the density. Couplings with nonzero
    pointwise charge flux contribute a fifth term when the model is
    passed.
    """
    _require_1d(state, "rhs_I")
    _require_model(model, state, "rhs_I")
    t = state.t if t is None else float(t)
    mu, lam = scaling.check(t)
    g = state.grid
    s = (g.x + scaling.rho(t)) / lam
    phi = weight.phi(s)
    dphi = weight.dphi(s)
    dens = state.density()
    if split is None:
        split = default_alpha(state.kind)
    u1, u2 = _real_pair(state)
    a_r, a_i = split.alpha_r, split.alpha_i
    bracket = (np.einsum("ab,ax,bx->x", a_r, u1, u1)
               + np.einsum("ab,ax,bx->x", a_r, u2, u2)
               - 2.0 * np.einsum("ab,ax,bx->x", a_i, u1, u2))
    out = (-scaling.mu_dot(t) / mu ** 2 * quad(phi * dens, g)
           + scaling.rho_dot(t) / (mu * lam) * quad(dphi * dens, g)
           - scaling.lam_dot(t) / (mu * lam) * quad(dphi * s * dens, g)
           + quad(dphi * bracket, g) / (mu * lam))
    if model is not None:
        out += 2.0 / mu * quad(phi * _charge_flux(state, model), g)
    return out


# ---------------------------------------------------------------------------
# lab-frame window functionals

def functional_K_1d(state, weight, lam=1.0):
    """Window charge: integral of phi(x/lam) (|u|^2 + |v|^2)."""
    _require_lab(state, "functional_K_1d")
    if lam <= 0.0:
        raise ValueError("lam must be positive")
    s = state.grid.x / lam
    return quad(weight.phi(s) * state.density(), state.grid)


def rhs_K_1d(state, weight, lam=1.0, lam_dot=0.0, model=None):
    """d/dt of the window charge.

    The transport part advects the chiral imbalance through phi'; a
    shrinking or growing window adds the lam_dot drift. The nonlinear
    flux cancels pointwise for phase-invariant couplings, so passing
    the model only matters outside that family.
    """
    _require_lab(state, "rhs_K_1d")
    _require_model(model, state, "rhs_K_1d")
    if lam <= 0.0:
        raise ValueError("lam must be positive")
    g = state.grid
    s = g.x / lam
    dphi = weight.dphi(s)
    dens = state.density()
    chi = np.abs(state.u) ** 2 - np.abs(state.v) ** 2
    out = quad(dphi * chi, g) / lam \
        - lam_dot / lam * quad(s * dphi * dens, g)
    if model is not None:
        out += 2.0 * quad(weight.phi(s) * _charge_flux(state, model), g)
    return out


def functional_J_1d(state, weight, lam=1.0):
    """Window chiral balance: integral of phi(x/lam) (|u|^2 - |v|^2)."""
    _require_lab(state, "functional_J_1d")
    if lam <= 0.0:
        raise ValueError("lam must be positive")
    s = state.grid.x / lam
    chi = np.abs(state.u) ** 2 - np.abs(state.v) ** 2
    return quad(weight.phi(s) * chi, state.grid)


def rhs_J_1d(state, weight, lam=1.0, m=1.0, lam_dot=0.0, model=None):
    """d/dt of the window chiral balance.

    Three universal terms (window drift, advected total density, mass
    rotation 4m Im(u conj(v))) plus an exact coupling term when the
    model is passed. Couplings polynomial in |u|^2, |v|^2 alone drop
    out; anything mixing phases, e.g. a scalar-bilinear square,
    contributes.
    """
    _require_lab(state, "rhs_J_1d")
    _require_model(model, state, "rhs_J_1d")
    if lam <= 0.0:
        raise ValueError("lam must be positive")
    g = state.grid
    s = g.x / lam
    phi = weight.phi(s)
    dphi = weight.dphi(s)
    dens = state.density()
    chi = np.abs(state.u) ** 2 - np.abs(state.v) ** 2
    out = (-lam_dot / lam * quad(s * dphi * chi, g)
           + quad(dphi * dens, g) / lam
           + 4.0 * m * quad(phi * (state.u * np.conj(state.v)).imag, g))
    if model is not None:
        w1, w2 = model.grad(state.u, state.v)
        flux = (np.conj(state.u) * w1).imag - (np.conj(state.v) * w2).imag
        out += 2.0 * quad(phi * flux, g)
    return out


# ---------------------------------------------------------------------------
# first-derivative quartet on the line (spinor frame, real components)

def _components_1d(state):
    p = state.fields if state.kind == "real4" else state.to_real4().fields
    return p[0], p[1], p[2], p[3]


def _w_components(model, p11, p12, p21, p22, n):
    if model is None:
        z = np.zeros(n)
        return z, z, z, z
    return model.w_fields(p11 + 1j * p12, p21 + 1j * p22)


def functionals_J1_to_J4(state, weight, m=1.0):
    """Four pairings [phi f' + phi'/2 f](g' + m h) over the components.

    Ordering: (11 vs 22), (12 vs 21), (22 vs 11), (21 vs 12), i.e. each
    component paired against its transport partner.
    """
    _require_spinor(state, "functionals_J1_to_J4")
    g = state.grid
    p11, p12, p21, p22 = _components_1d(state)
    phi = weight.phi(g.x)
    dphi = weight.dphi(g.x)
    d11, d12 = deriv1(p11, g), deriv1(p12, g)
    d21, d22 = deriv1(p21, g), deriv1(p22, g)

    def bk(f, df):
        return phi * df + 0.5 * dphi * f

    return np.array([
        quad(bk(p11, d11) * (d22 + m * p12), g),
        quad(bk(p12, d12) * (d21 + m * p11), g),
        quad(bk(p22, d22) * (d11 + m * p21), g),
        quad(bk(p21, d21) * (d12 + m * p22), g),
    ])


def rhs_J1_to_J4(state, weight, m=1.0, model=None):
    """Analytic derivatives of the four pairings, coupling terms exact.

    Each rate has a quadratic core (phi' against the squared component
    gradient, phi'''/4 against the squared component, signs alternating
    with the component's transport direction) and two coupling
    brackets. The mass drops out of the cores entirely.
    """
    _require_spinor(state, "rhs_J1_to_J4")
    _require_model(model, state, "rhs_J1_to_J4")
    g = state.grid
    p11, p12, p21, p22 = _components_1d(state)
    phi = weight.phi(g.x)
    dphi = weight.dphi(g.x)
    d3phi = weight.d3phi(g.x)
    d11, d12 = deriv1(p11, g), deriv1(p12, g)
    d21, d22 = deriv1(p21, g), deriv1(p22, g)
    w11, w12, w21, w22 = _w_components(model, p11, p12, p21, p22,
                                       g.n_points)
    e11, e12 = deriv1(w11, g), deriv1(w12, g)
    e21, e22 = deriv1(w21, g), deriv1(w22, g)

    def bk(f, df):
        return phi * df + 0.5 * dphi * f

    def core(f, df):
        return quad(dphi * df * df - 0.25 * d3phi * f * f, g)

    dj1 = (-core(p11, d11)
           - quad(bk(w12, e12) * (d22 + m * p12), g)
           + quad(bk(p11, d11) * (m * w11 - e21), g))
    dj2 = (core(p12, d12)
           + quad(bk(w11, e11) * (d21 + m * p11), g)
           + quad(bk(p12, d12) * (e22 - m * w12), g))
    dj3 = (-core(p22, d22)
           - quad(bk(w21, e21) * (d11 + m * p21), g)
           + quad(bk(p22, d22) * (m * w22 - e12), g))
    dj4 = (core(p21, d21)
           + quad(bk(w22, e22) * (d12 + m * p22), g)
           + quad(bk(p21, d21) * (e11 - m * w21), g))
    return np.array([dj1, dj2, dj3, dj4])


def rhs_J_combined_1d(state, weight, m=1.0, model=None):
    """Closed form of d/dt(J1 - J2 + J3 - J4).

    The quadratic cores collapse to -phi' against the total squared
    gradient plus phi'''/4 against the total squared field; the
    coupling survives as m*A - B with A weighing W against field
    gradients and B the cross pairings (first row of W against second
    row of the field and vice versa). Exact for any data with decay,
    no parity assumption.
    """
    _require_spinor(state, "rhs_J_combined_1d")
    _require_model(model, state, "rhs_J_combined_1d")
    g = state.grid
    p11, p12, p21, p22 = _components_1d(state)
    phi = weight.phi(g.x)
    dphi = weight.dphi(g.x)
    d3phi = weight.d3phi(g.x)
    d11, d12 = deriv1(p11, g), deriv1(p12, g)
    d21, d22 = deriv1(p21, g), deriv1(p22, g)
    grad_sq = d11 ** 2 + d12 ** 2 + d21 ** 2 + d22 ** 2
    abs_sq = p11 ** 2 + p12 ** 2 + p21 ** 2 + p22 ** 2
    out = -quad(dphi * grad_sq, g) + 0.25 * quad(d3phi * abs_sq, g)
    if model is None:
        return out
    w11, w12, w21, w22 = _w_components(model, p11, p12, p21, p22,
                                       g.n_points)
    e11, e12 = deriv1(w11, g), deriv1(w12, g)
    e21, e22 = deriv1(w21, g), deriv1(w22, g)
    d2phi = weight.d2phi(g.x)
    a_term = (2.0 * quad(phi * (w11 * d11 + w12 * d12
                                + w21 * d21 + w22 * d22), g)
              + quad(dphi * (w11 * p11 + w12 * p12
                             + w21 * p21 + w22 * p22), g))
    b_term = (2.0 * quad(phi * (e12 * d22 + e22 * d12
                                + e21 * d11 + e11 * d21), g)
              - 0.5 * quad(d2phi * (w12 * p22 + w11 * p21
                                    + w21 * p11 + w22 * p12), g))
    return out + m * a_term - b_term


# ---------------------------------------------------------------------------
# radial quartet on the half line

_RADIAL_PARITY = ("even", "even", "odd", "odd")


def _require_radial_weight(weight, who):
    for key in ("phi_over_r", "phi_over_r3", "dphi_over_r"):
        if weight.singular is None or key not in weight.singular:
            raise ValueError(
                f"{who} needs weight {weight.name!r} to carry the "
                f"closed-form quotient {key!r}")


def _radial_fields(state, grid):
    p11, p12, p21, p22 = state.fields
    d11 = deriv1(p11, grid, parity="even")
    d12 = deriv1(p12, grid, parity="even")
    d21 = deriv1(p21, grid, parity="odd")
    d22 = deriv1(p22, grid, parity="odd")
    return (p11, p12, p21, p22), (d11, d12, d21, d22)


def _radial_w(model, p, grid):
    if model is None:
        z = np.zeros(grid.n_cells)
        return (z, z, z, z), (z, z, z, z)
    w11, w12, w21, w22 = model.w_fields(p[0] + 1j * p[1], p[2] + 1j * p[3])
    # diagonal couplings preserve component parity, so the W rows
    # inherit (even, even, odd, odd) from the fields
    e11 = deriv1(w11, grid, parity="even")
    e12 = deriv1(w12, grid, parity="even")
    e21 = deriv1(w21, grid, parity="odd")
    e22 = deriv1(w22, grid, parity="odd")
    return (w11, w12, w21, w22), (e11, e12, e21, e22)


def functionals_K_3d(state, weight, m=1.0):
    """Radial pairings (K1, tK1, K2, tK2) with line-measure integrals.

    The even-type components ride the full radial transport d_r + 2/r;
    their odd-type partners carry the plain derivative back.
    """
    _require_radial(state, "functionals_K_3d")
    _require_radial_weight(weight, "functionals_K_3d")
    g = state.grid
    r = g.r
    (p11, p12, p21, p22), (d11, d12, d21, d22) = _radial_fields(state, g)
    phi = weight.phi(r)
    dphi = weight.dphi(r)

    def bk(f, df):
        return phi * df + 0.5 * dphi * f

    k1 = quad(bk(p11, d11) * (d22 + 2.0 * p22 / r + m * p12), g,
              measure="line")
    tk1 = quad(bk(p22, d22) * (d11 + m * p21), g, measure="line")
    k2 = quad(bk(p12, d12) * (d21 + 2.0 * p21 / r + m * p11), g,
              measure="line")
    tk2 = quad(bk(p21, d21) * (d12 + m * p22), g, measure="line")
    return np.array([k1, tk1, k2, tk2])


def _quadratic_R1(weight, r, f, df, grid):
    # pairing of [phi f' + phi'/2 f] against (d^2 + 2/r d) f
    a = weight.dphi(r) - 2.0 * weight.sing("phi_over_r", r)
    b = 0.5 * weight.d2phi(r) - weight.sing("dphi_over_r", r)
    return -quad(a * df * df, grid, measure="line") \
        - quad(b * f * df, grid, measure="line")


def _quadratic_R2(weight, r, f, df, grid):
    # same pairing when the operator carries the extra -2/r^2
    return _quadratic_R1(weight, r, f, df, grid) \
        - 2.0 * quad(weight.sing("phi_over_r3", r) * f * f, grid,
                     measure="line")


def rhs_K_3d(state, weight, m=1.0, model=None):
    """Analytic derivatives of the four radial pairings.

    Quadratic parts via the two closed-form pairings (the odd-type
    components feel the extra -2/r^2 of their second-order operator);
    coupling parts verbatim, with the W rows differentiated under the
    parity the coupling preserves.
    """
    _require_radial(state, "rhs_K_3d")
    _require_radial_weight(weight, "rhs_K_3d")
    _require_model(model, state, "rhs_K_3d")
    g = state.grid
    r = g.r
    (p11, p12, p21, p22), (d11, d12, d21, d22) = _radial_fields(state, g)
    (w11, w12, w21, w22), (e11, e12, e21, e22) = _radial_w(
        model, (p11, p12, p21, p22), g)
    phi = weight.phi(r)
    dphi = weight.dphi(r)

    def bk(f, df):
        return phi * df + 0.5 * dphi * f

    def line(f):
        return quad(f, g, measure="line")

    dk1 = (_quadratic_R1(weight, r, p11, d11, g)
           - line(bk(w12, e12) * (d22 + 2.0 * p22 / r + m * p12))
           - line(bk(p11, d11) * (e21 + 2.0 * w21 / r - m * w11)))
    dtk1 = (_quadratic_R2(weight, r, p22, d22, g)
            - line(bk(w21, e21) * (d11 + m * p21))
            - line(bk(p22, d22) * (e12 - m * w22)))
    dk2 = (-_quadratic_R1(weight, r, p12, d12, g)
           + line(bk(w11, e11) * (d21 + 2.0 * p21 / r + m * p11))
           + line(bk(p12, d12) * (e22 + 2.0 * w22 / r - m * w12)))
    dtk2 = (-_quadratic_R2(weight, r, p21, d21, g)
            + line(bk(w22, e22) * (d12 + m * p22))
            + line(bk(p21, d21) * (e11 - m * w21)))
    return np.array([dk1, dtk1, dk2, dtk2])


def rhs_K_combined_closed(state, weight, m=1.0, model=None):
    """Closed form of d/dt(K1 + tK1 - K2 - tK2).

    Requires the even-type components to vanish at the origin: the
    zeroth-order coefficients grow like r^{-3/2} there, and the
    integration by parts that produces them sheds a boundary term for
    anything finite at r=0. Use the alternating sum of ``rhs_K_3d``
    when that cannot be guaranteed; it is exact for all data.
    """
    _require_radial(state, "rhs_K_combined_closed")
    _require_radial_weight(weight, "rhs_K_combined_closed")
    _require_model(model, state, "rhs_K_combined_closed")
    g = state.grid
    r = g.r
    (p11, p12, p21, p22), (d11, d12, d21, d22) = _radial_fields(state, g)
    phi = weight.phi(r)
    dphi = weight.dphi(r)
    d2phi = weight.d2phi(r)
    d3phi = weight.d3phi(r)
    phi_r = weight.sing("phi_over_r", r)
    phi_r2 = weight.sing("phi_over_r2", r)
    phi_r3 = weight.sing("phi_over_r3", r)
    dphi_r = weight.sing("dphi_over_r", r)
    dphi_r2 = weight.sing("dphi_over_r2", r)
    d2phi_r = weight.sing("d2phi_over_r", r)

    def line(f):
        return quad(f, g, measure="line")

    grad_sq = d11 ** 2 + d12 ** 2 + d21 ** 2 + d22 ** 2
    even_sq = p11 ** 2 + p12 ** 2
    odd_sq = p21 ** 2 + p22 ** 2
    zero_even = 0.5 * (dphi_r2 + 0.5 * d3phi - d2phi_r)
    zero_odd = zero_even - 2.0 * phi_r3
    out = (line((2.0 * phi_r - dphi) * grad_sq)
           + line(zero_even * even_sq) + line(zero_odd * odd_sq))
    if model is None:
        return out
    (w11, w12, w21, w22), (e11, e12, e21, e22) = _radial_w(
        model, (p11, p12, p21, p22), g)
    a_term = (2.0 * line(phi * (w11 * d11 + w12 * d12
                                + w21 * d21 + w22 * d22))
              + line(dphi * (w11 * p11 + w12 * p12
                             + w21 * p21 + w22 * p22)))
    b_term = (2.0 * line(phi * (e11 * d21 + e12 * d22
                                + e21 * d11 + e22 * d12))
              + 2.0 * line(phi_r * (w21 * d11 + w22 * d12
                                    - w11 * d21 - w12 * d22))
              + line((2.0 * phi_r2 - 0.5 * d2phi - dphi_r)
                     * (w11 * p21 + w12 * p22))
              - line((0.5 * d2phi - dphi_r) * (w21 * p11 + w22 * p12)))
    return out + m * a_term - b_term


def weight_closed_forms(name="r32_over_1pr"):
    """Closed-form coefficient maps for the radial virial weight.

    Returns the seven combinations of phi(r) = r^{3/2}/(1+r) and its
    derivatives that appear in the radial rates, each as a rational
    expression safe to evaluate on the open half line. Keys follow the
    role: 'phi_prime' and 'advect' (2 phi/r - phi') multiply squared
    gradients, 'phi_over_r' the geometric term, the two 'zero_order_*'
    maps the squared components, the two 'cross_*' maps the mixed W
    pairings.
    """
    if name != "r32_over_1pr":
        raise ValueError(f"no closed-form table for weight {name!r}")

    def phi_prime(r):
        return np.sqrt(r) * (r + 3.0) / (2.0 * (1.0 + r) ** 2)

    def advect(r):
        return np.sqrt(r) * (1.0 + 3.0 * r) / (2.0 * (1.0 + r) ** 2)

    def phi_over_r(r):
        return np.sqrt(r) / (1.0 + r)

    def zero_order_even(r):
        return (15.0 * r ** 3 + 95.0 * r ** 2 + 41.0 * r + 9.0) \
            / (32.0 * r ** 1.5 * (1.0 + r) ** 4)

    def zero_order_odd(r):
        return (47.0 * r ** 3 + 191.0 * r ** 2 + 137.0 * r + 41.0) \
            / (32.0 * r ** 1.5 * (1.0 + r) ** 4)

    def cross_even_w(r):
        return (13.0 * r ** 2 + 22.0 * r + 1.0) \
            / (8.0 * np.sqrt(r) * (1.0 + r) ** 3)

    def cross_odd_w(r):
        return (5.0 * r ** 2 + 22.0 * r + 9.0) \
            / (8.0 * np.sqrt(r) * (1.0 + r) ** 3)

    return {
        "phi_prime": phi_prime,
        "advect": advect,
        "phi_over_r": phi_over_r,
        "zero_order_even": zero_order_even,
        "zero_order_odd": zero_order_odd,
        "cross_even_w": cross_even_w,
        "cross_odd_w": cross_odd_w,
    }


# ---------------------------------------------------------------------------
# localized density functionals

def functional_H(state, variant="sech_1d"):
    """Localized density: sech window on the line, r^2/(1+r)^4 radially.

    The line variant carries a 1/2, the radial one does not; both
    conventions are baked into the matching rates.
    """
    if variant == "sech_1d":
        _require_spinor(state, "functional_H")
        w = sech_1d()
        return 0.5 * quad(w.phi(state.grid.x) * state.density(),
                          state.grid)
    if variant == "radial_r2":
        _require_radial(state, "functional_H")
        w = r2_over_1pr4_weight()
        dens = np.sum(state.fields ** 2, axis=0)
        return quad(w.phi(state.grid.r) * dens, state.grid, measure="line")
    raise ValueError(f"unknown variant {variant!r}")


def rhs_H(state, variant="sech_1d", model=None, m=1.0):
    """Analytic d/dt of ``functional_H``.

    The mass term cancels in both variants; what is left is the
    weighted transport current and, with a model, the coupling flux.
    The parameter m is accepted for interface symmetry and unused.
    """
    del m
    if variant == "sech_1d":
        _require_spinor(state, "rhs_H")
        _require_model(model, state, "rhs_H")
        g = state.grid
        w = sech_1d()
        phi = w.phi(g.x)
        p1, p2 = state.psi1, state.psi2
        dp1 = deriv1(p1, g)
        dp2 = deriv1(p2, g)
        out = quad(phi * (np.conj(p1) * dp2 - np.conj(p2) * dp1).imag, g)
        if model is not None:
            w1, w2 = model.grad(p1, p2)
            out += quad(phi * (w2 * np.conj(p2) - w1 * np.conj(p1)).imag, g)
        return out
    if variant == "radial_r2":
        _require_radial(state, "rhs_H")
        _require_model(model, state, "rhs_H")
        g = state.grid
        r = g.r
        w = r2_over_1pr4_weight()
        phi = w.phi(r)
        advect = 2.0 * w.sing("phi_over_r", r) - w.dphi(r)
        p = state.fields
        p1 = p[0] + 1j * p[1]
        p2 = p[2] + 1j * p[3]
        out = 2.0 * quad(advect * (np.conj(p1) * p2).imag, g,
                         measure="line")
        if model is not None:
            w1, w2 = model.grad(p1, p2)
            out += 2.0 * quad(
                phi * (np.conj(p2) * w2 - np.conj(p1) * w1).imag, g,
                measure="line")
        return out
    raise ValueError(f"unknown variant {variant!r}")


# ---------------------------------------------------------------------------
# identity registry and the verifier

def _ctx_weight(ctx, factory):
    return factory() if ctx["weight"] is None else ctx["weight"]


def _lam_pair(ctx, t):
    sc = ctx["scaling"]
    return float(sc.lam(t)), float(sc.lam_dot(t))


def _make_registry():
    def i_f(st, t, ctx):
        return functional_I(st, _ctx_weight(ctx, tanh_1d), ctx["scaling"], t)

    def i_r(st, t, ctx):
        return rhs_I(st, _ctx_weight(ctx, tanh_1d), ctx["scaling"], t,
                     split=ctx["split"], model=ctx["model"])

    def k_f(st, t, ctx):
        lam, _ = _lam_pair(ctx, t)
        return functional_K_1d(st, _ctx_weight(ctx, tanh_1d), lam)

    def k_r(st, t, ctx):
        lam, lam_dot = _lam_pair(ctx, t)
        return rhs_K_1d(st, _ctx_weight(ctx, tanh_1d), lam, lam_dot,
                        model=ctx["model"])

    def j_f(st, t, ctx):
        lam, _ = _lam_pair(ctx, t)
        return functional_J_1d(st, _ctx_weight(ctx, tanh_1d), lam)

    def j_r(st, t, ctx):
        lam, lam_dot = _lam_pair(ctx, t)
        return rhs_J_1d(st, _ctx_weight(ctx, tanh_1d), lam, ctx["m"],
                        lam_dot, model=ctx["model"])

    def quartet_f(idx):
        def f(st, t, ctx):
            vals = functionals_J1_to_J4(st, _ctx_weight(ctx, tanh_1d),
                                        ctx["m"])
            return vals[idx]
        return f

    def quartet_r(idx):
        def f(st, t, ctx):
            vals = rhs_J1_to_J4(st, _ctx_weight(ctx, tanh_1d), ctx["m"],
                                ctx["model"])
            return vals[idx]
        return f

    def quartet_comb_f(st, t, ctx):
        j = functionals_J1_to_J4(st, _ctx_weight(ctx, tanh_1d), ctx["m"])
        return j[0] - j[1] + j[2] - j[3]

    def quartet_comb_r(st, t, ctx):
        return rhs_J_combined_1d(st, _ctx_weight(ctx, tanh_1d), ctx["m"],
                                 ctx["model"])

    def radial_f(idx):
        def f(st, t, ctx):
            vals = functionals_K_3d(st, _ctx_weight(ctx, r32_weight),
                                    ctx["m"])
            return vals[idx]
        return f

    def radial_r(idx):
        def f(st, t, ctx):
            vals = rhs_K_3d(st, _ctx_weight(ctx, r32_weight), ctx["m"],
                            ctx["model"])
            return vals[idx]
        return f

    def radial_comb_f(st, t, ctx):
        k = functionals_K_3d(st, _ctx_weight(ctx, r32_weight), ctx["m"])
        return k[0] + k[1] - k[2] - k[3]

    def radial_comb_r(st, t, ctx):
        dk = rhs_K_3d(st, _ctx_weight(ctx, r32_weight), ctx["m"],
                      ctx["model"])
        return dk[0] + dk[1] - dk[2] - dk[3]

    def h_line_f(st, t, ctx):
        return functional_H(st, "sech_1d")

    def h_line_r(st, t, ctx):
        return rhs_H(st, "sech_1d", model=ctx["model"])

    def h_rad_f(st, t, ctx):
        return functional_H(st, "radial_r2")

    def h_rad_r(st, t, ctx):
        return rhs_H(st, "radial_r2", model=ctx["model"])

    reg = {
        "I_weighted_charge": (i_f, i_r),
        "K_window_charge": (k_f, k_r),
        "J_chiral_balance": (j_f, j_r),
        "J_quartet_combined": (quartet_comb_f, quartet_comb_r),
        "K_combined_3d": (radial_comb_f, radial_comb_r),
        "H_sech_1d": (h_line_f, h_line_r),
        "H_radial_r2": (h_rad_f, h_rad_r),
    }
    for idx, name in enumerate(("J1", "J2", "J3", "J4")):
        reg[name] = (quartet_f(idx), quartet_r(idx))
    for idx, name in enumerate(("K1_3d", "tK1_3d", "K2_3d", "tK2_3d")):
        reg[name] = (radial_f(idx), radial_r(idx))
    return reg


_REGISTRY = _make_registry()


def identity_ids():
    """Registered identity names, sorted."""
    return tuple(sorted(_REGISTRY))


def verify_identity(trajectory, identity, weight=None, scaling=None,
                    m=1.0, model=None, split=None, rtol=1e-3, atol=None):
    """Check one registered identity along a sampled trajectory.

    Compares centered finite differences of the functional against the
    analytic rate at every interior sample. The trajectory must be
    uniformly sampled with at least three samples; the model and mass
    must be the ones the trajectory was generated with, or the defect
    measures exactly that mismatch.
    """
    if identity not in _REGISTRY:
        known = ", ".join(identity_ids())
        raise KeyError(f"unknown identity {identity!r}; known: {known}")
    times = np.asarray(trajectory.times, dtype=float)
    states = trajectory.states
    if len(states) < 3:
        raise ValueError("need at least 3 samples for centered differences")
    steps = np.diff(times)
    if np.max(np.abs(steps - steps[0])) > 1e-9 * max(1.0, abs(steps[0])):
        raise ValueError("trajectory samples must be uniformly spaced")
    ctx = {
        "weight": weight,
        "scaling": ScalingTriple.constant() if scaling is None else scaling,
        "m": float(m),
        "model": model,
        "split": split,
    }
    f_eval, rhs_eval = _REGISTRY[identity]
    f_vals = np.array([f_eval(states[k], times[k], ctx)
                       for k in range(len(states))])
    fd = (f_vals[2:] - f_vals[:-2]) / (times[2:] - times[:-2])
    rhs = np.array([rhs_eval(states[k], times[k], ctx)
                    for k in range(1, len(states) - 1)])
    return VirialReport(identity, times[1:-1], f_vals[1:-1], fd, rhs,
                        rtol=rtol, atol=atol)


# ---------------------------------------------------------------------------
# coercivity of the window Hessian

def coercivity_forms(L):
    """The window Hessian and its reference norm as grid functionals.

    Returns (b0, ref); each maps (z, grid) to a scalar. b0 weighs the
    kinetic term against a sech^2 well of depth 1/(2 L^2); ref adds a
    sech^4 bump instead. Positivity of b0/ref over odd z is the
    coercivity statement.
    """
    L = float(L)
    if L <= 0.0:
        raise ValueError("L must be positive")

    def b0(z, grid):
        dz = deriv1(z, grid)
        well = 1.0 / np.cosh(grid.x / L) ** 2
        return quad(dz * dz, grid) \
            - quad(well * z * z, grid) / (2.0 * L * L)

    def ref(z, grid):
        dz = deriv1(z, grid)
        bump = 1.0 / np.cosh(grid.x / L) ** 4
        return quad(dz * dz, grid) + quad(bump * z * z, grid) / L

    return b0, ref


def coercivity_estimate(L, grid=None):
    """Minimal odd-sector Rayleigh quotient of the window Hessian.

    Discretizes both quadratic forms on the right half line with the
    odd boundary condition z(0)=0 (odd functions are determined there)
    and solves the dense generalized eigenproblem. A positive return
    certifies coercivity at this resolution; the quotient is bounded
    by 1 from above since the reference form dominates the Hessian.
    """
    from scipy.linalg import eigh

    L = float(L)
    if L <= 0.0:
        raise ValueError("L must be positive")
    if grid is None:
        grid = Grid1D(-25.0 * L, 25.0 * L, 4001)
    if not grid.is_symmetric():
        raise ValueError("coercivity_estimate needs a symmetric grid")
    h = grid.h
    xr = grid.x[grid.x > 0.5 * h]
    n = xr.size
    if n < 8:
        raise ValueError("grid too coarse for the eigensolve")
    # first-difference kinetic form on [0, x_max] with z(0) = 0 pinned
    # and a free right end; the mirror image doubles everything, which
    # cancels in the quotient
    main = np.full(n, 2.0 / h)
    main[-1] = 1.0 / h
    kin = np.diag(main)
    off = np.full(n - 1, -1.0 / h)
    kin += np.diag(off, 1) + np.diag(off, -1)
    well = h / np.cosh(xr / L) ** 2 / (2.0 * L * L)
    bump = h / np.cosh(xr / L) ** 4 / L
    a_mat = kin - np.diag(well)
    b_mat = kin + np.diag(bump)
    vals = eigh(a_mat, b_mat, eigvals_only=True)
    return float(vals[0])


# ---------------------------------------------------------------------------
# dispersion integrands for cumulative monitors

def window_flux_1d(state, lam):
    """(1/lam) * integral of sech^2(x/lam) |state|^2 on the line."""
    _require_1d(state, "window_flux_1d")
    if lam <= 0.0:
        raise ValueError("lam must be positive")
    s = state.grid.x / lam
    window = 1.0 / np.cosh(s) ** 2
    return quad(window * state.density(), state.grid) / lam


def origin_flux_radial(state):
    """Weighted gradient-plus-density integral concentrated at the origin.

    integral of sqrt(r)|grad phi|^2/(1+r) + |phi|^2/(r^{3/2}(1+r)) dr.
    The density term carries an r^{-3/2} weight, integrable on the
    staggered grid; boundedness of the time integral of this quantity
    is the radial dispersion statement.
    """
    _require_radial(state, "origin_flux_radial")
    g = state.grid
    r = g.r
    _, (d11, d12, d21, d22) = _radial_fields(state, g)
    grad_sq = d11 ** 2 + d12 ** 2 + d21 ** 2 + d22 ** 2
    dens = np.sum(state.fields ** 2, axis=0)
    return quad(np.sqrt(r) * grad_sq / (1.0 + r), g, measure="line") \
        + quad(dens / (r ** 1.5 * (1.0 + r)), g, measure="line")
