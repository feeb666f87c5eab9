"""Nonlinearity catalog with exact Wirtinger gradients and admissibility checks.

Gradients are evaluated off-shell: eval_grad(a, b, c, d) treats the four
slots (psi1, conj psi1, psi2, conj psi2) -- or (u, conj u, v, conj v) in the
lab frame -- as independent complex variables. All right-hand sides of the
evolution and of the weighted identities consume these analytic gradients;
finite differencing appears only inside the checkers and the test oracles.
"""

import numpy as np

__all__ = [
    "NonlinearityModel",
    "AdmissibilityReport",
    "CheckResult",
    "GaugeCheck",
    "HarmonicCheck",
    "builtin",
    "thirring",
    "gross_neveu",
    "bec_resonance",
    "thirring_psi",
    "quartic_harmonic",
    "soler",
    "power_diag",
    "isotropic_pair",
    "cubic_conjugate_pair",
    "zero_model",
    "sample_states",
    "check_gauge_symmetry",
    "check_harmonic",
    "check_bd_dependence",
    "check_growth",
    "check_polynomial",
    "check_phase_separable",
    "realness_defect",
    "check_all",
]


class NonlinearityModel:
    """A nonlinearity (W1, W2) with optional scalar potential.

    Parameters
    ----------
    name : str
    arity : {"lab_uv", "spinor_psi", "radial_phi"}
        Which variable set the model is written in.
    p : int
        Gradient growth power: |W1|+|W2| <= C|state|^p near zero, p >= 1.
    eval_grad : callable
        (a, b, c, d) -> (W1, W2), slots independent, vectorized.
    eval_W : callable or None
        On-shell potential (z1, z2) -> W. None when the pair (W1, W2)
        is not a joint Wirtinger gradient (soler / power_diag).
    coupling : float
    """

    def __init__(self, name, arity, p, eval_grad, eval_W=None, coupling=1.0):
        if arity not in ("lab_uv", "spinor_psi", "radial_phi"):
            raise ValueError(f"unknown arity {arity!r}")
        self.name = name
        self.arity = arity
        self.p = int(p)
        self.eval_grad = eval_grad
        self.eval_W = eval_W
        self.coupling = float(coupling)

    def grad(self, z1, z2):
        """On-shell gradient (W1, W2) at the state (z1, z2)."""
        z1 = np.asarray(z1, dtype=complex)
        z2 = np.asarray(z2, dtype=complex)
        return self.eval_grad(z1, np.conj(z1), z2, np.conj(z2))

    def w_fields(self, z1, z2):
        """Real decomposition (W11, W12, W21, W22), W_j = W_j1 + i W_j2."""
        W1, W2 = self.grad(z1, z2)
        return W1.real, W1.imag, W2.real, W2.imag

    def potential(self, z1, z2):
        if self.eval_W is None:
            raise ValueError(f"model {self.name!r} carries no potential W")
        return self.eval_W(np.asarray(z1, dtype=complex),
                           np.asarray(z2, dtype=complex))

    def __repr__(self):
        return (f"NonlinearityModel({self.name!r}, arity={self.arity!r}, "
                f"p={self.p}, coupling={self.coupling:g})")


def thirring(coupling=1.0):
    """W = coupling * |u|^2 |v|^2."""
    co = float(coupling)

    def grad(a, b, c, d):
        return co * a * c * d, co * a * b * c

    def W(z1, z2):
        return co * (np.abs(z1) ** 2 * np.abs(z2) ** 2).real

    return NonlinearityModel("thirring", "lab_uv", 3, grad, W, co)


def gross_neveu(coupling=1.0):
    """W = (coupling/2) (conj(u) v + u conj(v))^2."""
    co = float(coupling)

    def grad(a, b, c, d):
        s = b * c + a * d
        return co * s * c, co * s * a

    def W(z1, z2):
        s = 2.0 * (np.conj(z1) * z2).real
        return 0.5 * co * s * s

    return NonlinearityModel("gross_neveu", "lab_uv", 3, grad, W, co)


def bec_resonance(coupling=1.0):
    """W = coupling * (|u|^2 + |v|^2) |u|^2 |v|^2."""
    co = float(coupling)

    def grad(a, b, c, d):
        ab, cd = a * b, c * d
        return co * a * cd * (2.0 * ab + cd), co * c * ab * (ab + 2.0 * cd)

    def W(z1, z2):
        p1, p2 = np.abs(z1) ** 2, np.abs(z2) ** 2
        return co * (p1 + p2) * p1 * p2

    return NonlinearityModel("bec_resonance", "lab_uv", 5, grad, W, co)


def thirring_psi(coupling=1.0):
    """The quartic pair W_j = (coupling/4)(psi1^2 + psi2^2) conj(psi_j).

    The same interaction as `thirring`, rewritten in the spinor frame;
    the harmonic checker must reject it.
    """
    co = float(coupling)

    def grad(a, b, c, d):
        s = a * a + c * c
        return 0.25 * co * s * b, 0.25 * co * s * d

    def W(z1, z2):
        return 0.125 * co * np.abs(z1 * z1 + z2 * z2) ** 2

    return NonlinearityModel("thirring_psi", "spinor_psi", 3, grad, W, co)


def quartic_harmonic(coupling=1.0):
    """W = coupling * (conj(psi1)^4 + conj(psi2)^4 - 6 conj(psi1)^2 conj(psi2)^2).

    Depends on (b, d) only and satisfies all four mixed-gradient
    cancellation conditions; the potential itself is complex valued.
    """
    co = float(coupling)

    def grad(a, b, c, d):
        return (co * (4.0 * b ** 3 - 12.0 * b * d * d),
                co * (4.0 * d ** 3 - 12.0 * b * b * d))

    def W(z1, z2):
        b, d = np.conj(z1), np.conj(z2)
        return co * (b ** 4 + d ** 4 - 6.0 * b * b * d * d)

    return NonlinearityModel("quartic_harmonic", "spinor_psi", 3, grad, W, co)


def power_diag(A, g_coeffs=(1.0,), coupling=1.0, name=None):
    """(W1, W2) = g(X^T A X) (psi1, psi2) with A = diag over (Re/Im parts).

    A : 4 reals, ordered (a11, a21, a12, a22) against
        X = (Re psi1, Re psi2, Im psi1, Im psi2).
    g_coeffs : coefficients (g1, g2, ...) of g(s) = sum_k g_k s^k, g(0)=0.

    The pair is not a joint Wirtinger gradient unless a11 = a12 and
    a21 = a22, so no eval_W is attached.
    """
    a11, a21, a12, a22 = (float(v) for v in A)
    g = tuple(float(c) for c in g_coeffs)
    if not any(g):
        raise ValueError("g must have a nonzero coefficient")
    k_min = next(k for k, c in enumerate(g, start=1) if c != 0.0)
    co = float(coupling)

    def g_of(s):
        out = np.zeros_like(s)
        for c in reversed(g):
            out = (out + c) * s
        return out

    def grad(a, b, c, d):
        # Re/Im parts continued off-shell: x1=(a+b)/2, y1=(a-b)/(2i), ...
        s = (a11 * (a + b) ** 2 - a12 * (a - b) ** 2
             + a21 * (c + d) ** 2 - a22 * (c - d) ** 2) / 4.0
        gs = co * g_of(s)
        return gs * a, gs * c

    label = name or f"power_diag({a11:g},{a21:g},{a12:g},{a22:g})"
    model = NonlinearityModel(label, "radial_phi", 2 * k_min + 1, grad,
                              None, co)
    model.A = (a11, a21, a12, a22)
    model.g_coeffs = g
    return model


def soler(g_coeffs=(1.0,), coupling=1.0):
    """(W1, W2) = g(|psi1|^2 - |psi2|^2) (psi1, psi2)."""
    m = power_diag((1.0, -1.0, 1.0, -1.0), g_coeffs, coupling, name="soler")
    return m


def isotropic_pair(m=3, n=3, a=(1.0, 1j), b=(1.0, 1j)):
    """Null-direction power pair; harmonic but not (b,d)-only.

    Requires a1^2 + a2^2 = 0 and b1^2 + b2^2 = 0, m and n odd.
    """
    a1, a2 = complex(a[0]), complex(a[1])
    b1, b2 = complex(b[0]), complex(b[1])
    if abs(a1 * a1 + a2 * a2) > 1e-14 or abs(b1 * b1 + b2 * b2) > 1e-14:
        raise ValueError("need a1^2+a2^2 = 0 and b1^2+b2^2 = 0")
    if m % 2 == 0 or n % 2 == 0 or m < 1 or n < 1:
        raise ValueError("m and n must be odd positive integers")

    def grad(aa, bb, cc, dd):
        hol = (a1 * aa + a2 * cc) ** m
        anti = (b1 * bb + b2 * dd) ** n
        return -(a1 / a2) * hol + (b1 / b2) * anti, hol + anti

    return NonlinearityModel(f"isotropic_pair(m={m},n={n})", "spinor_psi",
                             max(m, n), grad, None)


def cubic_conjugate_pair(coupling=1.0):
    """W1 = psi2(psi2^2-3psi1^2) - conj, W2 = psi1(psi1^2-3psi2^2) + conj.

    Harmonic and parity-compatible, but depends on (a, c) as well, so the
    (b,d)-only dependence check must reject it.
    """
    co = float(coupling)

    def grad(a, b, c, d):
        return (co * (c * (c * c - 3.0 * a * a) - d * (d * d - 3.0 * b * b)),
                co * (a * (a * a - 3.0 * c * c) + b * (b * b - 3.0 * d * d)))

    return NonlinearityModel("cubic_conjugate_pair", "spinor_psi", 3, grad,
                             None, co)


def zero_model(arity="lab_uv"):
    """The linear evolution: W1 = W2 = 0."""

    def grad(a, b, c, d):
        z = np.zeros_like(np.asarray(a, dtype=complex))
        return z, z.copy()

    def W(z1, z2):
        return np.zeros_like(np.asarray(z1, dtype=float))

    return NonlinearityModel("zero", arity, 3, grad, W, 0.0)


_BUILTINS = {
    "thirring": thirring,
    "gross_neveu": gross_neveu,
    "bec_resonance": bec_resonance,
    "thirring_psi": thirring_psi,
    "quartic_harmonic": quartic_harmonic,
    "soler": soler,
    "power_diag": power_diag,
    "isotropic_pair": isotropic_pair,
    "cubic_conjugate_pair": cubic_conjugate_pair,
    "zero": zero_model,
}


def builtin(name, **params):
    """Construct a catalog model by name; extra keywords reach the factory."""
    if name not in _BUILTINS:
        raise ValueError(
            f"unknown nonlinearity {name!r}; known: {sorted(_BUILTINS)}")
    return _BUILTINS[name](**params)


def sample_states(n_samples, seed, amplitude=1.5):
    """Deterministic complex sample pairs shared by checkers and tests."""
    rng = np.random.default_rng(seed)
    z = amplitude * (rng.normal(size=(4, n_samples))
                     + 1j * rng.normal(size=(4, n_samples))) / np.sqrt(2.0)
    return z[0], z[1]


class CheckResult:
    """Boolean with an attached worst defect; truthiness is the verdict."""

    def __init__(self, ok, defect, **extra):
        self.ok = bool(ok)
        self.defect = float(defect)
        for k, v in extra.items():
            setattr(self, k, v)

    def __bool__(self):
        return self.ok

    def __repr__(self):
        return f"CheckResult(ok={self.ok}, defect={self.defect:.3e})"


class GaugeCheck:
    """Unpacks as (gauge_ok, symmetry_ok); keeps the worst defects."""

    def __init__(self, gauge_ok, symmetry_ok, gauge_defect, symmetry_defect,
                 n_samples):
        self.gauge_ok = bool(gauge_ok)
        self.symmetry_ok = bool(symmetry_ok)
        self.gauge_defect = float(gauge_defect)
        self.symmetry_defect = float(symmetry_defect)
        self.n_samples = int(n_samples)

    def __iter__(self):
        return iter((self.gauge_ok, self.symmetry_ok))

    def __repr__(self):
        return (f"GaugeCheck(gauge_ok={self.gauge_ok}, "
                f"symmetry_ok={self.symmetry_ok}, "
                f"defects=({self.gauge_defect:.3e}, "
                f"{self.symmetry_defect:.3e}))")


class HarmonicCheck:
    """Unpacks as (ok, worst_defect); `by_condition` has raw per-combo maxima."""

    def __init__(self, ok, worst_defect, by_condition, n_samples, tol):
        self.ok = bool(ok)
        self.worst_defect = float(worst_defect)
        self.by_condition = dict(by_condition)
        self.n_samples = int(n_samples)
        self.tol = float(tol)

    def __iter__(self):
        return iter((self.ok, self.worst_defect))

    def __bool__(self):
        return self.ok

    def __repr__(self):
        return (f"HarmonicCheck(ok={self.ok}, "
                f"worst_defect={self.worst_defect:.3e})")


def check_gauge_symmetry(model, n_samples=200, seed=0, tol=1e-12):
    """Phase invariance W(e^{i theta}u, e^{i theta}v) = W(u,v) and swap symmetry."""
    if model.eval_W is None:
        raise ValueError(f"model {model.name!r} has no potential to check")
    z1, z2 = sample_states(n_samples, seed)
    theta = np.random.default_rng(seed + 1).uniform(0.0, 2.0 * np.pi,
                                                    size=n_samples)
    w0 = np.asarray(model.eval_W(z1, z2))
    scale = 1.0 + np.abs(w0)
    rot = np.exp(1j * theta)
    d_gauge = np.abs(np.asarray(model.eval_W(rot * z1, rot * z2)) - w0) / scale
    d_sym = np.abs(np.asarray(model.eval_W(z2, z1)) - w0) / scale
    return GaugeCheck(np.max(d_gauge) <= tol, np.max(d_sym) <= tol,
                      np.max(d_gauge), np.max(d_sym), n_samples)


def _slot_derivatives(model, a, b, c, d, eps):
    # 4th-order central differences in each slot, exact on low-degree
    # polynomials up to roundoff
    slots = [a, b, c, d]
    out = []
    for k in range(4):
        shifted = []
        for step in (-2.0, -1.0, 1.0, 2.0):
            args = list(slots)
            args[k] = args[k] + step * eps
            shifted.append(model.eval_grad(*args))
        (w1_m2, w2_m2), (w1_m1, w2_m1), (w1_p1, w2_p1), (w1_p2, w2_p2) = shifted
        d1 = (w1_m2 - 8.0 * w1_m1 + 8.0 * w1_p1 - w1_p2) / (12.0 * eps)
        d2 = (w2_m2 - 8.0 * w2_m1 + 8.0 * w2_p1 - w2_p2) / (12.0 * eps)
        out.append((d1, d2))
    return out  # out[k] = (dW1/dslot_k, dW2/dslot_k)


HARMONIC_CONDITIONS = (
    "da_W2_plus_dc_W1",
    "db_W2_minus_dd_W1",
    "dc_W2_minus_da_W1",
    "dd_W2_plus_db_W1",
)


def check_harmonic(model, n_samples=200, seed=0, eps=1e-2, tol=1e-6):
    """Test the four mixed-gradient cancellation conditions.

    Differentiates (W1, W2) with the four slots independent and forms

        dW2/da + dW1/dc,  dW2/db - dW1/dd,
        dW2/dc - dW1/da,  dW2/dd + dW1/db.

    A model passes when every combination vanishes to tol * scale at
    every sample. `by_condition` records the raw per-combination maxima
    so a failing model's defect can be compared against a closed form.
    """
    z1, z2 = sample_states(n_samples, seed)
    a, b, c, d = z1, np.conj(z1), z2, np.conj(z2)
    der = _slot_derivatives(model, a, b, c, d, eps)
    combos = {
        "da_W2_plus_dc_W1": der[0][1] + der[2][0],
        "db_W2_minus_dd_W1": der[1][1] - der[3][0],
        "dc_W2_minus_da_W1": der[2][1] - der[0][0],
        "dd_W2_plus_db_W1": der[3][1] + der[1][0],
    }
    amp = np.sqrt(np.abs(z1) ** 2 + np.abs(z2) ** 2)
    scale = 1.0 + amp ** max(model.p - 1, 1)
    ok = True
    worst = 0.0
    by_condition = {}
    for key in HARMONIC_CONDITIONS:
        vals = np.abs(combos[key])
        by_condition[key] = float(np.max(vals))
        ok = ok and bool(np.all(vals <= tol * scale))
        worst = max(worst, by_condition[key])
    return HarmonicCheck(ok, worst, by_condition, n_samples, tol)


def check_bd_dependence(model, n_samples=200, seed=0, tol=1e-12):
    """(W1, W2) must be unchanged when slots a and c move with b, d held."""
    z1, z2 = sample_states(n_samples, seed)
    a, b, c, d = z1, np.conj(z1), z2, np.conj(z2)
    rng = np.random.default_rng(seed + 2)
    da = 0.5 * (rng.normal(size=n_samples) + 1j * rng.normal(size=n_samples))
    dc = 0.5 * (rng.normal(size=n_samples) + 1j * rng.normal(size=n_samples))
    w1, w2 = model.eval_grad(a, b, c, d)
    w1p, w2p = model.eval_grad(a + da, b, c + dc, d)
    scale = 1.0 + np.abs(w1) + np.abs(w2)
    defect = np.max((np.abs(w1p - w1) + np.abs(w2p - w2)) / scale)
    return CheckResult(defect <= tol, defect)


def check_growth(model, p_expected=None, seed=0, n_rays=5):
    """Log-log slope of |W1|+|W2| along rays s * state, s in [2^-8, 1]."""
    p_expected = model.p if p_expected is None else p_expected
    s = 2.0 ** np.arange(-8, 1).astype(float)
    z1, z2 = sample_states(n_rays, seed + 3)
    slopes = []
    constants = []
    for i in range(n_rays):
        w1, w2 = model.grad(s * z1[i], s * z2[i])
        mag = np.abs(w1) + np.abs(w2)
        if np.max(mag) < 1e-300:
            continue  # identically zero along the ray
        slopes.append(np.polyfit(np.log(s), np.log(mag), 1)[0])
        constants.append(np.max(mag / s ** p_expected))
    if not slopes:
        return CheckResult(True, 0.0, slope=float("nan"), constant=0.0)
    slope = min(slopes)
    constant = max(constants)
    ok = slope >= p_expected - 0.1 and np.isfinite(constant)
    return CheckResult(ok, slope, slope=slope, constant=constant)


def check_polynomial(model, degree_cap=12, seed=0, tol=1e-8):
    """High-order forward differences along a ray must annihilate (W1, W2)."""
    from math import comb

    z1, z2 = sample_states(1, seed + 4)
    k = degree_cap + 1
    s = np.arange(k + 1, dtype=float)
    w1, w2 = model.grad(np.outer(s, z1).ravel(), np.outer(s, z2).ravel())
    coeffs = np.array([(-1.0) ** (k - j) * comb(k, j) for j in range(k + 1)])
    scale = 1.0 + np.max(np.abs(w1)) + np.max(np.abs(w2))
    defect = max(abs(np.dot(coeffs, w1)), abs(np.dot(coeffs, w2))) / scale
    return CheckResult(defect <= tol, defect)


def check_phase_separable(model, n_samples=100, seed=0, tol=1e-12):
    """W invariant under independent phase rotations of u and v.

    Holds exactly when W is a polynomial in (|u|^2, |v|^2) alone; the
    chiral-balance identity requires it.
    """
    if model.eval_W is None:
        raise ValueError(f"model {model.name!r} has no potential to check")
    z1, z2 = sample_states(n_samples, seed)
    rng = np.random.default_rng(seed + 5)
    th1 = np.exp(1j * rng.uniform(0, 2 * np.pi, n_samples))
    th2 = np.exp(1j * rng.uniform(0, 2 * np.pi, n_samples))
    w0 = np.asarray(model.eval_W(z1, z2))
    scale = 1.0 + np.abs(w0)
    d1 = np.abs(np.asarray(model.eval_W(th1 * z1, z2)) - w0) / scale
    d2 = np.abs(np.asarray(model.eval_W(z1, th2 * z2)) - w0) / scale
    defect = max(np.max(d1), np.max(d2))
    return CheckResult(defect <= tol, defect)


def realness_defect(model, n_samples=200, seed=0):
    """Worst Im(u conj(W1) + v conj(W2)) over samples, relative to scale."""
    z1, z2 = sample_states(n_samples, seed)
    w1, w2 = model.grad(z1, z2)
    q = z1 * np.conj(w1) + z2 * np.conj(w2)
    return float(np.max(np.abs(q.imag) / (1.0 + np.abs(q))))


class AdmissibilityReport:
    """Aggregated checker verdicts for one model."""

    def __init__(self, model, gauge_ok, symmetry_ok, polynomial_ok,
                 harmonic_ok, bd_dependence_ok, growth_ok, defects,
                 n_samples):
        self.name = model.name
        self.arity = model.arity
        self.p = model.p
        self.gauge_ok = gauge_ok
        self.symmetry_ok = symmetry_ok
        self.polynomial_ok = polynomial_ok
        self.harmonic_ok = harmonic_ok
        self.bd_dependence_ok = bd_dependence_ok
        self.growth_ok = growth_ok
        self.defects = dict(defects)
        self.n_samples = int(n_samples)

    def to_dict(self):
        return {
            "name": self.name,
            "arity": self.arity,
            "p": self.p,
            "gauge_ok": self.gauge_ok,
            "symmetry_ok": self.symmetry_ok,
            "polynomial_ok": self.polynomial_ok,
            "harmonic_ok": self.harmonic_ok,
            "bd_dependence_ok": self.bd_dependence_ok,
            "growth_ok": self.growth_ok,
            "defects": self.defects,
            "n_samples": self.n_samples,
        }

    def __repr__(self):
        flags = {k: getattr(self, k) for k in
                 ("gauge_ok", "symmetry_ok", "polynomial_ok", "harmonic_ok",
                  "bd_dependence_ok", "growth_ok")}
        return f"AdmissibilityReport({self.name!r}, {flags})"


def check_all(model, p_expected=None, n_samples=200, seed=0):
    """Run every checker; gauge/symmetry are None when no potential exists."""
    defects = {}
    if model.eval_W is not None:
        g = check_gauge_symmetry(model, n_samples, seed)
        gauge_ok, symmetry_ok = g.gauge_ok, g.symmetry_ok
        defects["gauge"] = g.gauge_defect
        defects["symmetry"] = g.symmetry_defect
    else:
        gauge_ok = symmetry_ok = None
    har = check_harmonic(model, n_samples, seed)
    defects["harmonic"] = har.worst_defect
    bd = check_bd_dependence(model, n_samples, seed)
    defects["bd_dependence"] = bd.defect
    poly = check_polynomial(model, seed=seed)
    defects["polynomial"] = poly.defect
    gr = check_growth(model, p_expected, seed=seed)
    defects["growth_slope"] = gr.slope
    return AdmissibilityReport(model, gauge_ok, symmetry_ok, poly.ok, har.ok,
                               bd.ok, gr.ok, defects, n_samples)
