"""Semi-discrete time evolution for the 1D and radial-3D systems.

States are thin containers around node-value arrays on a grid from
:mod:`diraclab.grids`.  Three equivalent representations exist in 1D:

``lab_uv``
    complex pair (u, v) solving  i u_t = -i u_x + m v - W1(u, v),
    i v_t = +i v_x + m u - W2(u, v).
``spinor_psi``
    complex pair (psi1, psi2), the image of (u, v) under the constant
    unitary change of frame (see :func:`diraclab.exact.t_transform`).
``real4``
    four real fields (p11, p12, p21, p22) with psi_j = p_j1 + i p_j2.

The radial container holds the same four real fields on a cell-centered
grid in r > 0, with (p11, p12) even-extendable and (p21, p22)
odd-extendable through the origin.
"""

import numpy as np

from .grids import Grid1D, RadialGrid, deriv1, quad

_KINDS_1D = ("lab_uv", "spinor_psi", "real4")


class SpinorState1D:
    """Two-component field on a line grid, in one of three representations."""

    def __init__(self, grid, kind, fields, t=0.0):
        if not isinstance(grid, Grid1D):
            raise TypeError("SpinorState1D needs a Grid1D")
        if kind not in _KINDS_1D:
            raise ValueError(f"unknown kind {kind!r}, expected one of {_KINDS_1D}")
        fields = np.asarray(fields)
        rows = 4 if kind == "real4" else 2
        if fields.shape != (rows, grid.n_points):
            raise ValueError(
                f"fields shape {fields.shape} does not match "
                f"({rows}, {grid.n_points}) for kind {kind!r}")
        if kind == "real4":
            if np.iscomplexobj(fields):
                raise TypeError("real4 fields must be real arrays")
            fields = fields.astype(float)
        else:
            fields = fields.astype(complex)
        self.grid = grid
        self.kind = kind
        self.fields = fields
        self.t = float(t)

    # component views; names follow the representation
    @property
    def u(self):
        if self.kind != "lab_uv":
            raise AttributeError("u is only defined for kind 'lab_uv'")
        return self.fields[0]

    @property
    def v(self):
        if self.kind != "lab_uv":
            raise AttributeError("v is only defined for kind 'lab_uv'")
        return self.fields[1]

    @property
    def psi1(self):
        if self.kind == "spinor_psi":
            return self.fields[0]
        if self.kind == "real4":
            return self.fields[0] + 1j * self.fields[1]
        raise AttributeError("psi1 is only defined for spinor kinds")

    @property
    def psi2(self):
        if self.kind == "spinor_psi":
            return self.fields[1]
        if self.kind == "real4":
            return self.fields[2] + 1j * self.fields[3]
        raise AttributeError("psi2 is only defined for spinor kinds")

    def density(self):
        """Pointwise |state|^2, identical in all three representations."""
        if self.kind == "real4":
            return np.sum(self.fields ** 2, axis=0)
        return np.sum(np.abs(self.fields) ** 2, axis=0)

    def to_real4(self):
        """Exact repacking spinor_psi -> real4 (bitwise, no arithmetic)."""
        if self.kind == "real4":
            return self.copy()
        if self.kind != "spinor_psi":
            raise ValueError("convert lab_uv to spinor_psi first")
        p = np.vstack([self.fields[0].real, self.fields[0].imag,
                       self.fields[1].real, self.fields[1].imag])
        return SpinorState1D(self.grid, "real4", p, self.t)

    def to_spinor(self):
        """Exact repacking real4 -> spinor_psi (bitwise, no arithmetic)."""
        if self.kind == "spinor_psi":
            return self.copy()
        if self.kind != "real4":
            raise ValueError("convert lab_uv via the frame map instead")
        psi = np.vstack([self.fields[0] + 1j * self.fields[1],
                         self.fields[2] + 1j * self.fields[3]])
        return SpinorState1D(self.grid, "spinor_psi", psi, self.t)

    def copy(self):
        return SpinorState1D(self.grid, self.kind, self.fields.copy(), self.t)


class RadialSpinorState:
    """Four real fields on a cell-centered radial grid.

    Order is (p11, p12, p21, p22).  The first two are even-extendable
    through r = 0, the last two odd-extendable.  A field whose largest
    value sits at the innermost cell cannot be odd-extendable; that is
    rejected here rather than silently differentiated wrong.
    """

    def __init__(self, grid, fields, t=0.0):
        if not isinstance(grid, RadialGrid):
            raise TypeError("RadialSpinorState needs a RadialGrid")
        fields = np.asarray(fields, dtype=float)
        if fields.shape != (4, grid.n_cells):
            raise ValueError(
                f"fields shape {fields.shape} != (4, {grid.n_cells})")
        for row in (2, 3):
            f = fields[row]
            peak = np.max(np.abs(f))
            if peak > 0.0 and abs(f[0]) > 0.9 * peak:
                raise ValueError(
                    f"component {row} peaks at the innermost cell; "
                    "odd parity through the origin is violated")
        self.grid = grid
        self.fields = fields
        self.t = float(t)

    def density(self):
        return np.sum(self.fields ** 2, axis=0)

    @property
    def psi1(self):
        return self.fields[0] + 1j * self.fields[1]

    @property
    def psi2(self):
        return self.fields[2] + 1j * self.fields[3]

    def copy(self):
        return RadialSpinorState(self.grid, self.fields.copy(), self.t)


class Trajectory:
    """Sampled output of :func:`integrate`.

    Attributes
    ----------
    times : float array of the sampled instants.
    states : list of state snapshots, one per instant.
    boundary_mass : per-sample mass in the sponge zone next to the
        pinned edge nodes.
    max_abs : per-sample max |field| over components and nodes.
    """

    def __init__(self, times, states, boundary_mass, max_abs):
        self.times = np.asarray(times, dtype=float)
        self.states = list(states)
        self.boundary_mass = np.asarray(boundary_mass, dtype=float)
        self.max_abs = np.asarray(max_abs, dtype=float)

    def __len__(self):
        return len(self.states)

    def final(self):
        return self.states[-1]


def _require_arity(model, allowed, rhs_name):
    if model.arity not in allowed:
        raise ValueError(
            f"{rhs_name} does not accept a model of arity {model.arity!r}")


def rhs_lab(state, model, m=1.0):
    """du/dt, dv/dt for the lab-frame pair, as a (2, n) complex array."""
    _require_arity(model, ("lab_uv",), "rhs_lab")
    return _rhs_lab_arrays(state.fields, state.grid, model, m)


def _rhs_lab_arrays(fields, grid, model, m):
    u, v = fields
    ux = deriv1(u, grid)
    vx = deriv1(v, grid)
    w1, w2 = model.grad(u, v)
    return np.vstack([-ux + 1j * (m * v - w1),
                      vx + 1j * (m * u - w2)])


def rhs_spinor(state, model, m=1.0):
    """Time derivative in the psi frame.

    Accepts kind 'spinor_psi' (complex pair) or 'real4' (four real
    fields); the two code paths are algebraically identical.
    """
    _require_arity(model, ("spinor_psi", "radial_phi"), "rhs_spinor")
    if state.kind == "spinor_psi":
        return _rhs_spinor_arrays(state.fields, state.grid, model, m)
    if state.kind == "real4":
        return _rhs_real4_arrays(state.fields, state.grid, model, m)
    raise ValueError("rhs_spinor needs kind 'spinor_psi' or 'real4'")


def _rhs_spinor_arrays(fields, grid, model, m):
    p1, p2 = fields
    d1 = deriv1(p1, grid)
    d2 = deriv1(p2, grid)
    w1, w2 = model.grad(p1, p2)
    return np.vstack([-1j * (d2 + m * p1 - w1),
                      1j * (d1 + m * p2 - w2)])


def _rhs_real4_arrays(fields, grid, model, m):
    p11, p12, p21, p22 = fields
    w11, w12, w21, w22 = model.w_fields(p11 + 1j * p12, p21 + 1j * p22)
    d11 = deriv1(p11, grid)
    d12 = deriv1(p12, grid)
    d21 = deriv1(p21, grid)
    d22 = deriv1(p22, grid)
    return np.vstack([d22 + m * p12 - w12,
                      -d21 - m * p11 + w11,
                      -d12 - m * p22 + w22,
                      d11 + m * p21 - w21])


def rhs_radial(state, model, m=1.0):
    """Time derivative of the four radial fields, shape (4, n)."""
    _require_arity(model, ("radial_phi", "spinor_psi"), "rhs_radial")
    return _rhs_radial_arrays(state.fields, state.grid, model, m)


def _rhs_radial_arrays(fields, grid, model, m):
    p11, p12, p21, p22 = fields
    w11, w12, w21, w22 = model.w_fields(p11 + 1j * p12, p21 + 1j * p22)
    r = grid.r
    # odd components pick up the 2/r transport term of the 3D operator
    t22 = deriv1(p22, grid, parity="odd") + 2.0 * p22 / r
    t21 = deriv1(p21, grid, parity="odd") + 2.0 * p21 / r
    d11 = deriv1(p11, grid, parity="even")
    d12 = deriv1(p12, grid, parity="even")
    return np.vstack([t22 + m * p12 - w12,
                      -t21 - m * p11 + w11,
                      -d12 - m * p22 + w22,
                      d11 + m * p21 - w21])


_PIN = 4      # hard-zeroed nodes at an outflow edge
_SPONGE = 8   # monitored nodes just inside the pinned block


def _select_rhs(initial, model):
    if isinstance(initial, RadialSpinorState):
        _require_arity(model, ("radial_phi", "spinor_psi"), "integrate")
        return _rhs_radial_arrays
    if initial.kind == "lab_uv":
        _require_arity(model, ("lab_uv",), "integrate")
        return _rhs_lab_arrays
    _require_arity(model, ("spinor_psi", "radial_phi"), "integrate")
    if initial.kind == "spinor_psi":
        return _rhs_spinor_arrays
    return _rhs_real4_arrays


def _wrap(template, fields, t):
    if isinstance(template, RadialSpinorState):
        return RadialSpinorState(template.grid, fields, t)
    return SpinorState1D(template.grid, template.kind, fields, t)


def _zone_mass(fields, grid):
    """Mass sitting in the sponge zone next to the pinned edge nodes."""
    if np.iscomplexobj(fields):
        dens = np.sum(np.abs(fields) ** 2, axis=0)
    else:
        dens = np.sum(fields ** 2, axis=0)
    if isinstance(grid, RadialGrid):
        sl = dens[-(_PIN + _SPONGE):-_PIN]
        rr = grid.r[-(_PIN + _SPONGE):-_PIN]
        return 4.0 * np.pi * grid.h * float(np.sum(rr * rr * sl))
    left = dens[_PIN:_PIN + _SPONGE]
    right = dens[-(_PIN + _SPONGE):-_PIN]
    return grid.h * float(np.sum(left) + np.sum(right))


def integrate(initial, model, t_end, dt, m=1.0, sample_stride=1,
              cfl_fraction=0.5, boundary_tol=1e-8):
    """March the semi-discrete system with the classical 4-stage scheme.

    The outermost 4 nodes of each outflow edge are re-zeroed after every
    step (the radial origin is not an edge; parity handles it).  The run
    aborts with RuntimeError if any field stops being finite or if the
    mass in the monitoring zone next to the pinned nodes exceeds
    ``boundary_tol`` times the initial charge, so results are only ever
    produced for effectively compactly supported evolutions.

    Returns a :class:`Trajectory` sampled every ``sample_stride`` steps
    (first and last steps always included).
    """
    grid = initial.grid
    dt = float(dt)
    t_end = float(t_end)
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if dt > cfl_fraction * grid.h + 1e-14:
        raise ValueError(
            f"dt = {dt:g} exceeds {cfl_fraction:g} * h = "
            f"{cfl_fraction * grid.h:g}; refusing to step")
    n_steps = int(round(t_end / dt))
    if n_steps < 1 or abs(n_steps * dt - t_end) > 1e-9 * max(1.0, abs(t_end)):
        raise ValueError("t_end must be a positive integer multiple of dt")
    stride = int(sample_stride)
    if stride < 1:
        raise ValueError("sample_stride must be >= 1")

    rhs = _select_rhs(initial, model)
    y = initial.fields.copy()
    t0 = initial.t

    if isinstance(grid, RadialGrid):
        dens0 = np.sum(np.abs(y) ** 2, axis=0).real
        q0 = 4.0 * np.pi * grid.h * float(np.sum(grid.r ** 2 * dens0))
    else:
        q0 = float(quad(np.sum(np.abs(y) ** 2, axis=0).real, grid))
    mass_cap = boundary_tol * q0 if q0 > 0.0 else np.inf

    times = [t0]
    states = [_wrap(initial, y.copy(), t0)]
    bmass = [_zone_mass(y, grid)]
    maxab = [float(np.max(np.abs(y)))]

    half = 0.5 * dt
    sixth = dt / 6.0
    for step in range(1, n_steps + 1):
        k1 = rhs(y, grid, model, m)
        k2 = rhs(y + half * k1, grid, model, m)
        k3 = rhs(y + half * k2, grid, model, m)
        k4 = rhs(y + dt * k3, grid, model, m)
        y = y + sixth * (k1 + 2.0 * (k2 + k3) + k4)
        if isinstance(grid, RadialGrid):
            y[:, -_PIN:] = 0.0
        else:
            y[:, :_PIN] = 0.0
            y[:, -_PIN:] = 0.0

        if step % stride == 0 or step == n_steps:
            t = t0 + step * dt
            if not np.all(np.isfinite(y)):
                raise RuntimeError(f"non-finite field values at t = {t:g}")
            zm = _zone_mass(y, grid)
            if zm > mass_cap:
                raise RuntimeError(
                    f"boundary zone mass {zm:.3e} exceeds "
                    f"{boundary_tol:g} * Q(0) = {mass_cap:.3e} at t = {t:g}; "
                    "enlarge the domain or stop earlier")
            times.append(t)
            states.append(_wrap(initial, y.copy(), t))
            bmass.append(zm)
            maxab.append(float(np.max(np.abs(y))))

    return Trajectory(times, states, bmass, maxab)
