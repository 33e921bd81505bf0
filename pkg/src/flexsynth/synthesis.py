"""
Flexible-body time stepping in a sequence of reconfigured inertial frames.

Each step integrates the linear modal model in the current inertial frame
with a staged RK4, integrates the dummy-body orientation alongside it with
the dexp-inverse, strips the embedded rigid displacement from the state and
re-expresses the state in the new frame.  The global motion is rebuilt from
the per-step frame poses by ``reconstruct_global``.

Frame conventions: ``rotation`` (``A``) maps global components to current
frame components, ``A = exp(M) @ base``.  The frame ``origin`` is the global
position of the material origin of the dummy body.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import (ConfigError, DimensionError, DivergenceError, NumericalError,
                     RebaseRequired)
from .model import ModalState, _rigid_fields, inverse_modal_expand
from .rotation import (LogRotation, MarkerTriad, angular_acceleration_h,
                       angular_velocity_g, basis_from_markers, dexp_inv_rate,
                       rebase, relative_velocity_rate, rotation_exp)

log = logging.getLogger(__name__)

# RK4 stability boundary on the imaginary axis
RK4_LIMIT = 2.0 * np.sqrt(2.0)


@dataclass(frozen=True)
class FrameState:
    log_rot: LogRotation = field(default_factory=LogRotation.zero)
    base_rot: np.ndarray = field(default_factory=lambda: np.eye(3))
    origin: np.ndarray = field(default_factory=lambda: np.zeros(3))

    @property
    def a_total(self):
        return rotation_exp(self.log_rot) @ self.base_rot


@dataclass(frozen=True)
class SimState:
    """Physical state in the current frame plus its modal image."""

    x: np.ndarray
    x_dot: np.ndarray
    eta: ModalState
    v_pr: np.ndarray
    v_qr: np.ndarray
    time: float = 0.0


@dataclass(frozen=True)
class StageKinematics:
    """Embedded rigid-body kinematics at one state, all in current-frame components."""

    eta_dot: np.ndarray
    v_pr: np.ndarray
    v_qr: np.ndarray
    a_pr: np.ndarray
    a_qr: np.ndarray
    omega: np.ndarray
    alpha: np.ndarray


@dataclass
class Trajectory:
    """Per-step records; arrays are stacked along the first axis."""

    time: np.ndarray
    origin: np.ndarray
    rotation: np.ndarray
    omega: np.ndarray
    alpha: np.ndarray
    q: np.ndarray | None = None
    q_dot: np.ndarray | None = None
    q_ddot: np.ndarray | None = None
    x: np.ndarray | None = None
    x_dot: np.ndarray | None = None
    marker_drift: np.ndarray | None = None
    basis: object = None
    com: np.ndarray | None = None
    com_vel: np.ndarray | None = None
    com_acc: np.ndarray | None = None

    def __len__(self):
        return len(self.time)


def extract_embedded_rbm(basis, eta_dot, triad):
    """Relative velocities and accelerations of P and Q w.r.t. R due to rigid modes.

    ``eta_dot`` is ``[q'; q'']`` (or an increment of the packed modal state);
    only the rigid-mode entries of each half are expanded.
    """
    eta_dot = np.asarray(eta_dot, dtype=float)
    m, nr = basis.n_modes, basis.n_rigid
    if eta_dot.shape != (2 * m,):
        raise DimensionError(f"expected a packed modal vector of length {2 * m}")
    n_nodes = basis.shapes.shape[0] // 3
    for node in (triad.ref_node, triad.p_node, triad.q_node):
        if not 0 <= node < n_nodes:
            raise ConfigError(f"marker node {node} not in model")
    rows = _marker_rows(basis, triad)
    rate = eta_dot[:nr]
    acc = eta_dot[m:m + nr]
    return rows[0] @ rate, rows[1] @ rate, rows[0] @ acc, rows[1] @ acc


def _marker_rows(basis, triad):
    psi_r = basis.rigid_shapes
    r = psi_r[3 * triad.ref_node:3 * triad.ref_node + 3]
    p = psi_r[3 * triad.p_node:3 * triad.p_node + 3]
    q = psi_r[3 * triad.q_node:3 * triad.q_node + 3]
    return p - r, q - r


def transform_state(r_rel, x, x_dot, dof_map=None):
    """Rotate every node's displacement and velocity triple by ``r_rel``."""
    r_rel = np.asarray(r_rel, dtype=float)
    x = np.asarray(x, dtype=float)
    x_dot = np.asarray(x_dot, dtype=float)
    return (x.reshape(-1, 3) @ r_rel.T).ravel(), (x_dot.reshape(-1, 3) @ r_rel.T).ravel()


class FrameSynthesizer:
    """Precomputed operators for stepping one model with one marker triad.

    Parameters
    ----------
    system : ModalSystem
    triad : MarkerTriad
    loads : LoadSpec
        Node references must already be resolved to indices.
    dt : float
    """

    def __init__(self, system, triad, loads, dt):
        if dt <= 0:
            raise ConfigError("dt must be positive")
        self.system = system
        self.model = system.model
        self.basis = system.basis
        self.triad = triad
        self.loads = loads
        self.dt = float(dt)
        self.m = system.n_modes
        self.nr = system.n_rigid
        if self.nr != 6:
            raise ConfigError("frame synthesis needs a basis with six rigid modes")
        self.psi = np.asarray(self.basis.shapes)
        self.psi_r = self.psi[:, :self.nr]
        self.projector = np.asarray(system.projector)
        self.h = np.asarray(system.state_matrix)
        self.mq_inv = np.linalg.inv(system.modal_mass)
        self.force_map = self.mq_inv @ self.psi.T
        self.marker_basis = basis_from_markers(triad)
        self.rows_p, self.rows_q = _marker_rows(self.basis, triad)
        masses = self.model.lumped_masses()
        self.total_mass = float(masses.sum())
        self.coords = np.asarray(self.model.node_coords)
        self.com = (masses[:, None] * self.coords).sum(axis=0) / self.total_mass
        # mass-weighted mean displacement of a rigid-mode field (CoM translation)
        trans = np.zeros((self.model.n_dofs, 3))
        for j in range(3):
            trans[j::3, j] = 1.0
        self.com_rows = trans.T @ self.model.mass_matrix @ self.psi_r / self.total_mass
        # rigid modal coordinates <-> (translation, rotation) vector pairs and
        # rigid modal rates <-> (linear, angular momentum) about the CoM
        fields = _rigid_fields(self.model)
        self._q_of_c = self.projector[:self.nr] @ fields
        self._c_of_q = np.linalg.inv(self._q_of_c)
        self._mom_of_qd = fields.T @ self.model.mass_matrix @ self.psi_r
        self._qd_of_mom = np.linalg.inv(self._mom_of_qd)
        self.n_nodes = self.model.n_nodes

    # ---- helpers -------------------------------------------------------
    def stability_number(self):
        """Largest ``|lambda| * dt`` over the eigenvalues of the state matrix."""
        return float(np.max(np.abs(np.linalg.eigvals(self.h)))) * self.dt

    def modal_force(self, t, rotation):
        return self.force_map @ self.loads.in_frame(t, rotation, self.n_nodes)

    def eta_dot(self, eta, fq_mapped):
        out = self.h @ eta
        out[self.m:] += fq_mapped
        return out

    def rigid_rotation(self, rot, rates=False):
        """Action of a frame rotation on rigid modal coordinates or rates.

        Rigid displacement is a translation vector plus a rotation vector and
        a frame change rotates those two vectors; rigid rates are rotated
        through the linear and angular momentum they carry, since the body's
        inertia is fixed in its own frame.  Rotating the nodal field instead
        would swing the material points too and inject a spurious
        ``omega x (omega x r)`` velocity every step.
        """
        blk = np.zeros((6, 6))
        blk[:3, :3] = blk[3:, 3:] = rot
        if rates:
            return self._qd_of_mom @ blk @ self._mom_of_qd
        return self._q_of_c @ blk @ self._c_of_q

    def reframe(self, rot, x, x_dot):
        """Express an elastic displacement and a total velocity in a rotated frame.

        Rigid content of the rotated displacement is stripped.
        """
        nr = self.nr
        qd_r = self.projector[:nr] @ x_dot
        x_new, xd_el = transform_state(rot, x, x_dot - self.psi_r @ qd_r)
        x_new = x_new - self.psi_r @ (self.projector[:nr] @ x_new)
        return x_new, xd_el + self.psi_r @ (self.rigid_rotation(rot, rates=True) @ qd_r)

    def _to_frame(self, rot, vec):
        # re-express a packed modal vector in another frame
        m, nr = self.m, self.nr
        out = []
        for half, rates in ((vec[:m], False), (vec[m:], True)):
            field = self.psi[:, nr:] @ half[nr:]
            h = self.projector @ (field.reshape(-1, 3) @ rot.T).ravel()
            h[:nr] += self.rigid_rotation(rot, rates) @ half[:nr]
            out.append(h)
        return np.concatenate(out)

    def _rigid_rel(self, vec):
        return self.rows_p @ vec, self.rows_q @ vec

    def _omega(self, v_p, v_q):
        return angular_velocity_g(self.triad, v_p, v_q, self.marker_basis)

    def rigid_accelerations(self, eta_dot, omega, qd_r):
        """Rigid modal accelerations with the gyroscopic term restored.

        The linear model gives ``I alpha = tau``; the body-frame rate of the
        angular momentum also carries ``-omega x L``.
        """
        mom = self._mom_of_qd @ qd_r
        corr = np.zeros(6)
        corr[3:] = -np.cross(omega, mom[3:])
        return eta_dot[self.m:self.m + self.nr] + self._qd_of_mom @ corr

    def _accelerations(self, eta_dot, omega, v_p, v_q, qd_r):
        # complete the linear rigid-mode accelerations so that
        # a = alpha x r + omega x (omega x r) with the full alpha
        a_p, a_q = self._rigid_rel(self.rigid_accelerations(eta_dot, omega, qd_r))
        return a_p + np.cross(omega, v_p), a_q + np.cross(omega, v_q)

    def kinematics(self, state, frame):
        """Embedded rigid-body kinematics at the start of a step."""
        a_tot = rotation_exp(frame.log_rot) @ frame.base_rot
        fq = self.modal_force(state.time, a_tot)
        eta = state.eta.packed
        ed = self.eta_dot(eta, fq)
        v_p, v_q = self._rigid_rel(eta[self.m:self.m + self.nr])
        omega = self._omega(v_p, v_q)
        a_p, a_q = self._accelerations(ed, omega, v_p, v_q, eta[self.m:self.m + self.nr])
        alpha = angular_acceleration_h(self.triad, v_p, v_q, a_p, a_q, omega,
                                       self.marker_basis)
        return StageKinematics(ed, v_p, v_q, a_p, a_q, omega, alpha)

    def initial_state(self, x0=None, x_dot0=None, t0=0.0):
        n = self.model.n_dofs
        x0 = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float)
        x_dot0 = np.zeros(n) if x_dot0 is None else np.asarray(x_dot0, dtype=float)
        if x0.shape != (n,) or x_dot0.shape != (n,):
            raise DimensionError(f"initial conditions must have length {n}")
        eta = inverse_modal_expand(self.system, x0, x_dot0)
        v_p, v_q = self._rigid_rel(eta.rates[:self.nr])
        return SimState(x0.copy(), x_dot0.copy(), eta, v_p, v_q, float(t0))

    # ---- one step ------------------------------------------------------
    def step(self, state, frame, kin=None):
        """Advance one step; returns ``(SimState, FrameState, drift)``.

        ``drift`` is the largest difference between the marker relative
        velocities integrated through the stages and those re-extracted from
        the new modal state.
        """
        try:
            return self._step(state, frame, kin)
        except RebaseRequired:
            log.debug("rebasing frame before retrying step at t=%g", state.time)
            zero, base = rebase(frame.log_rot, frame.base_rot)
            frame = FrameState(zero, base, frame.origin)
            return self._step(state, frame, None)

    def _step(self, state, frame, kin):
        dt = self.dt
        m, nr = self.m, self.nr
        psi, psi_r = self.psi, self.psi_r
        t0, t1 = state.time, state.time + dt
        base = np.asarray(frame.base_rot)
        m_n = np.asarray(frame.log_rot.m_matrix)
        exp_n = rotation_exp(m_n)
        exp_n_t = exp_n.T
        x_n, xd_n = state.x, state.x_dot
        if kin is None:
            kin = self.kinematics(state, frame)

        g_n, b_n = self.loads.nodal(t0, self.n_nodes)
        g_1, b_1 = self.loads.nodal(t1, self.n_nodes)
        g_mid, b_mid = 0.5 * (g_n + g_1), 0.5 * (b_n + b_1)

        def fq(g, b, rot):
            return self.force_map @ (g @ rot.T + b).ravel()

        # stage k1 at the step start
        d_eta = [dt * kin.eta_dot]
        d_vp = [dt * relative_velocity_rate(kin.v_pr, kin.a_pr, kin.omega)]
        d_vq = [dt * relative_velocity_rate(kin.v_qr, kin.a_qr, kin.omega)]
        d_m = [dt * dexp_inv_rate(m_n, kin.omega)]

        for k, (frac, g, b) in enumerate(((0.5, g_mid, b_mid), (0.5, g_mid, b_mid),
                                          (1.0, g_1, b_1))):
            m_k = m_n + frac * d_m[-1]
            exp_k = rotation_exp(m_k)
            r_k = exp_k @ exp_n_t
            de = frac * d_eta[-1]
            x_k = x_n + psi @ de[:m] - psi_r @ de[:nr]
            xd_k = xd_n + psi @ de[m:]
            x_k, xd_k = self.reframe(r_k, x_k, xd_k)
            eta_k = np.concatenate([self.projector @ x_k, self.projector @ xd_k])
            v_p, v_q = self._rigid_rel(eta_k[m:m + nr])
            omega = self._omega(v_p, v_q)
            ed = self.eta_dot(eta_k, fq(g, b, exp_k @ base))
            d_eta.append(dt * self._to_frame(r_k.T, ed))
            d_m.append(dt * dexp_inv_rate(m_k, omega))
            a_p, a_q = self._accelerations(ed, omega, v_p, v_q, eta_k[m:m + nr])
            d_vp.append(dt * relative_velocity_rate(v_p, a_p, omega))
            d_vq.append(dt * relative_velocity_rate(v_q, a_q, omega))

        w = (1.0, 2.0, 2.0, 1.0)
        m_new = m_n + sum(wi * di for wi, di in zip(w, d_m)) / 6.0
        m_new = 0.5 * (m_new - m_new.T)
        delta = sum(wi * di for wi, di in zip(w, d_eta)) / 6.0
        v_p_int = kin.v_pr + sum(wi * di for wi, di in zip(w, d_vp)) / 6.0
        v_q_int = kin.v_qr + sum(wi * di for wi, di in zip(w, d_vq)) / 6.0

        exp_new = rotation_exp(m_new)
        r_step = exp_new @ exp_n_t
        dq_r = delta[:nr]
        x_new = x_n + psi @ delta[:m] - psi_r @ dq_r
        xd_new = xd_n + psi @ delta[m:]
        x_new, xd_new = self.reframe(r_step, x_new, xd_new)

        a_n = exp_n @ base
        a_new = exp_new @ base
        com_shift = self.com_rows @ dq_r
        origin = (frame.origin + a_n.T @ (self.com + com_shift) - a_new.T @ self.com)

        eta_new = ModalState.from_parts(self.projector @ x_new, self.projector @ xd_new)
        v_p_new, v_q_new = self._rigid_rel(eta_new.rates[:nr])
        drift = max(np.max(np.abs(v_p_int - v_p_new)), np.max(np.abs(v_q_int - v_q_new)))

        log_new = LogRotation(m_new)
        if log_new.theta > np.pi:
            log_new, base = rebase(log_new, base)
        new_state = SimState(x_new, xd_new, eta_new, v_p_new, v_q_new, t1)
        new_frame = FrameState(log_new, base, origin)
        return new_state, new_frame, float(drift)


def _check_finite(state, frame, step_index):
    ok = (np.all(np.isfinite(state.x)) and np.all(np.isfinite(state.x_dot))
          and np.all(np.isfinite(frame.log_rot.m_matrix)) and np.all(np.isfinite(frame.origin)))
    if not ok:
        raise DivergenceError(
            f"non-finite state at step {step_index} (t = {state.time:.6g} s)",
            step=step_index, time=state.time)


def rk4_step(system, state, frame, loads, triad, dt):
    """One staged RK4 step with frame reconfiguration.

    Convenience wrapper that builds a ``FrameSynthesizer`` each call; use
    ``simulate`` (or the synthesizer directly) for long runs.
    """
    stepper = FrameSynthesizer(system, triad, loads.resolve(system.model), dt)
    new_state, new_frame, _ = stepper.step(state, frame)
    _check_finite(new_state, new_frame, 0)
    return new_state, new_frame


def simulate(model, system, config, progress=None):
    """Run from ``t = 0`` to ``config.t_end`` and record every step.

    ``config`` needs ``dt``, ``t_end``, ``markers`` (three node references
    R, P, Q), ``loads`` (a ``LoadSpec``) and ``initial_conditions(model,
    basis)`` returning ``(x0, x_dot0)``.
    """
    if system.model is not model:
        raise ConfigError("modal system was built from a different model")
    dt, t_end = float(config.dt), float(config.t_end)
    if dt <= 0 or t_end < 0:
        raise ConfigError("need dt > 0 and t_end >= 0")
    try:
        nodes = [model.node_index(r) for r in config.markers]
    except KeyError as exc:
        raise ConfigError(f"markers: {exc.args[0]}") from None
    triad = MarkerTriad.from_coords(model.node_coords, *nodes)
    stepper = FrameSynthesizer(system, triad, config.loads.resolve(model), dt)
    stab = stepper.stability_number()
    if stab > RK4_LIMIT:
        raise ConfigError(
            f"dt = {dt:g} s is outside the RK4 stability region for the retained "
            f"modes (|lambda| dt = {stab:.3f} > {RK4_LIMIT:.3f}); reduce dt or modes")
    x0, xd0 = config.initial_conditions(model, system.basis)
    state = stepper.initial_state(x0, xd0)
    frame = FrameState()
    n_steps = int(round(t_end / dt))
    rec = _Recorder(n_steps + 1, stepper)
    kin = stepper.kinematics(state, frame)
    rec.add(state, frame, kin, 0.0)
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(1, n_steps + 1):
            try:
                state, frame, drift = stepper.step(state, frame, kin)
                # time stamps from the step count avoid summed round-off
                state = SimState(state.x, state.x_dot, state.eta, state.v_pr, state.v_qr,
                                 i * dt)
                _check_finite(state, frame, i)
                kin = stepper.kinematics(state, frame)
            except NumericalError as exc:
                if not isinstance(exc, DivergenceError):
                    exc = DivergenceError(f"step {i} failed: {exc}", step=i, time=i * dt)
                exc.partial = rec.finish()
                raise exc
            rec.add(state, frame, kin, drift)
            if progress is not None:
                progress(i, n_steps)
    return rec.finish()


class _Recorder:
    def __init__(self, n, stepper):
        self.stepper = stepper
        m, n_dofs = stepper.m, stepper.model.n_dofs
        self.i = 0
        self.time = np.zeros(n)
        self.origin = np.zeros((n, 3))
        self.rotation = np.zeros((n, 3, 3))
        self.omega = np.zeros((n, 3))
        self.alpha = np.zeros((n, 3))
        self.q = np.zeros((n, m))
        self.q_dot = np.zeros((n, m))
        self.q_ddot = np.zeros((n, m))
        self.x = np.zeros((n, n_dofs))
        self.x_dot = np.zeros((n, n_dofs))
        self.drift = np.zeros(n)
        self.com_vel = np.zeros((n, 3))
        self.com_acc = np.zeros((n, 3))

    def add(self, state, frame, kin, drift):
        i = self.i
        m = len(state.eta.coords)
        self.time[i] = state.time
        self.origin[i] = frame.origin
        self.rotation[i] = frame.a_total
        self.omega[i] = kin.omega
        self.alpha[i] = kin.alpha
        self.q[i] = state.eta.coords
        self.q_dot[i] = state.eta.rates
        self.q_ddot[i] = kin.eta_dot[m:]
        self.x[i] = state.x
        self.x_dot[i] = state.x_dot
        self.drift[i] = drift
        rows = self.stepper.com_rows
        nr = self.stepper.nr
        self.com_vel[i] = self.rotation[i].T @ (rows @ state.eta.rates[:nr])
        self.com_acc[i] = self.rotation[i].T @ (rows @ kin.eta_dot[m:m + nr])
        self.i += 1

    def finish(self):
        st = self.stepper
        k = self.i
        return Trajectory(self.time[:k], self.origin[:k], self.rotation[:k], self.omega[:k],
                          self.alpha[:k], self.q[:k], self.q_dot[:k], self.q_ddot[:k],
                          self.x[:k], self.x_dot[:k], self.drift[:k], st.basis,
                          np.asarray(st.com), self.com_vel[:k], self.com_acc[:k])


@dataclass
class PointKinematics:
    """Global-frame kinematics of selected points, each array (n_steps, n_points, 3).

    ``acc_rbm`` holds the accelerations of the embedded rigid-body motion
    alone; ``acc`` the full accelerations including vibration.
    """

    nodes: list
    material: np.ndarray
    pos: np.ndarray
    vel: np.ndarray
    acc: np.ndarray
    acc_rbm: np.ndarray

    @property
    def disp(self):
        return self.pos - self.material[None]


def reconstruct_global(trajectory, model, query_nodes):
    """Global positions, velocities and accelerations of model nodes."""
    try:
        nodes = [model.node_index(n) for n in query_nodes]
    except KeyError as exc:
        raise ConfigError(f"query node: {exc.args[0]}") from None
    basis = trajectory.basis
    coords = np.asarray(model.node_coords)[nodes]
    dofs = np.concatenate([np.arange(3 * n, 3 * n + 3) for n in nodes])
    k = len(nodes)
    n_rec = len(trajectory)
    a_t = np.transpose(trajectory.rotation, (0, 2, 1))  # current frame -> global
    x = trajectory.x[:, dofs].reshape(n_rec, k, 3)
    xd = trajectory.x_dot[:, dofs].reshape(n_rec, k, 3)
    psi = np.asarray(basis.shapes)[dofs]
    nr = basis.n_rigid
    elastic_acc = (trajectory.q_ddot[:, nr:] @ psi[:, nr:].T).reshape(n_rec, k, 3)
    shape = (n_rec, k, 3)
    rel = np.broadcast_to(coords - trajectory.com, shape)
    w = np.broadcast_to(trajectory.omega[:, None, :], shape)
    al = np.broadcast_to(trajectory.alpha[:, None, :], shape)

    def to_global(v):
        return np.einsum("tij,tkj->tki", a_t, v)

    # rigid part: a_com + alpha x r + omega x (omega x r)
    acc_rbm = trajectory.com_acc[:, None, :] + to_global(
        np.cross(al, rel) + np.cross(w, np.cross(w, rel)))
    pos = trajectory.origin[:, None, :] + to_global(coords[None] + x)
    return PointKinematics(nodes, coords, pos, to_global(xd),
                           acc_rbm + to_global(elastic_acc), acc_rbm)


def simulate_fixed_frame(model, system, loads, dt, t_end, x0=None, x_dot0=None):
    """Conventional modal transient in the fixed analysis frame (no reconfiguration).

    Returns ``(time, q, q_dot)``; global displacements are ``q @ Psi.T``.
    Valid only for small rotations.
    """
    loads = loads.resolve(model)
    psi = np.asarray(system.basis.shapes)
    m = system.n_modes
    h = np.asarray(system.state_matrix)
    force_map = np.linalg.solve(system.modal_mass, psi.T)
    n = model.n_dofs
    x0 = np.zeros(n) if x0 is None else x0
    x_dot0 = np.zeros(n) if x_dot0 is None else x_dot0
    eta = inverse_modal_expand(system, x0, x_dot0).packed.copy()
    n_steps = int(round(t_end / dt))
    eye = np.eye(3)

    def deriv(e, t):
        out = h @ e
        out[m:] += force_map @ loads.in_frame(t, eye, model.n_nodes)
        return out

    hist = np.zeros((n_steps + 1, 2 * m))
    hist[0] = eta
    for i in range(n_steps):
        t = i * dt
        k1 = deriv(eta, t)
        k2 = deriv(eta + 0.5 * dt * k1, t + 0.5 * dt)
        k3 = deriv(eta + 0.5 * dt * k2, t + 0.5 * dt)
        k4 = deriv(eta + dt * k3, t + dt)
        eta = eta + dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
        hist[i + 1] = eta
    time = np.arange(n_steps + 1) * dt
    return time, hist[:, :m], hist[:, m:]
