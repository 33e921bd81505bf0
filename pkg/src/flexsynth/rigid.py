"""
Rigid-body reference solver: Newton's law for the centre of mass and
Euler's equations for the rotation.

Orientation uses the same representation as the flexible solver
(``A = exp(M) @ base`` maps global components to body components, and
``dM/dt = dexp_inv_rate(M, omega_body)``), so any convention slip shows up
in both solvers alike instead of looking like a physical difference.
Angular velocities are reported in material-frame components; the Euler
equations themselves are evaluated in the principal frame.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DivergenceError, RebaseRequired
from .rotation import LogRotation, dexp_inv_rate, rebase, rotation_exp
from .synthesis import PointKinematics, Trajectory


@dataclass(frozen=True)
class RigidBodyProps:
    """Mass properties of a rigid body.

    Parameters
    ----------
    mass : float
        Total mass (Mg).
    inertia_principal : (3,) array
        Principal moments about the centre of mass (Mg mm^2).
    com : (3,) array
        Centre of mass in material coordinates (mm).
    principal_axes : (3, 3) array
        Rotation taking material components to principal components.
    """

    mass: float
    inertia_principal: np.ndarray
    com: np.ndarray = field(default_factory=lambda: np.zeros(3))
    principal_axes: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        inertia = np.array(self.inertia_principal, dtype=float)
        com = np.array(self.com, dtype=float)
        axes = np.array(self.principal_axes, dtype=float)
        if not np.isfinite(self.mass) or self.mass <= 0:
            raise ConfigError("rigid mass must be positive")
        if inertia.shape != (3,) or np.any(inertia <= 0):
            raise ConfigError("principal inertias must be three positive numbers")
        tol = 1e-9 * inertia.sum()
        for i in range(3):
            j, k = (i + 1) % 3, (i + 2) % 3
            if inertia[i] + inertia[j] < inertia[k] - tol:
                raise ConfigError("principal inertias violate the triangle inequality")
        if com.shape != (3,):
            raise ConfigError("centre of mass must be a 3-vector")
        if (axes.shape != (3, 3) or np.max(np.abs(axes @ axes.T - np.eye(3))) > 1e-9
                or np.linalg.det(axes) < 0):
            raise ConfigError("principal_axes must be a proper rotation")
        for a in (inertia, com, axes):
            a.setflags(write=False)
        object.__setattr__(self, "mass", float(self.mass))
        object.__setattr__(self, "inertia_principal", inertia)
        object.__setattr__(self, "com", com)
        object.__setattr__(self, "principal_axes", axes)

    @classmethod
    def from_inertia_tensor(cls, mass, inertia, com=(0.0, 0.0, 0.0)):
        """Diagonalize a full inertia tensor about the centre of mass."""
        inertia = np.asarray(inertia, dtype=float)
        if inertia.shape != (3, 3) or np.max(np.abs(inertia - inertia.T)) > 1e-9 * np.abs(inertia).max():
            raise ConfigError("inertia tensor must be a symmetric 3x3 matrix")
        vals, vecs = np.linalg.eigh(0.5 * (inertia + inertia.T))
        if np.linalg.det(vecs) < 0:
            vecs[:, 2] *= -1.0
        return cls(mass, vals, com, vecs.T)

    @classmethod
    def from_model(cls, model):
        from .factory import mass_properties
        total, com, inertia = mass_properties(model)
        return cls.from_inertia_tensor(total, inertia, com)

    @property
    def inertia_tensor(self):
        """Inertia tensor in material components."""
        p = self.principal_axes
        return p.T @ np.diag(self.inertia_principal) @ p


@dataclass(frozen=True)
class RigidState:
    com_pos: np.ndarray = field(default_factory=lambda: np.zeros(3))
    com_vel: np.ndarray = field(default_factory=lambda: np.zeros(3))
    log_rot: LogRotation = field(default_factory=LogRotation.zero)
    base_rot: np.ndarray = field(default_factory=lambda: np.eye(3))
    omega_body: np.ndarray = field(default_factory=lambda: np.zeros(3))

    @property
    def rotation(self):
        return rotation_exp(self.log_rot) @ self.base_rot


@dataclass(frozen=True)
class RigidRate:
    com_vel: np.ndarray
    com_acc: np.ndarray
    log_rate: np.ndarray
    omega_dot: np.ndarray


def euler_rates(inertia_principal, omega_p, torque_p):
    """Euler's equations ``I w' = (I_j - I_k) w_j w_k + tau`` (cyclic)."""
    i1, i2, i3 = inertia_principal
    w1, w2, w3 = omega_p
    t1, t2, t3 = torque_p
    return np.array([((i2 - i3) * w2 * w3 + t1) / i1,
                     ((i3 - i1) * w3 * w1 + t2) / i2,
                     ((i1 - i2) * w1 * w2 + t3) / i3])


def applied_wrench(props, loads, t, rotation, points):
    """Total global force and material-frame torque about the centre of mass.

    ``loads`` must have node indices into ``points`` (material coordinates).
    """
    force = np.zeros(3)
    torque = np.zeros(3)
    rotation = np.asarray(rotation)
    for e in loads.entries:
        f = e.magnitude(t) * np.asarray(e.direction)
        if e.frame == "global":
            f_global, f_body = f, rotation @ f
        else:
            f_global, f_body = rotation.T @ f, f
        force += f_global
        torque += np.cross(points[e.node] - props.com, f_body)
    return force, torque


def rigid_derivative(props, state, loads, t, points=None):
    """Time derivative of a ``RigidState`` under point loads at time ``t``."""
    points = _load_points(loads, points)
    rot = state.rotation
    force, torque = applied_wrench(props, loads, t, rot, points)
    p = props.principal_axes
    omega = np.asarray(state.omega_body, dtype=float)
    omega_dot = p.T @ euler_rates(props.inertia_principal, p @ omega, p @ torque)
    return RigidRate(np.asarray(state.com_vel, dtype=float), force / props.mass,
                     dexp_inv_rate(state.log_rot, omega), omega_dot)


def _load_points(loads, points):
    if points is None:
        if loads.entries:
            raise ConfigError("loads on a rigid body need the node coordinates")
        return np.zeros((0, 3))
    return np.asarray(points, dtype=float)


def _advance(state, rate, h):
    m = state.log_rot.m_matrix + h * rate.log_rate
    return RigidState(state.com_pos + h * rate.com_vel, state.com_vel + h * rate.com_acc,
                      LogRotation(0.5 * (m - m.T)), state.base_rot,
                      state.omega_body + h * rate.omega_dot)


def rigid_rk4_step(props, state, loads, t, dt, points=None):
    points = _load_points(loads, points)
    try:
        k1 = rigid_derivative(props, state, loads, t, points)
        k2 = rigid_derivative(props, _advance(state, k1, 0.5 * dt), loads, t + 0.5 * dt, points)
        k3 = rigid_derivative(props, _advance(state, k2, 0.5 * dt), loads, t + 0.5 * dt, points)
        k4 = rigid_derivative(props, _advance(state, k3, dt), loads, t + dt, points)
    except RebaseRequired:
        zero, base = rebase(state.log_rot, state.base_rot)
        state = RigidState(state.com_pos, state.com_vel, zero, base, state.omega_body)
        return rigid_rk4_step(props, state, loads, t, dt, points)
    combo = RigidRate(*(
        (getattr(k1, f) + 2 * getattr(k2, f) + 2 * getattr(k3, f) + getattr(k4, f)) / 6.0
        for f in ("com_vel", "com_acc", "log_rate", "omega_dot")))
    new = _advance(state, combo, dt)
    if new.log_rot.theta > np.pi:
        zero, base = rebase(new.log_rot, new.base_rot)
        new = RigidState(new.com_pos, new.com_vel, zero, base, new.omega_body)
    return new


def simulate_rigid(props, loads, dt, t_end, initial=None, points=None):
    """RK4 integration of the rigid body; returns a ``Trajectory``.

    ``origin`` is the global position of the material origin, so the fields
    line up with the flexible solver's output.  ``initial`` defaults to the
    body at rest with its centre of mass at ``props.com``.
    """
    if dt <= 0 or t_end < 0:
        raise ConfigError("need dt > 0 and t_end >= 0")
    points = _load_points(loads, points)
    for e in loads.entries:
        if not isinstance(e.node, (int, np.integer)) or not 0 <= e.node < len(points):
            raise ConfigError(f"load node {e.node!r} has no coordinates")
    state = initial or RigidState(com_pos=props.com.copy())
    n_steps = int(round(t_end / dt))
    n = n_steps + 1
    time = np.arange(n) * dt
    origin = np.zeros((n, 3))
    rotation = np.zeros((n, 3, 3))
    omega = np.zeros((n, 3))
    alpha = np.zeros((n, 3))
    com_vel = np.zeros((n, 3))
    com_acc = np.zeros((n, 3))
    for i in range(n):
        if i > 0:
            with np.errstate(over="ignore", invalid="ignore"):
                state = rigid_rk4_step(props, state, loads, time[i - 1], dt, points)
            if not (np.all(np.isfinite(state.com_pos)) and np.all(np.isfinite(state.omega_body))
                    and np.all(np.isfinite(state.log_rot.m_matrix))):
                exc = DivergenceError(f"non-finite rigid state at step {i} (t = {time[i]:.6g} s)",
                                      step=i, time=time[i])
                exc.partial = Trajectory(time[:i], origin[:i], rotation[:i], omega[:i],
                                         alpha[:i], com=props.com.copy(),
                                         com_vel=com_vel[:i], com_acc=com_acc[:i])
                raise exc
        rate = rigid_derivative(props, state, loads, time[i], points)
        rot = state.rotation
        rotation[i] = rot
        origin[i] = state.com_pos - rot.T @ props.com
        omega[i] = state.omega_body
        alpha[i] = rate.omega_dot
        com_vel[i] = state.com_vel
        com_acc[i] = rate.com_acc
    return Trajectory(time, origin, rotation, omega, alpha, com=props.com.copy(),
                      com_vel=com_vel, com_acc=com_acc)


def point_kinematics(trajectory, material_points, nodes=None):
    """Global kinematics of material points carried by a rigid trajectory."""
    pts = np.atleast_2d(np.asarray(material_points, dtype=float))
    shape = (len(trajectory), len(pts), 3)
    rel = np.broadcast_to(pts - trajectory.com, shape)
    a_t = np.transpose(trajectory.rotation, (0, 2, 1))
    w = np.broadcast_to(trajectory.omega[:, None, :], shape)
    al = np.broadcast_to(trajectory.alpha[:, None, :], shape)

    def to_global(v):
        return np.einsum("tij,tkj->tki", a_t, v)

    pos = trajectory.origin[:, None, :] + to_global(np.broadcast_to(pts, shape))
    vel = trajectory.com_vel[:, None, :] + to_global(np.cross(w, rel))
    acc = trajectory.com_acc[:, None, :] + to_global(np.cross(al, rel) + np.cross(w, np.cross(w, rel)))
    nodes = list(range(len(pts))) if nodes is None else list(nodes)
    return PointKinematics(nodes, pts, pos, vel, acc, acc.copy())
