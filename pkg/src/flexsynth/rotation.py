"""
Rotation kinematics from relative linear motion of three body points.

Conventions
-----------
``hat`` builds the skew matrix with the index placement

    hat(v) = [[ 0,   v3, -v2],
              [-v3,  0,   v1],
              [ v2, -v1,  0 ]]

which is the transpose of the usual cross-product matrix, so
``hat(a) @ b == np.cross(b, a)``.  ``vee`` is its inverse.  A log-rotation
``M = hat(theta * axis)`` exponentiates to the coordinate transformation
``A`` taking global components to body components (``v_body = A @ v``).
With that convention ``dA/dt = hat(omega_body) @ A`` and the dexp-inverse
below must be fed body-frame angular velocity components.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometryError, RebaseRequired

_SMALL_ANGLE = 1e-6
_SMALL_ANGLE_DEXP = 1e-3
_MIN_CROSS = 1e-6
_SINGULAR_MARGIN = 1e-3


def hat(v):
    v = np.asarray(v, dtype=float)
    return np.array([[0.0, v[2], -v[1]],
                     [-v[2], 0.0, v[0]],
                     [v[1], -v[0], 0.0]])


def vee(m):
    m = np.asarray(m, dtype=float)
    return np.array([m[1, 2], m[2, 0], m[0, 1]])


@dataclass(frozen=True)
class LogRotation:
    """Rotation vector stored in matrix form ``M = theta * M_hat``."""

    m_matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.m_matrix, dtype=float)
        if m.shape != (3, 3):
            raise ValueError("log-rotation must be a 3x3 matrix")
        if np.max(np.abs(m + m.T)) > 1e-12 * max(1.0, np.max(np.abs(m))):
            raise ValueError("log-rotation matrix is not antisymmetric")
        m.setflags(write=False)
        object.__setattr__(self, "m_matrix", m)

    @classmethod
    def from_vector(cls, rotvec):
        return cls(hat(rotvec))

    @classmethod
    def zero(cls):
        return cls(np.zeros((3, 3)))

    @property
    def vector(self):
        return vee(self.m_matrix)

    @property
    def theta(self):
        return float(np.linalg.norm(self.vector))

    @property
    def axis(self):
        th = self.theta
        if th == 0.0:
            return None
        return self.vector / th


def _as_matrix(log_rot):
    if isinstance(log_rot, LogRotation):
        return log_rot.m_matrix
    return np.asarray(log_rot, dtype=float)


def rotation_exp(log_rot):
    """Closed-form exponential ``I + sin(t) M_hat + (1 - cos(t)) M_hat^2``.

    The coefficients are applied to ``M = t * M_hat`` directly, with Taylor
    series below a small angle to avoid cancellation.
    """
    m = _as_matrix(log_rot)
    th = float(np.linalg.norm(vee(m)))
    if th < _SMALL_ANGLE:
        t2 = th * th
        a = 1.0 - t2 / 6.0
        b = 0.5 - t2 / 24.0
    else:
        a = np.sin(th) / th
        b = (1.0 - np.cos(th)) / (th * th)
    return np.eye(3) + a * m + b * (m @ m)


def _ad(m, x):
    # ad_M X = M X - X M  (equals -(X M - M X) under the reversed bracket)
    return m @ x - x @ m


def dexp_inv_rate(log_rot, omega):
    """Rate of the log-rotation driven by angular velocity ``omega``.

    Parameters
    ----------
    log_rot : LogRotation or (3, 3) array
        Current log-rotation ``M``.
    omega : (3,) array
        Angular velocity components; ``Omega = hat(omega)``.

    Returns
    -------
    (3, 3) antisymmetric array ``dM/dt``.
    """
    m = _as_matrix(log_rot)
    big_omega = hat(omega)
    th = float(np.linalg.norm(vee(m)))
    if th == 0.0:
        return big_omega
    if th >= 2.0 * np.pi - _SINGULAR_MARGIN:
        raise RebaseRequired(f"log-rotation angle {th:.6f} rad too close to 2*pi")
    # written on M = th * M_hat: (th/2) ad_Mhat = ad_M / 2 and
    # (th cot(th/2)/2 - 1) ad_Mhat^2 = -c(th) ad_M^2
    if th < _SMALL_ANGLE_DEXP:
        t2 = th * th
        c = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0
    else:
        c = (1.0 - 0.5 * th / np.tan(0.5 * th)) / (th * th)
    ad1 = _ad(m, big_omega)
    ad2 = _ad(m, ad1)
    return big_omega - 0.5 * ad1 + c * ad2


def rebase(log_rot, base):
    """Fold ``exp(M)`` into the base rotation and zero ``M``.

    The total orientation ``rotation_exp(M) @ base`` is unchanged.
    """
    new_base = rotation_exp(log_rot) @ np.asarray(base, dtype=float)
    return LogRotation.zero(), new_base


@dataclass(frozen=True)
class MarkerTriad:
    """Reference point R and two further points P, Q on the body."""

    ref_node: int
    p_node: int
    q_node: int
    p_vec: np.ndarray
    q_vec: np.ndarray

    def __post_init__(self):
        p = np.array(self.p_vec, dtype=float)
        q = np.array(self.q_vec, dtype=float)
        if len({self.ref_node, self.p_node, self.q_node}) != 3:
            raise DegenerateGeometryError("marker nodes must be distinct")
        if np.linalg.norm(p) == 0.0 or np.linalg.norm(q) == 0.0:
            raise DegenerateGeometryError("marker offsets must be nonzero")
        e1 = p / np.linalg.norm(p)
        e2 = q / np.linalg.norm(q)
        if np.linalg.norm(np.cross(e1, e2)) <= _MIN_CROSS:
            raise DegenerateGeometryError("marker points are collinear")
        p.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "p_vec", p)
        object.__setattr__(self, "q_vec", q)

    @classmethod
    def from_coords(cls, coords, ref_node, p_node, q_node):
        coords = np.asarray(coords, dtype=float)
        n = len(coords)
        for node in (ref_node, p_node, q_node):
            if not 0 <= node < n:
                raise DegenerateGeometryError(f"marker node {node} not in model")
        return cls(int(ref_node), int(p_node), int(q_node),
                   coords[p_node] - coords[ref_node],
                   coords[q_node] - coords[ref_node])

    @property
    def p_len(self):
        return float(np.linalg.norm(self.p_vec))

    @property
    def q_len(self):
        return float(np.linalg.norm(self.q_vec))


@dataclass(frozen=True)
class MarkerBasis:
    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray
    b: np.ndarray
    cross_norm: float


def basis_from_markers(triad):
    e1 = triad.p_vec / triad.p_len
    e2 = triad.q_vec / triad.q_len
    n = np.cross(e1, e2)
    s = float(np.linalg.norm(n))
    if s <= _MIN_CROSS:
        raise DegenerateGeometryError("marker points are collinear")
    e3 = n / s
    return MarkerBasis(e1, e2, e3, np.vstack([e1, e2, e3]), s)


def angular_velocity_g(triad, v_pr, v_qr, basis=None):
    """Body-frame angular velocity from the relative velocities of P and Q."""
    bs = basis or basis_from_markers(triad)
    ps = triad.p_len * bs.cross_norm
    qs = triad.q_len * bs.cross_norm
    w3 = np.dot(v_pr, bs.e2 - bs.e1 * np.dot(bs.e1, bs.e2)) / ps
    w2 = -np.dot(v_pr, bs.e3) / ps
    w1 = np.dot(v_qr, bs.e3) / qs
    return bs.b.T @ np.array([w1, w2, w3])


def angular_acceleration_h(triad, v_pr, v_qr, a_pr, a_qr, omega, basis=None):
    """Body-frame angular acceleration from relative velocities/accelerations."""
    bs = basis or basis_from_markers(triad)
    v_pr = np.asarray(v_pr, dtype=float)
    v_qr = np.asarray(v_qr, dtype=float)
    wxv_p = np.cross(omega, v_pr)
    wxv_q = np.cross(omega, v_qr)
    a3 = np.dot(np.cross(bs.e3, wxv_p) - np.cross(bs.e3, a_pr), bs.e1) / triad.p_len
    a2 = np.dot(wxv_p - a_pr, bs.e3) / (triad.p_len * bs.cross_norm)
    a1 = np.dot(a_qr - wxv_q, bs.e3) / (triad.q_len * bs.cross_norm)
    return bs.b.T @ np.array([a1, a2, a3])


def relative_velocity_rate(v_rel, a_rel, omega):
    """Body-frame rate of a relative velocity: ``a - omega x v``."""
    v = np.asarray(v_rel, dtype=float)
    w = np.asarray(omega, dtype=float)
    return np.asarray(a_rel, dtype=float) - np.array([
        w[1] * v[2] - w[2] * v[1],
        w[2] * v[0] - w[0] * v[2],
        w[0] * v[1] - w[1] * v[0],
    ])
