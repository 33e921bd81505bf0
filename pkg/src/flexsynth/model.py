"""
Discretized structural model, modal reduction and the modal state-space
operator.

Units are fixed to mm, Mg, s, N throughout.  Every node carries three
translational DOFs stored consecutively: node ``i`` owns DOFs
``3*i, 3*i+1, 3*i+2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import DegenerateGeometryError, DimensionError, ModelError, NumericalError

TWO_PI = 2.0 * np.pi


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class StructuralModel:
    """Free structure ``M x'' + C x' + K x = f`` over translational DOFs."""

    node_coords: np.ndarray
    mass_matrix: np.ndarray
    stiffness_matrix: np.ndarray
    damping_matrix: np.ndarray | None = None
    node_labels: dict = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        coords = _frozen(self.node_coords)
        if coords.ndim != 2 or coords.shape[1] != 3 or len(coords) == 0:
            raise DimensionError("node_coords must be a non-empty (n_nodes, 3) array")
        n = 3 * len(coords)
        mats = {"mass": self.mass_matrix, "stiffness": self.stiffness_matrix}
        if self.damping_matrix is not None:
            mats["damping"] = self.damping_matrix
        checked = {}
        for name, mat in mats.items():
            mat = _frozen(mat)
            if mat.shape != (n, n):
                raise DimensionError(
                    f"{name} matrix shape {mat.shape} does not match {n} DOFs")
            if not np.all(np.isfinite(mat)):
                raise ModelError(f"{name} matrix has non-finite entries")
            check_symmetric(mat, name)
            checked[name] = mat
        mass_eigs = np.linalg.eigvalsh(checked["mass"])
        if mass_eigs[0] <= 1e-12 * max(mass_eigs[-1], 0.0):
            raise ModelError("mass matrix is not positive definite")
        k = checked["stiffness"]
        k_eigs = np.linalg.eigvalsh(k)
        if k_eigs[0] < -1e-9 * max(abs(k_eigs[-1]), 1.0):
            raise ModelError("stiffness matrix is not positive semidefinite")
        labels = {str(key): int(v) for key, v in dict(self.node_labels).items()}
        for key, v in labels.items():
            if not 0 <= v < len(coords):
                raise ModelError(f"label {key!r} refers to missing node {v}")
        object.__setattr__(self, "node_coords", coords)
        object.__setattr__(self, "mass_matrix", checked["mass"])
        object.__setattr__(self, "stiffness_matrix", checked["stiffness"])
        object.__setattr__(self, "damping_matrix", checked.get("damping"))
        object.__setattr__(self, "node_labels", labels)

    @property
    def n_nodes(self):
        return len(self.node_coords)

    @property
    def n_dofs(self):
        return 3 * len(self.node_coords)

    def dofs(self, node):
        """DOF indices of one node."""
        if not 0 <= node < self.n_nodes:
            raise KeyError(f"node {node} not in model")
        return np.arange(3 * node, 3 * node + 3)

    def node_index(self, ref):
        """Resolve an integer index or a label such as ``"P1"``."""
        if isinstance(ref, str):
            if ref in self.node_labels:
                return self.node_labels[ref]
            try:
                ref = int(ref)
            except ValueError:
                raise KeyError(f"unknown node label {ref!r}") from None
        ref = int(ref)
        if not 0 <= ref < self.n_nodes:
            raise KeyError(f"node {ref} not in model")
        return ref

    def lumped_masses(self):
        """Translational mass per node from row sums of the mass matrix."""
        rows = self.mass_matrix.sum(axis=1).reshape(-1, 3)
        return rows.mean(axis=1)


def check_symmetric(mat, name="matrix", rtol=1e-9):
    scale = np.max(np.abs(mat))
    if scale == 0.0:
        return
    diff = np.abs(mat - mat.T)
    worst = np.unravel_index(np.argmax(diff), diff.shape)
    if diff[worst] > rtol * scale:
        i, j = (int(v) for v in worst)
        raise ModelError(
            f"{name} matrix is not symmetric: worst entry ({i}, {j}) "
            f"differs from ({j}, {i}) by {diff[worst]:.3e} "
            f"(relative {diff[worst] / scale:.3e})")


@dataclass(frozen=True)
class ModalBasis:
    """Mass-normalized mode shapes with the rigid-body block first."""

    shapes: np.ndarray
    frequencies: np.ndarray
    n_rigid: int = 6
    mass_normalized: bool = True

    def __post_init__(self):
        shapes = _frozen(self.shapes)
        freqs = _frozen(self.frequencies)
        if shapes.ndim != 2 or freqs.shape != (shapes.shape[1],):
            raise DimensionError("frequencies must have one entry per mode shape")
        if not 0 <= self.n_rigid <= min(6, shapes.shape[1]):
            raise DimensionError("n_rigid out of range")
        object.__setattr__(self, "shapes", shapes)
        object.__setattr__(self, "frequencies", freqs)

    @property
    def n_modes(self):
        return self.shapes.shape[1]

    @property
    def rigid_shapes(self):
        return self.shapes[:, :self.n_rigid]

    @property
    def omegas(self):
        return TWO_PI * self.frequencies


def _center_of_mass(model):
    m = model.lumped_masses()
    return (m[:, None] * model.node_coords).sum(axis=0) / m.sum()


def _rigid_fields(model):
    """Unnormalized translation and rotation-about-CoM fields (n, 6)."""
    rel = model.node_coords - _center_of_mass(model)
    n = model.n_dofs
    fields = np.zeros((n, 6))
    for j in range(3):
        fields[j::3, j] = 1.0
        e = np.zeros(3)
        e[j] = 1.0
        fields[:, 3 + j] = np.cross(e, rel).ravel()
    return fields


def _mass_gram_schmidt(vectors, mass, drop_tol=None):
    """Gram-Schmidt in the mass inner product, optionally dropping null columns."""
    out = []
    for v in vectors.T:
        w = v.copy()
        # two passes keep the result orthogonal to round-off
        for _ in range(2):
            for u in out:
                w -= (u @ mass @ w) * u
        norm2 = w @ mass @ w
        ref = v @ mass @ v
        if drop_tol is not None and (ref == 0.0 or norm2 <= drop_tol * ref):
            continue
        if norm2 <= 0.0:
            raise DegenerateGeometryError("rigid-mode fields are rank deficient")
        out.append(w / np.sqrt(norm2))
    return np.column_stack(out) if out else np.zeros((vectors.shape[0], 0))


def rigid_modes_geometric(model):
    """Six mass-orthonormal rigid modes: translations, then rotations about the CoM.

    Raises ``DegenerateGeometryError`` when the nodes are collinear (the
    rotation about the line is not representable by translational DOFs).
    """
    coords = model.node_coords
    rel = coords - coords.mean(axis=0)
    if len(coords) < 3 or np.linalg.matrix_rank(rel, tol=1e-9 * max(np.abs(rel).max(), 1.0)) < 2:
        raise DegenerateGeometryError("rigid modes need at least 3 non-collinear nodes")
    psi = _mass_gram_schmidt(_rigid_fields(model), model.mass_matrix, drop_tol=1e-20)
    if psi.shape[1] != 6:
        raise DegenerateGeometryError("rigid-mode fields are rank deficient")
    return psi


def compute_modes(model, n_flex):
    """Geometric rigid modes followed by the ``n_flex`` lowest flexible modes.

    The flexible modes solve ``K phi = w^2 M phi`` (Cholesky reduction of the
    pencil), are re-orthogonalized against the rigid block in the mass inner
    product and mass-normalized.  Degenerate geometries (one node, collinear
    nodes) keep only the independent rigid fields.
    """
    if n_flex < 0:
        raise DimensionError("n_flex must be non-negative")
    mass = model.mass_matrix
    rigid = _mass_gram_schmidt(_rigid_fields(model), mass, drop_tol=1e-20)
    n_rigid = rigid.shape[1]
    if n_rigid + n_flex > model.n_dofs:
        raise DimensionError(
            f"{n_rigid} rigid + {n_flex} flexible modes exceed {model.n_dofs} DOFs")
    if n_flex == 0:
        return ModalBasis(rigid, np.zeros(n_rigid), n_rigid=n_rigid)
    try:
        lam, vecs = linalg.eigh(model.stiffness_matrix, mass)
    except (linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"generalized eigen-solve failed: {exc}") from exc
    lam = np.clip(lam, 0.0, None)
    freqs = np.sqrt(lam) / TWO_PI
    zero_tol = 1e-6 * freqs[-1] if freqs[-1] > 0 else 0.0
    flex_idx = np.flatnonzero(freqs > zero_tol)
    if len(flex_idx) < n_flex:
        raise DimensionError(
            f"only {len(flex_idx)} flexible modes available, {n_flex} requested")
    flex_idx = flex_idx[:n_flex]
    flex = vecs[:, flex_idx].copy()
    flex -= rigid @ (rigid.T @ mass @ flex)
    flex /= np.sqrt(np.einsum("ij,ij->j", flex, mass @ flex))
    shapes = np.hstack([rigid, flex])
    return ModalBasis(shapes, np.concatenate([np.zeros(n_rigid), freqs[flex_idx]]),
                      n_rigid=n_rigid)


def normalize_basis(model, basis):
    """Return ``basis`` rescaled so every column has unit modal mass."""
    shapes = np.array(basis.shapes, dtype=float)
    mm = np.einsum("ij,ij->j", shapes, model.mass_matrix @ shapes)
    if np.any(mm <= 0.0):
        raise ModelError("mode shape with non-positive modal mass")
    return ModalBasis(shapes / np.sqrt(mm), basis.frequencies, basis.n_rigid)


@dataclass(frozen=True)
class ModalState:
    """Modal coordinates ``q`` and rates ``q'``; ``packed`` is ``[q; q']``."""

    packed: np.ndarray

    def __post_init__(self):
        p = _frozen(self.packed)
        if p.ndim != 1 or len(p) % 2:
            raise DimensionError("packed modal state must be an even-length vector")
        object.__setattr__(self, "packed", p)

    @classmethod
    def from_parts(cls, coords, rates):
        return cls(np.concatenate([np.ravel(coords), np.ravel(rates)]))

    @classmethod
    def zeros(cls, n_modes):
        return cls(np.zeros(2 * n_modes))

    @property
    def n_modes(self):
        return len(self.packed) // 2

    @property
    def coords(self):
        return self.packed[:self.n_modes]

    @property
    def rates(self):
        return self.packed[self.n_modes:]


@dataclass(frozen=True, eq=False)
class ModalSystem:
    modal_mass: np.ndarray
    modal_stiffness: np.ndarray
    modal_damping: np.ndarray
    state_matrix: np.ndarray
    basis: ModalBasis
    model: StructuralModel
    projector: np.ndarray  # M_q^-1 Psi^T M_x

    @property
    def n_modes(self):
        return self.basis.n_modes

    @property
    def n_rigid(self):
        return self.basis.n_rigid


def state_matrix(mq, kq, cq):
    m = len(mq)
    inv_k = np.linalg.solve(mq, kq)
    inv_c = np.linalg.solve(mq, cq)
    h = np.zeros((2 * m, 2 * m))
    h[:m, m:] = np.eye(m)
    h[m:, :m] = -inv_k
    h[m:, m:] = -inv_c
    return h


def build_modal_system(model, basis, damping_ratios=0.0):
    """Project the model on ``basis`` and assemble the state matrix.

    ``damping_ratios`` is a scalar or one ratio per mode; it is used only
    when the model has no physical damping matrix.
    """
    psi = basis.shapes
    if psi.shape[0] != model.n_dofs:
        raise DimensionError(
            f"basis has {psi.shape[0]} rows, model has {model.n_dofs} DOFs")
    m = basis.n_modes
    zeta = np.broadcast_to(np.asarray(damping_ratios, dtype=float), (m,)).copy() \
        if np.ndim(damping_ratios) == 0 else np.asarray(damping_ratios, dtype=float)
    if zeta.shape != (m,):
        raise DimensionError(f"expected {m} damping ratios, got {zeta.shape[0]}")
    if np.any(zeta < 0):
        raise ValueError("damping ratios must be non-negative")
    mx = model.mass_matrix
    mq = psi.T @ mx @ psi
    kq = psi.T @ model.stiffness_matrix @ psi
    if model.damping_matrix is not None:
        cq = psi.T @ model.damping_matrix @ psi
    else:
        # diagonal modal damping 2*zeta*w*m_i; zero on rigid modes since w = 0
        cq = np.diag(2.0 * zeta * basis.omegas * np.diag(mq))
    try:
        lu = linalg.lu_factor(mq, check_finite=True)
        if np.min(np.abs(np.diag(lu[0]))) <= 1e-14 * np.max(np.abs(mq)):
            raise linalg.LinAlgError("singular")
    except (linalg.LinAlgError, ValueError) as exc:
        raise NumericalError("modal mass matrix is singular") from exc
    projector = linalg.lu_solve(lu, psi.T @ mx)
    return ModalSystem(_frozen(mq), _frozen(kq), _frozen(cq),
                       _frozen(state_matrix(mq, kq, cq)), basis,
                       model, _frozen(projector))


def modal_expand(basis, state):
    """Physical displacement and velocity ``(Psi q, Psi q')``."""
    if state.n_modes != basis.n_modes:
        raise DimensionError("modal state and basis sizes differ")
    return basis.shapes @ state.coords, basis.shapes @ state.rates


def inverse_modal_expand(system, x, x_dot):
    """Mass-weighted projection ``q = M_q^-1 Psi^T M_x x`` (and for rates)."""
    x = np.asarray(x, dtype=float)
    x_dot = np.asarray(x_dot, dtype=float)
    n = system.projector.shape[1]
    if x.shape != (n,) or x_dot.shape != (n,):
        raise DimensionError(f"physical vectors must have length {n}")
    return ModalState.from_parts(system.projector @ x, system.projector @ x_dot)


def project_force(basis, f_x):
    f_x = np.asarray(f_x, dtype=float)
    if f_x.shape != (basis.shapes.shape[0],):
        raise DimensionError("force vector length does not match basis")
    return basis.shapes.T @ f_x


def modal_state_derivative(system, eta, f_q):
    """``H eta + [0; M_q^-1 f_q]``."""
    eta = np.asarray(eta, dtype=float)
    m = system.n_modes
    if eta.shape != (2 * m,) or np.shape(f_q) != (m,):
        raise DimensionError("modal state or force has wrong length")
    out = system.state_matrix @ eta
    out[m:] += np.linalg.solve(system.modal_mass, f_q)
    return out
