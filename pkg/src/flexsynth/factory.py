"""
Desk-scale structural models: lumped-mass truss grids, small point sets,
and a versioned JSON model file format for externally generated models.
"""
from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DimensionError, ModelError, ModelFileError
from .model import (ModalBasis, StructuralModel, check_symmetric, compute_modes,
                    normalize_basis)

log = logging.getLogger(__name__)

FORMAT_NAME = "flexsynth-model"
FORMAT_VERSION = 1
UNITS = "mm-Mg-s-N"

# rectangular plate with corner masses used as the validation case
PLATE_DIMS = (1000.0, 50.0, 10.0)
PLATE_TOTAL_MASS = 0.0093
PLATE_CORNER_MASS = 0.001
PLATE_I22 = 2112.7024
PLATE_CORNERS = {
    "P1": (-500.0, -25.0, 0.0), "P2": (500.0, -25.0, 0.0),
    "P3": (500.0, 25.0, 0.0), "P4": (-500.0, 25.0, 0.0),
    "P5": (-500.0, -25.0, 10.0), "P6": (500.0, -25.0, 10.0),
    "P7": (500.0, 25.0, 10.0), "P8": (-500.0, 25.0, 10.0),
}


@dataclass
class FactoryRecipe:
    """Parameters for one of the built-in model generators.

    ``kind`` is ``"lumped-grid"``, ``"point-set"`` or ``"dumbbell"``.
    """

    kind: str = "lumped-grid"
    dims: tuple = PLATE_DIMS
    counts: tuple = (11, 3, 2)
    distributed_mass: float = PLATE_TOTAL_MASS - 8 * PLATE_CORNER_MASS
    spring_ea: float = 9.32e5
    point_masses: list = field(default_factory=list)
    coords: list = field(default_factory=list)
    masses: list = field(default_factory=list)
    springs: list = field(default_factory=list)
    labels: dict = field(default_factory=dict)
    name: str = ""

    def validate(self):
        if self.kind == "lumped-grid":
            if len(self.counts) != 3 or min(self.counts) < 2:
                raise ModelError("lumped grid needs at least 2 nodes per direction")
            if min(self.dims) <= 0:
                raise ModelError("grid dimensions must be positive")
            if self.distributed_mass <= 0 or self.spring_ea <= 0:
                raise ModelError("grid mass and spring rigidity must be positive")
        elif self.kind in ("point-set", "dumbbell"):
            if len(self.coords) != len(self.masses) or not self.coords:
                raise ModelError("point set needs one mass per coordinate")
            if min(self.masses) <= 0:
                raise ModelError("lumped masses must be positive")
            for i, j, k in self.springs:
                if k <= 0 or i == j:
                    raise ModelError(f"invalid spring ({i}, {j}, {k})")
        else:
            raise ModelError(f"unknown recipe kind {self.kind!r}")
        for _, m in self.point_masses:
            if m <= 0:
                raise ModelError("attached point masses must be positive")


def axial_spring_block(xi, xj, k):
    """6x6 stiffness of an extensional spring between two points."""
    d = np.asarray(xj, dtype=float) - np.asarray(xi, dtype=float)
    length = np.linalg.norm(d)
    if length == 0.0:
        raise ModelError("spring joins coincident nodes")
    dd = np.outer(d, d) / length**2
    return k * np.block([[dd, -dd], [-dd, dd]])


def assemble_springs(coords, springs):
    n = 3 * len(coords)
    kmat = np.zeros((n, n))
    for i, j, k in springs:
        dofs = np.r_[3 * i:3 * i + 3, 3 * j:3 * j + 3]
        kmat[np.ix_(dofs, dofs)] += axial_spring_block(coords[i], coords[j], k)
    return kmat


def _null_dim(kmat, mass):
    d = 1.0 / np.sqrt(np.diag(mass))
    eig = np.linalg.eigvalsh(kmat * d[:, None] * d[None, :])
    # rigid modes sit at rounding level; slender grids have genuine modes near 1e-9
    return int(np.sum(eig <= 1e-12 * max(eig[-1], 1e-300)))


def _resolve_label(ref, labels):
    if isinstance(ref, str):
        if ref not in labels:
            raise ModelError(f"unknown node label {ref!r}")
        return labels[ref]
    return int(ref)


def _finish(coords, masses, springs, labels, point_masses, name, require_free=True):
    coords = np.asarray(coords, dtype=float)
    masses = np.asarray(masses, dtype=float).copy()
    for ref, m in point_masses:
        masses[_resolve_label(ref, labels)] += m
    mass = np.diag(np.repeat(masses, 3))
    kmat = assemble_springs(coords, springs)
    if require_free:
        nd = _null_dim(kmat, mass)
        if nd != 6:
            raise ModelError(
                f"stiffness null space has dimension {nd}, expected 6 for a free body "
                "(disconnected or under-braced spring graph)")
    return StructuralModel(coords, mass, kmat, node_labels=labels, name=name)


def grid_coords(dims, counts):
    l1, l2, l3 = dims
    xs = np.linspace(-l1 / 2, l1 / 2, counts[0])
    ys = np.linspace(-l2 / 2, l2 / 2, counts[1])
    zs = np.linspace(0.0, l3, counts[2])
    return np.array([(x, y, z) for x in xs for y in ys for z in zs])


def make_lumped_grid(recipe):
    """Truss of lumped masses on a box grid.

    Every pair of corners of each grid cell is joined by an extensional
    spring of stiffness ``spring_ea / length`` (edges, face and body
    diagonals), which braces the grid into a free-free body with exactly six
    rigid modes.  ``distributed_mass`` is spread evenly over the nodes and
    ``point_masses`` are added on top.
    """
    recipe.validate()
    nx, ny, nz = recipe.counts
    coords = grid_coords(recipe.dims, recipe.counts)

    def idx(i, j, k):
        return (i * ny + j) * nz + k

    pairs = set()
    for i, j, k in itertools.product(range(nx - 1), range(ny - 1), range(nz - 1)):
        corners = [idx(i + a, j + b, k + c) for a in (0, 1) for b in (0, 1) for c in (0, 1)]
        pairs.update(itertools.combinations(sorted(corners), 2))
    springs = [(a, b, recipe.spring_ea / np.linalg.norm(coords[b] - coords[a]))
               for a, b in sorted(pairs)]
    labels = dict(recipe.labels)
    for name, point in PLATE_CORNERS.items():
        hit = np.flatnonzero(np.all(np.isclose(coords, point), axis=1))
        if len(hit) == 1 and name not in labels:
            labels[name] = int(hit[0])
    masses = np.full(len(coords), recipe.distributed_mass / len(coords))
    return _finish(coords, masses, springs, labels, recipe.point_masses,
                   recipe.name or "lumped-grid")


def make_point_set(recipe, require_free=True):
    recipe.validate()
    springs = [(int(i), int(j), float(k)) for i, j, k in recipe.springs]
    return _finish(recipe.coords, recipe.masses, springs, dict(recipe.labels),
                   recipe.point_masses, recipe.name or recipe.kind, require_free)


def plate_surrogate(spring_ea=9.32e5, counts=(11, 3, 2)):
    """Lumped surrogate of the 1000 x 50 x 10 mm aluminium plate.

    Calibration: the plate's own mass (0.0093 Mg total minus the eight
    0.001 Mg corner masses) is spread evenly over the grid nodes, and the
    corner masses sit on the grid corners P1..P8.  The node at the midpoint
    of P5-P8 is labelled ``LOAD``.  Total mass is exact; I22 lands within
    about 1% of 2112.7024 Mg mm^2 for the default 11 x 3 x 2 grid.
    """
    coords = grid_coords(PLATE_DIMS, counts)
    mid = np.flatnonzero(np.all(np.isclose(coords, (-500.0, 0.0, 10.0)), axis=1))
    labels = {"LOAD": int(mid[0])} if len(mid) == 1 else {}
    recipe = FactoryRecipe(
        kind="lumped-grid", dims=PLATE_DIMS, counts=tuple(counts),
        distributed_mass=PLATE_TOTAL_MASS - 8 * PLATE_CORNER_MASS,
        spring_ea=spring_ea,
        point_masses=[(name, PLATE_CORNER_MASS) for name in PLATE_CORNERS],
        labels=labels, name="plate-surrogate")
    return make_lumped_grid(recipe)


def triangle_body(masses=(1.0, 1.0, 1.0), side=100.0, k=1.0e7):
    """Three lumped masses on an equilateral triangle joined by stiff springs.

    A triangle of three points is rigid in 3-D once its sides are fixed, so
    the stiffness null space is exactly the six rigid modes.
    """
    h = side * np.sqrt(3.0) / 2.0
    coords = [(0.0, 0.0, 0.0), (side, 0.0, 0.0), (side / 2.0, h, 0.0)]
    recipe = FactoryRecipe(kind="dumbbell", coords=coords, masses=list(masses),
                           springs=[(0, 1, k), (1, 2, k), (0, 2, k)],
                           labels={"R": 0, "P": 1, "Q": 2}, name="triangle")
    return make_point_set(recipe)


def two_mass_axial(mass=1e-3, k=1.0, length=100.0):
    """Two masses joined by one spring along X1 (collinear; five rigid modes)."""
    recipe = FactoryRecipe(kind="point-set",
                           coords=[(0.0, 0.0, 0.0), (length, 0.0, 0.0)],
                           masses=[mass, mass], springs=[(0, 1, k)], name="two-mass")
    return make_point_set(recipe, require_free=False)


def mass_properties(model):
    """Total mass, centre of mass and inertia tensor about the centre of mass."""
    m = model.lumped_masses()
    total = float(m.sum())
    com = (m[:, None] * model.node_coords).sum(axis=0) / total
    r = model.node_coords - com
    r2 = np.einsum("ij,ij->i", r, r)
    inertia = np.einsum("i,jk->jk", m * r2, np.eye(3)) - np.einsum("i,ij,ik->jk", m, r, r)
    return total, com, inertia


# --------------------------------------------------------------------------
# model file format


def _matrix_payload(mat, storage):
    mat = np.asarray(mat, dtype=float)
    if storage == "dense":
        return {"storage": "dense", "shape": list(mat.shape),
                "data": [float(v) for v in mat.ravel()]}
    if storage == "coo":
        i, j = np.nonzero(mat)
        return {"storage": "coo", "shape": list(mat.shape),
                "entries": [[int(a), int(b), float(mat[a, b])] for a, b in zip(i, j)]}
    raise ValueError(f"unknown storage {storage!r}")


def _read_matrix(payload, name, n):
    try:
        shape = tuple(int(v) for v in payload["shape"])
        storage = payload.get("storage", "dense")
        if shape != (n, n):
            raise DimensionError(
                f"{name}: shape {shape} does not match 3 x node count = {n}")
        if storage == "dense":
            data = np.asarray(payload["data"], dtype=float)
            if data.size != n * n:
                raise DimensionError(f"{name}: expected {n * n} values, got {data.size}")
            return data.reshape(n, n)
        if storage == "coo":
            mat = np.zeros((n, n))
            for entry in payload["entries"]:
                a, b, v = entry
                a, b = int(a), int(b)
                if not (0 <= a < n and 0 <= b < n):
                    raise DimensionError(f"{name}: entry ({a}, {b}) out of range")
                mat[a, b] += float(v)
            return mat
        raise ModelFileError(f"{name}: unknown storage {storage!r}")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DimensionError):
            raise
        raise ModelFileError(f"{name}: malformed matrix payload ({exc})") from exc


def model_to_document(model, basis=None, storage="dense"):
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "name": model.name,
        "units": UNITS,
        "n_nodes": model.n_nodes,
        "nodes": [[float(v) for v in row] for row in model.node_coords],
        "labels": dict(model.node_labels),
        "mass": _matrix_payload(model.mass_matrix, storage),
        "stiffness": _matrix_payload(model.stiffness_matrix, storage),
    }
    if model.damping_matrix is not None:
        doc["damping"] = _matrix_payload(model.damping_matrix, storage)
    if basis is not None:
        doc["modes"] = {
            "n_rigid": basis.n_rigid,
            "frequencies_hz": [float(v) for v in basis.frequencies],
            "shapes": {"shape": list(basis.shapes.shape),
                       "data": [float(v) for v in basis.shapes.ravel()]},
        }
    return doc


def dumps_model(model, basis=None, storage="dense"):
    return json.dumps(model_to_document(model, basis, storage), indent=1) + "\n"


def save_model(model, path, basis=None, storage="dense"):
    Path(path).write_text(dumps_model(model, basis, storage))


def loads_model(text):
    """Parse a model document; returns ``(model, basis_or_None)``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(
            f"parse error at line {exc.lineno}, column {exc.colno} "
            f"(offset {exc.pos}): {exc.msg}") from exc
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_NAME:
        raise ModelFileError(f"not a {FORMAT_NAME} document")
    if doc.get("version") != FORMAT_VERSION:
        raise ModelFileError(f"unsupported format version {doc.get('version')!r}")
    if doc.get("units", UNITS) != UNITS:
        raise ModelFileError(f"unsupported units {doc['units']!r}; expected {UNITS}")
    try:
        coords = np.asarray(doc["nodes"], dtype=float)
    except (KeyError, ValueError, TypeError) as exc:
        raise ModelFileError(f"nodes: {exc}") from exc
    if coords.ndim != 2 or coords.shape[1] != 3:
        raise ModelFileError("nodes must be a list of 3-vectors")
    if "n_nodes" in doc and int(doc["n_nodes"]) != len(coords):
        raise DimensionError(f"n_nodes = {doc['n_nodes']} but {len(coords)} nodes listed")
    n = 3 * len(coords)
    for key in ("mass", "stiffness"):
        if key not in doc:
            raise ModelFileError(f"missing {key} matrix")
    mats = {key: _read_matrix(doc[key], key, n)
            for key in ("mass", "stiffness", "damping") if key in doc}
    for key, mat in mats.items():
        check_symmetric(mat, key)
    model = StructuralModel(coords, mats["mass"], mats["stiffness"], mats.get("damping"),
                            node_labels=doc.get("labels", {}), name=doc.get("name", ""))
    basis = None
    if "modes" in doc:
        basis = _read_modes(doc["modes"], model)
    return model, basis


def _read_modes(payload, model):
    try:
        shapes = np.asarray(payload["shapes"]["data"], dtype=float)
        shapes = shapes.reshape(tuple(payload["shapes"]["shape"]))
        freqs = np.asarray(payload["frequencies_hz"], dtype=float)
        n_rigid = int(payload.get("n_rigid", 6))
    except (KeyError, ValueError, TypeError) as exc:
        raise ModelFileError(f"modes: malformed payload ({exc})") from exc
    if shapes.shape[0] != model.n_dofs:
        raise DimensionError("modes: shape rows do not match the model DOFs")
    basis = ModalBasis(shapes, freqs, n_rigid)
    gram = shapes.T @ model.mass_matrix @ shapes
    if np.max(np.abs(gram - np.eye(len(gram)))) <= 1e-8:
        return normalize_basis(model, basis)
    log.warning("stored modes are not mass-orthonormal; recomputing")
    return compute_modes(model, basis.n_modes - n_rigid)


def load_model(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ModelFileError(f"cannot read {path}: {exc}") from exc
    return loads_model(text)
