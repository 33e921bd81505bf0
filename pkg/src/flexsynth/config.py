"""
Simulation configuration documents (YAML).

A configuration names the model (a built-in recipe or a model file), the
time grid, modal truncation and damping, the marker triad, the loads, the
initial conditions and what to write out.  See
``examples/plate_surrogate/config.yaml`` for a complete document.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from . import factory
from .errors import ConfigError
from .loads import BODY, GLOBAL, LoadEntry, LoadSpec

RECIPES = {
    "plate_surrogate": factory.plate_surrogate,
    "triangle_body": factory.triangle_body,
    "two_mass_axial": factory.two_mass_axial,
}

OUTPUT_GROUPS = ("frame", "nodes", "modal")

_TOP_KEYS = {"model", "dt", "t_end", "n_flex_modes", "damping_ratios", "markers", "loads",
             "initial", "outputs", "seed", "rigid", "compare"}


@dataclass(frozen=True)
class ModelSource:
    """Either ``recipe`` (with keyword ``params``) or ``path`` to a model file."""

    recipe: str | None = None
    params: dict = field(default_factory=dict)
    path: str | None = None

    def build(self, base_dir=None):
        if self.path is not None:
            p = Path(self.path)
            if base_dir is not None and not p.is_absolute():
                p = Path(base_dir) / p
            model, _ = factory.load_model(p)
            return model
        try:
            maker = RECIPES[self.recipe]
        except KeyError:
            raise ConfigError(f"model.recipe: unknown recipe {self.recipe!r} "
                              f"(choose from {', '.join(sorted(RECIPES))})") from None
        try:
            return maker(**self.params)
        except TypeError as exc:
            raise ConfigError(f"model.params: {exc}") from None


@dataclass(frozen=True)
class InitialConditions:
    """Initial state: rigid velocity and spin, nodal fields, or modal values.

    All parts are added together.  ``velocity`` and ``omega`` describe a
    rigid motion about the centre of mass; ``modal_coords`` and
    ``modal_rates`` map mode index to amplitude.
    """

    velocity: tuple = (0.0, 0.0, 0.0)
    omega: tuple = (0.0, 0.0, 0.0)
    x0: tuple | None = None
    x_dot0: tuple | None = None
    modal_coords: dict = field(default_factory=dict)
    modal_rates: dict = field(default_factory=dict)

    def physical(self, model, basis):
        n = model.n_dofs
        x = np.zeros(n) if self.x0 is None else np.array(self.x0, dtype=float)
        xd = np.zeros(n) if self.x_dot0 is None else np.array(self.x_dot0, dtype=float)
        if x.shape != (n,):
            raise ConfigError(f"initial.x0: expected {n} values, got {x.size}")
        if xd.shape != (n,):
            raise ConfigError(f"initial.x_dot0: expected {n} values, got {xd.size}")
        total, com, _ = factory.mass_properties(model)
        rel = model.node_coords - com
        xd = xd + (np.asarray(self.velocity, dtype=float) + np.cross(self.omega, rel)).ravel()
        shapes = np.asarray(basis.shapes)
        for key, target, amps in (("modal_coords", x, self.modal_coords),
                                  ("modal_rates", xd, self.modal_rates)):
            for idx, a in amps.items():
                if not 0 <= idx < basis.n_modes:
                    raise ConfigError(f"initial.{key}: mode {idx} outside 0..{basis.n_modes - 1}")
                target += a * shapes[:, idx]
        return x, xd


@dataclass(frozen=True)
class RigidSpec:
    """Rigid-body properties given explicitly (otherwise derived from the model)."""

    mass: float
    inertia: tuple
    com: tuple = (0.0, 0.0, 0.0)

    def props(self):
        from .rigid import RigidBodyProps
        inertia = np.asarray(self.inertia, dtype=float)
        if inertia.shape == (3,):
            return RigidBodyProps(self.mass, inertia, self.com)
        return RigidBodyProps.from_inertia_tensor(self.mass, inertia, self.com)


@dataclass(frozen=True)
class SimulationConfig:
    dt: float
    t_end: float
    markers: tuple
    model: ModelSource | None = None
    n_flex_modes: int = 10
    damping_ratios: object = 0.0
    loads: LoadSpec = field(default_factory=LoadSpec)
    initial: InitialConditions = field(default_factory=InitialConditions)
    output_nodes: tuple = ()
    output_groups: tuple = OUTPUT_GROUPS
    seed: int = 0
    rigid: RigidSpec | None = None
    compare: dict = field(default_factory=dict)
    base_dir: str | None = None

    def __post_init__(self):
        if not np.isfinite(self.dt) or self.dt <= 0:
            raise ConfigError(f"dt: must be > 0, got {self.dt}")
        if not np.isfinite(self.t_end) or self.t_end < 0:
            raise ConfigError(f"t_end: must be >= 0, got {self.t_end}")
        if len(self.markers) != 3:
            raise ConfigError("markers: need exactly three nodes (R, P, Q)")
        if len(set(self.markers)) != 3:
            raise ConfigError(f"markers: nodes must be distinct, got {list(self.markers)}")
        if self.n_flex_modes < 0:
            raise ConfigError("n_flex_modes: must be >= 0")
        z = np.atleast_1d(np.asarray(self.damping_ratios, dtype=float))
        if np.any(z < 0) or not np.all(np.isfinite(z)):
            raise ConfigError("damping_ratios: must be finite and >= 0")
        bad = set(self.output_groups) - set(OUTPUT_GROUPS)
        if bad:
            raise ConfigError(f"outputs.groups: unknown group(s) {sorted(bad)}")

    def with_overrides(self, dt=None, t_end=None):
        return replace(self, dt=self.dt if dt is None else float(dt),
                       t_end=self.t_end if t_end is None else float(t_end))

    def initial_conditions(self, model, basis):
        return self.initial.physical(model, basis)

    def validate_against(self, model):
        """Check node references and marker geometry against a model."""
        from .rotation import MarkerTriad
        nodes = []
        for ref in self.markers:
            try:
                nodes.append(model.node_index(ref))
            except KeyError:
                raise ConfigError(f"markers: node {ref!r} not in model") from None
        if len(set(nodes)) != 3:
            raise ConfigError(f"markers: nodes must be distinct, got {nodes}")
        try:
            MarkerTriad.from_coords(model.node_coords, *nodes)
        except ValueError as exc:
            raise ConfigError(f"markers: {exc}") from None
        self.loads.resolve(model)
        for ref in self.output_nodes:
            try:
                model.node_index(ref)
            except KeyError:
                raise ConfigError(f"outputs.nodes: node {ref!r} not in model") from None
        z = np.atleast_1d(np.asarray(self.damping_ratios, dtype=float))
        n_modes = 6 + self.n_flex_modes
        if z.size not in (1, n_modes, self.n_flex_modes):
            raise ConfigError(f"damping_ratios: give 1, {self.n_flex_modes} or {n_modes} values")

    def damping_vector(self, n_rigid, n_modes):
        z = np.atleast_1d(np.asarray(self.damping_ratios, dtype=float))
        if z.size == 1:
            return np.full(n_modes, z[0])
        if z.size == n_modes - n_rigid:
            return np.concatenate([np.zeros(n_rigid), z])
        if z.size == n_modes:
            return z
        raise ConfigError(f"damping_ratios: give 1, {n_modes - n_rigid} or {n_modes} values")


def _need(doc, key, where=""):
    if key not in doc:
        raise ConfigError(f"{where}{key}: required field missing")
    return doc[key]


def _vector(value, name, size=3):
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: expected {size} numbers") from None
    if arr.shape != (size,):
        raise ConfigError(f"{name}: expected {size} numbers")
    return tuple(float(v) for v in arr)


def _node_ref(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise ConfigError(f"{name}: node must be an index or a label")
    return value


def _parse_load(doc, i):
    where = f"loads[{i}]."
    if not isinstance(doc, dict):
        raise ConfigError(f"loads[{i}]: expected a mapping")
    node = _node_ref(_need(doc, "node", where), where + "node")
    direction = _vector(_need(doc, "direction", where), where + "direction")
    frame = doc.get("frame", GLOBAL)
    if frame not in (GLOBAL, BODY):
        raise ConfigError(f"{where}frame: must be 'global' or 'body'")
    if "magnitude" in doc:
        mag = float(doc["magnitude"])
        times, values = (0.0, 1.0), (mag, mag)
    else:
        times = doc.get("times")
        values = doc.get("values")
        if times is None or values is None:
            raise ConfigError(f"{where}times/values: give breakpoints or a magnitude")
    try:
        return LoadEntry(node, direction, tuple(times), tuple(values), frame)
    except ConfigError as exc:
        raise ConfigError(f"{where[:-1]}: {exc}") from None


def _parse_modal_map(doc, name):
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ConfigError(f"{name}: expected a mapping of mode index to amplitude")
    try:
        return {int(k): float(v) for k, v in doc.items()}
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: expected a mapping of mode index to amplitude") from None


def _parse_initial(doc):
    if doc is None:
        return InitialConditions()
    if not isinstance(doc, dict):
        raise ConfigError("initial: expected a mapping")
    unknown = set(doc) - {"velocity", "omega", "x0", "x_dot0", "modal_coords", "modal_rates"}
    if unknown:
        raise ConfigError(f"initial: unknown field(s) {sorted(unknown)}")
    return InitialConditions(
        velocity=_vector(doc.get("velocity", (0, 0, 0)), "initial.velocity"),
        omega=_vector(doc.get("omega", (0, 0, 0)), "initial.omega"),
        x0=None if doc.get("x0") is None else tuple(doc["x0"]),
        x_dot0=None if doc.get("x_dot0") is None else tuple(doc["x_dot0"]),
        modal_coords=_parse_modal_map(doc.get("modal_coords"), "initial.modal_coords"),
        modal_rates=_parse_modal_map(doc.get("modal_rates"), "initial.modal_rates"),
    )


def _parse_model(doc):
    if doc is None:
        return None
    if isinstance(doc, str):
        return ModelSource(path=doc)
    if not isinstance(doc, dict):
        raise ConfigError("model: expected a recipe mapping or a file path")
    if ("recipe" in doc) == ("path" in doc):
        raise ConfigError("model: give exactly one of recipe or path")
    params = doc.get("params") or {}
    if not isinstance(params, dict):
        raise ConfigError("model.params: expected a mapping")
    return ModelSource(recipe=doc.get("recipe"), params={k: _number(v) for k, v in params.items()},
                       path=doc.get("path"))


def _number(value):
    # YAML 1.1 reads exponents without a sign ("9.32e5") as strings
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            return value
    if isinstance(value, list):
        return [_number(v) for v in value]
    return value


def _parse_rigid(doc):
    if doc is None:
        return None
    if not isinstance(doc, dict):
        raise ConfigError("rigid: expected a mapping")
    mass = _need(doc, "mass", "rigid.")
    inertia = np.asarray(_need(doc, "inertia", "rigid."), dtype=float)
    if inertia.shape not in ((3,), (3, 3)):
        raise ConfigError("rigid.inertia: give 3 principal values or a 3x3 tensor")
    com = _vector(doc.get("com", (0, 0, 0)), "rigid.com")
    try:
        spec = RigidSpec(float(mass), inertia.tolist(), com)
        spec.props()
    except ConfigError as exc:
        raise ConfigError(f"rigid: {exc}") from None
    return spec


def config_from_dict(doc, base_dir=None):
    """Build and validate a ``SimulationConfig`` from a parsed document."""
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a mapping at the top level")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level field(s) {sorted(unknown)}")
    markers = _need(doc, "markers")
    if not isinstance(markers, (list, tuple)):
        raise ConfigError("markers: expected a list of three nodes")
    markers = tuple(_node_ref(m, "markers") for m in markers)
    loads = doc.get("loads") or []
    if not isinstance(loads, list):
        raise ConfigError("loads: expected a list")
    outputs = doc.get("outputs") or {}
    if not isinstance(outputs, dict):
        raise ConfigError("outputs: expected a mapping")
    damping = doc.get("damping_ratios", 0.0)
    try:
        dt = float(_need(doc, "dt"))
        t_end = float(_need(doc, "t_end"))
    except (TypeError, ValueError):
        raise ConfigError("dt/t_end: must be numbers") from None
    try:
        n_flex = int(doc.get("n_flex_modes", 10))
        seed = int(doc.get("seed", 0))
    except (TypeError, ValueError):
        raise ConfigError("n_flex_modes/seed: must be integers") from None
    return SimulationConfig(
        dt=dt, t_end=t_end, markers=markers,
        model=_parse_model(doc.get("model")),
        n_flex_modes=n_flex,
        damping_ratios=damping,
        loads=LoadSpec(tuple(_parse_load(e, i) for i, e in enumerate(loads))),
        initial=_parse_initial(doc.get("initial")),
        output_nodes=tuple(_node_ref(n, "outputs.nodes") for n in outputs.get("nodes", ())),
        output_groups=tuple(outputs.get("groups", OUTPUT_GROUPS)),
        seed=seed,
        rigid=_parse_rigid(doc.get("rigid")),
        compare=dict(doc.get("compare") or {}),
        base_dir=None if base_dir is None else str(base_dir),
    )


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from None
    return config_from_dict(doc, base_dir=path.parent)
