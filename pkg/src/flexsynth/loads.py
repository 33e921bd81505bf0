"""Point loads given as piecewise-linear time series."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

GLOBAL = "global"
BODY = "body"


@dataclass(frozen=True)
class LoadEntry:
    """Force of magnitude ``values(t)`` along a unit ``direction`` at one node.

    ``frame`` is ``"global"`` (direction fixed in the analysis frame) or
    ``"body"`` (follower load fixed to the body).
    """

    node: int | str
    direction: tuple
    times: tuple
    values: tuple
    frame: str = GLOBAL

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        if d.shape != (3,) or not np.all(np.isfinite(d)) or np.linalg.norm(d) == 0.0:
            raise ConfigError("load direction must be a nonzero 3-vector")
        t = tuple(float(v) for v in self.times)
        v = tuple(float(x) for x in self.values)
        if len(t) == 0 or len(t) != len(v):
            raise ConfigError("load needs matching (time, value) breakpoints")
        if any(b <= a for a, b in zip(t, t[1:])):
            raise ConfigError("load breakpoint times must be strictly increasing")
        if self.frame not in (GLOBAL, BODY):
            raise ConfigError(f"load frame must be 'global' or 'body', not {self.frame!r}")
        object.__setattr__(self, "direction", tuple(d / np.linalg.norm(d)))
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, node, direction, magnitude, frame=GLOBAL):
        """Step load switched on at t = 0 and held."""
        return cls(node, tuple(direction), (0.0, 1.0), (magnitude, magnitude), frame)

    def magnitude(self, t):
        # held constant outside the breakpoints
        return float(np.interp(t, self.times, self.values))


@dataclass(frozen=True)
class LoadSpec:
    entries: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))

    def resolve(self, model):
        """Replace node labels by indices and check that the nodes exist."""
        out = []
        for e in self.entries:
            try:
                node = model.node_index(e.node)
            except KeyError as exc:
                raise ConfigError(f"load node {e.node!r}: {exc.args[0]}") from None
            out.append(LoadEntry(node, e.direction, e.times, e.values, e.frame))
        return LoadSpec(tuple(out))

    def nodal(self, t, n_nodes):
        """Per-node force arrays ``(global_part, body_part)``, each (n_nodes, 3)."""
        g = np.zeros((n_nodes, 3))
        b = np.zeros((n_nodes, 3))
        for e in self.entries:
            target = g if e.frame == GLOBAL else b
            target[e.node] += e.magnitude(t) * np.asarray(e.direction)
        return g, b

    def in_frame(self, t, rotation, n_nodes):
        """Nodal force vector in the frame whose orientation is ``rotation``."""
        g, b = self.nodal(t, n_nodes)
        return (g @ np.asarray(rotation).T + b).ravel()

    def resultant(self, t, rotation, coords, about):
        """Total force and moment about ``about``, in the frame of ``rotation``."""
        f = self.in_frame(t, rotation, len(coords)).reshape(-1, 3)
        return f.sum(axis=0), np.cross(coords - about, f).sum(axis=0)
