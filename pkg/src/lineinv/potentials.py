"""Compactly supported potentials and their discretisation.

Three concrete forms are supported: :class:`PiecewiseConstant`,
:class:`SampledGrid` (linear interpolation between equispaced samples) and
:class:`SquareWell` (``V = -epsilon`` on ``[0, 1]``). All are immutable.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import PotentialFormatError

DEFAULT_STEPS = 4096


def _frozen(a):
    a = np.array(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class NormReport:
    l2: float
    l1_weighted: float
    integral: float


@dataclass(frozen=True)
class Mesh:
    """Node grid for RK4 integration with one-sided potential values.

    ``vplus[i]``/``vminus[i]`` are the right/left limits of V at node ``i``;
    ``vmid[i]`` is V at the midpoint of step ``i``. Cell edges of the potential
    always fall on even node indices.
    """

    x: np.ndarray
    vplus: np.ndarray
    vminus: np.ndarray
    vmid: np.ndarray

    @property
    def a(self):
        return float(self.x[0])

    @property
    def b(self):
        return float(self.x[-1])

    @property
    def h(self):
        return np.diff(self.x)

    def rightward(self):
        """(h, vs, vm, ve) for integration from ``a`` to ``b``."""
        return self.h, self.vplus[:-1], self.vmid, self.vminus[1:]

    def leftward(self):
        """(h, vs, vm, ve) for integration from ``b`` to ``a``."""
        h = -self.h[::-1]
        return h, self.vminus[:0:-1], self.vmid[::-1], self.vplus[-2::-1]

    def max_abs_v(self):
        return float(max(np.abs(self.vplus).max(), np.abs(self.vminus).max(),
                         np.abs(self.vmid).max(initial=0.0)))

    @classmethod
    def from_nodes(cls, x, vplus, vminus):
        """Coarsen nodal data by two: odd nodes become step midpoints."""
        x = np.asarray(x, dtype=float)
        if (x.size - 1) % 2:
            raise ValueError("node count must be odd to coarsen")
        vp = np.asarray(vplus, dtype=float)
        vm = np.asarray(vminus, dtype=float)
        mid = 0.5 * (vp[1::2] + vm[1::2])
        return cls(x[::2].copy(), vp[::2].copy(), vm[::2].copy(), mid)


def _segment_nodes(edges, step):
    """Even-count uniform subdivision of every interval between ``edges``."""
    pieces = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        m = max(2, 2 * int(math.ceil((hi - lo) / (2.0 * step) - 1e-9)))
        pieces.append(np.linspace(lo, hi, m + 1)[:-1])
    pieces.append(np.array([edges[-1]]))
    return np.concatenate(pieces)


class Potential:
    """Common behaviour of the compactly supported forms."""

    form = None

    @property
    def support(self):
        raise NotImplementedError

    def edges(self):
        """Points where V may be non-smooth; mesh nodes are placed on them."""
        raise NotImplementedError

    def sides(self, x):
        """Return (right limit, left limit) of V at each ``x``."""
        raise NotImplementedError

    def __call__(self, x):
        return evaluate(self, x)

    def default_step(self):
        a, b = self.support
        return (b - a) / DEFAULT_STEPS

    def mesh(self, step=None):
        step = self.default_step() if step is None else float(step)
        if step <= 0:
            raise ValueError("step must be positive")
        x = _segment_nodes(self.edges(), step)
        vplus, vminus = self.sides(x)
        mid = 0.5 * (x[:-1] + x[1:])
        vmid, _ = self.sides(mid)
        return Mesh(x, vplus, vminus, vmid)

    def to_dict(self):
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class PiecewiseConstant(Potential):
    breakpoints: np.ndarray
    values: np.ndarray
    form = "piecewise"

    def __post_init__(self):
        b = _frozen(self.breakpoints)
        v = _frozen(self.values)
        if b.ndim != 1 or b.size < 2 or v.size != b.size - 1:
            raise PotentialFormatError("need len(values) == len(breakpoints) - 1 >= 1")
        if np.any(np.diff(b) <= 0):
            raise PotentialFormatError("breakpoints must be strictly increasing")
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(v))):
            raise PotentialFormatError("non-finite breakpoint or value")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", v)

    @property
    def support(self):
        return float(self.breakpoints[0]), float(self.breakpoints[-1])

    def edges(self):
        return self.breakpoints

    def sides(self, x):
        x = np.asarray(x, dtype=float)
        b, v = self.breakpoints, self.values
        ext = np.concatenate(([0.0], v, [0.0]))
        plus = ext[np.searchsorted(b, x, side="right")]
        minus = ext[np.searchsorted(b, x, side="left")]
        return plus, minus

    def scaled(self, c):
        return PiecewiseConstant(self.breakpoints, c * self.values)

    def shifted(self, s):
        return PiecewiseConstant(self.breakpoints + s, self.values)

    def to_dict(self):
        return {"form": "piecewise", "breakpoints": self.breakpoints.tolist(),
                "values": self.values.tolist()}


@dataclass(frozen=True, eq=False)
class SampledGrid(Potential):
    x0: float
    dx: float
    samples: np.ndarray
    form = "grid"

    def __post_init__(self):
        s = _frozen(self.samples)
        if s.ndim != 1 or s.size < 2:
            raise PotentialFormatError("SampledGrid needs at least 2 samples")
        if not self.dx > 0:
            raise PotentialFormatError("dx must be positive")
        if not np.all(np.isfinite(s)):
            raise PotentialFormatError("non-finite sample")
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "x0", float(self.x0))
        object.__setattr__(self, "dx", float(self.dx))

    @property
    def nodes(self):
        return self.x0 + self.dx * np.arange(self.samples.size)

    @property
    def support(self):
        return self.x0, self.x0 + self.dx * (self.samples.size - 1)

    def edges(self):
        return self.nodes

    def _interp(self, x):
        return np.interp(x, self.nodes, self.samples)

    def sides(self, x):
        x = np.asarray(x, dtype=float)
        a, b = self.support
        val = self._interp(x)
        plus = np.where((x >= a) & (x < b), val, 0.0)
        minus = np.where((x > a) & (x <= b), val, 0.0)
        return plus, minus

    def default_step(self):
        a, b = self.support
        return min((b - a) / DEFAULT_STEPS, self.dx / 2)

    def scaled(self, c):
        return SampledGrid(self.x0, self.dx, c * self.samples)

    def shifted(self, s):
        return SampledGrid(self.x0 + s, self.dx, self.samples)

    def to_dict(self):
        return {"form": "grid", "x0": self.x0, "dx": self.dx,
                "samples": self.samples.tolist()}


@dataclass(frozen=True, eq=False)
class SquareWell(Potential):
    """Attractive well: ``V(x) = -epsilon`` for ``0 <= x <= 1``."""

    epsilon: float
    form = "squarewell"

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise PotentialFormatError("epsilon must be a positive finite number")
        object.__setattr__(self, "epsilon", float(self.epsilon))

    @property
    def support(self):
        return 0.0, 1.0

    def as_piecewise(self):
        return PiecewiseConstant([0.0, 1.0], [-self.epsilon])

    def edges(self):
        return np.array([0.0, 1.0])

    def sides(self, x):
        return self.as_piecewise().sides(x)

    def scaled(self, c):
        return self.as_piecewise().scaled(c)

    def shifted(self, s):
        return self.as_piecewise().shifted(s)

    def to_dict(self):
        return {"form": "squarewell", "epsilon": self.epsilon}


def zero_potential(a=0.0, b=1.0):
    return PiecewiseConstant([a, b], [0.0])


def evaluate(V, x):
    """V(x), vectorised. Cells are closed on the left; the support is closed."""
    x_arr = np.asarray(x, dtype=float)
    plus, minus = V.sides(x_arr)
    _, b = V.support
    out = np.where(x_arr == b, minus, plus)
    if out.ndim == 0:
        return float(out)
    return out


def _weighted_abs(p, q):
    """Integral of (1 + |x|) over [p, q]."""
    F = lambda t: t * abs(t) / 2.0
    return (q - p) + F(q) - F(p)


def norms(V):
    """L2 norm, first-moment weighted L1 norm and plain integral of V."""
    if isinstance(V, SquareWell):
        V = V.as_piecewise()
    if isinstance(V, PiecewiseConstant):
        b, v = V.breakpoints, V.values
        L = np.diff(b)
        l2 = math.sqrt(float(np.sum(v * v * L)))
        w = np.array([_weighted_abs(p, q) for p, q in zip(b[:-1], b[1:])])
        return NormReport(l2, float(np.sum(np.abs(v) * w)), float(np.sum(v * L)))
    if isinstance(V, SampledGrid):
        x, s = V.nodes, V.samples
        l2 = math.sqrt(float(np.trapezoid(s * s, x)))
        l1 = float(np.trapezoid((1 + np.abs(x)) * np.abs(s), x))
        return NormReport(l2, l1, float(np.trapezoid(s, x)))
    if hasattr(V, "norms"):
        return V.norms()
    raise TypeError(f"unsupported potential type {type(V).__name__}")


# -- JSON -------------------------------------------------------------------

_FIELDS = {
    "piecewise": {"form", "breakpoints", "values"},
    "grid": {"form", "x0", "dx", "samples"},
    "squarewell": {"form", "epsilon"},
}


def potential_from_dict(d):
    if not isinstance(d, dict) or "form" not in d:
        raise PotentialFormatError("potential JSON must be an object with a 'form' field")
    form = d["form"]
    if form not in _FIELDS:
        raise PotentialFormatError(f"unknown form {form!r}")
    keys = set(d)
    if keys != _FIELDS[form]:
        extra = sorted(keys - _FIELDS[form])
        missing = sorted(_FIELDS[form] - keys)
        raise PotentialFormatError(f"form {form!r}: unknown fields {extra}, missing {missing}")
    try:
        if form == "piecewise":
            return PiecewiseConstant(d["breakpoints"], d["values"])
        if form == "grid":
            return SampledGrid(float(d["x0"]), float(d["dx"]), d["samples"])
        return SquareWell(float(d["epsilon"]))
    except (TypeError, ValueError) as exc:
        raise PotentialFormatError(str(exc)) from exc


def load_potential(path):
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise PotentialFormatError(f"{path}: invalid JSON ({exc})") from exc
    return potential_from_dict(data)


def dump_potential(V, path=None):
    text = json.dumps(V.to_dict(), allow_nan=False)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text
