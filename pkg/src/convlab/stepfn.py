"""Nonnegative step functions on a :class:`~convlab.groups.GroupModel`.

Values are a float64 array, or an object array of :class:`fractions.Fraction`
for exact mode. The same operations work for both.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .groups import CIRCLE, LINE, CosetStructure, GroupModel, ProductGroup


class StepFnError(ValueError):
    pass


class TranslationOverflow(StepFnError):
    """A RealLineGrid translation would push mass out of the carrier."""


@dataclass(frozen=True, eq=False)
class StepFn:
    model: GroupModel
    values: np.ndarray
    range_cap: float | None = None

    def __post_init__(self):
        v = self.values
        if not isinstance(v, np.ndarray) or v.dtype != object:
            v = np.array(v, dtype=np.float64)
        else:
            v = v.copy()
        if v.shape != (self.model.size,):
            raise StepFnError(f"expected {self.model.size} values, got shape {v.shape}")
        if v.dtype != object and not np.all(np.isfinite(v)):
            raise StepFnError("values must be finite")
        if np.any(v < 0):
            raise StepFnError("step functions are nonnegative")
        if self.range_cap is not None and np.any(v > self.range_cap):
            raise StepFnError(f"values exceed the range cap {self.range_cap}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def exact(self) -> bool:
        return self.values.dtype == object

    @property
    def weight(self):
        return self.model.weight_exact if self.exact else self.model.weight

    def norm(self, region=None):
        return l1_norm(self, region)

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.values != 0)

    def to_exact(self) -> StepFn:
        if self.exact:
            return self
        return StepFn(self.model, np.array([Fraction(float(x)) for x in self.values], dtype=object), self.range_cap)

    def to_float(self) -> StepFn:
        if not self.exact:
            return self
        return StepFn(self.model, np.array([float(x) for x in self.values]), self.range_cap)

    def with_cap(self, cap: float | None) -> StepFn:
        return StepFn(self.model, self.values, cap)

    def __getitem__(self, cell):
        return self.values[cell]

    # -- (de)serialization

    def to_json(self, model_ref: str) -> dict:
        return {"model_ref": model_ref, "values": [float(x) for x in self.values]}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["coord", "value"])
        for cell, val in enumerate(self.values):
            c = self.model.coord(cell)
            if isinstance(c, tuple):
                c = "|".join(str(x) for x in c)
            w.writerow([c, float(val)])
        return buf.getvalue()


def from_json(doc: dict, models: dict[str, GroupModel], range_cap: float | None = None) -> StepFn:
    return StepFn(models[doc["model_ref"]], np.asarray(doc["values"], dtype=np.float64), range_cap)


def zeros(model: GroupModel, exact: bool = False) -> StepFn:
    if exact:
        return StepFn(model, np.array([Fraction(0)] * model.size, dtype=object), 1.0)
    return StepFn(model, np.zeros(model.size), 1.0)


def indicator(model: GroupModel, cells, exact: bool = False) -> StepFn:
    if exact:
        v = np.array([Fraction(0)] * model.size, dtype=object)
        v[np.asarray(cells, dtype=np.int64)] = Fraction(1)
    else:
        v = np.zeros(model.size)
        v[np.asarray(cells, dtype=np.int64)] = 1.0
    return StepFn(model, v, 1.0)


# ---------------------------------------------------------------- norms


def _sum(vals, exact: bool):
    if exact:
        return sum(vals, Fraction(0))
    return float(np.sum(vals))


def l1_norm(phi: StepFn, region=None):
    """Sum of value times Haar weight, over ``region`` (cell ids or mask) if given."""
    v = phi.values if region is None else phi.values[np.asarray(region)]
    return _sum(v, phi.exact) * phi.weight


def mass_profile(phi: StepFn, cs: CosetStructure) -> np.ndarray:
    """Per-coset masses ``P(k) = ||phi||_{coset k}`` in coset-id order."""
    return np.array([l1_norm(phi, cs.coset_cells(k)) for k in range(cs.n_cosets)], dtype=object if phi.exact else float)


# ---------------------------------------------------------------- translation


def translate(phi: StepFn, g: int, side: str = "right") -> StepFn:
    """``left``: ``L_g phi(x) = phi(g^-1 x)``; ``right``: ``R_g phi(x) = phi(x g)``."""
    m = phi.model
    cells = m.cells
    if side == "left":
        dest = m.compose(np.full(m.size, g), cells)
    elif side == "right":
        dest = m.compose(cells, np.full(m.size, m.inverse(g)))
    else:
        raise StepFnError(f"side must be 'left' or 'right', got {side!r}")
    valid = dest >= 0
    if np.any(phi.values[~valid] != 0):
        raise TranslationOverflow("translation pushes support out of the grid")
    out = np.zeros_like(phi.values) if not phi.exact else np.array([Fraction(0)] * m.size, dtype=object)
    out[dest[valid]] = phi.values[valid]
    return StepFn(m, out, phi.range_cap)


# ---------------------------------------------------------------- interval indicators


def _coverage(lo_cells: float, hi_cells: float, idx: np.ndarray) -> np.ndarray:
    """Fraction of cell ``[i-1/2, i+1/2]`` covered by ``[lo, hi]`` (cell units)."""
    return np.clip(np.minimum(hi_cells, idx + 0.5) - np.maximum(lo_cells, idx - 0.5), 0.0, 1.0)


def indicator_interval(model: GroupModel, I: float, center: float = 0.0) -> StepFn:
    """Centered interval indicator ``1_(-I/2, I/2)`` with fractional boundary cells.

    On a RealLineGrid the result is symmetric cell-for-cell when ``center`` is 0.
    On a CircleGrid the interval is an arc (``I`` at most the circle volume).
    """
    if I < 0:
        raise StepFnError("interval length must be nonnegative")
    if model.kind == LINE:
        h = model.h
        if I / 2 + abs(center) > (model.N + 0.5) * h * (1 + 1e-12):
            raise StepFnError(f"interval of length {I} exceeds the grid")
        idx = np.arange(-model.N, model.N + 1, dtype=np.float64)
        v = _coverage((center - I / 2) / h, (center + I / 2) / h, idx)
        return StepFn(model, v, 1.0)
    if model.kind == CIRCLE:
        return indicator_arcs(model, [(center - I / 2, center + I / 2)])
    raise StepFnError("interval indicators need a RealLineGrid or CircleGrid model")


def indicator_arcs(model: GroupModel, arcs, heights=None) -> StepFn:
    """Union of (disjoint) intervals/arcs ``(a, b)`` in coordinates, with optional heights."""
    if model.kind == LINE:
        h, idx = model.h, np.arange(-model.N, model.N + 1, dtype=np.float64)
        shifts = [0.0]
    elif model.kind == CIRCLE:
        h, idx = model.weight, np.arange(model.n, dtype=np.float64)
        shifts = [-model.volume, 0.0, model.volume]
    else:
        raise StepFnError("arcs need a RealLineGrid or CircleGrid model")
    v = np.zeros(model.size)
    heights = [1.0] * len(arcs) if heights is None else heights
    for (a, b), ht in zip(arcs, heights):
        if b < a:
            raise StepFnError("arc endpoints must satisfy a <= b")
        if model.kind == CIRCLE and b - a > model.volume * (1 + 1e-12):
            raise StepFnError("arc longer than the circle")
        for s in shifts:
            v += ht * _coverage((a + s) / h, (b + s) / h, idx)
    if model.kind == LINE and (v.sum() * h) < sum((b - a) * ht for (a, b), ht in zip(arcs, heights)) * (1 - 1e-9):
        raise StepFnError("interval exceeds the grid")
    if v.max(initial=0.0) <= 1 + 1e-12:
        return StepFn(model, np.minimum(v, 1.0), 1.0)
    return StepFn(model, v, None)


def interval_cells(model: GroupModel, a: float, b: float) -> np.ndarray:
    """Cells whose center lies in ``(a, b]``: the grid-aligned version of ``(a, b)`` shifted by half a cell."""
    if model.kind == LINE:
        lo = math.floor(a / model.h + 1e-9) + 1
        hi = math.floor(b / model.h + 1e-9)
        if lo < -model.N or hi > model.N:
            raise StepFnError("interval exceeds the grid")
        return np.arange(lo, hi + 1) + model.N
    if model.kind == CIRCLE:
        lo = math.floor(a / model.weight + 1e-9) + 1
        hi = math.floor(b / model.weight + 1e-9)
        return np.unique(np.arange(lo, hi + 1) % model.n)
    raise StepFnError("interval cells need a RealLineGrid or CircleGrid model")


def on_fibers(model: ProductGroup, fibers: dict) -> StepFn:
    """Assemble a step function on ``conn x fin`` from per-fiber functions on ``conn``."""
    v = np.zeros((model.nc, model.nf))
    cap = 1.0
    for f, fn in fibers.items():
        v[:, f] = fn.values
        if fn.range_cap is None:
            cap = None
    return StepFn(model, v.ravel(), cap)


def fiber(phi: StepFn, f: int) -> np.ndarray:
    m = phi.model
    return phi.values.reshape(m.nc, m.nf)[:, f]


# ---------------------------------------------------------------- pointwise algebra


def pointwise(phi: StepFn, psi: StepFn, op: str, a: float = 1.0, b: float = 1.0, cap: float | None = None) -> StepFn:
    """``min``, ``max``, ``product`` or ``affine`` (``a*phi + b*psi``); ``cap`` is enforced."""
    if phi.model is not psi.model:
        raise StepFnError("pointwise operation across different models")
    x, y = phi.values, psi.values
    if op == "min":
        v = np.minimum(x, y)
    elif op == "max":
        v = np.maximum(x, y)
    elif op == "product":
        v = x * y
    elif op == "affine":
        v = a * x + b * y
    else:
        raise StepFnError(f"unknown pointwise op {op!r}")
    if cap is None and op in ("min", "max", "product"):
        caps = [c for c in (phi.range_cap, psi.range_cap) if c is not None]
        cap = max(caps) if len(caps) == 2 else None
    return StepFn(phi.model, v, cap)


# ---------------------------------------------------------------- B(I) sampler


def water_fill(u: np.ndarray, target: float, weight: float, cap: float = 1.0) -> np.ndarray:
    """Shift ``u`` by a common level and clip to ``[0, cap]`` so the weighted mass equals ``target``."""
    k = len(u)
    if target <= 0:
        return np.zeros(k)
    if target >= k * cap * weight:
        return np.full(k, cap)
    goal = target / weight
    # mass(level) = sum clip(u + level, 0, cap) is piecewise linear and nondecreasing
    knots = np.unique(np.concatenate([-u, cap - u]))
    mass = np.array([np.clip(u + s, 0, cap).sum() for s in knots])
    j = int(np.searchsorted(mass, goal))
    if j == 0:
        level = knots[0]
    else:
        s0, s1, m0, m1 = knots[j - 1], knots[j], mass[j - 1], mass[j]
        level = s0 + (goal - m0) * (s1 - s0) / (m1 - m0)
    v = np.clip(u + level, 0.0, cap)
    # one cell absorbs the leftover rounding
    err = goal - v.sum()
    inside = np.flatnonzero((v > 0) & (v < cap))
    if len(inside):
        i = inside[np.argmax(np.minimum(v[inside], cap - v[inside]))]
        v[i] = min(cap, max(0.0, v[i] + err))
    return v


def sample_B(model: GroupModel, I: float, seed: int = 0, cap: float = 1.0, support=None) -> StepFn:
    """Random member of ``B(I)``: uniform values water-filled to mass ``I`` (deterministic per seed)."""
    cells = np.arange(model.size) if support is None else np.asarray(support, dtype=np.int64)
    vol = len(cells) * model.weight * cap
    if I < 0 or I > vol * (1 + 1e-12):
        raise StepFnError(f"mass {I} outside [0, {vol}]")
    rng = np.random.default_rng(seed)
    u = rng.random(len(cells))
    v = np.zeros(model.size)
    v[cells] = water_fill(u * cap, I, model.weight, cap)
    return StepFn(model, v, cap)
