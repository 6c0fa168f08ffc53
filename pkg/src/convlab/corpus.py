"""Instance descriptions and seeded random corpora.

Step functions in configs are small JSON documents::

    {"interval": 1.0}                       centered interval (line or circle)
    {"arcs": [[0, 0.3], [0.5, 0.7]]}        union of intervals, optional "heights"
    {"cells": [0, 2], "value": "1/2"}       constant on listed cells; strings are exact
    {"values": ["1/2", "1/3", 0, 0]}        explicit values
    {"fibers": {"0": {...}, "1": {...}}}    per finite-factor fiber on a product
    {"random": {"mass": 0.8, "seed": 3}}    water-filled random member of B(mass)
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .groups import GroupModel, ProductGroup, make_cyclic, make_product, make_real_grid, named_group
from .stepfn import StepFn, indicator, indicator_arcs, indicator_interval, on_fibers, sample_B


class CorpusError(ValueError):
    pass


def _scalar(x):
    if isinstance(x, str):
        return Fraction(x)
    return x


def _values_array(vals) -> np.ndarray:
    vals = [_scalar(v) for v in vals]
    if any(isinstance(v, Fraction) for v in vals):
        return np.array([Fraction(v) for v in vals], dtype=object)
    return np.asarray(vals, dtype=np.float64)


def stepfn_from_spec(model: GroupModel, spec: dict) -> StepFn:
    if "interval" in spec:
        return indicator_interval(model, float(spec["interval"]), float(spec.get("center", 0.0)))
    if "arcs" in spec:
        return indicator_arcs(model, [tuple(map(float, a)) for a in spec["arcs"]], spec.get("heights"))
    if "cells" in spec:
        val = _scalar(spec.get("value", 1))
        exact = isinstance(val, Fraction)
        base = indicator(model, spec["cells"], exact=exact)
        return StepFn(model, base.values * val) if val != 1 else base
    if "values" in spec:
        return StepFn(model, _values_array(spec["values"]))
    if "fibers" in spec:
        if not isinstance(model, ProductGroup):
            raise CorpusError("'fibers' needs a product model")
        return on_fibers(model, {int(k): stepfn_from_spec(model.conn, s) for k, s in spec["fibers"].items()})
    if "random" in spec:
        r = spec["random"]
        return sample_B(model, float(r["mass"]), int(r.get("seed", 0)), support=r.get("support"))
    if spec.get("zero"):
        return StepFn(model, np.zeros(model.size))
    raise CorpusError(f"unrecognized step function spec {spec!r}")


# ---------------------------------------------------------------- random generators


def random_line_phi(rng: np.random.Generator, model: GroupModel, reach: float) -> StepFn:
    """Interval unions with random heights, or a water-filled function, inside ``[-reach, reach]``."""
    kind = rng.integers(3)
    if kind < 2:
        k = int(rng.integers(1, 4))
        edges = np.sort(rng.uniform(-reach, reach, 2 * k))
        arcs = [(edges[2 * i], edges[2 * i + 1]) for i in range(k)]
        heights = list(rng.uniform(0.2, 1.0, k)) if kind == 1 else None
        phi = indicator_arcs(model, arcs, heights)
        if phi.norm() > 1e-9:
            return phi
    h = model.grid_step
    lo = int(np.ceil(-reach / h)) + model.N
    hi = int(np.floor(reach / h)) + model.N
    support = np.arange(lo, hi + 1)
    mass = rng.uniform(0.1, 0.9) * len(support) * h
    return sample_B(model, mass, int(rng.integers(2**31)), support=support)


def line_instance(seed: int, h: float = 0.02, half_width: float = 4.0, model: GroupModel | None = None):
    """Seeded ``(phi1, phi2, t)`` on a line grid; supports stay inside half the grid."""
    rng = np.random.default_rng(seed)
    L = model if model is not None else make_real_grid(h, half_width)
    reach = 0.45 * L.half_width
    p1 = random_line_phi(rng, L, reach)
    p2 = random_line_phi(rng, L, reach)
    t = float(rng.uniform(0, min(p1.norm(), p2.norm())))
    return p1, p2, t


def random_rational(rng: np.random.Generator, model: GroupModel, denom: int = 12, density: float = 0.5, max_mass=None) -> StepFn:
    """Exact step function with values in ``{0, 1/denom, ..., 1}``, optionally scaled to ``mass <= max_mass``."""
    keep = rng.random(model.size) < density
    keep[rng.integers(model.size)] = True
    nums = rng.integers(1, denom + 1, model.size) * keep
    vals = np.array([Fraction(int(k), denom) for k in nums], dtype=object)
    phi = StepFn(model, vals)
    if max_mass is not None:
        mass = phi.norm()
        limit = Fraction(max_mass)
        if mass > limit:
            phi = StepFn(model, vals * (limit / mass) * Fraction(int(rng.integers(1, 5)), 4))
    return phi


def random_float(rng: np.random.Generator, model: GroupModel, density: float = 0.6) -> StepFn:
    v = rng.random(model.size) * (rng.random(model.size) < density)
    return StepFn(model, v)


FINITE_ZOO = ("Z/5", "Z/6", "Z/8", "S3", "S4")


def finite_model(name: str) -> GroupModel:
    return named_group(name)


# ---------------------------------------------------------------- Kemperman corpus


@dataclass
class KempermanCase:
    model: GroupModel
    B1: np.ndarray
    B2: np.ndarray
    label: str


def _grid_union(rng, model, lo, hi, k, total):
    """``k`` disjoint grid-aligned intervals inside ``(lo, hi)`` with total length about ``total``."""
    step = model.grid_step
    cells_total = max(k, int(round(total / step)))
    lens = rng.multinomial(cells_total - k, np.ones(k) / k) + 1
    span = int(round((hi - lo) / step))
    free = span - lens.sum()
    if free < k:
        raise CorpusError("intervals do not fit")
    gaps = rng.multinomial(free - k, np.ones(k + 1) / (k + 1))
    gaps[1:k] += 1
    cells, pos = [], int(round(lo / step))
    for i in range(k):
        pos += int(gaps[i])
        cells.extend(range(pos + 1, pos + 1 + int(lens[i])))
        pos += int(lens[i])
    return np.array(cells)


def kemperman_corpus(seed: int = 0, count: int = 50) -> list[KempermanCase]:
    """Grid-aligned interval unions on lines, circles and circle x finite products, plus finite groups."""
    rng = np.random.default_rng(seed)
    L = make_real_grid(0.05, 6.0)
    C = make_cyclic(64, 1.0)
    P2 = make_product(make_cyclic(32, 1.0), named_group("Z/2"))
    P3 = make_product(make_cyclic(24, 1.0), named_group("S3"))
    out = [KempermanCase(L, _to_line_cells(L, np.arange(1, 21)), _to_line_cells(L, np.arange(1, 21)), "line (0,1)+(0,1)")]
    i = 0
    while len(out) < count:
        kind = i % 5
        i += 1
        if kind == 0:
            c1 = _grid_union(rng, L, -2.5, 2.5, int(rng.integers(1, 4)), rng.uniform(0.2, 2.0))
            c2 = _grid_union(rng, L, -2.5, 2.5, int(rng.integers(1, 4)), rng.uniform(0.2, 2.0))
            out.append(KempermanCase(L, _to_line_cells(L, c1), _to_line_cells(L, c2), "line unions"))
        elif kind == 1:
            a, b = rng.uniform(0.05, 0.5, 2)
            c1 = _grid_union(rng, C, 0, 1, int(rng.integers(1, 3)), a) % C.n
            c2 = _grid_union(rng, C, 0, 1, int(rng.integers(1, 3)), b) % C.n
            out.append(KempermanCase(C, c1, c2, "circle arcs"))
        elif kind in (2, 3):
            P = P2 if kind == 2 else P3
            out.append(KempermanCase(P, _product_set(rng, P), _product_set(rng, P), "circle x Z/2" if kind == 2 else "circle x S3"))
        else:
            G = finite_model(FINITE_ZOO[int(rng.integers(len(FINITE_ZOO)))])
            k1, k2 = rng.integers(1, G.size // 2 + 1, 2)
            out.append(KempermanCase(G, rng.choice(G.size, k1, replace=False), rng.choice(G.size, k2, replace=False), "finite"))
    return out


def _to_line_cells(L, idx):
    return np.asarray(idx) + L.N


def _product_set(rng, P: ProductGroup) -> np.ndarray:
    """A few fibers, each with a short arc, total volume at most about ``m / 2``."""
    fibers = rng.choice(P.nf, int(rng.integers(1, min(3, P.nf) + 1)), replace=False)
    budget = 0.45 / len(fibers)
    cells = []
    for f in fibers:
        arc = _grid_union(rng, P.conn, 0, 1, 1, rng.uniform(0.03, budget)) % P.nc
        cells.extend(P.join(arc, f))
    return np.array(cells)


# ---------------------------------------------------------------- split corpus


def split_corpus(seed: int = 0, count: int = 200):
    """``(phi, phi1, t, I1')`` on Z/8 and S3 with exact rational data and ``h(e) <= I1' <= ||phi||``."""
    rng = np.random.default_rng(seed)
    models = [named_group("Z/8"), named_group("S3")]
    out = []
    for i in range(count):
        G = models[i % 2]
        phi = random_rational(rng, G, denom=6)
        phi1 = random_rational(rng, G, denom=6)
        I = phi.norm()
        h_e = (phi.values * phi.values).sum() * phi.weight
        lam = Fraction(int(rng.integers(0, 9)), 8)
        I1p = h_e + lam * (I - h_e)
        conv_max = max(phi1.norm(), Fraction(0))
        t = Fraction(int(rng.integers(0, 9)), 8) * min(conv_max, I)
        out.append((phi, phi1, t, I1p))
    return out


# ---------------------------------------------------------------- rearrangement corpus


@dataclass
class RearrangementCase:
    """Continuum description: per-fiber arcs on a circle of volume 1 times a finite group."""

    fin: str
    t: float
    arcs1: dict
    arcs2: dict

    def build(self, n: int):
        P = make_product(make_cyclic(n, 1.0), named_group(self.fin))
        phi1 = on_fibers(P, {k: indicator_arcs(P.conn, a) for k, a in self.arcs1.items()})
        phi2 = on_fibers(P, {k: indicator_arcs(P.conn, a) for k, a in self.arcs2.items()})
        return P, phi1, phi2


def _random_arcs(rng, nf: int, total: float) -> dict:
    share = rng.dirichlet(np.ones(nf) * 0.8) * total
    arcs = {}
    for k, s in enumerate(share):
        s = min(float(s), 0.9)
        if s < 1e-3:
            continue
        start = float(rng.uniform(0, 1))
        if rng.random() < 0.5 or s < 0.1:
            arcs[k] = [(start, start + s)]
        else:
            a = float(rng.uniform(0.3, 0.7)) * s
            gap = float(rng.uniform(0.02, 1 - s - 0.02)) if 1 - s > 0.05 else 0.0
            arcs[k] = [(start, start + a), (start + a + gap, start + s + gap)] if gap > 0 else [(start, start + s)]
    return arcs


def rearrangement_corpus(seed: int = 0, count: int = 12, fins=("Z/2", "S3")) -> list[RearrangementCase]:
    """Instances with ``||phi1|| + ||phi2|| <= 1 + t`` (``m = 1``)."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        fin = fins[i % len(fins)]
        nf = named_group(fin).size
        t = float(rng.uniform(0.1, 0.4))
        total = (1 + t) * float(rng.uniform(0.7, 0.95))
        frac = float(rng.uniform(0.35, 0.65))
        out.append(RearrangementCase(fin, t, _random_arcs(rng, nf, frac * total), _random_arcs(rng, nf, (1 - frac) * total)))
    return out


# ---------------------------------------------------------------- product and kernel corpora


def product_models():
    return [
        make_product(make_cyclic(8, 1.0), named_group("Z/2")),
        make_product(make_cyclic(6, 1.0), named_group("S3")),
        make_product(make_cyclic(16, 2.0), named_group("S3")),
        make_product(make_real_grid(0.1, 2.0), named_group("Z/3")),
    ]


def decomposition_corpus(seed: int = 0, count: int = 100):
    """``(phi1, phi2, g)`` with ``g`` in the identity component of a product model."""
    from .groups import coset_structure

    rng = np.random.default_rng(seed)
    models = product_models()
    out = []
    for i in range(count):
        P = models[i % len(models)]
        cs = coset_structure(P)
        if P.conn.kind == "RealLineGrid":
            mask = np.abs(np.arange(P.conn.size) - P.conn.N) <= P.conn.N // 2
            v1 = random_float(rng, P).values * np.repeat(mask, P.nf)
            v2 = random_float(rng, P).values * np.repeat(mask, P.nf)
            phi1, phi2 = StepFn(P, v1), StepFn(P, v2)
        else:
            phi1, phi2 = random_float(rng, P), random_float(rng, P)
        g = int(cs.g0_cells[rng.integers(len(cs.g0_cells))])
        out.append((P, cs, phi1, phi2, g))
    return out


def kernel_corpus(seed: int = 0, count: int = 200):
    """Random pairs on every FFT-capable model class."""
    rng = np.random.default_rng(seed)
    models = [
        make_cyclic(1024, 1.0),
        make_cyclic(97, 97.0, as_circle=False),
        make_real_grid(0.01, 2.0),
        make_product(make_cyclic(32, 1.0), named_group("S3")),
        make_product(make_real_grid(0.05, 1.0), named_group("Z/3")),
    ]
    out = []
    for i in range(count):
        M = models[i % len(models)]
        if M.kind == "RealLineGrid":
            mask = np.abs(np.arange(M.size) - M.N) <= M.N // 2
            out.append((StepFn(M, rng.random(M.size) * mask), StepFn(M, rng.random(M.size) * mask)))
        elif isinstance(M, ProductGroup) and M.conn.kind == "RealLineGrid":
            mask = np.repeat(np.abs(np.arange(M.nc) - M.conn.N) <= M.conn.N // 2, M.nf)
            out.append((StepFn(M, rng.random(M.size) * mask), StepFn(M, rng.random(M.size) * mask)))
        else:
            out.append((random_float(rng, M), random_float(rng, M)))
    return out


__all__ = [
    "CorpusError", "KempermanCase", "RearrangementCase", "decomposition_corpus", "finite_model", "kemperman_corpus",
    "kernel_corpus", "line_instance", "product_models", "random_float", "random_rational", "rearrangement_corpus",
    "split_corpus", "stepfn_from_spec",
]
