"""Discrete measured models of unimodular locally compact groups.

Every model has cells ``0..size-1`` with uniform Haar weight. The composition
law is exposed vectorized; on :class:`RealLineGrid` (and products with it) a
composition that leaves the index range returns ``-1`` (the overflow region).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

FINITE = "FiniteCayley"
CIRCLE = "CircleGrid"
LINE = "RealLineGrid"
PRODUCT = "Product"

SUBGROUP_CAP = 128
OVERFLOW = -1


class GroupModelError(ValueError):
    """Invalid model construction or unsupported model combination."""


class GroupModel:
    kind: str
    size: int
    weight: float
    m_value: float
    connected: bool
    identity: int

    def compose(self, a, b) -> np.ndarray:
        raise NotImplementedError

    def inverse(self, a) -> np.ndarray:
        raise NotImplementedError

    def left_targets(self, a: int) -> np.ndarray:
        """Cells ``a * b`` for every cell ``b`` (``-1`` where it overflows)."""
        return self.compose(np.full(self.size, a), np.arange(self.size))

    @property
    def cells(self) -> np.ndarray:
        return np.arange(self.size)

    @property
    def total_volume(self) -> float:
        return self.size * self.weight

    @cached_property
    def weight_exact(self) -> Fraction:
        # the simplest fraction that rounds to the float weight: 0.01 -> 1/100
        snapped = Fraction(self.weight).limit_denominator(10**9)
        return snapped if float(snapped) == self.weight else Fraction(self.weight)

    @property
    def grid_step(self) -> float | None:
        """Step of the connected axis, or None for discrete models."""
        return None

    @property
    def fiber_shape(self) -> tuple[int, int, bool] | None:
        """``(n_connected, n_finite, cyclic)`` for grid-backed models."""
        return None

    @property
    def is_discrete(self) -> bool:
        return self.fiber_shape is None

    def coord(self, cell: int):
        return int(cell)

    def to_spec(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class FiniteGroup(GroupModel):
    """Finite group given by a Cayley table, with counting-type weight."""

    table: np.ndarray
    weight: float = 1.0
    label: str = ""
    kind: str = field(default=FINITE, init=False)
    connected: bool = field(default=False, init=False)

    @property
    def size(self) -> int:
        return self.table.shape[0]

    @cached_property
    def identity(self) -> int:
        rows = np.flatnonzero((self.table == np.arange(self.size)).all(axis=1))
        return int(rows[0])

    @cached_property
    def _inv(self) -> np.ndarray:
        e = self.identity
        return np.argmax(self.table == e, axis=1)

    @property
    def m_value(self) -> float:
        # the trivial subgroup is open in a discrete group
        return self.weight

    def compose(self, a, b):
        return self.table[np.asarray(a), np.asarray(b)]

    def inverse(self, a):
        return self._inv[np.asarray(a)]

    def left_targets(self, a):
        return self.table[a]

    def to_spec(self):
        return {"kind": FINITE, "cayley": self.table.tolist(), "weight": self.weight}


@dataclass(frozen=True, eq=False)
class CyclicGroup(GroupModel):
    """Z/n with total volume ``volume``; a circle model when ``circle`` is set."""

    n: int
    volume: float
    circle: bool = True

    @property
    def kind(self) -> str:
        return CIRCLE if self.circle else FINITE

    @property
    def size(self) -> int:
        return self.n

    @property
    def weight(self) -> float:
        return self.volume / self.n

    @property
    def connected(self) -> bool:
        return self.circle

    @property
    def identity(self) -> int:
        return 0

    @property
    def m_value(self) -> float:
        return self.volume if self.circle else self.weight

    @property
    def grid_step(self):
        return self.weight if self.circle else None

    @property
    def fiber_shape(self):
        return (self.n, 1, True) if self.circle else None

    @cached_property
    def table(self) -> np.ndarray:
        r = np.arange(self.n)
        return (r[:, None] + r[None, :]) % self.n

    def compose(self, a, b):
        return (np.asarray(a) + np.asarray(b)) % self.n

    def inverse(self, a):
        return (-np.asarray(a)) % self.n

    def left_targets(self, a):
        return (a + np.arange(self.n)) % self.n

    def coord(self, cell):
        return cell * self.weight if self.circle else int(cell)

    def to_spec(self):
        return {
            "kind": CIRCLE if self.circle else FINITE,
            "n": self.n,
            "volume": self.volume,
            "semantics": "circle" if self.circle else "discrete",
        }


@dataclass(frozen=True, eq=False)
class RealLineGrid(GroupModel):
    """Cells at ``x = i*h`` for ``i`` in ``[-N, N]``; cell ``i+N`` covers ``[(i-1/2)h, (i+1/2)h]``."""

    h: float
    N: int
    kind: str = field(default=LINE, init=False)
    connected: bool = field(default=True, init=False)
    m_value: float = field(default=math.inf, init=False)

    @property
    def size(self) -> int:
        return 2 * self.N + 1

    @property
    def weight(self) -> float:
        return self.h

    @property
    def identity(self) -> int:
        return self.N

    @property
    def grid_step(self):
        return self.h

    @property
    def fiber_shape(self):
        return (self.size, 1, False)

    @property
    def half_width(self) -> float:
        return self.N * self.h

    def compose(self, a, b):
        s = np.asarray(a) + np.asarray(b) - self.N
        return np.where((s >= 0) & (s < self.size), s, OVERFLOW)

    def inverse(self, a):
        return 2 * self.N - np.asarray(a)

    def position(self, cells) -> np.ndarray:
        return (np.asarray(cells) - self.N) * self.h

    def coord(self, cell):
        return (cell - self.N) * self.h

    def to_spec(self):
        return {"kind": LINE, "h": self.h, "half_width": self.half_width}


@dataclass(frozen=True, eq=False)
class ProductGroup(GroupModel):
    """Connected grid factor times a finite group; cell ``c*nf + f``."""

    conn: GroupModel
    fin: GroupModel
    kind: str = field(default=PRODUCT, init=False)

    @property
    def nc(self) -> int:
        return self.conn.size

    @property
    def nf(self) -> int:
        return self.fin.size

    @property
    def size(self) -> int:
        return self.nc * self.nf

    @property
    def weight(self) -> float:
        return self.conn.weight * self.fin.weight

    @property
    def connected(self) -> bool:
        return self.nf == 1

    @property
    def identity(self) -> int:
        return self.conn.identity * self.nf + self.fin.identity

    @property
    def m_value(self) -> float:
        return self.conn.m_value * self.fin.weight

    @property
    def grid_step(self):
        return self.conn.grid_step

    @property
    def fiber_shape(self):
        return (self.nc, self.nf, self.conn.kind == CIRCLE)

    def split(self, cells):
        cells = np.asarray(cells)
        return cells // self.nf, cells % self.nf

    def join(self, c, f):
        return np.asarray(c) * self.nf + np.asarray(f)

    def compose(self, a, b):
        ac, af = self.split(a)
        bc, bf = self.split(b)
        c = self.conn.compose(ac, bc)
        out = self.join(c, self.fin.compose(af, bf))
        return np.where(c == OVERFLOW, OVERFLOW, out)

    def inverse(self, a):
        ac, af = self.split(a)
        return self.join(self.conn.inverse(ac), self.fin.inverse(af))

    def left_targets(self, a):
        ac, af = divmod(int(a), self.nf)
        ct = self.conn.left_targets(ac)
        ft = self.fin.left_targets(af)
        out = (ct[:, None] * self.nf + ft[None, :]).ravel()
        return np.where(np.repeat(ct, self.nf) == OVERFLOW, OVERFLOW, out)

    def coord(self, cell):
        c, f = divmod(int(cell), self.nf)
        return (self.conn.coord(c), self.fin.coord(f))

    def to_spec(self):
        return {"kind": PRODUCT, "product": {"connected": self.conn.to_spec(), "finite": self.fin.to_spec()}}


# ---------------------------------------------------------------- constructors


def make_cyclic(n: int, total_volume: float, as_circle: bool = True) -> CyclicGroup:
    if n < 1 or not total_volume > 0:
        raise GroupModelError(f"cyclic model needs n >= 1 and volume > 0 (got n={n}, volume={total_volume})")
    return CyclicGroup(int(n), float(total_volume), bool(as_circle))


def make_finite_cayley(table, element_weight: float = 1.0, label: str = "") -> FiniteGroup:
    """Validate a Cayley table and wrap it; raises naming the failed axiom."""
    if not element_weight > 0:
        raise GroupModelError("element weight must be positive")
    T = np.asarray(table, dtype=np.int64)
    if T.ndim != 2 or T.shape[0] != T.shape[1] or T.shape[0] == 0:
        raise GroupModelError("closure: table must be a non-empty square array")
    n = T.shape[0]
    if T.min() < 0 or T.max() >= n:
        raise GroupModelError("closure: table entries must be cell ids in range")
    rng = np.arange(n)
    for i in range(n):
        if not np.array_equal(np.sort(T[i]), rng):
            raise GroupModelError(f"latin square: row {i} is not a permutation")
        if not np.array_equal(np.sort(T[:, i]), rng):
            raise GroupModelError(f"latin square: column {i} is not a permutation")
    ids = [e for e in range(n) if np.array_equal(T[e], rng) and np.array_equal(T[:, e], rng)]
    if not ids:
        raise GroupModelError("identity: no two-sided identity element")
    # (ab)c vs a(bc) for all triples at once
    left = T[T, :]  # left[a, b, c] = (ab)c
    right = T[:, T]  # right[a, b, c] = a(bc)
    bad = np.argwhere(left != right)
    if len(bad):
        a, b, c = (int(x) for x in bad[0])
        raise GroupModelError(f"associativity: fails for triple ({a}, {b}, {c})")
    return FiniteGroup(T, float(element_weight), label)


def make_real_grid(h: float, half_width: float) -> RealLineGrid:
    if not h > 0 or not half_width >= h:
        raise GroupModelError(f"real grid needs h > 0 and half_width >= h (got h={h}, half_width={half_width})")
    N = int(math.floor(half_width / h + 1e-9))
    return RealLineGrid(float(h), N)


def make_product(connected: GroupModel, finite: GroupModel) -> ProductGroup:
    if connected.kind not in (CIRCLE, LINE):
        raise GroupModelError("product: first factor must be a CircleGrid or RealLineGrid")
    if finite.kind != FINITE:
        raise GroupModelError("product: second factor must be a finite (discrete) group")
    return ProductGroup(connected, finite)


def cyclic_table(n: int) -> np.ndarray:
    r = np.arange(n)
    return (r[:, None] + r[None, :]) % n


def symmetric_table(k: int) -> np.ndarray:
    """Cayley table of S_k; element i is the i-th permutation in lexicographic order."""
    perms = list(itertools.permutations(range(k)))
    index = {p: i for i, p in enumerate(perms)}
    n = len(perms)
    T = np.empty((n, n), dtype=np.int64)
    for i, p in enumerate(perms):
        for j, q in enumerate(perms):
            # (p*q)(x) = p(q(x))
            T[i, j] = index[tuple(p[q[x]] for x in range(k))]
    return T


def named_group(name: str, weight: float = 1.0) -> GroupModel:
    """``"S3"``, ``"S4"``, ``"Z/5"`` (discrete) or ``"trivial"``."""
    key = name.strip().upper().replace(" ", "")
    if key in ("TRIVIAL", "Z/1", "Z1"):
        return make_finite_cayley([[0]], weight, "Z/1")
    if key.startswith("S") and key[1:].isdigit():
        return make_finite_cayley(symmetric_table(int(key[1:])), weight, key)
    if key.startswith("Z/") and key[2:].isdigit():
        return make_cyclic(int(key[2:]), weight * int(key[2:]), as_circle=False)
    if key.startswith("Z") and key[1:].isdigit():
        return make_cyclic(int(key[1:]), weight * int(key[1:]), as_circle=False)
    raise GroupModelError(f"unknown group name {name!r}")


# ---------------------------------------------------------------- subgroups


def _closure(model: GroupModel, gens) -> frozenset[int]:
    T = model.table
    H = {model.identity} | set(gens)
    frontier = list(H)
    while frontier:
        new = set()
        for a in frontier:
            for b in list(H):
                for c in (int(T[a, b]), int(T[b, a])):
                    if c not in H:
                        new.add(c)
        H |= new
        frontier = list(new)
    return frozenset(H)


def enumerate_subgroups(model: GroupModel) -> list[frozenset[int]]:
    """All subgroups of a finite discrete model, by closing cyclic subgroups under joins."""
    if model.kind != FINITE:
        raise GroupModelError("subgroup enumeration needs a finite discrete model")
    if model.size > SUBGROUP_CAP:
        raise GroupModelError(
            f"group of order {model.size} exceeds the enumeration cap {SUBGROUP_CAP}; pass an explicit m_value"
        )
    found = {_closure(model, [g]) for g in range(model.size)}
    frontier = set(found)
    while frontier:
        new = set()
        for H in frontier:
            for K in found:
                J = _closure(model, H | K)
                if J not in found:
                    new.add(J)
        found |= new
        frontier = new
    return sorted(found, key=lambda H: (len(H), sorted(H)))


def verify_axioms(model: GroupModel, samples: int = 256, seed: int = 0) -> None:
    """Exhaustive associativity/inverse check on finite models, sampled on grids."""
    n = model.size
    if model.kind == FINITE and n <= SUBGROUP_CAP:
        a, b, c = (x.ravel() for x in np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij"))
    else:
        rng = np.random.default_rng(seed)
        a, b, c = rng.integers(0, n, size=(3, samples))
    ab = model.compose(a, b)
    bc = model.compose(b, c)
    ok = (ab >= 0) & (bc >= 0)
    lhs = model.compose(ab[ok], c[ok])
    rhs = model.compose(a[ok], bc[ok])
    both = (lhs >= 0) & (rhs >= 0)
    if not np.array_equal(lhs[both], rhs[both]):
        raise GroupModelError("associativity fails")
    x = np.arange(n)
    if not np.all(model.compose(x, model.inverse(x)) == model.identity):
        raise GroupModelError("inverse fails")
    if not np.all(model.compose(model.inverse(x), x) == model.identity):
        raise GroupModelError("inverse fails")


# ---------------------------------------------------------------- cosets


@dataclass(frozen=True, eq=False)
class CosetStructure:
    """Designated open subgroup ``G0`` and the left-coset index map ``g -> gG0``."""

    model: GroupModel
    g0_cells: np.ndarray
    coset_of: np.ndarray
    coset_reps: np.ndarray

    def __post_init__(self):
        m = self.model
        g0 = self.g0_cells
        in_g0 = np.zeros(m.size, dtype=bool)
        in_g0[g0] = True
        # exhaustive up to 4096 G0 cells, otherwise the generator-like first rows
        rows = g0 if len(g0) <= 4096 else g0[:8]
        a, b = np.meshgrid(rows, g0, indexing="ij")
        prod = m.compose(a.ravel(), b.ravel())
        # overflow (-1) only occurs on RealLineGrid carriers and is not a closure failure
        if not in_g0[prod[prod >= 0]].all():
            raise GroupModelError("G0 is not closed under composition")
        if not in_g0[m.inverse(g0)].all():
            raise GroupModelError("G0 is not closed under inverses")
        counts = np.bincount(self.coset_of, minlength=self.n_cosets)
        if not np.all(counts == len(g0)):
            raise GroupModelError("cosets do not partition the carrier into equal pieces")

    @property
    def n_cosets(self) -> int:
        return len(self.coset_reps)

    @property
    def g0_volume(self) -> float:
        return len(self.g0_cells) * self.model.weight

    def in_g0(self) -> np.ndarray:
        mask = np.zeros(self.model.size, dtype=bool)
        mask[self.g0_cells] = True
        return mask

    def coset_cells(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.coset_of == k)


def coset_structure(model: GroupModel, g0_cells=None) -> CosetStructure:
    """Canonical identity-component cosets, or left cosets of a given subgroup."""
    if g0_cells is None:
        if isinstance(model, ProductGroup):
            nf = model.nf
            g0 = np.arange(model.nc) * nf + model.fin.identity
            coset_of = np.arange(model.size) % nf
            reps = model.conn.identity * nf + np.arange(nf)
            return CosetStructure(model, g0, coset_of, reps)
        if model.connected:
            return CosetStructure(model, np.arange(model.size), np.zeros(model.size, dtype=np.int64), np.array([model.identity]))
        g0_cells = [model.identity]
    g0 = np.array(sorted(set(int(c) for c in g0_cells)), dtype=np.int64)
    coset_of = np.full(model.size, -1, dtype=np.int64)
    reps = []
    for g in range(model.size):
        if coset_of[g] >= 0:
            continue
        members = model.compose(np.full(len(g0), g), g0)
        coset_of[members] = len(reps)
        reps.append(g)
    return CosetStructure(model, g0, coset_of, np.array(reps, dtype=np.int64))


# ---------------------------------------------------------------- JSON specs


def model_from_spec(spec: dict) -> GroupModel:
    """Build a model from its structured-text description (see docs/config.schema.json)."""
    kind = str(spec.get("kind", "")).lower()
    if kind in ("circlegrid", "circle", "cyclic"):
        semantics = spec.get("semantics", "circle" if kind != "cyclic" else "discrete")
        if semantics not in ("circle", "discrete"):
            raise GroupModelError(f"unknown semantics {semantics!r}")
        n = int(spec["n"])
        return make_cyclic(n, float(spec.get("volume", n if semantics == "discrete" else 1.0)), semantics == "circle")
    if kind in ("reallinegrid", "line", "real"):
        return make_real_grid(float(spec["h"]), float(spec["half_width"]))
    if kind in ("finitecayley", "finite"):
        weight = float(spec.get("weight", 1.0))
        cayley = spec.get("cayley")
        if isinstance(cayley, str):
            return named_group(cayley, weight)
        if cayley is None and "n" in spec:
            return make_cyclic(int(spec["n"]), weight * int(spec["n"]), as_circle=False)
        return make_finite_cayley(cayley, weight)
    if kind == "product":
        p = spec["product"]
        return make_product(model_from_spec(p["connected"]), model_from_spec(p["finite"]))
    raise GroupModelError(f"unknown model kind {spec.get('kind')!r}")
