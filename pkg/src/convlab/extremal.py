"""Lower estimates of ``S(I) = sup_{phi in B(I)} ||f_t o (phi1 * phi)||``.

``phi -> ||f_t o (phi1 * phi)||`` is convex, so its supremum over the polytope
``B(I)`` is attained at an extreme point: a {0,1}-valued function with at most
one fractional cell. The search walks those extreme points by swapping the
values of two cells, which keeps the mass fixed exactly.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .convolution import convolve
from .groups import GroupModel
from .inequalities import DEFAULT_C, SATISFIED, VACUOUS, VIOLATED, CheckReport, _report
from .stepfn import StepFn

PLATEAU = 50
CSV_COLUMNS = ["I", "S_hat", "bound", "gap", "budget", "seed"]


class SearchError(ValueError):
    pass


@dataclass(frozen=True)
class SContext:
    """Fixed ``phi1`` of unit mass and threshold ``t`` on ``phi1``'s model."""

    phi1: StepFn
    t: float

    def __post_init__(self):
        if abs(self.phi1.norm() - 1.0) > 1e-12:
            raise SearchError(f"phi1 must have unit mass, got {float(self.phi1.norm())}")
        if not 0 <= self.t <= 1:
            raise SearchError("t must lie in [0, 1]")

    @property
    def model(self) -> GroupModel:
        return self.phi1.model

    def tol(self, I: float, C: float = DEFAULT_C, scale: float = 1.0) -> float:
        h = self.model.grid_step
        return 0.0 if h is None else scale * C * h * (1.0 + I)


# ---------------------------------------------------------------- objective


def ft_norm(model: GroupModel, conv: np.ndarray, t: float) -> float:
    """``||f_t o conv||`` with ``conv`` read as its continuum interpolant.

    On grid models the convolution of step functions is piecewise linear between
    node values along the connected axis, and ``f_t`` of it integrates in closed
    form segment by segment. Discrete models sum over cells.
    """
    shape = model.fiber_shape
    if shape is None:
        return float(np.maximum(conv - t, 0.0).sum()) * model.weight
    nc, nf, cyclic = shape
    Y = conv.reshape(nc, nf)
    if cyclic:
        Y0, Y1 = Y, np.roll(Y, -1, axis=0)
    else:
        Z = np.zeros((1, nf))
        P = np.vstack([Z, Y, Z])
        Y0, Y1 = P[:-1], P[1:]
    hi = np.maximum(Y0, Y1) - t
    lo = t - np.minimum(Y0, Y1)
    above = lo <= 0
    crossing = (hi > 0) & ~above
    seg = np.zeros_like(hi)
    seg[above] = 0.5 * (Y0[above] + Y1[above]) - t
    seg[crossing] = hi[crossing] ** 2 / (2 * (hi[crossing] + lo[crossing]))
    return float(seg.sum()) * model.weight


def evaluate(ctx: SContext, phi: StepFn) -> float:
    """From-scratch objective: direct convolution, clipped to its cap, then :func:`ft_norm`."""
    conv = convolve(ctx.phi1.to_float(), phi.to_float(), "direct").values
    cap = min(1.0, phi.norm())
    return ft_norm(ctx.model, np.minimum(conv, cap), ctx.t)


# ---------------------------------------------------------------- search


@dataclass
class SResult:
    I: float
    value: float
    phi: StepFn
    restart: int
    moves: int
    low_budget: bool = False
    trace: list = field(default_factory=list)


def _columns(ctx: SContext) -> tuple[np.ndarray, np.ndarray]:
    """Placeable cells and the matrix whose column ``j`` is ``phi1 * delta_{cell j}``."""
    model = ctx.model
    v1 = np.asarray(ctx.phi1.values, dtype=float)
    supp = np.flatnonzero(v1)
    cols, cells = [], []
    for c in range(model.size):
        # (phi1 * delta_c)(x) = phi1(x c^-1) w, supported on supp(phi1) c
        dest = model.compose(supp, np.full(len(supp), c))
        if np.any(dest < 0):
            continue
        col = np.zeros(model.size)
        col[dest] = v1[supp] * model.weight
        cols.append(col)
        cells.append(c)
    return np.array(cells, dtype=np.int64), np.array(cols).T


def _extreme_point(k_cells: int, I: float, w: float, order: np.ndarray) -> np.ndarray:
    """{0,1}-valued on the first ``floor(I/w)`` entries of ``order``, fractional remainder next."""
    x = np.zeros(k_cells)
    units = I / w
    full = min(int(np.floor(units + 1e-12)), k_cells)
    x[order[:full]] = 1.0
    frac = units - full
    if frac > 1e-12 and full < k_cells:
        x[order[full]] = frac
    return x


def _starts(ctx: SContext, cells: np.ndarray, restarts: int, I: float, seed: int) -> list[np.ndarray]:
    model = ctx.model
    k = len(cells)
    w = model.weight
    if k * w < I * (1 - 1e-12):
        raise SearchError(f"mass {I} does not fit on the {k} placeable cells")
    starts = []
    # centered block: the interval candidate on connected models
    if model.grid_step is not None:
        coord = np.array([_axis_coord(model, c) for c in cells])
        center = _axis_coord(model, model.identity)
        starts.append(_extreme_point(k, I, w, np.argsort(np.abs(coord - center), kind="stable")))
    # block under phi1's mass
    score = np.asarray(ctx.phi1.values)[cells]
    starts.append(_extreme_point(k, I, w, np.argsort(-score, kind="stable")))
    r = 0
    while len(starts) < restarts:
        rng = np.random.default_rng([seed, r])
        starts.append(_extreme_point(k, I, w, rng.permutation(k)))
        r += 1
    return starts[:restarts]


def _axis_coord(model: GroupModel, cell: int) -> float:
    c = model.coord(cell)
    c = c[0] if isinstance(c, tuple) else c
    return float(c)


def _climb(ctx, M, x0, budget, seed, restart, plateau):
    model = ctx.model
    t = ctx.t
    cap = min(1.0, float(x0.sum()) * model.weight)
    x = x0.copy()
    conv = M @ x
    best = ft_norm(model, np.minimum(conv, cap), t)
    rng = np.random.default_rng([seed, restart, 1])
    stale = moves = 0
    for _ in range(budget):
        if stale >= plateau:
            break
        hi = np.flatnonzero(x > 0)
        lo = np.flatnonzero(x < 1)
        if len(hi) == 0 or len(lo) == 0:
            break
        i = int(hi[rng.integers(len(hi))])
        j = int(lo[rng.integers(len(lo))])
        if x[i] == x[j]:
            stale += 1
            continue
        d = x[i] - x[j]
        trial = conv + d * (M[:, j] - M[:, i])
        val = ft_norm(model, np.minimum(trial, cap), t)
        moves += 1
        if val > best:
            x[i], x[j] = x[j], x[i]
            conv, best = trial, val
            stale = 0
        else:
            stale += 1
    return best, x, moves


def estimate_S(ctx: SContext, I: float, budget: int = 2000, seed: int = 0, restarts: int | None = None,
               plateau: int = PLATEAU, threads: int = 1) -> SResult:
    """Best ``||f_t o (phi1 * phi)||`` found over extreme points of ``B(I)``; a lower bound on ``S(I)``.

    Restarts run ``budget // restarts`` moves each; ``budget = 0`` evaluates the
    starting candidates only. The returned value is re-evaluated from scratch.
    """
    model = ctx.model
    if I < 0 or I > model.total_volume * (1 + 1e-12):
        raise SearchError(f"I = {I} outside [0, {model.total_volume}]")
    if I == 0:
        return SResult(0.0, 0.0, StepFn(model, np.zeros(model.size), 1.0), 0, 0, budget == 0)
    cells, M = _columns(ctx)
    n_restart = restarts if restarts is not None else max(8, budget // 250)
    per = budget // n_restart if budget else 0
    starts = _starts(ctx, cells, n_restart, I, seed)

    def run(r):
        return _climb(ctx, M, starts[r], per, seed, r, plateau)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            outs = list(pool.map(run, range(n_restart)))
    else:
        outs = [run(r) for r in range(n_restart)]
    # max, ties to the lowest restart index
    best_r = max(range(n_restart), key=lambda r: (outs[r][0], -r))
    _, x, _ = outs[best_r]
    v = np.zeros(model.size)
    v[cells] = x
    phi = StepFn(model, v, 1.0)
    if abs(phi.norm() - I) > 1e-12 * max(1.0, I):
        raise SearchError("search left the mass face")
    value = evaluate(ctx, phi)
    return SResult(I, value, phi, best_r, sum(o[2] for o in outs), budget == 0, [o[0] for o in outs])


# ---------------------------------------------------------------- properties


def envelope(t: float, I: float) -> float:
    return (1 - t) * (I - t)


def band_top(ctx: SContext) -> float:
    """Largest ``I`` with ``||phi1|| + I <= m + t``, capped at the total volume."""
    return min(ctx.model.total_volume, ctx.model.m_value + ctx.t - 1.0)


def check_S_properties(ctx: SContext, I_grid, budget: int = 2000, seed: int = 0, C: float = DEFAULT_C,
                       scale: float = 1.0, threads: int = 1, results: list | None = None) -> list[CheckReport]:
    """Upper-bound certificates on the estimates.

    For each ``I``: ``S(I) <= (1-t) I``; inside the band ``t <= I <= m + t - 1``
    also ``S(I) <= (1-t)(I-t)``; ``S(t) = 0`` exactly. Consecutive pairs must not
    certify a Lipschitz violation above the envelope.
    """
    t = ctx.t
    grid = sorted(float(I) for I in I_grid)
    res = [estimate_S(ctx, I, budget, seed, threads=threads) for I in grid]
    if results is not None:
        results.extend(res)
    top = band_top(ctx)
    reports = []
    for r in res:
        tau = ctx.tol(r.I, C, scale)
        reports.append(_report("S-linear", r.value, (1 - t) * r.I, tau, "discretization" if tau else "float", VACUOUS,
                               instance_seed=seed, diagnostics={"I": r.I, "t": t}))
        hyp = SATISFIED if t <= r.I <= top * (1 + 1e-12) else VIOLATED
        reports.append(_report("S-envelope", r.value, envelope(t, r.I), tau, "discretization" if tau else "float", hyp,
                               instance_seed=seed, diagnostics={"I": r.I, "t": t, "restart": r.restart, "low_budget": r.low_budget}))
        if r.I == t:
            reports.append(_report("S-zero", r.value, 0.0, 0.0, "exact", VACUOUS, two_sided=True, instance_seed=seed, diagnostics={"I": r.I}))
    for a, b in zip(res, res[1:]):
        if not (t <= a.I <= top * (1 + 1e-12)):
            continue
        tau = ctx.tol(b.I, C, scale)
        reports.append(_report("S-lipschitz", b.value - (b.I - a.I), envelope(t, a.I), tau, "discretization" if tau else "float",
                               SATISFIED, instance_seed=seed, diagnostics={"I": a.I, "I_next": b.I}))
    return reports


def gap_curve(ctx: SContext, I_grid, budget: int = 2000, seed: int = 0, threads: int = 1) -> list[dict]:
    """Rows ``(I, S_hat, bound, gap, budget, seed)`` in ascending ``I``."""
    rows = []
    for I in sorted(float(x) for x in I_grid):
        r = estimate_S(ctx, I, budget, seed, threads=threads)
        bound = envelope(ctx.t, I)
        rows.append({"I": I, "S_hat": r.value, "bound": bound, "gap": bound - r.value, "budget": budget, "seed": seed})
    return rows


def rows_to_csv(rows: list[dict], columns=CSV_COLUMNS) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(row)
    return buf.getvalue()
