"""Checkers for the convolution-convexity inequality and the lemmas behind it.

Every checker returns a :class:`CheckReport`. The sign convention is
``margin = rhs - lhs``; a one-sided check passes iff ``margin >= -tol``. The
identity checks (Fubini, closed forms) are two-sided and pass iff
``|margin| <= tol``.

Tolerances:

* exact: ``0``, used on discrete models with Fraction-valued inputs;
* discretization ``tau(h) = C h (||phi1|| + ||phi2||) Lip(f)``, ``C = 4`` by default;
* float: ``1e-10 max(1, |rhs|)`` on discrete models in float mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import convex as cx
from .convolution import convolve, convolve_in_subgroup, tent_value
from .groups import CIRCLE, LINE, CosetStructure, CyclicGroup, FiniteGroup, GroupModel, ProductGroup, make_cyclic, make_product, make_real_grid, named_group
from .stepfn import StepFn, indicator_interval, mass_profile, on_fibers, translate

DEFAULT_C = 4.0
FLOAT_EPS = 1e-10

PASS, FAIL, SKIPPED = "PASS", "FAIL", "SKIPPED"
SATISFIED, VIOLATED, VACUOUS = "satisfied", "violated", "vacuous"


class CheckError(ValueError):
    pass


def _num(x):
    return float(x) if isinstance(x, Fraction) else x


@dataclass
class CheckReport:
    statement: str
    lhs: float
    rhs: float
    margin: float
    tol: float
    tol_kind: str
    hypothesis: str
    verdict: str
    instance_seed: int | None = None
    tags: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def to_json(self) -> dict:
        doc = {
            "statement": self.statement,
            "lhs": _num(self.lhs),
            "rhs": _num(self.rhs),
            "margin": _num(self.margin),
            "tol": _num(self.tol),
            "tolerance_kind": self.tol_kind,
            "hypothesis": self.hypothesis,
            "verdict": self.verdict,
            "instance_seed": self.instance_seed,
        }
        if isinstance(self.lhs, Fraction) or isinstance(self.rhs, Fraction):
            doc["exact"] = {"lhs": str(self.lhs), "rhs": str(self.rhs)}
        if self.tags:
            doc["tags"] = list(self.tags)
        if self.diagnostics:
            doc["diagnostics"] = {k: _jsonable(v) for k, v in self.diagnostics.items()}
        return doc


def _jsonable(v):
    if isinstance(v, Fraction):
        return float(v)
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v


def _report(statement, lhs, rhs, tol, tol_kind, hypothesis, two_sided=False, **kw) -> CheckReport:
    margin = rhs - lhs
    if hypothesis == VIOLATED:
        verdict = SKIPPED
    elif two_sided:
        verdict = PASS if abs(margin) <= tol else FAIL
    else:
        verdict = PASS if margin >= -tol else FAIL
    return CheckReport(statement, lhs, rhs, margin, tol, tol_kind, hypothesis, verdict, **kw)


# ---------------------------------------------------------------- shared pieces


def _same_model(phi1: StepFn, phi2: StepFn) -> GroupModel:
    if phi1.model is not phi2.model:
        raise CheckError("operands live on different models")
    return phi1.model


def _exact_path(phi1: StepFn, phi2: StepFn) -> bool:
    return phi1.model.is_discrete and (phi1.exact or phi2.exact)


def tolerance(model: GroupModel, I1, I2, lip: float = 1.0, C: float = DEFAULT_C, scale: float = 1.0, exact: bool = False, rhs=0.0):
    """``(tol, kind)`` for one instance on ``model``."""
    if exact:
        return Fraction(0), "exact"
    h = model.grid_step
    if h is None:
        return FLOAT_EPS * max(1.0, abs(float(rhs))), "float"
    return scale * C * h * (float(I1) + float(I2)) * lip, "discretization"


def _hyp_leq(lhs, bound) -> str:
    if math.isinf(float(bound)):
        return SATISFIED
    if isinstance(lhs, Fraction):
        return SATISFIED if lhs <= Fraction(bound) else VIOLATED
    return SATISFIED if lhs <= bound * (1 + 1e-12) + 1e-15 else VIOLATED


def compose_norm(f: cx.ConvexFn, conv: StepFn, cap=None, region=None):
    """``||f o conv||`` (optionally over ``region``), clipping values to ``cap`` first in float mode."""
    v = conv.values if region is None else conv.values[np.asarray(region)]
    if conv.exact:
        return sum((f.exact_eval(x) for x in v), Fraction(0)) * conv.weight
    if cap is not None:
        v = np.minimum(v, cap)
    return float(np.sum(f(v))) * conv.weight


def _conv(phi1: StepFn, phi2: StepFn, kernel: str) -> StepFn:
    if _exact_path(phi1, phi2):
        return convolve(phi1.to_exact(), phi2.to_exact())
    return convolve(phi1.to_float(), phi2.to_float(), kernel)


# ---------------------------------------------------------------- Fubini


def check_fubini(phi1: StepFn, phi2: StepFn, kernel: str = "auto", seed=None) -> CheckReport:
    """``||phi1 * phi2|| = ||phi1|| ||phi2||`` (two-sided)."""
    _same_model(phi1, phi2)
    conv = _conv(phi1, phi2, kernel)
    if conv.exact:
        I1, I2 = phi1.to_exact().norm(), phi2.to_exact().norm()
        return _report("fubini", conv.norm(), I1 * I2, Fraction(0), "exact", VACUOUS, two_sided=True, instance_seed=seed)
    rhs = phi1.norm() * phi2.norm()
    return _report("fubini", conv.norm(), rhs, FLOAT_EPS * max(abs(rhs), 1e-300), "float", VACUOUS, two_sided=True, instance_seed=seed)


# ---------------------------------------------------------------- f_t bound and main inequality


def check_ft_bound(phi1: StepFn, phi2: StepFn, t: float, kernel: str = "auto", C: float = DEFAULT_C, scale: float = 1.0, seed=None) -> CheckReport:
    """``||f_t o (phi1*phi2)|| <= (||phi1|| - t)(||phi2|| - t)`` under ``||phi1|| + ||phi2|| <= m + t``."""
    model = _same_model(phi1, phi2)
    exact = _exact_path(phi1, phi2)
    conv = _conv(phi1, phi2, kernel)
    if exact:
        I1, I2 = phi1.to_exact().norm(), phi2.to_exact().norm()
        t = Fraction(t)
    else:
        I1, I2 = phi1.norm(), phi2.norm()
    if t < 0 or t > min(I1, I2) + 1e-12:
        raise CheckError(f"t={float(t)} outside [0, min norm]")
    if exact:
        lhs = sum((max(x - t, Fraction(0)) for x in conv.values), Fraction(0)) * conv.weight
    else:
        lhs = compose_norm(cx.ft(t), conv, cap=min(I1, I2))
    rhs = (I1 - t) * (I2 - t)
    hyp = _hyp_leq(I1 + I2, model.m_value + float(t)) if not exact else _hyp_leq(I1 + I2, _exact_bound(model.m_value, t))
    tol, kind = tolerance(model, I1, I2, 1.0, C, scale, exact, rhs)
    return _report("ft-bound", lhs, rhs, tol, kind, hyp, instance_seed=seed, diagnostics={"t": float(t)})


def _exact_bound(m: float, t):
    return math.inf if math.isinf(m) else Fraction(m) + Fraction(t)


def check_main(phi1: StepFn, phi2: StepFn, f: cx.ConvexFn, kernel: str = "auto", C: float = DEFAULT_C, scale: float = 1.0, seed=None) -> CheckReport:
    """``||f o (phi1*phi2)|| <= 2 int_0^I1 f + (I2 - I1) f(I1)`` under ``I1 + I2 <= m``.

    The operands are swapped when needed so that ``I1 <= I2``.
    """
    model = _same_model(phi1, phi2)
    exact = _exact_path(phi1, phi2) and f.exact_capable
    if exact:
        phi1, phi2 = phi1.to_exact(), phi2.to_exact()
    elif _exact_path(phi1, phi2):
        phi1, phi2 = phi1.to_float(), phi2.to_float()
    I1, I2 = phi1.norm(), phi2.norm()
    swapped = I1 > I2
    if swapped:
        phi1, phi2, I1, I2 = phi2, phi1, I2, I1
    if f.ymax < float(I1) * (1 - 1e-12):
        raise CheckError(f"f is defined on [0, {f.ymax}] but ||phi1|| = {float(I1)}")
    conv = _conv(phi1, phi2, kernel)
    lhs = compose_norm(f, conv, cap=None if exact else I1)
    rhs = cx.rhs_bound_exact(f, I1, I2) if exact else cx.rhs_bound(f, I1, I2)
    hyp = _hyp_leq(I1 + I2, model.m_value)
    lip = cx.lipschitz(f, float(I1)) if not exact else 0.0
    tol, kind = tolerance(model, I1, I2, lip, C, scale, exact, rhs)
    return _report("main", lhs, rhs, tol, kind, hyp, instance_seed=seed, diagnostics={"f": f.label(), "swapped": swapped, "lip": lip})


# ---------------------------------------------------------------- support form


def _support_units(model: GroupModel, positive: np.ndarray) -> int:
    """Continuum support volume of a piecewise-linear convolution, in cell-weight units.

    Discrete models count cells. On grid models the convolution of step functions is
    the linear interpolant of its node values along the connected axis, so a run of
    ``k`` positive nodes carries an open interval of length ``(k + 1) h``.
    """
    shape = model.fiber_shape
    if shape is None:
        return int(positive.sum())
    nc, nf, cyclic = shape
    P = positive.reshape(nc, nf)
    prev = np.roll(P, 1, axis=0)
    if not cyclic:
        prev[0] = False
    runs = int((P & ~prev).sum())
    return int(P.sum()) + runs


def check_kemperman(model: GroupModel, B1, B2, seed=None) -> CheckReport:
    """``vol(supp 1_B1 * 1_B2) >= vol(B1) + vol(B2)`` under ``vol(B1) + vol(B2) <= m``; integer arithmetic only."""
    from .convolution import direct_kernel

    B1 = np.unique(np.asarray(B1, dtype=np.int64))
    B2 = np.unique(np.asarray(B2, dtype=np.int64))
    if len(B1) == 0 or len(B2) == 0:
        raise CheckError("Kemperman sets must be nonempty")
    if B1.min() < 0 or B2.min() < 0 or B1.max() >= model.size or B2.max() >= model.size:
        raise CheckError("cell ids out of range")
    a = np.zeros(model.size, dtype=np.int64)
    b = np.zeros(model.size, dtype=np.int64)
    a[B1] = 1
    b[B2] = 1
    conv = direct_kernel(model, a, b, 1)
    units = _support_units(model, conv > 0)
    w = model.weight_exact
    lhs = (len(B1) + len(B2)) * w
    rhs = units * w
    m = model.m_value
    hyp = SATISFIED if math.isinf(m) or lhs <= Fraction(m) else VIOLATED
    return _report(
        "kemperman", lhs, rhs, Fraction(0), "exact", hyp, instance_seed=seed,
        diagnostics={"support_cells": int((conv > 0).sum()), "support_units": units},
    )


def grid_set(model: GroupModel, intervals) -> np.ndarray:
    """Grid-aligned cell set for a union of intervals ``(a, b)`` on a line or circle model."""
    from .stepfn import interval_cells

    cells = [interval_cells(model, a, b) for a, b in intervals]
    return np.unique(np.concatenate(cells)) if cells else np.array([], dtype=np.int64)


# ---------------------------------------------------------------- necessity probe


def _connected_volume_model(model: GroupModel) -> bool:
    if model.kind == CIRCLE:
        return True
    return isinstance(model, ProductGroup) and model.connected and model.conn.kind == CIRCLE


def probe_connected_violation(phi1: StepFn, phi2: StepFn, t: float, kernel: str = "auto", C: float = DEFAULT_C, scale: float = 1.0, seed=None) -> CheckReport:
    """Demonstrate that the f_t bound fails once ``||phi1|| + ||phi2|| > m + t`` on a compact connected model.

    PASS means the predicted violation was observed: the convolution is at least
    ``I1 + I2 - m`` everywhere, ``||f_t o conv|| = I1 I2 - t m`` and this exceeds
    ``(I1 - t)(I2 - t)`` by more than the tolerance.
    """
    model = _same_model(phi1, phi2)
    if not _connected_volume_model(model):
        raise CheckError("the probe needs a connected compact model (CircleGrid)")
    phi1, phi2 = phi1.to_float(), phi2.to_float()
    I1, I2 = phi1.norm(), phi2.norm()
    m = model.m_value
    excess = I1 + I2 - m
    if not excess > 0 or not 0 < t < excess:
        raise CheckError(f"probe needs I1 + I2 > m and 0 < t < I1 + I2 - m (excess {excess:.6g}, t {t})")
    conv = convolve(phi1, phi2, kernel)
    lhs = compose_norm(cx.ft(t), conv, cap=min(I1, I2))
    rhs = (I1 - t) * (I2 - t)
    closed = I1 * I2 - t * m
    tol, kind = tolerance(model, I1, I2, 1.0, C, scale)
    min_conv = float(conv.values.min())
    confirmed = rhs - lhs < -tol
    closed_ok = abs(lhs - closed) <= tol
    floor_ok = min_conv >= excess - tol
    rep = CheckReport(
        "probe", lhs, rhs, rhs - lhs, tol, kind, VIOLATED,
        PASS if confirmed and closed_ok and floor_ok else FAIL,
        instance_seed=seed,
        tags=["violation-confirmed"] if confirmed else [],
        diagnostics={"closed_form": closed, "min_conv": min_conv, "floor": excess, "t": t},
    )
    return rep


# ---------------------------------------------------------------- submodular split


@dataclass
class SplitCertificate:
    phi: StepFn
    g: int
    nu1: StepFn
    nu2: StepFn
    I1p: float
    I2p: float
    h_g: float
    h_e: float
    branch: str
    precondition: bool

    @property
    def rphi(self) -> StepFn:
        return translate(self.phi, self.g, "right")

    def invariants(self) -> dict:
        """Cellwise sandwich bounds and masses; exact comparisons in exact mode."""
        p, r = self.phi.values, self.rphi.values
        n1, n2 = self.nu1.values, self.nu2.values
        eps = 0 if self.phi.exact else 1e-12
        lo = p * r
        mn = np.minimum(p, r)
        mx = np.maximum(p, r)
        one = 1
        return {
            "nu1_lower": bool(np.all(lo <= n1 + eps)),
            "nu1_upper": bool(np.all(n1 <= mn + eps)),
            "nu2_lower": bool(np.all(mx <= n2 + eps)),
            "nu2_upper": bool(np.all(n2 <= one + eps)),
            "nu1_mass": abs(self.nu1.norm() - self.I1p) <= eps,
            "nu2_mass": abs(self.nu2.norm() - self.I2p) <= eps,
        }


def _h(phi: StepFn, g: int):
    return (phi.values * translate(phi, g, "right").values).sum() * phi.weight


def build_split(phi: StepFn, phi1: StepFn | None = None, t: float | None = None, I1p: float = 0.0, g0_scan=None) -> SplitCertificate:
    """Construct ``g`` in G0 and ``nu1, nu2`` with ``nu1 + nu2 = phi + R_g phi``.

    Exact arithmetic on discrete models. ``phi1`` and ``t`` are accepted for
    call-site symmetry with :func:`check_split_superadditivity`; the construction
    depends only on ``phi`` and ``I1p``.
    """
    model = phi.model
    exact = model.is_discrete
    phi = phi.to_exact() if exact else phi.to_float()
    I = phi.norm()
    I1p = Fraction(I1p) if exact else float(I1p)
    if I1p > I or I1p < 0:
        raise CheckError(f"I1' = {float(I1p)} outside [0, ||phi|| = {float(I)}]")
    m = model.m_value
    precondition = bool(math.isinf(m) or float(I) ** 2 / m < float(I1p))
    v = phi.values
    e = model.identity
    h_e = (v * v).sum() * phi.weight
    if I1p >= h_e:
        g, h_g = e, h_e
        lower, upper = v * v, v
        top = I
        branch = "identity"
    else:
        from .groups import coset_structure

        cs = coset_structure(model)
        scan = cs.g0_cells if g0_scan is None else np.asarray(g0_scan)
        best, nearest = None, []
        for cand in scan:
            cand = int(cand)
            r = translate(phi, cand, "right").values
            hg = (v * r).sum() * phi.weight
            mn = np.minimum(v, r)
            top_c = mn.sum() * phi.weight
            nearest.append((float(hg), float(top_c)))
            if hg <= I1p <= top_c and (best is None or hg > best[1]):
                best = (cand, hg, v * r, mn, top_c)
        if best is None:
            lo_m = max((a for a, _ in nearest if a <= float(I1p)), default=None)
            raise CheckError(f"no g in G0 reaches mass {float(I1p)}; nearest achievable h(g) below it: {lo_m}, h(e) = {float(h_e)}")
        g, h_g, lower, upper, top = best
        branch = "translate"
    lam = (I1p - h_g) / (top - h_g) if top != h_g else (Fraction(1) if exact else 1.0)
    nu1v = lower + lam * (upper - lower)
    if not exact:
        nu1v = np.clip(nu1v, lower, upper)
    r = translate(phi, g, "right").values
    nu2v = v + r - nu1v
    if not exact:
        nu2v = np.clip(nu2v, np.maximum(v, r), 1.0)
    nu1 = StepFn(model, nu1v)
    nu2 = StepFn(model, nu2v)
    return SplitCertificate(phi, g, nu1, nu2, I1p, 2 * I - I1p, h_g, h_e, branch, precondition)


def _xi(phi1: StepFn, nu: StepFn, t) -> np.ndarray:
    conv = _conv(phi1, nu, "direct")
    if conv.exact:
        return np.array([max(x - t, Fraction(0)) for x in conv.values], dtype=object)
    return np.maximum(conv.values - t, 0.0)


def check_split_superadditivity(cert: SplitCertificate, phi1: StepFn, t: float, seed=None) -> CheckReport:
    """``xi_phi + xi_{R_g phi} <= xi_nu1 + xi_nu2`` cellwise and ``2||xi_phi|| <= ||xi_nu1|| + ||xi_nu2||``."""
    exact = cert.phi.exact
    phi1 = phi1.to_exact() if exact else phi1.to_float()
    t = Fraction(t) if exact else float(t)
    xp = _xi(phi1, cert.phi, t)
    xr = _xi(phi1, cert.rphi, t)
    x1 = _xi(phi1, cert.nu1, t)
    x2 = _xi(phi1, cert.nu2, t)
    slack = (x1 + x2 - xp - xr).min()
    w = cert.phi.weight
    lhs = 2 * xp.sum() * w
    rhs = (x1.sum() + x2.sum()) * w
    tol = Fraction(0) if exact else FLOAT_EPS
    inv = cert.invariants()
    rep = _report("split", lhs, rhs, tol, "exact" if exact else "float", SATISFIED, instance_seed=seed,
                  diagnostics={"pointwise_slack": slack, "g": cert.g, "branch": cert.branch, "invariants": inv, "precondition": cert.precondition})
    if slack < -tol or not all(inv.values()):
        rep.verdict = FAIL
    return rep


# ---------------------------------------------------------------- rearrangement


def quotient_group(model: GroupModel) -> GroupModel:
    """``G/G0`` with unit weight: the finite factor of a product, trivial for connected models."""
    if isinstance(model, ProductGroup):
        fin = model.fin
        if isinstance(fin, FiniteGroup):
            return FiniteGroup(fin.table, 1.0, fin.label)
        if isinstance(fin, CyclicGroup):
            return make_cyclic(fin.n, float(fin.n), as_circle=False)
        raise CheckError("unsupported finite factor")
    if model.connected:
        return named_group("trivial")
    raise CheckError("rearrangement needs a product or connected model")


def rearrangement_line(h: float, *masses: float) -> GroupModel:
    """A line grid of step ``h`` wide enough for the rearranged convolution of the given max masses."""
    N = sum(math.ceil(m / (2 * h)) + 1 for m in masses) + 2
    return make_real_grid(h, N * h)


def rearrange(phi: StepFn, cs: CosetStructure, target: GroupModel) -> StepFn:
    """``phi*(x, k) = 1_(-P(k)/2, P(k)/2)(x)`` on ``target x G/G0`` with ``P(k)`` the mass on coset ``k``."""
    if cs is None or cs.model is not phi.model:
        raise CheckError("rearrangement needs the coset structure of phi's model")
    if target.kind != LINE:
        raise CheckError("rearrangement target must be a RealLineGrid")
    Q = quotient_group(phi.model)
    star_model = make_product(target, Q)
    P = [float(x) for x in mass_profile(phi, cs)]
    limit = (2 * target.N + 1) * target.h
    if max(P) > limit * (1 + 1e-12):
        raise CheckError(f"target grid too narrow for coset mass {max(P)}")
    return on_fibers(star_model, {k: indicator_interval(target, p) for k, p in enumerate(P)})


def _star_pair(phi1: StepFn, phi2: StepFn, cs: CosetStructure, target=None):
    h = phi1.model.grid_step
    if h is None:
        raise CheckError("rearrangement domination needs a grid-backed model")
    P1 = [float(x) for x in mass_profile(phi1, cs)]
    P2 = [float(x) for x in mass_profile(phi2, cs)]
    if target is None:
        target = rearrangement_line(h, max(P1), max(P2))
    s1 = rearrange(phi1, cs, target)
    # both operands must share one star model object
    s2 = StepFn(s1.model, rearrange(phi2, cs, target).values, 1.0)
    return s1, s2, P1, P2


def check_rearrangement_domination(
    phi1: StepFn, phi2: StepFn, f, cs: CosetStructure, kernel: str = "auto",
    C: float = DEFAULT_C, scale: float = 1.0, deep: bool = False, target=None, seed=None,
) -> list[CheckReport]:
    """Per-coset ``||f o (phi1*phi2)||_{gG0} <= ||f o (phi1* * phi2*)||_{R x {gG0}}``, then the aggregate.

    ``f`` is a threshold ``t`` or a ConvexFn; the hypothesis is ``I1 + I2 <= m + t``
    for hinges and ``I1 + I2 <= m`` otherwise. ``deep`` adds the per-term bounds
    for thresholds below the rearranged peak.
    """
    model = _same_model(phi1, phi2)
    if not isinstance(f, cx.ConvexFn):
        f = cx.ft(float(f))
    t = f.param if f.family == "ft" else 0.0
    phi1, phi2 = phi1.to_float(), phi2.to_float()
    I1, I2 = phi1.norm(), phi2.norm()
    cap = min(I1, I2)
    hyp = _hyp_leq(I1 + I2, model.m_value + t)
    conv = convolve(phi1, phi2, kernel)
    s1, s2, P1, P2 = _star_pair(phi1, phi2, cs, target)
    sconv = convolve(s1, s2, kernel)
    star = s1.model
    lip = cx.lipschitz(f, cap) if cap > 0 else 0.0
    tol1, kind = tolerance(model, I1, I2, lip, C, scale)
    tol = 2 * tol1
    e_line = star.conn.identity
    t0 = float(sconv.values[star.join(e_line, star.fin.identity)])
    reports = []
    lhs_tot = rhs_tot = 0.0
    for k in range(cs.n_cosets):
        lhs = compose_norm(f, conv, cap, cs.coset_cells(k))
        rhs = compose_norm(f, sconv, cap, star.join(np.arange(star.nc), k))
        lhs_tot += lhs
        rhs_tot += rhs
        reports.append(_report("rearrangement", lhs, rhs, tol, kind, hyp, instance_seed=seed, diagnostics={"coset": k, "t0": t0}))
    reports.append(_report("rearrangement-aggregate", lhs_tot, rhs_tot, tol * cs.n_cosets, kind, hyp, instance_seed=seed, diagnostics={"t0": t0}))
    if deep and f.family == "ft":
        reports.extend(_deep_terms(phi1, phi2, conv, sconv, cs, P1, P2, t, tol, kind, hyp, kernel, seed))
    return reports


def _crossing(xs: np.ndarray, ys: np.ndarray, t: float) -> float:
    """First ``x >= 0`` where the nonincreasing linear interpolant of ``ys`` meets ``t``."""
    below = np.flatnonzero(ys <= t)
    if len(below) == 0:
        return float(xs[-1])
    j = int(below[0])
    if j == 0:
        return 0.0
    y0, y1 = ys[j - 1], ys[j]
    return float(xs[j - 1] + (y0 - t) / (y0 - y1) * (xs[j] - xs[j - 1])) if y0 != y1 else float(xs[j])


def _deep_terms(phi1, phi2, conv, sconv, cs, P1, P2, t, tol, kind, hyp, kernel, seed) -> list[CheckReport]:
    model = phi1.model
    star = sconv.model
    t0 = float(sconv.values[star.join(star.conn.identity, star.fin.identity)])
    if t > t0:
        return []
    line = star.conn
    xs = np.arange(0, line.N + 1) * line.h
    ys = sconv.values[star.join(line.identity + np.arange(0, line.N + 1), star.fin.identity)]
    x0 = _crossing(xs, ys, t)
    g0 = cs.g0_cells
    region = g0[conv.values[g0] >= t]
    out = []
    grid = np.linspace(-x0, x0, 4001)
    for r in cs.coset_reps:
        r = int(r)
        a = P1[int(cs.coset_of[model.inverse(r)])]
        b = P2[int(cs.coset_of[r])]
        t_r = float(tent_value(a, b, x0))
        rhs = float(np.trapezoid(tent_value(a, b, grid) - t_r, grid)) if x0 > 0 else 0.0
        omega = convolve_in_subgroup(translate(phi1, r, "left"), translate(phi2, r, "right"), cs, kernel)
        at = model.compose(model.compose(np.full(len(region), r), region), np.full(len(region), model.inverse(r)))
        lhs = float((omega.values[at] - t_r).sum() * model.weight)
        out.append(_report("rearrangement-term", lhs, rhs, tol, kind, hyp, instance_seed=seed,
                           diagnostics={"rep": r, "x0": x0, "t_rep": t_r, "t0": t0}))
    return out
