"""Convex test functions on ``[0, Ymax]`` with ``f(0) = 0``.

Chord/gap operators, the hinge family ``f_t``, the piecewise-linear
approximation ``f_(n)`` built from hinges, and the right-hand sides
``2 int_0^I1 f + (I2 - I1) f(I1)`` with their closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

SIMPSON_PANELS = 4096


class ConvexFnError(ValueError):
    pass


def eval_ft(t, y):
    """Hinge ``f_t(y) = max(y - t, 0)``; works on arrays and on Fractions."""
    if isinstance(y, np.ndarray) and y.dtype != object:
        return np.maximum(y - t, 0.0)
    if isinstance(y, np.ndarray):
        return np.array([max(v - t, 0) for v in y], dtype=object)
    return max(y - t, 0)


def _xlogx(y):
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(y > 0, y * np.log(np.where(y > 0, y, 1.0)), 0.0)
    return out


@dataclass(frozen=True)
class ConvexFn:
    """A convex function with ``f(0) = 0``.

    ``at_zero`` / ``at_ymax`` override the value exactly at the endpoints, which
    allows the endpoint discontinuities convexity permits; integrals use the
    interior evaluator.
    """

    family: str
    param: float | None = None
    ymax: float = math.inf
    evaluator: Callable | None = None
    antiderivative: Callable | None = None
    breakpoints: tuple | None = None
    at_zero: float | None = None
    at_ymax: float | None = None
    name: str = ""

    # -- evaluation

    def interior(self, y):
        fam, p = self.family, self.param
        if fam == "ft":
            return eval_ft(p, y)
        if fam == "power":
            return np.power(np.asarray(y, dtype=float), p)
        if fam == "negpower":
            return -np.power(np.asarray(y, dtype=float), p)
        if fam == "entropy":
            return _xlogx(y)
        if fam == "linear":
            return p * np.asarray(y, dtype=float)
        if fam == "piecewise_linear":
            ys, fs = self.breakpoints
            return np.interp(np.asarray(y, dtype=float), ys, fs)
        if fam == "custom":
            return np.asarray(self.evaluator(np.asarray(y, dtype=float)), dtype=float)
        raise ConvexFnError(f"unknown family {fam!r}")

    def __call__(self, y):
        out = self.interior(y)
        if self.at_zero is None and self.at_ymax is None:
            return out
        yy = np.asarray(y, dtype=float)
        out = np.array(out, dtype=float)
        if self.at_zero is not None:
            out = np.where(yy == 0, self.at_zero, out)
        if self.at_ymax is not None:
            out = np.where(yy == self.ymax, self.at_ymax, out)
        return out if out.ndim else float(out)

    @property
    def exact_capable(self) -> bool:
        """Whether the function can be evaluated on Fractions without rounding."""
        if self.family == "ft":
            return True
        return self.family in ("power", "linear") and float(self.param).is_integer()

    def exact_eval(self, y: Fraction) -> Fraction:
        if self.family == "ft":
            return max(y - Fraction(self.param), Fraction(0))
        if self.family == "power":
            return y ** int(self.param)
        if self.family == "linear":
            return Fraction(self.param) * y
        raise ConvexFnError(f"{self.family} has no exact evaluator")

    # -- integrals

    def integral(self, b: float) -> float:
        """``int_0^b f(y) dy``: closed form when known, composite Simpson otherwise."""
        fam, p = self.family, self.param
        if b <= 0:
            return 0.0
        if fam == "ft":
            return 0.5 * max(b - p, 0.0) ** 2
        if fam == "power":
            return b ** (p + 1) / (p + 1)
        if fam == "negpower":
            return -(b ** (p + 1)) / (p + 1)
        if fam == "entropy":
            return 0.5 * b * b * math.log(b) - 0.25 * b * b
        if fam == "linear":
            return 0.5 * p * b * b
        if self.antiderivative is not None:
            return float(self.antiderivative(b)) - float(self.antiderivative(0.0))
        return simpson(self.interior, 0.0, b)

    def to_spec(self) -> dict:
        if self.family in ("custom",):
            return {"family": "custom", "name": self.name}
        if self.family == "piecewise_linear":
            ys, fs = self.breakpoints
            return {"family": self.family, "ys": list(ys), "fs": list(fs)}
        d = {"family": self.family}
        if self.param is not None:
            d["t" if self.family == "ft" else "p"] = self.param
        return d

    def label(self) -> str:
        if self.name:
            return self.name
        if self.family == "ft":
            return f"f_t(t={self.param:g})"
        if self.family == "power":
            return f"y^{self.param:g}"
        if self.family == "negpower":
            return f"-y^{self.param:g}"
        if self.family == "entropy":
            return "y log y"
        return self.family


def simpson(fn: Callable, a: float, b: float, panels: int = SIMPSON_PANELS) -> float:
    x = np.linspace(a, b, panels + 1)
    y = np.asarray(fn(x), dtype=float)
    hstep = (b - a) / panels
    return float(hstep / 3 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum()))


# ---------------------------------------------------------------- constructors


def ft(t: float) -> ConvexFn:
    if t < 0:
        raise ConvexFnError("threshold t must be nonnegative")
    return ConvexFn("ft", float(t))


def power(p: float) -> ConvexFn:
    if p < 1:
        raise ConvexFnError("y^p is convex only for p >= 1")
    return ConvexFn("power", float(p))


def negpower(p: float) -> ConvexFn:
    if not 0 < p <= 1:
        raise ConvexFnError("-y^p is convex only for 0 < p <= 1")
    return ConvexFn("negpower", float(p))


def entropy() -> ConvexFn:
    return ConvexFn("entropy")


def linear(c: float) -> ConvexFn:
    return ConvexFn("linear", float(c))


def piecewise_linear(ys, fs) -> ConvexFn:
    ys = tuple(float(y) for y in ys)
    fs = tuple(float(v) for v in fs)
    if ys[0] != 0 or fs[0] != 0:
        raise ConvexFnError("piecewise-linear function must start at (0, 0)")
    if any(b <= a for a, b in zip(ys, ys[1:])):
        raise ConvexFnError("breakpoints must be strictly increasing")
    slopes = np.diff(fs) / np.diff(ys)
    if np.any(np.diff(slopes) < -1e-12):
        raise ConvexFnError("piecewise-linear slopes must be nondecreasing")
    return ConvexFn("piecewise_linear", breakpoints=(ys, fs), ymax=ys[-1])


def custom(fn: Callable, antiderivative: Callable | None = None, name: str = "custom", **kw) -> ConvexFn:
    """Wrap an evaluator; rejected unless it passes the sampled convexity test on its domain."""
    f = ConvexFn("custom", evaluator=fn, antiderivative=antiderivative, name=name, **kw)
    if not is_convex(f, f.ymax if math.isfinite(f.ymax) else 1.0, tol=1e-12):
        raise ConvexFnError(f"{name} fails the sampled convexity test")
    return f


def kemperman_fn() -> ConvexFn:
    """0 at 0 and -1 for y > 0: the step function that turns the main bound into a support bound."""
    return ConvexFn("custom", evaluator=lambda y: -np.ones_like(y), at_zero=0.0, name="kemperman")


def from_spec(spec: dict) -> ConvexFn:
    fam = spec.get("family")
    if fam in ("ft", "hinge"):
        return ft(float(spec["t"]))
    if fam == "power":
        return power(float(spec["p"]))
    if fam == "negpower":
        return negpower(float(spec["p"]))
    if fam == "entropy":
        return entropy()
    if fam == "linear":
        return linear(float(spec.get("c", spec.get("p", 1.0))))
    if fam == "piecewise_linear":
        return piecewise_linear(spec["ys"], spec["fs"])
    raise ConvexFnError(f"unknown function spec {spec!r}")


BUILTINS = {
    "square": lambda: power(2.0),
    "entropy": entropy,
    "negsqrt": lambda: negpower(0.5),
}


# ---------------------------------------------------------------- chords


def chord(f: ConvexFn, y1: float, y2: float, y):
    """``((y2 - y) f(y1) + (y - y1) f(y2)) / (y2 - y1)``."""
    y_arr = np.asarray(y, dtype=float)
    if not y1 < y2:
        raise ConvexFnError("chord needs y1 < y2")
    if np.any(y_arr < y1) or np.any(y_arr > y2):
        raise ConvexFnError("chord point outside [y1, y2]")
    return ((y2 - y_arr) * f(y1) + (y_arr - y1) * f(y2)) / (y2 - y1)


def gap(f: ConvexFn, y1: float, y2: float, y):
    """Chord minus function; nonnegative for convex ``f``."""
    return chord(f, y1, y2, y) - f(y)


def is_convex(f: ConvexFn, ymax: float = 1.0, points: int = 1024, tol: float = 1e-12) -> bool:
    """Grid convexity: consecutive chord slopes are nondecreasing.

    On a grid this is equivalent to ``f <= chord`` for every grid triple.
    """
    y = np.linspace(0.0, ymax, points)
    v = np.asarray(f(y), dtype=float)
    d = np.diff(v) / np.diff(y)
    return bool(np.all(np.diff(d) * (y[1] - y[0]) >= -tol))


def lipschitz(f: ConvexFn, ymax: float, points: int = 1024) -> float:
    """Largest absolute chord slope of ``f`` on a uniform grid of ``[0, ymax]``."""
    if ymax <= 0:
        return 0.0
    y = np.linspace(0.0, ymax, points + 1)
    v = np.asarray(f.interior(y), dtype=float)
    return float(np.max(np.abs(np.diff(v))) / (ymax / points))


# ---------------------------------------------------------------- f_(n)


def pl_weights(f: ConvexFn, n: int) -> tuple[float, np.ndarray]:
    """Slope ``n f(1/n)`` and hinge coefficients ``2n fhat_{(k-1)/n}^{(k+1)/n}(k/n)``, k=1..n-1."""
    if n < 1:
        raise ConvexFnError("n must be at least 1")
    grid = np.arange(n + 1) / n
    fv = np.asarray(f(grid), dtype=float)
    second = 0.5 * (fv[:-2] + fv[2:]) - fv[1:-1]
    return n * fv[1], 2 * n * second


def pl_approx(f: ConvexFn, n: int, y, method: str = "sum"):
    """Piecewise-linear approximation ``f_(n)`` on ``[0, 1]``.

    ``sum``: ``n(f(1/n) y + 2 sum_k fhat(k/n) f_{k/n}(y))``; ``chord``: the chord
    of ``f`` on the cell ``[(j-1)/n, j/n]`` containing ``y``.
    """
    y = np.asarray(y, dtype=float)
    if n < 1:
        raise ConvexFnError("n must be at least 1")
    if method == "sum":
        slope, coef = pl_weights(f, n)
        knots = np.arange(1, n) / n
        hinge = np.maximum(y[..., None] - knots, 0.0)
        out = slope * y + (hinge * coef).sum(axis=-1)
    elif method == "chord":
        j = np.clip(np.ceil(y * n), 1, n)
        a, b = (j - 1) / n, j / n
        out = (b - y) * n * np.asarray(f(a), dtype=float) + (y - a) * n * np.asarray(f(b), dtype=float)
    else:
        raise ConvexFnError(f"unknown method {method!r}")
    return out if out.ndim else float(out)


def pl_close_bound(f: ConvexFn, n: int, y):
    """``f(y) + fhat_0^1(y) / (4 n y (1 - y))`` for ``0 < y < 1``."""
    y = np.asarray(y, dtype=float)
    return f(y) + gap(f, 0.0, 1.0, y) / (4 * n * y * (1 - y))


def rescale(f: ConvexFn, scale: float) -> ConvexFn:
    """``y -> f(scale*y)`` on ``[0, 1]`` (normalization to unit mass)."""
    return custom(
        lambda y: f(scale * np.asarray(y)),
        antiderivative=(lambda b: f.integral(scale * b) / scale),
        name=f"{f.label()}(x{scale:g})",
        ymax=1.0,
    )


# ---------------------------------------------------------------- right-hand sides


def rhs_bound(f: ConvexFn, I1: float, I2: float) -> float:
    """``2 int_0^I1 f + (I2 - I1) f(I1)`` (the value at the tent extremizer)."""
    if I1 > I2:
        raise ConvexFnError("rhs_bound needs I1 <= I2")
    if I1 <= 0:
        return 0.0
    return 2 * f.integral(I1) + (I2 - I1) * float(f(I1))


def rhs_bound_exact(f: ConvexFn, I1: Fraction, I2: Fraction) -> Fraction:
    """Exact right-hand side for hinge and integer-power functions."""
    if f.family == "ft":
        t = Fraction(f.param)
        if t <= I1:
            return (I1 - t) * (I2 - t)
        return Fraction(0)
    if f.family in ("power", "linear") and f.exact_capable:
        p = int(f.param) if f.family == "power" else 1
        c = 1 if f.family == "power" else Fraction(f.param)
        return c * (2 * I1 ** (p + 1) / (p + 1) + (I2 - I1) * I1**p)
    raise ConvexFnError(f"{f.family} has no exact right-hand side")


def lp_bound(p: float, I1: float, I2: float, sign: str = "convex") -> float:
    """Closed forms ``I1^p (I2 - (p-1) I1/(p+1))`` and ``I1^p (I2 + (1-p) I1/(p+1))``.

    These bound ``int (phi1*phi2)^p`` from above (``convex``, ``p >= 1``) or
    from below (``concave``, ``0 < p <= 1``).
    """
    if I1 > I2:
        raise ConvexFnError("lp_bound needs I1 <= I2")
    if sign == "convex":
        if p < 1:
            raise ConvexFnError("convex branch needs p >= 1")
        return I1**p * (I2 - (p - 1) * I1 / (p + 1))
    if sign == "concave":
        if not 0 < p <= 1:
            raise ConvexFnError("concave branch needs 0 < p <= 1")
        return I1**p * (I2 + (1 - p) * I1 / (p + 1))
    raise ConvexFnError(f"sign must be 'convex' or 'concave', got {sign!r}")
