"""Haar-weighted convolution ``phi1 * phi2 (g) = sum_g' phi1(g') phi2(g'^-1 g) w``.

The direct kernel is the definition; it also runs on Fraction (object) arrays
and on integer arrays, which is how exact mode works. The FFT kernel is an
accelerator for cyclic carriers, real-line grids and products over them.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .groups import CIRCLE, FINITE, LINE, CosetStructure, CyclicGroup, GroupModel, ProductGroup
from .stepfn import StepFn, translate

FFT_AUTO_MIN = 512


class ConvolutionError(ValueError):
    pass


class ConvolutionOverflow(ConvolutionError):
    """Convolution mass would land outside a RealLineGrid carrier."""


def direct_kernel(model: GroupModel, v1: np.ndarray, v2: np.ndarray, w=1):
    """Scatter form: for each ``a`` in supp(v1), add ``v1[a] w v2[b]`` at cell ``a*b``.

    Cells are visited in increasing order, so float results are reproducible.
    Works for float, int and Fraction-object arrays.
    """
    if v1.dtype == object or v2.dtype == object:
        out = np.array([Fraction(0)] * model.size, dtype=object)
    else:
        out = np.zeros(model.size, dtype=np.result_type(v1.dtype, v2.dtype, type(w)))
    nz2 = v2 != 0
    for a in np.flatnonzero(v1 != 0):
        tgt = model.left_targets(int(a))
        valid = tgt >= 0
        if not valid.all() and np.any(nz2 & ~valid):
            raise ConvolutionOverflow("convolution support leaves the grid; widen half_width")
        coef = v1[a] * w
        if valid.all():
            out[tgt] += coef * v2
        else:
            out[tgt[valid]] += coef * v2[valid]
    return out


def _same_model(phi1: StepFn, phi2: StepFn) -> GroupModel:
    if phi1.model is not phi2.model:
        raise ConvolutionError("convolution operands live on different models")
    return phi1.model


def fft_supported(model: GroupModel) -> bool:
    if isinstance(model, CyclicGroup):
        return True
    if model.kind == LINE:
        return True
    return isinstance(model, ProductGroup)


def convolve(phi1: StepFn, phi2: StepFn, kernel: str = "direct") -> StepFn:
    """Convolution on the common model. ``kernel`` is ``direct``, ``fft`` or ``auto``.

    Exact operands always use the direct kernel. The result carries no range cap.
    """
    model = _same_model(phi1, phi2)
    if phi1.exact or phi2.exact:
        a, b = phi1.to_exact(), phi2.to_exact()
        return StepFn(model, direct_kernel(model, a.values, b.values, model.weight_exact))
    if kernel == "auto":
        kernel = "fft" if fft_supported(model) and model.size >= FFT_AUTO_MIN else "direct"
    if kernel == "fft":
        return convolve_fft(phi1, phi2)
    if kernel != "direct":
        raise ConvolutionError(f"unknown kernel {kernel!r}")
    return StepFn(model, direct_kernel(model, phi1.values, phi2.values, model.weight))


# ---------------------------------------------------------------- FFT kernel


def _line_support_check(n: int, N: int, s1: np.ndarray, s2: np.ndarray) -> None:
    """Overflow pre-check from support extents (indices along a line axis of length n)."""
    if len(s1) == 0 or len(s2) == 0:
        return
    lo = (s1.min() - N) + (s2.min() - N)
    hi = (s1.max() - N) + (s2.max() - N)
    if lo < -N or hi > N:
        raise ConvolutionOverflow("convolution support leaves the grid; widen half_width")


def _axis_conv(F1: np.ndarray, F2: np.ndarray, n: int, line_N: int | None) -> np.ndarray:
    """Inverse transform of a spectral product, mapped back onto the carrier axis."""
    if line_N is None:
        return np.fft.irfft(F1 * F2, n=n, axis=0)
    L = F1.shape[0]
    full = np.fft.irfft(F1 * F2, n=2 * (L - 1), axis=0)
    # linear index k <-> position k - 2N; keep positions in [-N, N]
    return full[line_N : line_N + n]


def _spectra(v: np.ndarray, n: int, line: bool) -> np.ndarray:
    if not line:
        return np.fft.rfft(v, axis=0)
    size = 1 << int(np.ceil(np.log2(2 * n)))
    return np.fft.rfft(v, n=size, axis=0)


def convolve_fft(phi1: StepFn, phi2: StepFn) -> StepFn:
    """FFT convolution (cyclic, zero-padded line, or fiberwise over a finite factor)."""
    model = _same_model(phi1, phi2)
    if not fft_supported(model):
        raise ConvolutionError(f"FFT kernel does not support {model.kind} models")
    v1 = np.asarray(phi1.values, dtype=np.float64)
    v2 = np.asarray(phi2.values, dtype=np.float64)
    if isinstance(model, ProductGroup):
        nc, nf = model.nc, model.nf
        conn, fin = model.conn, model.fin
    else:
        nc, nf = model.size, 1
        conn, fin = model, None
    line = conn.kind == LINE
    A = v1.reshape(nc, nf)
    B = v2.reshape(nc, nf)
    if line:
        s1 = np.flatnonzero(A.any(axis=1))
        s2 = np.flatnonzero(B.any(axis=1))
        _line_support_check(nc, conn.N, s1, s2)
    FA = _spectra(A, nc, line)
    FB = _spectra(B, nc, line)
    line_N = conn.N if line else None
    if fin is None:
        out = _axis_conv(FA[:, 0], FB[:, 0], nc, line_N)
    else:
        # out(x, c) = sum_b (A[:, b] conv B[:, b^-1 c])(x)
        spec = np.zeros((FA.shape[0], nf), dtype=complex)
        active = [b for b in range(nf) if A[:, b].any()]
        for c in range(nf):
            for b in active:
                d = int(fin.compose(fin.inverse(b), c))
                spec[:, c] += FA[:, b] * FB[:, d]
        out = _axis_conv(spec, np.ones_like(spec), nc, line_N)
    out = np.asarray(out).reshape(-1) * model.weight
    # exact zeros of the direct kernel show up as +-1e-17 noise; clamp negatives only
    return StepFn(model, np.maximum(out, 0.0))


# ---------------------------------------------------------------- subgroup and coset forms


def convolve_in_subgroup(phi1: StepFn, phi2: StepFn, cs: CosetStructure, kernel: str = "auto") -> StepFn:
    """``phi1 *_{G0} phi2`` on G0, returned on the full model (zero off G0)."""
    if cs is None:
        raise ConvolutionError("subgroup convolution needs a coset structure")
    model = _same_model(phi1, phi2)
    mask = cs.in_g0()

    def restrict(phi):
        v = phi.values.copy()
        v[~mask] = Fraction(0) if phi.exact else 0.0
        return StepFn(model, v)

    return convolve(restrict(phi1), restrict(phi2), kernel)


def coset_decompose_convolution(phi1: StepFn, phi2: StepFn, cs: CosetStructure, g: int, kernel: str = "auto") -> list:
    """Per-coset terms ``(L_r phi1) *_{G0} (R_r phi2)(r g r^-1)`` over coset representatives ``r``.

    The terms sum to ``phi1 * phi2 (g)`` for ``g`` in G0.
    """
    model = _same_model(phi1, phi2)
    if not cs.in_g0()[g]:
        raise ConvolutionError(f"cell {g} is not in G0")
    terms = []
    for r in cs.coset_reps:
        r = int(r)
        omega = convolve_in_subgroup(translate(phi1, r, "left"), translate(phi2, r, "right"), cs, kernel)
        at = int(model.compose(model.compose(r, g), model.inverse(r)))
        terms.append(omega.values[at])
    return terms


# ---------------------------------------------------------------- closed form on the line


def tent_value(I1, I2, x, swap: bool = True):
    """Exact ``phi_(I1) * phi_(I2)`` on the real line (the tent/trapezoid)."""
    I1 = np.asarray(I1, dtype=float)
    I2 = np.asarray(I2, dtype=float)
    if np.any(I1 > I2):
        if not swap:
            raise ConvolutionError("tent_value needs I1 <= I2")
        I1, I2 = np.minimum(I1, I2), np.maximum(I1, I2)
    c = (I2 - I1) / 2
    cp = (I1 + I2) / 2
    ax = np.abs(np.asarray(x, dtype=float))
    out = np.where(ax <= c, I1, np.where(ax <= cp, cp - ax, 0.0))
    return out if out.ndim else float(out)


def tent_integral(I1: float, I2: float) -> float:
    """``int psi_{I1,I2} = I1*I2``."""
    return I1 * I2
