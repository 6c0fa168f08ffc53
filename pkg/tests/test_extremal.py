import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from convlab.convolution import convolve
from convlab.extremal import (
    CSV_COLUMNS, SContext, SearchError, band_top, check_S_properties, envelope, estimate_S, evaluate, ft_norm,
    gap_curve, rows_to_csv,
)
from convlab.groups import make_cyclic, make_real_grid
from convlab.inequalities import PASS, SKIPPED
from convlab.stepfn import StepFn, indicator_arcs, indicator_interval


def brute_force_S(ctx, k):
    """Max over all {0,1} functions with exactly ``k`` cells (``I = k w``)."""
    model = ctx.model
    best = 0.0
    for cells in itertools.combinations(range(model.size), k):
        v = np.zeros(model.size)
        v[list(cells)] = 1.0
        best = max(best, evaluate(ctx, StepFn(model, v)))
    return best


class TestObjective:
    def test_matches_fine_quadrature_of_interpolant(self):
        L = make_real_grid(0.1, 3.0)
        conv = convolve(indicator_interval(L, 1.0), indicator_interval(L, 1.3)).values
        x = (np.arange(L.size) - L.identity) * L.h
        xf = np.linspace(x[0] - L.h, x[-1] + L.h, 400001)
        yf = np.interp(xf, np.concatenate([[x[0] - L.h], x, [x[-1] + L.h]]), np.concatenate([[0], conv, [0]]))
        t = 0.37
        assert ft_norm(L, conv, t) == pytest.approx(np.trapezoid(np.maximum(yf - t, 0), xf), abs=1e-8)

    def test_circle_wraps(self):
        C = make_cyclic(4, 1.0)
        conv = np.array([1.0, 0.0, 0.0, 0.0])
        assert ft_norm(C, conv, 0.0) == pytest.approx(0.25)

    def test_discrete_sums_cells(self):
        Z5 = make_cyclic(5, 5.0, as_circle=False)
        assert ft_norm(Z5, np.array([0.5, 0.2, 0, 0, 0]), 0.1) == pytest.approx(0.5)


class TestContext:
    def test_requires_unit_mass(self):
        C = make_cyclic(16, 2.0)
        with pytest.raises(SearchError):
            SContext(indicator_arcs(C, [(0, 0.5)]), 0.2)

    def test_threshold_range(self):
        C = make_cyclic(16, 2.0)
        with pytest.raises(SearchError):
            SContext(indicator_arcs(C, [(0, 1)]), 1.5)


class TestSearch:
    @pytest.mark.parametrize("k", [2, 3, 5])
    def test_reaches_brute_force_optimum(self, k):
        C = make_cyclic(10, 2.0)
        ctx = SContext(indicator_arcs(C, [(0, 1.0)]), 0.3)
        res = estimate_S(ctx, k * C.weight, budget=2000, seed=0)
        assert res.value == pytest.approx(brute_force_S(ctx, k), abs=1e-12)

    def test_known_circle_value(self):
        C = make_cyclic(40, 2.0)
        ctx = SContext(indicator_arcs(C, [(0, 1.0)]), 0.3)
        assert estimate_S(ctx, 1.3, budget=1000).value == pytest.approx(0.7, abs=1e-12)

    def test_zero_budget_is_flagged(self):
        C = make_cyclic(20, 2.0)
        res = estimate_S(SContext(indicator_arcs(C, [(0, 1.0)]), 0.3), 0.5, budget=0)
        assert res.low_budget and res.moves == 0

    @given(st.floats(0.0, 2.0), st.integers(0, 100))
    def test_value_is_reproducible_and_mass_exact(self, I, seed):
        C = make_cyclic(20, 2.0)
        ctx = SContext(indicator_arcs(C, [(0, 1.0)]), 0.3)
        a = estimate_S(ctx, I, budget=100, seed=seed)
        b = estimate_S(ctx, I, budget=100, seed=seed)
        assert a.value == b.value
        assert a.phi.norm() == pytest.approx(I, abs=1e-12)
        assert a.phi.values.max(initial=0) <= 1.0

    def test_threads_agree(self):
        C = make_cyclic(20, 2.0)
        ctx = SContext(indicator_arcs(C, [(0, 1.0)]), 0.3)
        assert estimate_S(ctx, 0.8, 400, 1, threads=1).value == estimate_S(ctx, 0.8, 400, 1, threads=4).value

    def test_mass_out_of_range(self):
        C = make_cyclic(20, 2.0)
        with pytest.raises(SearchError):
            estimate_S(SContext(indicator_arcs(C, [(0, 1.0)]), 0.3), 2.5)

    @given(st.floats(0.05, 1.0), st.integers(0, 50))
    def test_estimate_below_upper_bound(self, I, seed):
        L = make_real_grid(0.05, 3.0)
        t = 0.25
        ctx = SContext(indicator_interval(L, 1.0), t)
        assert estimate_S(ctx, I, budget=200, seed=seed).value <= (1 - t) * I + ctx.tol(I)


class TestProperties:
    def test_all_pass_on_line(self):
        L = make_real_grid(0.05, 3.0)
        ctx = SContext(indicator_interval(L, 1.0), 0.25)
        reps = check_S_properties(ctx, [0.1, 0.25, 0.5, 1.0, 1.5], budget=400)
        assert {r.verdict for r in reps} <= {PASS, SKIPPED}
        zero = [r for r in reps if r.statement == "S-zero"]
        assert len(zero) == 1 and zero[0].lhs == 0.0

    def test_envelope_skipped_outside_band(self):
        C = make_cyclic(20, 1.0)
        ctx = SContext(indicator_arcs(C, [(0, 1.0)]), 0.3)
        assert band_top(ctx) == pytest.approx(0.3)
        reps = check_S_properties(ctx, [0.6], budget=100)
        env = [r for r in reps if r.statement == "S-envelope"]
        assert env[0].verdict == SKIPPED

    def test_envelope(self):
        assert envelope(0.25, 1.25) == pytest.approx(0.75)


def test_gap_curve_csv():
    L = make_real_grid(0.1, 3.0)
    rows = gap_curve(SContext(indicator_interval(L, 1.0), 0.5), [1.0, 0.5], budget=50, seed=2)
    assert [r["I"] for r in rows] == [0.5, 1.0]
    text = rows_to_csv(rows)
    assert text.splitlines()[0] == ",".join(CSV_COLUMNS) and len(text.splitlines()) == 3
