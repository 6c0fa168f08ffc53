import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from convlab import convex as cx
from convlab.corpus import (
    FINITE_ZOO, finite_model, kemperman_corpus, line_instance, random_rational, rearrangement_corpus, split_corpus,
)
from convlab.groups import coset_structure, make_cyclic, make_product, make_real_grid, named_group
from convlab.inequalities import (
    FAIL, PASS, SKIPPED, CheckError, build_split, check_fubini, check_ft_bound, check_kemperman, check_main,
    check_rearrangement_domination, check_split_superadditivity, grid_set, probe_connected_violation,
    quotient_group, rearrange, rearrangement_line, tolerance,
)
from convlab.stepfn import StepFn, indicator, indicator_arcs, indicator_interval, on_fibers

seeds = st.integers(0, 2**32 - 1)


class TestFubini:
    @given(seeds, st.sampled_from(FINITE_ZOO))
    def test_exact_identity(self, seed, name):
        G = finite_model(name)
        rng = np.random.default_rng(seed)
        rep = check_fubini(random_rational(rng, G), random_rational(rng, G))
        assert rep.verdict == PASS and rep.margin == 0

    def test_float_on_circle(self):
        C = make_cyclic(64, 1.0)
        rng = np.random.default_rng(42)
        rep = check_fubini(StepFn(C, rng.random(64)), StepFn(C, rng.random(64)), "fft")
        assert rep.verdict == PASS and abs(rep.margin) <= rep.tol


class TestThresholdBound:
    @given(st.integers(0, 10**6))
    def test_line_instances(self, seed):
        p1, p2, t = line_instance(seed, h=0.05, half_width=3.0)
        assert check_ft_bound(p1, p2, t, seed=seed).verdict == PASS

    def test_finite_exact(self):
        Z6 = make_cyclic(6, 6.0, as_circle=False)
        phi = StepFn(Z6, np.array([Fraction(1, 2)] + [Fraction(0)] * 5, dtype=object))
        rep = check_ft_bound(phi, phi, Fraction(0))
        assert rep.tol_kind == "exact" and rep.lhs == Fraction(1, 4) and rep.rhs == Fraction(1, 4)

    @given(seeds, st.sampled_from(FINITE_ZOO))
    def test_finite_random_exact(self, seed, name):
        G = finite_model(name)
        rng = np.random.default_rng(seed)
        p1 = random_rational(rng, G, max_mass=Fraction(1, 2))
        p2 = random_rational(rng, G, max_mass=Fraction(1, 2))
        t = Fraction(int(rng.integers(0, 5)), 4) * min(p1.norm(), p2.norm())
        rep = check_ft_bound(p1, p2, t)
        assert rep.verdict in (PASS, SKIPPED)
        if rep.hypothesis == "satisfied":
            assert rep.verdict == PASS


class TestMainBound:
    @pytest.mark.parametrize("f, rhs", [(cx.power(2.0), 5 / 3), (cx.entropy(), -0.5), (cx.ft(0.3), 1.19)])
    def test_interval_pair_is_near_tight(self, f, rhs):
        L = make_real_grid(0.01, 3.0)
        I2 = 1.0 if f.family == "entropy" else 2.0
        rep = check_main(indicator_interval(L, 1.0), indicator_interval(L, I2), f)
        assert rep.verdict == PASS
        assert rep.rhs == pytest.approx(rhs)
        assert rep.margin < rep.tol

    def test_operands_swapped(self):
        L = make_real_grid(0.05, 3.0)
        a = check_main(indicator_interval(L, 2.0), indicator_interval(L, 1.0), cx.power(2.0))
        b = check_main(indicator_interval(L, 1.0), indicator_interval(L, 2.0), cx.power(2.0))
        assert a.rhs == pytest.approx(b.rhs) and a.lhs == pytest.approx(b.lhs)

    @given(seeds, st.sampled_from(["Z/5", "Z/8", "S3"]))
    def test_exact_on_finite_groups(self, seed, name):
        G = finite_model(name)
        rng = np.random.default_rng(seed)
        p1 = random_rational(rng, G, max_mass=Fraction(1, 2))
        p2 = random_rational(rng, G, max_mass=Fraction(1, 2))
        rep = check_main(p1, p2, cx.power(2.0))
        assert rep.verdict == (PASS if rep.hypothesis == "satisfied" else SKIPPED)

    def test_hypothesis_violation_skips(self):
        C = make_cyclic(32, 1.0)
        rep = check_main(indicator_arcs(C, [(0, 0.7)]), indicator_arcs(C, [(0, 0.7)]), cx.power(2.0))
        assert rep.hypothesis == "violated" and rep.verdict == SKIPPED

    def test_report_json(self):
        L = make_real_grid(0.05, 3.0)
        doc = check_main(indicator_interval(L, 1.0), indicator_interval(L, 1.0), cx.power(2.0), seed=3).to_json()
        for key in ("statement", "lhs", "rhs", "margin", "tol", "tolerance_kind", "hypothesis", "verdict", "instance_seed"):
            assert key in doc
        json.dumps(doc)


class TestKemperman:
    def test_interval_equality(self):
        L = make_real_grid(0.01, 3.0)
        B = grid_set(L, [(0, 1)])
        rep = check_kemperman(L, B, B)
        assert rep.verdict == PASS and float(rep.rhs) == pytest.approx(2.0)

    def test_disconnected_union(self):
        L = make_real_grid(0.01, 4.0)
        rep = check_kemperman(L, grid_set(L, [(0, 1), (2, 2.5)]), grid_set(L, [(0, 1)]))
        assert float(rep.rhs) == pytest.approx(3.5) and float(rep.lhs) == pytest.approx(2.5)

    def test_finite_groups_skip(self):
        S3 = named_group("S3")
        assert check_kemperman(S3, [0, 1], [0]).verdict == SKIPPED

    def test_corpus(self):
        for case in kemperman_corpus(7, 20):
            assert check_kemperman(case.model, case.B1, case.B2).verdict in (PASS, SKIPPED), case.label

    def test_empty_rejected(self):
        with pytest.raises(CheckError):
            check_kemperman(make_cyclic(8, 1.0), [], [1])


class TestProbe:
    def test_violation_confirmed(self):
        C = make_cyclic(1000, 1.0)
        rep = probe_connected_violation(indicator_arcs(C, [(0, 0.7)]), indicator_arcs(C, [(0.2, 0.9)]), 0.2)
        assert rep.verdict == PASS and "violation-confirmed" in rep.tags
        assert rep.lhs == pytest.approx(0.29, abs=1e-3) and rep.rhs == pytest.approx(0.25)

    def test_requires_excess(self):
        C = make_cyclic(100, 1.0)
        with pytest.raises(CheckError):
            probe_connected_violation(indicator_arcs(C, [(0, 0.3)]), indicator_arcs(C, [(0, 0.3)]), 0.1)

    def test_requires_compact_connected(self):
        L = make_real_grid(0.1, 3.0)
        with pytest.raises(CheckError):
            probe_connected_violation(indicator_interval(L, 1.0), indicator_interval(L, 1.0), 0.1)


class TestSplit:
    def test_identity_branch(self):
        Z4 = make_cyclic(4, 4.0, as_circle=False)
        phi = StepFn(Z4, np.array([Fraction(1, 2), Fraction(3, 10), Fraction(0), Fraction(0)], dtype=object))
        cert = build_split(phi, I1p=Fraction(7, 10))
        assert cert.branch == "identity" and all(cert.invariants().values())
        assert cert.I2p == Fraction(9, 10)

    def test_translate_branch(self):
        C = make_cyclic(64, 1.0)
        phi = indicator_arcs(C, [(0, 0.3)], heights=[0.5])
        cert = build_split(phi, I1p=0.05)
        assert cert.branch == "translate" and cert.g != C.identity
        assert all(cert.invariants().values())
        assert check_split_superadditivity(cert, indicator_arcs(C, [(0.1, 0.5)]), 0.1).verdict == PASS

    def test_discrete_needs_identity_branch(self):
        Z8 = make_cyclic(8, 8.0, as_circle=False)
        with pytest.raises(CheckError, match="h\\(e\\)"):
            build_split(indicator(Z8, [0, 1, 2], exact=True), I1p=Fraction(3, 2))

    def test_mass_out_of_range(self):
        Z4 = make_cyclic(4, 4.0, as_circle=False)
        with pytest.raises(CheckError):
            build_split(indicator(Z4, [0], exact=True), I1p=2)

    @given(st.integers(0, 10**6))
    def test_superadditive_on_corpus(self, seed):
        phi, phi1, t, I1p = split_corpus(seed, 2)[seed % 2]
        cert = build_split(phi, phi1, t, I1p)
        rep = check_split_superadditivity(cert, phi1, t)
        assert rep.verdict == PASS and rep.diagnostics["pointwise_slack"] >= 0
        assert cert.nu1.norm() + cert.nu2.norm() == 2 * phi.norm()


class TestRearrangement:
    def test_quotients(self):
        assert quotient_group(make_product(make_cyclic(8, 1.0), named_group("S3"))).size == 6
        assert quotient_group(make_cyclic(8, 1.0)).size == 1

    def test_rearranged_masses(self):
        P = make_product(make_cyclic(16, 1.0), named_group("Z/2"))
        cs = coset_structure(P)
        phi = on_fibers(P, {0: indicator_arcs(P.conn, [(0, 0.25)]), 1: indicator_arcs(P.conn, [(0.5, 0.625)])})
        star = rearrange(phi, cs, rearrangement_line(1 / 16, 0.25))
        assert star.norm() == pytest.approx(phi.norm())
        v = star.values.reshape(star.model.nc, star.model.nf)
        np.testing.assert_allclose(v[:, 0], v[::-1, 0])

    @pytest.mark.parametrize("case", rearrangement_corpus(5, 4), ids=lambda c: c.fin)
    def test_domination(self, case):
        P, p1, p2 = case.build(32)
        reps = check_rearrangement_domination(p1, p2, case.t, coset_structure(P), deep=True)
        assert {r.verdict for r in reps} <= {PASS, SKIPPED}
        assert reps[-1].statement in ("rearrangement-aggregate", "rearrangement-term")


def test_tolerance_modes():
    L = make_real_grid(0.01, 1.0)
    tau, kind = tolerance(L, 1.0, 2.0, 2.0)
    assert kind == "discretization" and tau == pytest.approx(4 * 0.01 * 3.0 * 2.0)
    assert tolerance(L, 1.0, 2.0, exact=True)[0] == 0
    assert tolerance(named_group("S3"), 1.0, 2.0, rhs=5.0)[0] == pytest.approx(5e-10)


def test_failed_bound_reports_fail():
    L = make_real_grid(0.05, 3.0)
    rep = check_main(indicator_interval(L, 1.0), indicator_interval(L, 1.0), cx.power(2.0), scale=1.0)
    rep2 = type(rep)(rep.statement, rep.lhs + 1.0, rep.rhs, rep.rhs - rep.lhs - 1.0, rep.tol, rep.tol_kind,
                     rep.hypothesis, FAIL)
    assert rep2.verdict == FAIL
