import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from convlab.groups import (
    CIRCLE, FINITE, GroupModelError, coset_structure, cyclic_table, enumerate_subgroups, make_cyclic,
    make_finite_cayley, make_product, make_real_grid, model_from_spec, named_group, symmetric_table, verify_axioms,
)
from convlab.stepfn import StepFn, mass_profile

NON_ASSOCIATIVE_LOOP = [[0, 1, 2, 3, 4], [1, 0, 3, 4, 2], [2, 4, 0, 1, 3], [3, 2, 4, 0, 1], [4, 3, 1, 2, 0]]


def subgroup_volumes(model):
    return sorted(len(H) * model.weight for H in enumerate_subgroups(model))


class TestConstructors:
    def test_circle_weights(self):
        C = make_cyclic(8, 1.0)
        assert C.kind == CIRCLE and C.size == 8
        assert C.weight == 0.125 and C.m_value == 1.0 and C.connected

    def test_discrete_cyclic_m_value(self):
        Z5 = make_cyclic(5, 5.0, as_circle=False)
        assert Z5.kind == FINITE and Z5.weight == 1.0 and Z5.m_value == 1.0
        assert subgroup_volumes(Z5) == [1.0, 5.0]

    def test_z6_subgroup_volumes(self):
        Z6 = make_cyclic(6, 6.0, as_circle=False)
        assert Z6.m_value == 1.0
        assert subgroup_volumes(Z6) == [1.0, 2.0, 3.0, 6.0]

    def test_s3_subgroups(self):
        assert sorted(len(H) for H in enumerate_subgroups(named_group("S3"))) == [1, 2, 2, 2, 3, 6]

    def test_s3_is_nonabelian(self):
        T = symmetric_table(3)
        assert not np.array_equal(T, T.T)

    def test_line_grid(self):
        L = make_real_grid(0.01, 4.0)
        assert L.size == 801 and math.isinf(L.m_value) and L.identity == 400
        assert make_real_grid(0.5, 1.0).size == 5

    def test_line_overflow_marker(self):
        L = make_real_grid(1.0, 2.0)
        assert L.compose(4, 3) == -1
        assert L.compose(4, 1) == 3
        assert L.compose(2, 3) == 3

    def test_exact_weight_is_snapped(self):
        from fractions import Fraction

        assert make_real_grid(0.01, 1.0).weight_exact == Fraction(1, 100)
        assert make_cyclic(6, 1.0).weight_exact == Fraction(1, 6)
        assert make_cyclic(3, 3.0, as_circle=False).weight_exact == 1

    def test_product(self):
        P = make_product(make_cyclic(16, 1.0), named_group("Z/2"))
        assert P.size == 32 and P.m_value == 1.0 and not P.connected
        assert make_product(make_real_grid(0.1, 1.0), named_group("S3")).m_value == math.inf

    @pytest.mark.parametrize("n, vol", [(0, 1.0), (3, 0.0), (-2, 1.0)])
    def test_bad_cyclic(self, n, vol):
        with pytest.raises(GroupModelError):
            make_cyclic(n, vol)

    def test_product_needs_connected_first(self):
        with pytest.raises(GroupModelError):
            make_product(named_group("S3"), named_group("Z/2"))


class TestCayleyValidation:
    def test_valid_tables(self):
        for T in (cyclic_table(7), symmetric_table(3)):
            verify_axioms(make_finite_cayley(T))

    def test_latin_square_failure(self):
        with pytest.raises(GroupModelError, match="row|column|Latin"):
            make_finite_cayley([[0, 1, 2], [1, 0, 2], [2, 2, 0]])

    def test_associativity_failure_names_axiom(self):
        with pytest.raises(GroupModelError, match="associ"):
            make_finite_cayley(NON_ASSOCIATIVE_LOOP)

    def test_non_square(self):
        with pytest.raises(GroupModelError):
            make_finite_cayley([[0, 1]])

    def test_axioms_on_grids(self):
        verify_axioms(make_cyclic(12, 3.0))
        verify_axioms(make_real_grid(0.1, 2.0))
        verify_axioms(make_product(make_cyclic(6, 1.0), named_group("S3")))


class TestSpecs:
    @pytest.mark.parametrize("spec, size", [
        ({"kind": "circle", "n": 12, "volume": 2.0}, 12),
        ({"kind": "cyclic", "n": 6}, 6),
        ({"kind": "line", "h": 0.1, "half_width": 1.0}, 21),
        ({"kind": "finite", "cayley": "S3"}, 6),
        ({"kind": "finite", "cayley": [[0, 1], [1, 0]], "weight": 0.5}, 2),
        ({"kind": "product", "product": {"connected": {"kind": "circle", "n": 4}, "finite": {"kind": "finite", "cayley": "S3"}}}, 24),
    ])
    def test_model_from_spec(self, spec, size):
        assert model_from_spec(spec).size == size

    def test_unknown_kind(self):
        with pytest.raises(GroupModelError):
            model_from_spec({"kind": "torus"})


class TestCosets:
    def test_product_cosets(self):
        P = make_product(make_cyclic(8, 1.0), named_group("S3"))
        cs = coset_structure(P)
        assert cs.n_cosets == 6 and cs.g0_volume == pytest.approx(1.0)

    def test_finite_subgroup_cosets(self):
        S3 = named_group("S3")
        H = next(h for h in enumerate_subgroups(S3) if len(h) == 3)
        cs = coset_structure(S3, sorted(H))
        assert cs.n_cosets == 2

    def test_non_subgroup_rejected(self):
        S3 = named_group("S3")
        with pytest.raises(GroupModelError):
            coset_structure(S3, [0, 1, 2, 3])

    @given(st.integers(0, 2**32 - 1))
    def test_norm_splits_over_cosets(self, seed):
        P = make_product(make_cyclic(6, 1.0), named_group("S3"))
        cs = coset_structure(P)
        phi = StepFn(P, np.random.default_rng(seed).random(P.size))
        assert mass_profile(phi, cs).sum() == pytest.approx(phi.norm(), rel=1e-12)


@given(st.integers(1, 40), st.data())
def test_cyclic_compose_inverse(n, data):
    G = make_cyclic(n, 1.0)
    a = data.draw(st.integers(0, n - 1))
    b = data.draw(st.integers(0, n - 1))
    assert G.compose(a, G.inverse(a)) == G.identity
    assert G.compose(G.compose(a, b), G.inverse(b)) == a
