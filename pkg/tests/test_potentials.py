import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bnbench.counting import OpCounter
from bnbench.potentials import (
    InconsistencyError,
    PotentialError,
    Variable,
    divide,
    embed,
    from_values,
    identity_over,
    identity_potential,
    identity_scalar,
    iter_configurations,
    make_potential,
    marginalize,
    multiply,
    normalize,
    value_at,
)

A = Variable(0, "A", 2)
B = Variable(1, "B", 2)
T = Variable(2, "T", 2)


class TestMultiply:
    def test_overlapping_domains(self):
        c = OpCounter()
        a = make_potential([A], [0.3, 0.7])
        b = make_potential([A, B], [0.5, 0.5, 0.2, 0.8])
        out = multiply(a, b, c)
        assert out.domain == (0, 1)
        np.testing.assert_allclose(out.values.reshape(-1), [0.15, 0.15, 0.14, 0.56])
        assert c.as_tuple() == (0, 4, 0)

    def test_identity_operand_still_counted(self):
        c = OpCounter()
        out = multiply(make_potential([A], [0.3, 0.7]), identity_potential([A]), c)
        np.testing.assert_allclose(out.values, [0.3, 0.7])
        assert c.mults == 2
        assert not out.is_identity

    def test_disjoint_domains_outer_product(self):
        c = OpCounter()
        out = multiply(
            make_potential([A], [0.3, 0.7]), make_potential([B], [0.1, 0.9]), c
        )
        assert out.domain == (0, 1)
        np.testing.assert_allclose(out.values.reshape(-1), [0.03, 0.27, 0.07, 0.63])
        assert c.mults == 4

    def test_result_domain_order_is_left_then_new(self):
        c = OpCounter()
        a = from_values([2, 1], [2, 2], np.arange(4) + 1.0)
        b = from_values([0, 1], [2, 2], np.arange(4) + 1.0)
        assert multiply(a, b, c).domain == (2, 1, 0)

    def test_scalar_identity_costs_result_size(self):
        c = OpCounter()
        out = multiply(identity_scalar(), make_potential([A, B], np.ones(4)), c)
        assert out.domain == (0, 1)
        assert c.mults == 4


class TestMarginalize:
    def test_sums_out_trailing_variable(self):
        c = OpCounter()
        a = make_potential([A, B], [0.15, 0.15, 0.14, 0.56])
        out = marginalize(a, [0], c)
        np.testing.assert_allclose(out.values, [0.3, 0.7])
        assert c.adds == 2

    def test_full_projection_is_free(self):
        c = OpCounter()
        a = make_potential([A, B], [0.15, 0.15, 0.14, 0.56])
        out = marginalize(a, [0, 1], c)
        np.testing.assert_allclose(out.values, a.values)
        assert c.adds == 0

    def test_cost_is_source_minus_result_size(self):
        c = OpCounter()
        a = from_values([0, 1, 2], [2, 2, 2], np.arange(8, dtype=float))
        marginalize(a, [1], c)
        assert c.adds == 6

    def test_keeps_relative_order_of_source(self):
        c = OpCounter()
        a = from_values([3, 1, 2], [2, 2, 2], np.arange(8, dtype=float))
        out = marginalize(a, [2, 3], c)
        assert out.domain == (3, 2)

    def test_to_empty_domain_gives_total_mass(self):
        c = OpCounter()
        a = make_potential([A, B], [0.15, 0.15, 0.14, 0.56])
        out = marginalize(a, [], c)
        assert out.domain == ()
        np.testing.assert_allclose(out.values, 1.0)
        assert c.adds == 3

    def test_rejects_non_subset(self):
        c = OpCounter()
        a = make_potential([A], [0.5, 0.5])
        with pytest.raises(PotentialError):
            marginalize(a, [1], c)


class TestDivide:
    def test_identity_denominator_skipped(self):
        c = OpCounter()
        num = make_potential([T], [0.4, 0.6])
        out = divide(num, identity_potential([T]), c)
        np.testing.assert_allclose(out.values, [0.4, 0.6])
        assert c.divs == 0
        assert not out.is_identity

    def test_zero_over_zero_is_zero(self):
        c = OpCounter()
        num = make_potential([T], [0.0, 0.5])
        den = make_potential([T], [0.0, 0.25])
        out = divide(num, den, c)
        np.testing.assert_allclose(out.values, [0.0, 2.0])
        assert c.divs == 2

    def test_positive_over_zero_raises(self):
        c = OpCounter()
        num = make_potential([T], [0.5, 0.5])
        den = make_potential([T], [0.0, 0.25])
        with pytest.raises(InconsistencyError):
            divide(num, den, c)

    def test_denominator_broadcast_over_numerator(self):
        c = OpCounter()
        num = from_values([0, 1], [2, 2], [0.2, 0.4, 0.3, 0.9])
        den = from_values([1], [2], [0.1, 0.3])
        out = divide(num, den, c)
        np.testing.assert_allclose(out.values.reshape(-1), [2.0, 4.0 / 3, 3.0, 3.0])
        assert c.divs == 4

    def test_rejects_denominator_outside_numerator(self):
        c = OpCounter()
        with pytest.raises(PotentialError):
            divide(make_potential([A], [1.0, 1.0]), make_potential([B], [1.0, 1.0]), c)


class TestNormalize:
    def test_scales_to_unit_mass(self):
        out = normalize(make_potential([A], [2.0, 2.0]))
        np.testing.assert_allclose(out.values, [0.5, 0.5])

    def test_scalar_case(self):
        out = normalize(from_values([], [], [1.0]))
        np.testing.assert_allclose(out.values, 1.0)

    def test_zero_mass_raises(self):
        with pytest.raises(PotentialError):
            normalize(make_potential([A], [0.0, 0.0]))

    def test_does_not_count(self):
        c = OpCounter()
        normalize(make_potential([A], [2.0, 6.0]))
        assert c.as_tuple() == (0, 0, 0)


class TestIdentity:
    def test_constructors_are_marked(self):
        assert identity_potential([A]).is_identity
        assert identity_scalar().is_identity
        assert identity_over([0, 1], {0: 2, 1: 3}).is_identity

    def test_mark_never_survives_arithmetic(self):
        c = OpCounter()
        i = identity_potential([A])
        assert not multiply(i, i, c).is_identity
        assert not marginalize(i, [0], c).is_identity
        assert not divide(i, i, c).is_identity

    def test_embed_is_uncounted_copy(self):
        c = OpCounter()
        pot = make_potential([A], [0.3, 0.7])
        out = embed(pot, (0, 1), {0: 2, 1: 2})
        assert out.domain == (0, 1)
        np.testing.assert_allclose(out.values.reshape(-1), [0.3, 0.3, 0.7, 0.7])
        assert c.as_tuple() == (0, 0, 0)
        assert not out.is_identity


def _random_potential(rng, ids, cards, positive=False):
    shape = tuple(cards[v] for v in ids)
    vals = rng.uniform(0.1 if positive else 0.0, 1.0, size=shape)
    return from_values(ids, shape, vals)


def _aligned(pot, order):
    perm = [pot.domain.index(v) for v in order]
    return np.transpose(pot.values, perm)


@st.composite
def two_potentials(draw, positive=False):
    cards = {v: draw(st.integers(2, 4)) for v in range(4)}
    ids_a = tuple(draw(st.permutations(sorted(draw(st.sets(st.integers(0, 3), min_size=1))))))
    ids_b = tuple(draw(st.permutations(sorted(draw(st.sets(st.integers(0, 3), min_size=1))))))
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    return (
        _random_potential(rng, ids_a, cards, positive),
        _random_potential(rng, ids_b, cards, positive),
        cards,
    )


class TestProperties:
    @given(two_potentials())
    @settings(max_examples=60, deadline=None)
    def test_multiply_commutes_up_to_domain_order(self, pair):
        a, b, _ = pair
        c = OpCounter()
        ab = multiply(a, b, c)
        ba = multiply(b, a, c)
        assert set(ab.domain) == set(ba.domain)
        np.testing.assert_allclose(_aligned(ba, ab.domain), ab.values, atol=1e-12)

    @given(two_potentials())
    @settings(max_examples=60, deadline=None)
    def test_multiply_cost_is_union_size(self, pair):
        a, b, cards = pair
        c = OpCounter()
        out = multiply(a, b, c)
        assert c.mults == int(np.prod([cards[v] for v in out.domain]))
        assert c.adds == 0 and c.divs == 0

    @given(two_potentials())
    @settings(max_examples=60, deadline=None)
    def test_multiply_matches_pointwise_oracle(self, pair):
        a, b, cards = pair
        c = OpCounter()
        out = multiply(a, b, c)
        for config in iter_configurations(out.domain, cards):
            expect = value_at(a, config) * value_at(b, config)
            assert abs(value_at(out, config) - expect) <= 1e-12

    @given(two_potentials(), st.integers(0, 2**16))
    @settings(max_examples=60, deadline=None)
    def test_projection_composes(self, pair, pick):
        a, _, cards = pair
        rng = np.random.default_rng(pick)
        mid = sorted(rng.choice(a.domain, size=rng.integers(1, len(a.domain) + 1), replace=False))
        inner = sorted(rng.choice(mid, size=rng.integers(1, len(mid) + 1), replace=False))
        c = OpCounter()
        via = marginalize(marginalize(a, mid, c), inner, c)
        direct = marginalize(a, inner, c)
        np.testing.assert_allclose(via.values, direct.values, atol=1e-12)

    @given(two_potentials(positive=True))
    @settings(max_examples=60, deadline=None)
    def test_division_inverts_combination(self, pair):
        a, b, cards = pair
        c = OpCounter()
        prod = multiply(a, b, c)
        back = divide(prod, b, c)
        for config in iter_configurations(back.domain, cards):
            assert abs(value_at(back, config) - value_at(a, config)) <= 1e-12
        assert c.divs == prod.values.size

    @given(two_potentials())
    @settings(max_examples=60, deadline=None)
    def test_marginalize_matches_summation_oracle(self, pair):
        a, _, cards = pair
        keep = a.domain[: max(1, len(a.domain) - 1)]
        c = OpCounter()
        out = marginalize(a, keep, c)
        for config in iter_configurations(keep, cards):
            total = 0.0
            rest = [v for v in a.domain if v not in keep]
            for extra in iter_configurations(rest, cards):
                full = dict(config)
                full.update(extra)
                total += value_at(a, full)
            assert abs(value_at(out, config) - total) <= 1e-9
        assert c.adds == a.values.size - out.values.size


class TestVariable:
    def test_cardinality_floor(self):
        with pytest.raises(ValueError):
            Variable(0, "X", 1)

    def test_make_potential_rejects_bad_shape(self):
        with pytest.raises(PotentialError):
            make_potential([A, B], [1.0, 2.0, 3.0])
