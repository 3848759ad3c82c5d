import itertools

import pytest
from hypothesis import given, settings, strategies as st

from relog.errors import WmcSupportTooLargeError
from relog.provenance import (
    DnfTag, MinMaxProbContext, TopKProofsContext, UnitContext,
)


def make_ctx(k=3, probs=()):
    ctx = TopKProofsContext(k)
    for p in probs:
        ctx.var_table.add_var(p)
    return ctx


def tag(*proofs):
    return DnfTag(frozenset(frozenset(p) for p in proofs))


class TestTagOr:
    def test_subsumption(self):
        ctx = make_ctx(probs=[0.5, 0.5])
        assert ctx.tag_or(tag([(0, True)]), tag([(0, True), (1, True)])) == tag([(0, True)])

    def test_minmax_or_is_max(self):
        assert MinMaxProbContext().tag_or(0.3, 0.4) == 0.4

    def test_top1_prunes_by_proof_probability(self):
        ctx = make_ctx(k=1, probs=[0.3, 0.4])
        assert ctx.tag_or(ctx.from_var(0), ctx.from_var(1)) == tag([(1, True)])


class TestTagAnd:
    def test_union(self):
        ctx = make_ctx(probs=[0.5, 0.5])
        assert ctx.tag_and(tag([(0, True)]), tag([(1, True)])) == \
            tag([(0, True), (1, True)])

    def test_contradiction_drops_proof(self):
        ctx = make_ctx(probs=[0.5])
        assert ctx.tag_and(tag([(0, True)]), tag([(0, False)])) == ctx.zero()

    def test_categorical_mutual_exclusion(self):
        ctx = make_ctx()
        g = ctx.var_table.add_categorical([0.9, 0.1])
        assert ctx.tag_and(ctx.from_var(g[0]), ctx.from_var(g[1])) == ctx.zero()

    def test_minmax_and_is_min(self):
        assert MinMaxProbContext().tag_and(0.3, 0.4) == 0.3


class TestRecover:
    def test_single_var(self):
        ctx = make_ctx(probs=[0.5])
        assert ctx.recover_probability(ctx.from_var(0)) == pytest.approx(0.5)

    def test_two_disjoint_proofs(self):
        ctx = make_ctx(probs=[0.3, 0.4])
        t = ctx.tag_or(ctx.from_var(0), ctx.from_var(1))
        assert ctx.recover_probability(t) == pytest.approx(0.58, abs=1e-12)

    def test_shared_variable(self):
        ctx = make_ctx(probs=[0.5, 0.5, 0.5])
        t = ctx.tag_or(ctx.tag_and(ctx.from_var(0), ctx.from_var(1)),
                       ctx.tag_and(ctx.from_var(0), ctx.from_var(2)))
        assert ctx.recover_probability(t) == pytest.approx(0.375, abs=1e-12)

    def test_support_cap(self):
        ctx = make_ctx(k=64, probs=[0.5] * 20)
        t = ctx.zero()
        for v in range(20):
            t = ctx.tag_or(t, ctx.from_var(v))
        with pytest.raises(WmcSupportTooLargeError):
            ctx.recover_probability(t, wmc_var_cap=18)

    def test_unit_and_minmax(self):
        assert UnitContext().recover_probability(True) is None
        assert MinMaxProbContext().recover_probability(0.7) == 0.7

    def test_negative_literals(self):
        ctx = make_ctx(probs=[0.3])
        t = tag([(0, False)])
        assert ctx.recover_probability(t) == pytest.approx(0.7)


class TestSaturation:
    def test_unit(self):
        ctx = UnitContext()
        assert ctx.tag_saturated(True, True)

    def test_topk_growth_not_saturated(self):
        ctx = make_ctx(probs=[0.5, 0.5])
        a = tag([(0, True)])
        b = tag([(0, True)], [(1, True)])
        assert not ctx.tag_saturated(a, b)

    def test_topk_order_insensitive(self):
        ctx = make_ctx(probs=[0.5, 0.5])
        a = tag([(0, True)], [(1, True)])
        b = tag([(1, True)], [(0, True)])
        assert ctx.tag_saturated(a, b)

    def test_minmax_saturates_on_non_increase(self):
        ctx = MinMaxProbContext()
        assert ctx.tag_saturated(0.5, 0.5)
        assert ctx.tag_saturated(0.5, 0.4)
        assert not ctx.tag_saturated(0.5, 0.6)


# -- semiring laws ---------------------------------------------------------

def random_tags(num_vars, max_proofs=3):
    literal = st.tuples(st.integers(0, num_vars - 1), st.booleans())
    proof = st.frozensets(literal, min_size=0, max_size=3)
    return st.frozensets(proof, min_size=0, max_size=max_proofs).map(DnfTag)


@settings(max_examples=150, deadline=None)
@given(random_tags(4), random_tags(4))
def test_or_commutative(a, b):
    ctx = make_ctx(k=64, probs=[0.1, 0.3, 0.6, 0.9])
    assert ctx.tag_or(a, b) == ctx.tag_or(b, a)


@settings(max_examples=150, deadline=None)
@given(random_tags(4), random_tags(4))
def test_and_commutative(a, b):
    ctx = make_ctx(k=64, probs=[0.1, 0.3, 0.6, 0.9])
    assert ctx.tag_and(a, b) == ctx.tag_and(b, a)


@settings(max_examples=100, deadline=None)
@given(random_tags(4), random_tags(4), random_tags(4))
def test_or_and_associative_without_pruning(a, b, c):
    ctx = make_ctx(k=10_000, probs=[0.1, 0.3, 0.6, 0.9])
    assert ctx.tag_or(ctx.tag_or(a, b), c) == ctx.tag_or(a, ctx.tag_or(b, c))
    assert ctx.tag_and(ctx.tag_and(a, b), c) == ctx.tag_and(a, ctx.tag_and(b, c))


@settings(max_examples=100, deadline=None)
@given(random_tags(4, 2), random_tags(4, 2), random_tags(4, 2))
def test_distributivity_without_pruning(a, b, c):
    ctx = make_ctx(k=10_000, probs=[0.1, 0.3, 0.6, 0.9])
    lhs = ctx.tag_and(a, ctx.tag_or(b, c))
    rhs = ctx.tag_or(ctx.tag_and(a, b), ctx.tag_and(a, c))
    assert lhs == rhs


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.05, 0.95), min_size=2, max_size=5), st.data())
def test_minmax_laws(probs, data):
    ctx = MinMaxProbContext()
    a = data.draw(st.sampled_from(probs))
    b = data.draw(st.sampled_from(probs))
    c = data.draw(st.sampled_from(probs))
    assert ctx.tag_or(a, b) == ctx.tag_or(b, a)
    assert ctx.tag_and(a, ctx.tag_or(b, c)) == \
        ctx.tag_or(ctx.tag_and(a, b), ctx.tag_and(a, c))


# -- exactness against brute force ------------------------------------------

def brute_force_dnf(tag, probs):
    """Exhaustive world enumeration over independent variables."""
    support = sorted(tag.support())
    total = 0.0
    for bits in itertools.product([False, True], repeat=len(support)):
        assignment = dict(zip(support, bits))
        weight = 1.0
        for v, value in assignment.items():
            weight *= probs[v] if value else 1.0 - probs[v]
        if any(all(assignment[v] == pos for v, pos in proof) for proof in tag.proofs):
            total += weight
    return total


@settings(max_examples=100, deadline=None)
@given(random_tags(5), st.lists(st.floats(0.0, 1.0), min_size=5, max_size=5))
def test_wmc_matches_enumeration(tag_value, probs):
    ctx = TopKProofsContext(10_000)
    for p in probs:
        ctx.var_table.add_var(p)
    got = ctx.recover_probability(tag_value)
    expected = brute_force_dnf(tag_value, dict(enumerate(probs)))
    assert got == pytest.approx(expected, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(random_tags(5, max_proofs=5), st.lists(st.floats(0.01, 0.99), min_size=5, max_size=5))
def test_k_monotonicity(tag_value, probs):
    results = []
    for k in (1, 2, 3, 10_000):
        ctx = TopKProofsContext(k)
        for p in probs:
            ctx.var_table.add_var(p)
        pruned = ctx.tag_or(ctx.zero(), tag_value)  # normalize under k
        results.append(ctx.recover_probability(pruned))
    for lo, hi in zip(results, results[1:]):
        assert hi >= lo - 1e-9
    exact = brute_force_dnf(tag_value, dict(enumerate(probs)))
    for r in results:
        assert r <= exact + 1e-9
