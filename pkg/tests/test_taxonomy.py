import pytest
from hypothesis import given, strategies as st

from flutes.errors import LatticeCycleError, TaxonomyError
from flutes.taxonomy import Taxonomy, compare, mk_concept, positional


def names(*xs):
    return [mk_concept(x) for x in xs]


class TestConcept:
    def test_constructors_validate(self):
        with pytest.raises(TaxonomyError):
            mk_concept("")
        with pytest.raises(TaxonomyError):
            positional(-1)

    def test_interning_by_value(self):
        assert mk_concept("dob") == mk_concept("dob")
        assert positional(2) == positional(2)
        assert mk_concept("a") != positional(0)

    def test_order_positional_first_then_lexicographic(self):
        p0, p1 = positional(0), positional(1)
        a, b = names("amount", "type")
        assert compare(p0, p1) < 0
        assert compare(p1, a) < 0
        assert compare(a, b) < 0
        assert compare(b, a) > 0
        assert compare(a, a) == 0

    @given(st.lists(st.one_of(
        st.integers(0, 20).map(positional),
        st.text("abcdef", min_size=1, max_size=4).map(mk_concept)),
        min_size=2, max_size=6))
    def test_order_is_total_and_antisymmetric(self, cs):
        for x in cs:
            for y in cs:
                cxy, cyx = compare(x, y), compare(y, x)
                assert cxy == -cyx
                assert (cxy == 0) == (x == y)


class TestEquivalence:
    def test_same_as_merges_transitively(self):
        tax = Taxonomy()
        a, b, c = names("a", "b", "c")
        tax.same_as(a, b)
        tax.same_as(b, c)
        assert tax.equiv(a, c)
        assert tax.members(c) == {a, b, c}

    def test_canonical_is_least_member(self):
        tax = Taxonomy()
        dob, bd = names("dob", "birth_date")
        tax.same_as(dob, bd)
        assert tax.canonical(dob) == bd
        assert tax.canonical(bd) == bd

    def test_distinct_without_assertion(self):
        tax = Taxonomy()
        a, b = names("a", "b")
        assert not tax.equiv(a, b)
        assert tax.members(a) == {a}


class TestIsA:
    def test_hyponym_matches_hypernym(self):
        tax = Taxonomy()
        check, payment = names("check", "payment")
        tax.add_is_a(check, payment)
        assert tax.label_match(check, payment)
        assert not tax.label_match(payment, check)

    def test_transitive_chain(self):
        tax = Taxonomy()
        a, b, c = names("a", "b", "c")
        tax.add_is_a(a, b)
        tax.add_is_a(b, c)
        assert tax.label_leq(a, c)
        assert not tax.label_leq(c, a)

    def test_steps_through_synonyms(self):
        tax = Taxonomy()
        dob, bd, attr = names("dob", "birth_date", "attribute")
        tax.same_as(dob, bd)
        tax.add_is_a(dob, attr)
        assert tax.label_leq(bd, attr)

    def test_direct_cycle_rejected(self):
        tax = Taxonomy()
        a, b = names("a", "b")
        tax.add_is_a(a, b)
        with pytest.raises(LatticeCycleError):
            tax.add_is_a(b, a)

    def test_cycle_through_synonym_rejected(self):
        tax = Taxonomy()
        a, b, c = names("a", "b", "c")
        tax.add_is_a(a, b)
        tax.same_as(b, c)
        with pytest.raises(LatticeCycleError):
            tax.add_is_a(c, a)

    def test_self_edge_rejected(self):
        tax = Taxonomy()
        (a,) = names("a")
        with pytest.raises(LatticeCycleError):
            tax.add_is_a(a, a)


class TestLabelMatch:
    def test_identity(self):
        tax = Taxonomy()
        (a,) = names("a")
        assert tax.label_match(a, a)
        assert tax.label_match(positional(1), positional(1))

    def test_synonyms_match_both_ways(self):
        tax = Taxonomy()
        dob, bd = names("dob", "birth_date")
        tax.same_as(dob, bd)
        assert tax.label_match(dob, bd)
        assert tax.label_match(bd, dob)

    def test_positionals_never_cross_match(self):
        tax = Taxonomy()
        (a,) = names("a")
        assert not tax.label_match(positional(0), positional(1))
        assert not tax.label_match(positional(0), a)
        assert not tax.label_match(a, positional(0))


class TestJoin:
    def test_join_of_siblings_is_parent(self):
        tax = Taxonomy()
        check, cc, payment = names("check", "cc", "payment")
        tax.add_is_a(check, payment)
        tax.add_is_a(cc, payment)
        assert tax.join(check, cc) == payment

    def test_join_with_self_and_ancestor(self):
        tax = Taxonomy()
        a, b = names("a", "b")
        tax.add_is_a(a, b)
        assert tax.join(a, a) == a
        assert tax.join(a, b) == b

    def test_join_unrelated_is_none(self):
        tax = Taxonomy()
        a, b = names("a", "b")
        assert tax.join(a, b) is None

    def test_join_picks_least_common_ancestor(self):
        tax = Taxonomy()
        a, b, mid, top = names("a", "b", "mid", "top")
        tax.add_is_a(a, mid)
        tax.add_is_a(b, mid)
        tax.add_is_a(mid, top)
        assert tax.join(a, b) == mid
