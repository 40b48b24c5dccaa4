"""Sort-term algebra: subsumption and unification laws.

The hypothesis suites check the lattice-style laws on randomly grown
tree hierarchies; the oracle tests compare against the independent
reference implementations in oracles.py.
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sortacq import terms
from sortacq.hierarchy import HierarchyError, SortHierarchy

import oracles


@st.composite
def hierarchies(draw, max_extra=6):
    k = draw(st.integers(min_value=0, max_value=max_extra))
    names = [f"s{i + 1}" for i in range(k)]
    parents = {}
    pool = ["top"]
    for name in names:
        parents[name] = draw(st.sampled_from(pool))
        pool.append(name)
    return SortHierarchy(parents)


def term_strategy(h, max_depth=2):
    atoms = st.sampled_from(sorted(h.nodes())).map(terms.Atom)
    variables = st.sampled_from(["X", "Y", "Z"]).map(terms.Variable)
    leaf = st.one_of(variables, atoms)

    def extend(children):
        args = st.lists(children, min_size=1, max_size=3).map(tuple)
        return st.builds(terms.Func, args, children)

    return st.recursive(leaf, extend, max_leaves=max_depth * 3)


@st.composite
def hierarchy_and_terms(draw, n=2):
    h = draw(hierarchies())
    ts = tuple(draw(term_strategy(h)) for _ in range(n))
    return (h,) + ts


@st.composite
def shallow_cases(draw):
    """Small hierarchy plus two terms of nesting depth <= 1, arity <= 2."""
    h = draw(hierarchies(max_extra=3))
    leaf = st.one_of(
        st.just(terms.Variable("X")),
        st.sampled_from(sorted(h.nodes())).map(terms.Atom),
    )
    func = st.builds(terms.Func, st.lists(leaf, min_size=1, max_size=2).map(tuple), leaf)
    t = st.one_of(leaf, func)
    return h, draw(t), draw(t)


@st.composite
def hierarchy_and_lower_bound(draw):
    """A hierarchy plus (a, b, c) where c is built below both a and b.

    c is drawn first; a and b are independent generalizations of it, so
    the pair always has a common lower bound and the glb law has teeth.
    """
    h = draw(hierarchies())
    c = draw(term_strategy(h))

    def generalize(t):
        if draw(st.booleans()):
            return terms.Variable("G")
        if isinstance(t, terms.Atom):
            choices = [t.sort]
            cur = t.sort
            while cur != "top":
                cur = h.parent(cur)
                choices.append(cur)
            return terms.Atom(draw(st.sampled_from(choices)))
        if isinstance(t, terms.Func):
            return terms.Func(tuple(generalize(a) for a in t.args), generalize(t.result))
        return t

    return h, generalize(c), generalize(c), c


class TestSubsumption:
    @given(hierarchy_and_terms(1))
    def test_reflexive(self, case):
        h, a = case
        assert terms.subsumes(a, a, h)

    @given(hierarchy_and_terms(3))
    def test_transitive(self, case):
        h, a, b, c = case
        if terms.subsumes(a, b, h) and terms.subsumes(b, c, h):
            assert terms.subsumes(a, c, h)

    @given(hierarchy_and_terms(2))
    def test_antisymmetric_up_to_renaming(self, case):
        h, a, b = case
        if terms.subsumes(a, b, h) and terms.subsumes(b, a, h):
            assert terms.alpha_equal(a, b)

    @given(hierarchy_and_terms(2))
    def test_matches_reachability_oracle(self, case):
        h, a, b = case
        assert terms.subsumes(a, b, h) == oracles.oracle_subsumes(a, b, h)

    @given(hierarchy_and_terms(1))
    def test_variable_is_top_of_order(self, case):
        h, a = case
        assert terms.subsumes(terms.Variable(), a, h)
        if not isinstance(a, terms.Variable):
            assert not terms.subsumes(a, terms.Variable(), h)


class TestUnification:
    @given(hierarchy_and_terms(2))
    def test_commutative_up_to_renaming(self, case):
        h, a, b = case
        u1 = terms.unify(a, b, h)
        u2 = terms.unify(b, a, h)
        if u1 is None or u2 is None:
            assert u1 is None and u2 is None
        else:
            assert terms.alpha_equal(u1, u2)

    @given(hierarchy_and_terms(1))
    def test_idempotent(self, case):
        h, a = case
        u = terms.unify(a, a, h)
        assert u is not None and terms.alpha_equal(u, a)

    @given(hierarchy_and_terms(2))
    def test_result_is_lower_bound(self, case):
        h, a, b = case
        u = terms.unify(a, b, h)
        if u is not None:
            assert terms.subsumes(a, u, h)
            assert terms.subsumes(b, u, h)

    @given(hierarchy_and_lower_bound())
    def test_result_is_greatest_lower_bound(self, case):
        h, a, b, c = case
        u = terms.unify(a, b, h)
        assert u is not None
        assert terms.subsumes(u, c, h)

    @given(shallow_cases())
    @settings(max_examples=60)
    def test_matches_exhaustive_search(self, case):
        # exhaustive-search glb only stays tractable on shallow terms
        h, a, b = case
        got = terms.unify(a, b, h)
        expected = oracles.oracle_unify(a, b, h)
        if expected is None:
            assert got is None
        else:
            assert got is not None and terms.alpha_equal(got, expected)

    @given(hierarchies())
    def test_atom_comparability_equals_unifiability(self, h):
        for a in sorted(h.nodes()):
            for b in sorted(h.nodes()):
                u = terms.unify(terms.Atom(a), terms.Atom(b), h)
                assert (u is not None) == h.comparable(a, b)
                if u is not None:
                    deeper = a if h.depth(a) >= h.depth(b) else b
                    assert u == terms.Atom(deeper)


class TestAtomCases:
    def setup_method(self):
        self.h = SortHierarchy(
            {"location": "top", "city": "location", "airport": "location", "flight": "top"}
        )

    def test_ancestor_subsumes_descendant(self):
        assert terms.subsumes(terms.Atom("location"), terms.Atom("city"), self.h)
        assert not terms.subsumes(terms.Atom("city"), terms.Atom("location"), self.h)

    def test_siblings_do_not_unify(self):
        assert terms.unify(terms.Atom("city"), terms.Atom("airport"), self.h) is None
        assert terms.unify(terms.Atom("city"), terms.Atom("flight"), self.h) is None

    def test_unify_picks_the_deeper_atom(self):
        u = terms.unify(terms.Atom("location"), terms.Atom("city"), self.h)
        assert u == terms.Atom("city")

    def test_variable_unifies_to_other_side(self):
        assert terms.unify(terms.Variable("X"), terms.Atom("city"), self.h) == terms.Atom("city")
        assert terms.unify(terms.Atom("city"), terms.Variable("X"), self.h) == terms.Atom("city")

    def test_functional_sorts_unify_componentwise(self):
        f1 = terms.Func((terms.Variable("X"),), terms.Atom("top"))
        f2 = terms.Func((terms.Atom("city"),), terms.Atom("top"))
        assert terms.unify(f1, f2, self.h) == f2
        g = terms.Func((terms.Atom("flight"),), terms.Atom("top"))
        assert terms.unify(f2, g, self.h) is None

    def test_arity_mismatch_fails(self):
        f1 = terms.Func((terms.Atom("city"),), terms.Atom("top"))
        f2 = terms.Func((terms.Atom("city"), terms.Atom("city")), terms.Atom("top"))
        assert terms.unify(f1, f2, self.h) is None
        assert not terms.subsumes(f1, f2, self.h)

    def test_atom_func_never_mix(self):
        f = terms.Func((terms.Atom("city"),), terms.Atom("top"))
        assert terms.unify(terms.Atom("city"), f, self.h) is None
        assert not terms.subsumes(terms.Atom("city"), f, self.h)
        assert not terms.subsumes(f, terms.Atom("city"), self.h)

    def test_unknown_sort_raises(self):
        with pytest.raises(HierarchyError):
            terms.subsumes(terms.Atom("city"), terms.Atom("nowhere"), self.h)
        with pytest.raises(HierarchyError):
            terms.unify(terms.Atom("nowhere"), terms.Atom("city"), self.h)


class TestSortText:
    def test_round_trip(self):
        for text in ["[city]", "X", "([[day_part]],[prop])", "([X,Y],[prop])",
                     "([([[a_sort]],[prop]),[b_sort]],[c_sort])"]:
            assert terms.format_sort(terms.parse_sort(text)) == text

    def test_malformed_sort_rejected(self):
        for text in ["[city", "[]", "([X)", "[city,extra]"]:
            with pytest.raises(Exception):
                terms.parse_sort(text)
