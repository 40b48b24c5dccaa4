"""Logical-form text format: parsing, canonical serialization, round trips."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sortacq import logform, terms
from sortacq.logform import Constant, LogicalFormError, Predication, Quant, VarRef


FLIGHTS_TO_BOSTON = (
    "exists((A;[flight]),"
    "([and,([flight,(A;[flight])];[prop]),"
    "([to,(A;[flight]),('BOSTON';[city])];[prop])];[prop]));[prop]"
)

MORNING_FLIGHTS = (
    "(qterm((the;[non_symmetric_determiner]),(A;[flight]),"
    "([and,"
    "([flight,(A;[flight])];[prop]),"
    "([n_n_rel,([and,([morning,(B;[day_part])];[prop])];([[day_part]],[prop])),(A;[flight])];[prop]),"
    "(exists((C;[flight]),"
    "([and,"
    "([fly,(C;[flight])];[prop]),"
    "([actor,(C;[flight]),(A;[flight])];[prop]),"
    "([has_aspect,(C;[flight]),(in_progress;[aspect])];[prop]),"
    "([to,(C;[flight]),('DENVER';[city])];[prop])"
    "];[prop]));[prop])"
    "];[prop]));[flight])"
)


class TestParse:
    def test_annotated_constant(self):
        node = logform.parse_lf("('DENVER';[city])")
        assert node == Constant("DENVER", terms.Atom("city"))

    def test_unparenthesised_top_level_annotation(self):
        node = logform.parse_lf("[flight,(A;[flight])];[prop]")
        assert isinstance(node, Predication)
        assert node.annotation == terms.Atom("prop")
        assert node.args[0] == VarRef("A", terms.Atom("flight"))

    def test_quantifier_shapes(self):
        node = logform.parse_lf(FLIGHTS_TO_BOSTON)
        assert isinstance(node, Quant) and node.op == "exists"
        assert node.det is None and node.restriction is None
        assert node.var == VarRef("A", terms.Atom("flight"))
        assert isinstance(node.body, Predication) and node.body.predicate == "and"

    def test_qterm_parses_det_var_restriction(self):
        node = logform.parse_lf(MORNING_FLIGHTS)
        assert node.op == "qterm"
        assert node.det == Constant("the", terms.Atom("non_symmetric_determiner"))
        assert node.var == VarRef("A", terms.Atom("flight"))
        assert node.annotation == terms.Atom("flight")
        assert node.body is None

    def test_functional_annotation(self):
        node = logform.parse_lf(MORNING_FLIGHTS)
        nn = [p for p in logform.predications(node) if p.predicate == "n_n_rel"]
        assert len(nn) == 1
        prop_arg = nn[0].args[0]
        assert prop_arg.annotation == terms.Func(
            (terms.Atom("day_part"),), terms.Atom("prop")
        )

    def test_unsupported_quantifier_rejected(self):
        with pytest.raises(LogicalFormError):
            logform.parse_lf("forall((A;[flight]),([flight,(A;[flight])];[prop]))")

    def test_double_annotation_rejected(self):
        with pytest.raises(LogicalFormError):
            logform.parse_lf("(('DENVER';[city]);[city])")

    def test_error_carries_position(self):
        with pytest.raises(LogicalFormError) as err:
            logform.parse_lf("[to,(A;[flight]) (B;[city])]")
        assert "line 1" in str(err.value)

    def test_trailing_text_rejected(self):
        with pytest.raises(LogicalFormError):
            logform.parse_lf("('DENVER';[city]) leftover")


class TestSerialize:
    def test_canonical_form_of_constant(self):
        node = Constant("DENVER", terms.Atom("city"))
        assert logform.serialize_lf(node) == "('DENVER';[city])"

    def test_round_trip_sample_forms(self):
        for text in (FLIGHTS_TO_BOSTON, MORNING_FLIGHTS):
            node = logform.parse_lf(text)
            assert logform.parse_lf(logform.serialize_lf(node)) == node

    def test_serialize_is_stable(self):
        node = logform.parse_lf(MORNING_FLIGHTS)
        once = logform.serialize_lf(node)
        assert logform.serialize_lf(logform.parse_lf(once)) == once

    def test_unannotated_node_names_path(self):
        node = Predication(
            "to",
            (VarRef("A", terms.Atom("flight")), Constant("DENVER")),
            terms.Atom("prop"),
        )
        with pytest.raises(LogicalFormError) as err:
            logform.serialize_lf(node)
        assert "args[1]" in str(err.value)

    def test_alpha_variants_differ_only_in_names(self):
        a = logform.parse_lf("[fly,(A;[flight])];[prop]")
        b = logform.parse_lf("[fly,(Q;[flight])];[prop]")
        sa, sb = logform.serialize_lf(a), logform.serialize_lf(b)
        assert sa.replace("A", "Q") == sb


class TestBinding:
    def test_quantifier_binds(self):
        node = logform.parse_lf(FLIGHTS_TO_BOSTON)
        assert logform.unbound_vars(node) == []

    def test_property_abstraction_binds_its_variables(self):
        node = logform.parse_lf(MORNING_FLIGHTS)
        assert logform.unbound_vars(node) == []

    def test_free_variable_reported(self):
        node = logform.parse_lf("[fly,(C;[flight])];[prop]")
        assert logform.unbound_vars(node) == ["C"]


def sorts():
    atom = st.sampled_from(["flight", "city", "prop", "day"]).map(terms.Atom)
    func = st.builds(
        terms.Func, st.lists(atom, min_size=1, max_size=2).map(tuple), atom
    )
    return st.one_of(atom, func)


def lf_nodes():
    leaf = st.one_of(
        st.builds(Constant, st.sampled_from(["DENVER", "friday", "3"]), sorts()),
        st.builds(VarRef, st.sampled_from(["A", "B", "C"]), sorts()),
    )

    def extend(children):
        pred = st.builds(
            Predication,
            st.sampled_from(["to", "and", "fly"]),
            st.lists(children, max_size=3).map(tuple),
            sorts(),
        )
        var = st.builds(VarRef, st.sampled_from(["A", "B"]), sorts())
        qterm = st.builds(
            lambda det, v, r, s: Quant("qterm", det, v, r, None, s),
            leaf,
            var,
            children,
            sorts(),
        )
        ex = st.builds(
            lambda v, b, s: Quant("exists", None, v, None, b, s),
            var,
            children,
            sorts(),
        )
        return st.one_of(pred, qterm, ex)

    return st.recursive(leaf, extend, max_leaves=8)


class TestRoundTripProperty:
    @given(lf_nodes())
    def test_parse_inverts_serialize(self, node):
        text = logform.serialize_lf(node)
        assert logform.parse_lf(text) == node
