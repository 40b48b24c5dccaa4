import pytest

from sortacq import hierarchy
from sortacq.hierarchy import HierarchyError, SortHierarchy


GOOD = """
% toy hierarchy fragment
isa(city, location).
isa(location, top).
isa(airport, location).
isa(flight, top).
"""


class TestLoader:
    def test_forward_references_allowed(self):
        h = hierarchy.parse_hierarchy(GOOD)
        assert h.is_node("city")
        assert h.parent("city") == "location"
        assert h.parent("location") == "top"

    def test_root_is_implicit(self):
        h = hierarchy.parse_hierarchy("isa(a_sort, top).")
        assert h.nodes() == {"top", "a_sort"}
        assert h.depth("a_sort") == 1

    def test_cycle_rejected(self):
        with pytest.raises(HierarchyError):
            hierarchy.parse_hierarchy("isa(a, b). isa(b, a).")

    def test_reparenting_rejected(self):
        with pytest.raises(HierarchyError):
            hierarchy.parse_hierarchy("isa(a, top). isa(b, top). isa(a, b).")

    def test_unknown_parent_rejected(self):
        with pytest.raises(HierarchyError):
            hierarchy.parse_hierarchy("isa(a, ghost).")

    def test_root_cannot_be_a_child(self):
        with pytest.raises(HierarchyError):
            hierarchy.parse_hierarchy("isa(a, top). isa(top, a).")

    def test_malformed_clause_rejected(self):
        with pytest.raises(HierarchyError):
            hierarchy.parse_hierarchy("isa(a).")

    def test_round_trip(self):
        h = hierarchy.parse_hierarchy(GOOD)
        again = hierarchy.parse_hierarchy(hierarchy.format_hierarchy(h))
        assert again == h


class TestQueries:
    def setup_method(self):
        self.h = hierarchy.parse_hierarchy(GOOD)

    def test_ancestor_or_equal(self):
        assert self.h.is_ancestor_or_equal("top", "city")
        assert self.h.is_ancestor_or_equal("location", "city")
        assert self.h.is_ancestor_or_equal("city", "city")
        assert not self.h.is_ancestor_or_equal("city", "location")
        assert not self.h.is_ancestor_or_equal("flight", "city")

    def test_comparable_is_symmetric(self):
        for a in self.h.nodes():
            for b in self.h.nodes():
                assert self.h.comparable(a, b) == self.h.comparable(b, a)

    def test_children_sorted(self):
        assert self.h.children("location") == ["airport", "city"]

    def test_unknown_name_raises(self):
        with pytest.raises(HierarchyError):
            self.h.is_ancestor_or_equal("city", "nowhere")
        with pytest.raises(HierarchyError):
            SortHierarchy({"a": "missing"})
