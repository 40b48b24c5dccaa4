"""Sort hierarchy: a tree of sort names rooted at ``top``.

The hierarchy is deliberately a tree, not a DAG, so that any two
comparable sorts are totally ordered and greatest lower bounds are
trivial: for comparable atoms the glb is simply the deeper one.

File format: one ``isa(child, parent).`` clause per edge, ``%``
comments allowed.  ``top`` is implicit and never declared as a child.
Forward references within a file are fine; cycles, re-parenting and
parents that never appear as nodes are not.
"""

from __future__ import annotations

from . import clauses


class HierarchyError(ValueError):
    pass


ROOT = "top"


class SortHierarchy:
    def __init__(self, parents):
        """*parents* maps each non-root sort name to its parent name."""
        self._parent = dict(parents)
        if ROOT in self._parent:
            raise HierarchyError(f"{ROOT!r} cannot have a parent")
        self._validate()
        self._depth = {}
        for name in self._parent:
            self.depth(name)

    def _validate(self):
        nodes = self.nodes()
        for child, parent in self._parent.items():
            if parent not in nodes:
                raise HierarchyError(f"unknown parent sort {parent!r} of {child!r}")
        for name in self._parent:
            seen = set()
            cur = name
            while cur != ROOT:
                if cur in seen:
                    raise HierarchyError(f"cycle through sort {cur!r}")
                seen.add(cur)
                cur = self._parent[cur]

    def nodes(self):
        return set(self._parent) | {ROOT}

    def is_node(self, name):
        return name == ROOT or name in self._parent

    def parent(self, name):
        self._check(name)
        return self._parent.get(name)

    def children(self, name):
        self._check(name)
        return sorted(c for c, p in self._parent.items() if p == name)

    def depth(self, name):
        self._check(name)
        if name == ROOT:
            return 0
        if name not in self._depth:
            self._depth[name] = 1 + self.depth(self._parent[name])
        return self._depth[name]

    def is_ancestor_or_equal(self, anc, desc):
        """True when *anc* lies on the path from *desc* up to the root."""
        self._check(anc)
        self._check(desc)
        cur = desc
        while True:
            if cur == anc:
                return True
            if cur == ROOT:
                return False
            cur = self._parent[cur]

    def extended(self, parents):
        """A new hierarchy with extra child -> parent entries."""
        merged = dict(self._parent)
        for child, parent in parents.items():
            if child == ROOT or child in merged:
                raise HierarchyError(f"sort {child!r} already defined")
            merged[child] = parent
        return SortHierarchy(merged)

    def comparable(self, a, b):
        return self.is_ancestor_or_equal(a, b) or self.is_ancestor_or_equal(b, a)

    def _check(self, name):
        if not self.is_node(name):
            raise HierarchyError(f"unknown sort name {name!r}")

    def __contains__(self, name):
        return self.is_node(name)

    def __eq__(self, other):
        return isinstance(other, SortHierarchy) and self._parent == other._parent

    def __repr__(self):
        return f"SortHierarchy({len(self._parent) + 1} sorts)"


def hierarchy_from_clauses(clause_list):
    parents = {}
    for term, line in clause_list:
        if not isinstance(term, clauses.Struct) or term.functor != "isa" or len(term.args) != 2:
            raise HierarchyError(f"expected isa(child, parent) at line {line}")
        child, parent = term.args
        if not isinstance(child, clauses.Atom) or not isinstance(parent, clauses.Atom):
            raise HierarchyError(f"isa arguments must be sort names at line {line}")
        if child.name in parents and parents[child.name] != parent.name:
            raise HierarchyError(f"sort {child.name!r} re-parented at line {line}")
        parents[child.name] = parent.name
    return SortHierarchy(parents)


def parse_hierarchy(text):
    return hierarchy_from_clauses(clauses.read_clauses(text))


def load_hierarchy(path):
    return hierarchy_from_clauses(clauses.load_clauses(path))


def format_hierarchy(h):
    """Serialize back to isa clauses, children grouped under parents."""
    lines = []

    def walk(parent):
        for child in h.children(parent):
            lines.append(f"isa({child}, {parent}).")
            walk(child)

    walk(ROOT)
    return "\n".join(lines) + "\n"
