"""Sort terms and the order-sorted operations on them.

A sort term is a Variable, an Atom naming a hierarchy sort, or a
functional sort pairing argument sorts with a result sort (written
``([[day_part]],[prop])``).  ``subsumes`` is the generality order:
Variables sit above everything, atoms follow the hierarchy, functional
sorts are compared componentwise (covariantly, including the result).
``unify`` returns the greatest lower bound under that order, or None.
Failure to unify is a normal outcome, not an exception; only unknown
sort names raise.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import clauses
from .hierarchy import HierarchyError


@dataclass(frozen=True)
class Variable:
    name: str = "_"


@dataclass(frozen=True)
class Atom:
    sort: str


@dataclass(frozen=True)
class Func:
    args: tuple
    result: "SortTerm"


SortTerm = Variable | Atom | Func


def subsumes(general, specific, h):
    """True when every instance of *specific* is an instance of *general*."""
    if isinstance(general, Variable):
        if isinstance(specific, Atom):
            _check_atom(specific, h)
        return True
    if isinstance(specific, Variable):
        if isinstance(general, Atom):
            _check_atom(general, h)
        return False
    if isinstance(general, Atom) and isinstance(specific, Atom):
        _check_atom(general, h)
        _check_atom(specific, h)
        return h.is_ancestor_or_equal(general.sort, specific.sort)
    if isinstance(general, Func) and isinstance(specific, Func):
        if len(general.args) != len(specific.args):
            return False
        return all(
            subsumes(g, s, h) for g, s in zip(general.args, specific.args)
        ) and subsumes(general.result, specific.result, h)
    return False


def unify(a, b, h):
    """Greatest lower bound of two sort terms, or None on failure."""
    if isinstance(a, Variable):
        if isinstance(b, Atom):
            _check_atom(b, h)
        return b
    if isinstance(b, Variable):
        if isinstance(a, Atom):
            _check_atom(a, h)
        return a
    if isinstance(a, Atom) and isinstance(b, Atom):
        _check_atom(a, h)
        _check_atom(b, h)
        if h.is_ancestor_or_equal(a.sort, b.sort):
            return b
        if h.is_ancestor_or_equal(b.sort, a.sort):
            return a
        return None
    if isinstance(a, Func) and isinstance(b, Func):
        if len(a.args) != len(b.args):
            return None
        args = []
        for x, y in zip(a.args, b.args):
            u = unify(x, y, h)
            if u is None:
                return None
            args.append(u)
        result = unify(a.result, b.result, h)
        if result is None:
            return None
        return Func(tuple(args), result)
    return None


def alpha_equal(a, b):
    """Structural equality with variable positions treated as equal.

    Variable names carry no identity: repeated names within a term do
    not impose co-instantiation, so renaming never changes meaning.
    """
    if isinstance(a, Variable) and isinstance(b, Variable):
        return True
    if isinstance(a, Atom) and isinstance(b, Atom):
        return a.sort == b.sort
    if isinstance(a, Func) and isinstance(b, Func):
        if len(a.args) != len(b.args):
            return False
        return all(alpha_equal(x, y) for x, y in zip(a.args, b.args)) and alpha_equal(
            a.result, b.result
        )
    return False


def _check_atom(atom, h):
    if not h.is_node(atom.sort):
        raise HierarchyError(f"unknown sort name {atom.sort!r}")


def atoms_in(term):
    if isinstance(term, Atom):
        yield term.sort
    elif isinstance(term, Func):
        for a in term.args:
            yield from atoms_in(a)
        yield from atoms_in(term.result)


def has_variables(term):
    if isinstance(term, Variable):
        return True
    if isinstance(term, Func):
        return any(has_variables(a) for a in term.args) or has_variables(term.result)
    return False


def format_sort(term):
    """Canonical text: X, [flight], or ([[day_part]],[prop])."""
    if isinstance(term, Variable):
        return term.name
    if isinstance(term, Atom):
        return f"[{term.sort}]"
    inner = ",".join(format_sort(a) for a in term.args)
    return f"([{inner}],{format_sort(term.result)})"


def sort_from_clause(cterm):
    """Interpret a clause term as a sort term.

    Sorts appear in data files as a variable, a one-element list
    [name], or a (arg-list, result) pair for functional sorts.
    """
    if isinstance(cterm, clauses.Var):
        return Variable(cterm.name)
    if isinstance(cterm, clauses.List):
        if len(cterm.items) != 1 or not isinstance(cterm.items[0], clauses.Atom):
            raise ValueError(f"malformed atomic sort {cterm!r}")
        return Atom(cterm.items[0].name)
    if isinstance(cterm, clauses.Tuple) and len(cterm.items) == 2:
        arglist, result = cterm.items
        if not isinstance(arglist, clauses.List):
            raise ValueError(f"malformed functional sort {cterm!r}")
        args = tuple(sort_from_clause(a) for a in arglist.items)
        return Func(args, sort_from_clause(result))
    raise ValueError(f"malformed sort term {cterm!r}")


def parse_sort(text):
    stream = clauses.TokenStream(clauses.tokenize(text))
    term = clauses.parse_term(stream)
    if not stream.at_end():
        tok = stream.peek()
        raise clauses.ClauseError("trailing text after sort", tok.line, tok.col)
    return sort_from_clause(term)


def validate_sorts(term, h):
    """Raise HierarchyError if any atom in *term* is not a hierarchy node."""
    for name in atoms_in(term):
        if not h.is_node(name):
            raise HierarchyError(f"unknown sort name {name!r}")
