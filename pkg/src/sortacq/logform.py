"""Logical forms: sort-annotated expression trees and their text format.

Nodes are quantified terms, predications, constants, and variable
references; every node carries a sort annotation once resolution has
run.  The text format writes an annotated node as ``(expr;sort)``::

    (qterm((the;[non_symmetric_determiner]),(A;[flight]),
           ([and,([flight,(A;[flight])];[prop])];[prop]));[flight])

``parse_lf`` also accepts the unparenthesised ``expr;sort`` form and
nodes with the annotation missing altogether; ``serialize_lf`` emits
the canonical fully-parenthesised form and raises on any node that is
still unannotated, naming its path.

Quantifiers come in exactly two normal forms: ``qterm(det, var,
restriction)`` and ``exists(var, body)``.  Anything else is rejected
rather than guessed.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import clauses, terms


class LogicalFormError(ValueError):
    pass


@dataclass(frozen=True)
class Constant:
    name: str
    annotation: terms.SortTerm | None = None


@dataclass(frozen=True)
class VarRef:
    name: str
    annotation: terms.SortTerm | None = None


@dataclass(frozen=True)
class Predication:
    predicate: str
    args: tuple
    annotation: terms.SortTerm | None = None


@dataclass(frozen=True)
class Quant:
    """qterm(det, var, restriction) or exists(var, body).

    The bound variable is stored as a VarRef so it can carry its own
    sort annotation, which routinely differs from the quantifier
    node's own annotation.
    """

    op: str
    det: "LogicalForm | None"
    var: VarRef
    restriction: "LogicalForm | None"
    body: "LogicalForm | None"
    annotation: terms.SortTerm | None = None


LogicalForm = Constant | VarRef | Predication | Quant


def annotate(node, sort):
    """The same node with its annotation replaced."""
    if isinstance(node, Quant):
        return Quant(node.op, node.det, node.var, node.restriction, node.body, sort)
    if isinstance(node, Predication):
        return Predication(node.predicate, node.args, sort)
    if isinstance(node, Constant):
        return Constant(node.name, sort)
    return VarRef(node.name, sort)


# ---------------------------------------------------------------------------
# Parsing

def parse_lf(text):
    stream = clauses.TokenStream(clauses.tokenize(text))
    node = _parse_expr(stream)
    if not stream.at_end():
        tok = stream.peek()
        raise LogicalFormError(
            f"trailing text {tok.text!r} at line {tok.line}, column {tok.col}"
        )
    return node


def _parse_expr(stream):
    node = _parse_primary(stream)
    tok = stream.peek()
    if tok is not None and tok.text == ";":
        if node.annotation is not None:
            raise LogicalFormError(
                f"double annotation at line {tok.line}, column {tok.col}"
            )
        stream.next()
        node = annotate(node, _parse_sort(stream))
    return node


def _parse_primary(stream):
    tok = stream.peek()
    if tok is None:
        raise LogicalFormError("unexpected end of input")
    if tok.text == "(":
        stream.next()
        node = _parse_expr(stream)
        stream.expect(")")
        return node
    if tok.text == "[":
        return _parse_predication(stream)
    if tok.kind == "var":
        stream.next()
        return VarRef(tok.text)
    if tok.kind in ("name", "num", "quoted"):
        stream.next()
        if tok.kind == "name" and tok.text in ("qterm", "exists"):
            nxt = stream.peek()
            if nxt is not None and nxt.text == "(":
                return _parse_quant(stream, tok.text)
        name = tok.text[1:-1].replace("\\'", "'").replace("\\\\", "\\") if tok.kind == "quoted" else tok.text
        nxt = stream.peek()
        if nxt is not None and nxt.text == "(":
            raise LogicalFormError(
                f"unsupported operator {tok.text!r} at line {tok.line}, column {tok.col}"
            )
        return Constant(name)
    raise LogicalFormError(
        f"unexpected token {tok.text!r} at line {tok.line}, column {tok.col}"
    )


def _parse_quant(stream, op):
    stream.expect("(")
    if op == "qterm":
        det = _parse_expr(stream)
        stream.expect(",")
        var = _parse_expr(stream)
        stream.expect(",")
        scope = _parse_expr(stream)
        stream.expect(")")
        if not isinstance(var, VarRef):
            raise LogicalFormError("qterm variable position must hold a variable")
        return Quant("qterm", det, var, scope, None)
    det = None
    var = _parse_expr(stream)
    stream.expect(",")
    scope = _parse_expr(stream)
    stream.expect(")")
    if not isinstance(var, VarRef):
        raise LogicalFormError("exists variable position must hold a variable")
    return Quant("exists", None, var, None, scope)


def _parse_predication(stream):
    open_tok = stream.expect("[")
    tok = stream.next()
    if tok.kind not in ("name", "num", "quoted"):
        raise LogicalFormError(
            f"predication needs a predicate name at line {tok.line}, column {tok.col}"
        )
    predicate = tok.text[1:-1].replace("\\'", "'").replace("\\\\", "\\") if tok.kind == "quoted" else tok.text
    args = []
    while True:
        tok = stream.next()
        if tok.text == "]":
            break
        if tok.text != ",":
            raise LogicalFormError(
                f"expected ',' or ']' at line {tok.line}, column {tok.col}"
            )
        args.append(_parse_expr(stream))
    del open_tok
    return Predication(predicate, tuple(args))


def _parse_sort(stream):
    term = clauses.parse_term(stream)
    try:
        return terms.sort_from_clause(term)
    except ValueError as exc:
        raise LogicalFormError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Serialization

def serialize_lf(node):
    """Canonical text with minimal whitespace; inverse of parse_lf."""
    return _serialize(node, "lf")


def _serialize(node, path):
    if node.annotation is None:
        raise LogicalFormError(f"unannotated node at {path}")
    return f"({_inner(node, path)};{terms.format_sort(node.annotation)})"


def _inner(node, path):
    if isinstance(node, Constant):
        return _format_name(node.name)
    if isinstance(node, VarRef):
        return node.name
    if isinstance(node, Predication):
        parts = [_format_name(node.predicate)]
        parts += [_serialize(a, f"{path}.args[{i}]") for i, a in enumerate(node.args)]
        return "[" + ",".join(parts) + "]"
    if isinstance(node, Quant):
        var = _serialize(node.var, f"{path}.var")
        if node.op == "qterm":
            det = _serialize(node.det, f"{path}.det")
            restr = _serialize(node.restriction, f"{path}.restriction")
            return f"qterm({det},{var},{restr})"
        body = _serialize(node.body, f"{path}.body")
        return f"exists({var},{body})"
    raise LogicalFormError(f"unknown node type at {path}: {node!r}")


def _format_name(name):
    from .rules import _BARE_NAME

    if _BARE_NAME.fullmatch(name):
        return name
    escaped = name.replace("\\", "\\\\").replace("'", "\\'")
    return f"'{escaped}'"


# ---------------------------------------------------------------------------
# Traversal

def walk(node, path="lf"):
    """Yield (node, path) for every node, parents before children."""
    yield node, path
    if isinstance(node, Predication):
        for i, a in enumerate(node.args):
            yield from walk(a, f"{path}.args[{i}]")
    elif isinstance(node, Quant):
        if node.det is not None:
            yield from walk(node.det, f"{path}.det")
        yield node.var, f"{path}.var"
        if node.restriction is not None:
            yield from walk(node.restriction, f"{path}.restriction")
        if node.body is not None:
            yield from walk(node.body, f"{path}.body")


def predications(node):
    for n, _ in walk(node):
        if isinstance(n, Predication):
            yield n


def unbound_vars(node):
    """Variable references not bound by an enclosing quantifier.

    A subtree annotated with a functional sort is a property
    abstraction and binds its own variables, so references inside one
    do not count as unbound.
    """
    out = []

    def visit(n, bound):
        if isinstance(n, VarRef):
            if n.name not in bound:
                out.append(n.name)
            return
        if n.annotation is not None and isinstance(n.annotation, terms.Func):
            bound = bound | _vars_below(n)
        if isinstance(n, Predication):
            for a in n.args:
                visit(a, bound)
        elif isinstance(n, Quant):
            if n.det is not None:
                visit(n.det, bound)
            inner = bound | {n.var.name}
            if n.restriction is not None:
                visit(n.restriction, inner)
            if n.body is not None:
                visit(n.body, inner)

    visit(node, frozenset())
    return out


def _vars_below(node):
    names = set()
    for n, _ in walk(node):
        if isinstance(n, VarRef):
            names.add(n.name)
    return frozenset(names)


def validate_annotations(node, h):
    """Raise if any node is unannotated or names an unknown sort."""
    for n, path in walk(node):
        if n.annotation is None:
            raise LogicalFormError(f"unannotated node at {path}")
        terms.validate_sorts(n.annotation, h)
