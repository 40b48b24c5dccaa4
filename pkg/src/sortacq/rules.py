"""Sort rules: per-predicate argument/result sort declarations.

Two kinds share one shape.  ``signature`` rules are the generated (or
hand-written) upper bounds, usually containing Variables; ``sor`` rules
are harvested or edited constraints and contain no Variables.  A rule
file mixes both clause heads freely::

    signature(at, ([X,Y],[prop])).
    sor(to, ([[flight],[city]],[prop])).
    sor('BOSTON', ([city])).

Zero-arity rules write their result alone in the parenthesised body.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from . import clauses, terms

_BARE_NAME = re.compile(r"[a-z][A-Za-z0-9_]*|\d+")


class RuleError(ValueError):
    pass


@dataclass(frozen=True)
class SortRule:
    kind: str  # "sor" | "signature"
    predicate: str
    args: tuple
    result: terms.SortTerm

    @property
    def arity(self):
        return len(self.args)


class MappingCategory(enum.Enum):
    EXACT = "exact"
    INCOMPATIBLE = "incompatible"
    SUBSUMED_BY = "subsumed_by"
    SUBSUMES = "subsumes"
    INCOMPARABLE = "incomparable"


def rule_subsumes(general, specific, h):
    """Componentwise subsumption of same-predicate, same-arity rules."""
    if general.predicate != specific.predicate or general.arity != specific.arity:
        return False
    return all(
        terms.subsumes(g, s, h) for g, s in zip(general.args, specific.args)
    ) and terms.subsumes(general.result, specific.result, h)


def alpha_equal_rules(a, b):
    if a.predicate != b.predicate or a.arity != b.arity:
        return False
    return all(
        terms.alpha_equal(x, y) for x, y in zip(a.args, b.args)
    ) and terms.alpha_equal(a.result, b.result)


def unifiable_componentwise(a, b, h):
    if a.predicate != b.predicate or a.arity != b.arity:
        return False
    for x, y in zip(a.args, b.args):
        if terms.unify(x, y, h) is None:
            return False
    return terms.unify(a.result, b.result, h) is not None


def compare_rule(corpus_rule, reference_rules, h):
    """Classify one corpus rule against a reference set.

    Only same-predicate, same-arity reference rules can match.  The
    categories are checked in precedence order: an exact (alpha-equal)
    match anywhere wins, then being subsumed by some reference rule,
    then subsuming one, then componentwise unifiability with neither
    side subsuming, and Incompatible is the leftover.
    """
    refs = [
        r
        for r in reference_rules
        if r.predicate == corpus_rule.predicate and r.arity == corpus_rule.arity
    ]
    if any(alpha_equal_rules(corpus_rule, r) for r in refs):
        return MappingCategory.EXACT
    if any(rule_subsumes(r, corpus_rule, h) for r in refs):
        return MappingCategory.SUBSUMED_BY
    if any(rule_subsumes(corpus_rule, r, h) for r in refs):
        return MappingCategory.SUBSUMES
    if any(unifiable_componentwise(corpus_rule, r, h) for r in refs):
        return MappingCategory.INCOMPARABLE
    return MappingCategory.INCOMPATIBLE


# ---------------------------------------------------------------------------
# Text form

def _format_predicate(name):
    if _BARE_NAME.fullmatch(name):
        return name
    escaped = name.replace("\\", "\\\\").replace("'", "\\'")
    return f"'{escaped}'"


def _rename_variables(sorts):
    """Same sorts with variables renamed positionally (A, B, ...).

    Variable names carry no identity, so the canonical text can use a
    fixed alphabet; alpha-variant rules then print identically.
    """
    counter = iter(range(10_000))

    def fresh():
        i = next(counter)
        return chr(ord("A") + i) if i < 26 else f"V{i}"

    def rename(t):
        if isinstance(t, terms.Variable):
            return terms.Variable(fresh())
        if isinstance(t, terms.Func):
            return terms.Func(tuple(rename(a) for a in t.args), rename(t.result))
        return t

    return tuple(rename(t) for t in sorts)


def format_rule(rule):
    pred = _format_predicate(rule.predicate)
    sorts = _rename_variables(rule.args + (rule.result,))
    result = terms.format_sort(sorts[-1])
    if rule.arity == 0:
        return f"{rule.kind}({pred},({result}))"
    args = ",".join(terms.format_sort(a) for a in sorts[:-1])
    return f"{rule.kind}({pred},([{args}],{result}))"


def rule_from_clause(term, h=None):
    if not isinstance(term, clauses.Struct) or term.functor not in ("sor", "signature"):
        raise RuleError(f"expected sor(...) or signature(...), found {term!r}")
    if len(term.args) != 2:
        raise RuleError(f"rule clause needs predicate and body: {term!r}")
    head, body = term.args
    if isinstance(head, clauses.Atom):
        predicate = head.name
    else:
        raise RuleError(f"rule predicate must be an atom: {head!r}")
    if isinstance(body, clauses.Tuple) and len(body.items) == 2 and isinstance(body.items[0], clauses.List):
        args = tuple(terms.sort_from_clause(a) for a in body.items[0].items)
        result = terms.sort_from_clause(body.items[1])
    else:
        # zero-arity: the parenthesised body is the bare result sort
        args = ()
        result = terms.sort_from_clause(body)
    rule = SortRule(term.functor, predicate, args, result)
    if h is not None:
        for t in rule.args + (rule.result,):
            terms.validate_sorts(t, h)
    return rule


def parse_rules(text, h=None):
    out = []
    for term, line in clauses.read_clauses(text):
        try:
            out.append(rule_from_clause(term, h))
        except (RuleError, ValueError) as exc:
            raise RuleError(f"{exc} (line {line})") from exc
    return out


def load_rules(path, h=None):
    with open(path, encoding="utf-8") as fh:
        return parse_rules(fh.read(), h)


def format_rule_file(rules):
    lines = [format_rule(r) + "." for r in sorted(rules, key=rule_sort_key)]
    return "\n".join(lines) + "\n" if lines else ""


def rule_sort_key(rule):
    return (rule.predicate, rule.arity, format_rule(rule))


def canonical_set(rules):
    """The rule set as canonical strings, kind included."""
    return {format_rule(r) for r in rules}
