"""Independent reference implementations used to check the sort algebra.

Everything here recomputes results from first principles: subsumption
via an explicit transitive-closure ancestor table, glb by exhaustive
search over a bounded term universe, and rule mapping by evaluating all
four pairwise relations before applying the precedence order.  None of
it shares code paths with the package's own operators.
"""

import itertools

from sortacq import rules, terms


def ancestor_table(h):
    """name -> set of ancestors-or-self, built by iterated expansion."""
    table = {name: {name} for name in h.nodes()}
    changed = True
    while changed:
        changed = False
        for name in h.nodes():
            parent = h.parent(name)
            if parent is None:
                continue
            before = len(table[name])
            table[name] |= table[parent]
            if len(table[name]) != before:
                changed = True
    return table


def oracle_subsumes(general, specific, h, table=None):
    if table is None:
        table = ancestor_table(h)
    if isinstance(general, terms.Variable):
        return True
    if isinstance(specific, terms.Variable):
        return False
    if isinstance(general, terms.Atom) and isinstance(specific, terms.Atom):
        return general.sort in table[specific.sort]
    if isinstance(general, terms.Func) and isinstance(specific, terms.Func):
        if len(general.args) != len(specific.args):
            return False
        pairs = list(zip(general.args, specific.args)) + [(general.result, specific.result)]
        return all(oracle_subsumes(g, s, h, table) for g, s in pairs)
    return False


def term_universe(h, func_depth=0):
    """Every sort term over *h*: one variable, all atoms, and (optionally)
    functional sorts of arity 1..2 built from the shallower universe."""
    base = [terms.Variable("U")] + [terms.Atom(s) for s in sorted(h.nodes())]
    if func_depth <= 0:
        return base
    inner = term_universe(h, func_depth - 1)
    funcs = []
    for arity in (1, 2):
        for combo in itertools.product(inner, repeat=arity):
            for result in inner:
                funcs.append(terms.Func(tuple(combo), result))
    return base + funcs


def oracle_unify(a, b, h, universe=None, table=None):
    """glb by exhaustive search: the unique maximal common lower bound.

    The universe must contain every candidate glb; for atom/variable
    terms the atom universe suffices, for functional terms pass a
    universe of at least the same nesting depth.
    """
    if table is None:
        table = ancestor_table(h)
    if universe is None:
        universe = term_universe(h, func_depth=_depth_of(a, b))
    lower = [
        t
        for t in universe
        if oracle_subsumes(a, t, h, table) and oracle_subsumes(b, t, h, table)
    ]
    maximal = [
        t
        for t in lower
        if not any(
            oracle_subsumes(u, t, h, table) and not oracle_subsumes(t, u, h, table)
            for u in lower
        )
    ]
    if not maximal:
        return None
    # all maximal elements must coincide up to variable identity
    first = maximal[0]
    assert all(terms.alpha_equal(first, m) for m in maximal), maximal
    return first


def _depth_of(*ts):
    def depth(t):
        if isinstance(t, terms.Func):
            return 1 + max([depth(x) for x in t.args] + [depth(t.result)])
        return 0

    return max(depth(t) for t in ts)


def oracle_compare(corpus_rule, reference_rules, h):
    """Four-relation mapping oracle with explicit precedence."""
    table = ancestor_table(h)
    refs = [
        r
        for r in reference_rules
        if r.predicate == corpus_rule.predicate and r.arity == corpus_rule.arity
    ]

    def components(r):
        return list(r.args) + [r.result]

    def exact(r):
        return all(
            _alpha(x, y) for x, y in zip(components(corpus_rule), components(r))
        )

    def subsumed_by(r):
        return all(
            oracle_subsumes(y, x, h, table)
            for x, y in zip(components(corpus_rule), components(r))
        )

    def subsumes_ref(r):
        return all(
            oracle_subsumes(x, y, h, table)
            for x, y in zip(components(corpus_rule), components(r))
        )

    def unifiable(r):
        universe = term_universe(h, func_depth=_depth_of(*components(corpus_rule), *components(r)))
        return all(
            oracle_unify(x, y, h, universe, table) is not None
            for x, y in zip(components(corpus_rule), components(r))
        )

    if any(exact(r) for r in refs):
        return rules.MappingCategory.EXACT
    if any(subsumed_by(r) for r in refs):
        return rules.MappingCategory.SUBSUMED_BY
    if any(subsumes_ref(r) for r in refs):
        return rules.MappingCategory.SUBSUMES
    if any(unifiable(r) and not subsumed_by(r) and not subsumes_ref(r) for r in refs):
        return rules.MappingCategory.INCOMPARABLE
    return rules.MappingCategory.INCOMPATIBLE


def _alpha(x, y):
    if isinstance(x, terms.Variable) and isinstance(y, terms.Variable):
        return True
    if isinstance(x, terms.Atom) and isinstance(y, terms.Atom):
        return x.sort == y.sort
    if isinstance(x, terms.Func) and isinstance(y, terms.Func):
        if len(x.args) != len(y.args):
            return False
        return all(_alpha(p, q) for p, q in zip(x.args, y.args)) and _alpha(
            x.result, y.result
        )
    return False


def all_tree_hierarchies(max_sorts):
    """Every labelled tree hierarchy with at most *max_sorts* sorts
    (root included).  Non-root sorts are named s1..sk; each picks any
    parent among the root and the other sorts, cycles filtered out."""
    from sortacq.hierarchy import SortHierarchy

    out = []
    for k in range(max_sorts):
        names = [f"s{i + 1}" for i in range(k)]
        choices = ["top"] + names
        for parents in itertools.product(choices, repeat=k):
            mapping = {n: p for n, p in zip(names, parents) if p != n}
            if len(mapping) != k:
                continue
            try:
                out.append(SortHierarchy(mapping))
            except Exception:
                continue
    return out
