"""Chart parser with semantic composition and sort licensing.

Parsing builds logical forms bottom-up while the active rule set vets
every predication: a predication survives only if some same-arity rule
for its predicate unifies with its argument sorts, and the unified
sorts refine the analysis.  Constants are licensed by zero-arity rules.
Because signatures leave argument positions variable, parsing against
a signature set both admits everything the grammar can build and fills
in the concrete sorts that harvesting later reads off; parsing against
a harvested rule set prunes whatever those rules exclude.

Composition is variable-threaded: each constituent exposes a hook (a
variable or constant), accumulates predication records over it, and
dependents close over their own variable with an existential wrapper
when they attach.  The bound variable of an open nominal is quantified
only when a complete analysis is read out, as ``qterm(det, var,
restriction)`` with the bare-noun determiner supplied by ParserConfig.

When no root-category edge spans the sentence, maximal chunks of the
categories named by the grammar's fragment rules are wrapped in the
corresponding fragment predicates and conjoined.

Analyses are ranked by a deterministic score: fragment count, then
predication count, then the summed derivation depth of the attachment
steps that introduced connector predications (so flatter attachment
wins), with the canonical serialization as the final tiebreak.  The
preferred logical form is the minimum.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

from . import logform, terms
from .hierarchy import HierarchyError
from .lexgram import Connect, Fragment, Head, NounNoun, Quantify


class ParseError(ValueError):
    pass


@dataclass(frozen=True)
class ParserConfig:
    """Knobs for grammar-independent pieces of composition.

    The constants must be licensed by zero-arity rules in the active
    set (the bundled toy domain declares them as tool words).
    """

    root_category: str = "np"
    prop_sort: str = "prop"
    emit_aspect: bool = True
    aspect_predicate: str = "has_aspect"
    aspect_constant: str = "in_progress"
    degree_constant: str = "pos"
    bare_determiner: str = "some"
    workers: int = 1


# --- semantic values -------------------------------------------------------
#
# Conditions are recorded, not materialized: variable sorts live in the
# edge's varsorts table so later licensing can narrow a variable
# everywhere it occurs.  Sorts are stamped onto the tree only when an
# analysis is read out.

@dataclass(frozen=True)
class VRef:
    vid: str


@dataclass(frozen=True)
class CRef:
    name: str
    sort: terms.SortTerm


@dataclass(frozen=True)
class PRef:
    """A closed property abstraction (already a logical form)."""

    lf: logform.LogicalForm


SLOT = object()  # unfilled modifier position in an open predication


@dataclass(frozen=True)
class Pred:
    predicate: str
    args: tuple
    result: terms.SortTerm | None = None


@dataclass(frozen=True)
class Wrap:
    """Dependent material existentially closed over its variable."""

    vid: str
    conds: tuple


@dataclass(frozen=True)
class Nom:
    kind: str  # entity | event
    hook: "VRef | CRef"
    conds: tuple
    varsorts: tuple  # sorted ((vid, SortTerm), ...)
    det: CRef | None = None
    open_pred: Pred | None = None


@dataclass(frozen=True)
class PP:
    pred: str
    inner: Nom


@dataclass(frozen=True)
class DetSem:
    name: str
    sort: terms.SortTerm


@dataclass(frozen=True)
class PrepSem:
    pred: str


@dataclass(frozen=True)
class Lex:
    index: int
    word: str
    category: str


@dataclass(frozen=True)
class Node:
    rule: object
    children: tuple


@dataclass(frozen=True)
class Edge:
    start: int
    end: int
    cat: str
    sem: object
    deriv: object


@dataclass(frozen=True)
class Analysis:
    lf: logform.LogicalForm
    fragments: int
    predication_count: int
    attachment_sum: int
    text: str

    @property
    def score(self):
        return (self.fragments, self.predication_count, self.attachment_sum, self.text)


@dataclass(frozen=True)
class ParseResult:
    sentence: object
    analyses: tuple
    plf_index: int | None
    error: str | None = None

    @property
    def plf(self):
        return None if self.plf_index is None else self.analyses[self.plf_index]


# --- varsort tables --------------------------------------------------------

def vs_get(varsorts, vid):
    for v, s in varsorts:
        if v == vid:
            return s
    return terms.Variable()


def vs_set(varsorts, vid, sort):
    items = dict(varsorts)
    items[vid] = sort
    return tuple(sorted(items.items(), key=lambda kv: kv[0]))


def vs_merge(a, b):
    items = dict(a)
    items.update(b)
    return tuple(sorted(items.items(), key=lambda kv: kv[0]))


# --- active rule set -------------------------------------------------------

class RuleIndex:
    def __init__(self, rule_list, h):
        self.h = h
        self.by_key = {}
        for r in rule_list:
            self.by_key.setdefault((r.predicate, r.arity), []).append(r)

    def license(self, predicate, arg_sorts):
        """All distinct (narrowed argument sorts, result) refinements."""
        out = []
        for rule in self.by_key.get((predicate, len(arg_sorts)), ()):
            narrowed = []
            for have, want in zip(arg_sorts, rule.args):
                u = terms.unify(have, want, self.h)
                if u is None:
                    break
                narrowed.append(u)
            else:
                refined = (tuple(narrowed), rule.result)
                if refined not in out:
                    out.append(refined)
        return out

    def constant_sorts(self, name):
        return [r.result for r in self.by_key.get((name, 0), ())]


# --- parser ----------------------------------------------------------------

class Parser:
    def __init__(self, lexicon_idx, grammar, rule_index, config=ParserConfig()):
        self.lexicon = lexicon_idx
        self.grammar = grammar
        self.rules = rule_index
        self.config = config
        self.unary = [r for r in grammar if len(r.rhs) == 1 and not isinstance(r.op, Fragment)]
        self.binary = [r for r in grammar if len(r.rhs) == 2]
        self.fragment_rules = {
            r.rhs[0]: r.op.predicate for r in grammar if isinstance(r.op, Fragment)
        }

    # -- lexical edges

    def lexical_edges(self, index, word):
        entries = self.lexicon.get(word)
        if not entries:
            raise ParseError(f"unknown word {word!r}")
        edges = []
        for entry in entries:
            deriv = Lex(index, word, entry.category)
            for sem in self._lexical_sems(index, entry):
                edges.append(Edge(index, index + 1, entry.category, sem, deriv))
        return edges

    def _lexical_sems(self, index, entry):
        cat, pred = entry.category, entry.predicate
        if cat == "noun":
            return self._sorted_unary_noms(index, pred, "entity")
        if cat == "verb":
            return self._verb_sems(index, pred)
        if cat in ("adj", "adv"):
            return self._modifier_sems(index, pred)
        if cat in ("name", "number", "tool"):
            return [
                Nom("entity", CRef(pred, s), (), ())
                for s in self.rules.constant_sorts(pred)
            ]
        if cat == "det":
            return [DetSem(pred, s) for s in self.rules.constant_sorts(pred)]
        if cat == "prep":
            return [PrepSem(pred)]
        raise ParseError(f"unhandled category {cat!r}")

    def _sorted_unary_noms(self, index, pred, kind):
        vid = f"V{index}"
        sems = []
        for (arg_sort,), result in self.rules.license(pred, [terms.Variable()]):
            sems.append(
                Nom(
                    kind,
                    VRef(vid),
                    (Pred(pred, (VRef(vid),), result),),
                    ((vid, arg_sort),),
                )
            )
        return sems

    def _verb_sems(self, index, pred):
        sems = []
        for nom in self._sorted_unary_noms(index, pred, "event"):
            if not self.config.emit_aspect:
                sems.append(nom)
                continue
            vid = nom.hook.vid
            marked = []
            for aspect_sort in self.rules.constant_sorts(self.config.aspect_constant):
                marker = CRef(self.config.aspect_constant, aspect_sort)
                arg_sorts = [vs_get(nom.varsorts, vid), aspect_sort]
                for narrowed, result in self.rules.license(
                    self.config.aspect_predicate, arg_sorts
                ):
                    cond = Pred(
                        self.config.aspect_predicate,
                        (VRef(vid), CRef(marker.name, narrowed[1])),
                        result,
                    )
                    marked.append(
                        replace(
                            nom,
                            conds=nom.conds + (cond,),
                            varsorts=vs_set(nom.varsorts, vid, narrowed[0]),
                        )
                    )
            # the aspect conjunct is best-effort: with no rule for it
            # (harvests exclude it) the bare event reading survives
            sems.extend(marked or [nom])
        return sems

    def _modifier_sems(self, index, pred):
        """Adjectives and adverbs: an eventuality variable plus an open
        predication whose second position is filled at attachment.
        Licensing waits until then.  Extra positions beyond the second
        take the default degree constant."""
        vid = f"V{index}"
        arities = sorted({arity for (p, arity) in self.rules.by_key if p == pred and arity >= 2})
        sems = []
        for arity in arities:
            filler_sorts = [None]
            if arity > 2:
                filler_sorts = self.rules.constant_sorts(self.config.degree_constant)
            for fs in filler_sorts:
                args = [VRef(vid), SLOT]
                args += [CRef(self.config.degree_constant, fs)] * (arity - 2)
                sems.append(
                    Nom(
                        "event",
                        VRef(vid),
                        (),
                        ((vid, terms.Variable()),),
                        open_pred=Pred(pred, tuple(args)),
                    )
                )
        return sems

    # -- composition

    def apply_rule(self, rule, children):
        cats = tuple(c.cat for c in children)
        sems = tuple(c.sem for c in children)
        op = rule.op
        try:
            if isinstance(op, Head):
                return self._apply_head(rule, op, cats, sems)
            if isinstance(op, Quantify):
                return self._apply_quantify(op, sems)
            if isinstance(op, Connect):
                return self._apply_connect(rule, op, cats, sems)
            if isinstance(op, NounNoun):
                return self._apply_nn(rule, op, cats, sems)
        except HierarchyError as exc:
            raise ParseError(str(exc)) from exc
        return []

    def _apply_head(self, rule, op, cats, sems):
        projected = sems[op.index]
        if len(sems) == 2:
            other = sems[1 - op.index]
            if isinstance(other, PrepSem) and isinstance(projected, Nom):
                return [PP(other.pred, projected)]
            return []
        return [projected]

    def _apply_quantify(self, op, sems):
        nom = sems[op.head]
        if not isinstance(nom, Nom) or nom.kind != "entity" or nom.det is not None:
            return []
        if nom.open_pred is not None or isinstance(nom.hook, CRef):
            return []
        if op.det is None:
            dets = [
                DetSem(self.config.bare_determiner, s)
                for s in self.rules.constant_sorts(self.config.bare_determiner)
            ]
        else:
            det = sems[op.det]
            dets = [det] if isinstance(det, DetSem) else []
        return [replace(nom, det=CRef(d.name, d.sort)) for d in dets]

    def _projector(self, rule, cats, fallback):
        for i, cat in enumerate(cats):
            if cat == rule.lhs:
                return i
        return fallback

    def _apply_connect(self, rule, op, cats, sems):
        if len(sems) != 2:
            return []
        if op.predicate == "self":
            return self._apply_fill(rule, op, cats, sems)
        proj_idx = self._projector(rule, cats, op.first)
        dep_idx = 1 - proj_idx
        head = sems[proj_idx]
        dep = sems[dep_idx]
        if isinstance(dep, PP):
            connector = dep.pred if op.predicate == "prep" else op.predicate
            dep = dep.inner
        elif op.predicate == "prep":
            return []
        else:
            connector = op.predicate
        if not isinstance(head, Nom) or not isinstance(dep, Nom):
            return []
        if head.open_pred is not None or dep.open_pred is not None:
            return []
        by_index = {proj_idx: head, dep_idx: dep}
        arg1, arg2 = by_index[op.first].hook, by_index[op.second].hook
        merged = vs_merge(head.varsorts, dep.varsorts)
        results = []
        for _, new_pred, varsorts in self._licensed_preds(connector, (arg1, arg2), merged):
            results.append(self._attach(head, dep, new_pred, varsorts))
        return results

    def _apply_fill(self, rule, op, cats, sems):
        proj_idx = self._projector(rule, cats, op.first)
        dep_idx = 1 - proj_idx
        head, dep = sems[proj_idx], sems[dep_idx]
        if not isinstance(head, Nom) or not isinstance(dep, Nom):
            return []
        if head.open_pred is not None or dep.open_pred is None:
            return []
        filled = tuple(head.hook if a is SLOT else a for a in dep.open_pred.args)
        merged = vs_merge(head.varsorts, dep.varsorts)
        results = []
        for _, new_pred, varsorts in self._licensed_preds(
            dep.open_pred.predicate, filled, merged
        ):
            closed = replace(dep, conds=dep.conds + (new_pred,), open_pred=None)
            results.append(self._attach(head, closed, None, varsorts))
        return results

    def _apply_nn(self, rule, op, cats, sems):
        proj_idx = self._projector(rule, cats, 1)
        dep_idx = 1 - proj_idx
        head, dep = sems[proj_idx], sems[dep_idx]
        if not isinstance(head, Nom) or not isinstance(dep, Nom):
            return []
        if head.open_pred is not None or dep.open_pred is not None:
            return []
        if isinstance(dep.hook, CRef):
            first = dep.hook
            merged = vs_merge(head.varsorts, dep.varsorts)
            extra_conds = dep.conds
        else:
            first = PRef(self._abstraction(dep))
            merged = head.varsorts  # dep's variable is consumed by the abstraction
            extra_conds = ()
        results = []
        for _, new_pred, varsorts in self._licensed_preds(
            op.predicate, (first, head.hook), merged
        ):
            out = replace(
                head,
                conds=head.conds + extra_conds + (new_pred,),
                varsorts=varsorts,
            )
            results.append(out)
        return results

    def _abstraction(self, nom):
        """The dependent nominal as a property over its own variable,
        annotated with the matching functional sort."""
        body = [self._materialize_cond(c, nom.varsorts) for c in nom.conds]
        var_sort = vs_get(nom.varsorts, nom.hook.vid)
        return logform.Predication(
            "and",
            tuple(body),
            terms.Func((var_sort,), terms.Atom(self.config.prop_sort)),
        )

    def _licensed_preds(self, predicate, args, varsorts):
        arg_sorts = [self._arg_sort(a, varsorts) for a in args]
        out = []
        for narrowed, result in self.rules.license(predicate, arg_sorts):
            vs = varsorts
            new_args = []
            for arg, sort in zip(args, narrowed):
                if isinstance(arg, VRef):
                    vs = vs_set(vs, arg.vid, sort)
                    new_args.append(arg)
                elif isinstance(arg, CRef):
                    new_args.append(CRef(arg.name, sort))
                elif isinstance(arg, PRef):
                    new_args.append(PRef(logform.annotate(arg.lf, sort)))
                else:
                    new_args.append(arg)
            out.append((narrowed, Pred(predicate, tuple(new_args), result), vs))
        return out

    def _arg_sort(self, arg, varsorts):
        if isinstance(arg, VRef):
            return vs_get(varsorts, arg.vid)
        if isinstance(arg, CRef):
            return arg.sort
        if isinstance(arg, PRef):
            return arg.lf.annotation
        raise ParseError("unfilled argument slot")

    def _attach(self, head, dep, new_pred, varsorts):
        """Extend the head with dependent material.  Variable-hooked
        dependents close existentially over their variable; constants
        contribute their conditions in place."""
        if isinstance(dep.hook, VRef):
            inner = dep.conds + ((new_pred,) if new_pred else ())
            added = (Wrap(dep.hook.vid, inner),)
        else:
            added = dep.conds + ((new_pred,) if new_pred else ())
        return replace(head, conds=head.conds + added, varsorts=varsorts)

    # -- chart loop

    def parse(self, sentence):
        try:
            return self._parse(sentence)
        except ParseError as exc:
            return ParseResult(sentence, (), None, error=str(exc))

    def _parse(self, sentence):
        n = len(sentence.tokens)
        if n == 0:
            return ParseResult(sentence, (), None, error="empty sentence")
        spans = {}
        for i, word in enumerate(sentence.tokens):
            spans[(i, i + 1)] = self._unary_closure(self.lexical_edges(i, word))
        for width in range(2, n + 1):
            for start in range(0, n - width + 1):
                end = start + width
                edges = []
                for mid in range(start + 1, end):
                    for rule in self.binary:
                        for left in spans.get((start, mid), ()):
                            if left.cat != rule.rhs[0]:
                                continue
                            for right in spans.get((mid, end), ()):
                                if right.cat != rule.rhs[1]:
                                    continue
                                children = (left, right)
                                for sem in self.apply_rule(rule, children):
                                    edges.append(
                                        Edge(start, end, rule.lhs, sem, Node(rule, children))
                                    )
                spans[(start, end)] = self._unary_closure(edges)
        roots = [e for e in spans.get((0, n), ()) if e.cat == self.config.root_category]
        analyses = []
        for edge in roots:
            lf = self._close_edge(edge)
            if lf is not None:
                analyses.append(self._score(lf, edge.deriv, fragments=0))
        if not analyses:
            analyses = self._fragment_analyses(spans, n)
        if not analyses:
            return ParseResult(sentence, (), None, error="no analysis")
        analyses = tuple(analyses)
        return ParseResult(sentence, analyses, select_plf(analyses))

    def _unary_closure(self, edges):
        out = list(edges)
        frontier = list(edges)
        while frontier:
            added = []
            for rule in self.unary:
                for edge in frontier:
                    if edge.cat != rule.rhs[0]:
                        continue
                    for sem in self.apply_rule(rule, (edge,)):
                        added.append(
                            Edge(edge.start, edge.end, rule.lhs, sem, Node(rule, (edge,)))
                        )
            out.extend(added)
            frontier = added
        return out

    # -- analysis readout

    def _close_edge(self, edge):
        sem = edge.sem
        if isinstance(sem, Nom):
            return self._close_nom(sem, edge.cat)
        return None

    def _close_nom(self, nom, cat):
        if nom.open_pred is not None:
            return None
        prop = terms.Atom(self.config.prop_sort)
        if isinstance(nom.hook, CRef):
            if not nom.conds:
                return logform.Constant(nom.hook.name, nom.hook.sort)
            return self._and_join(
                [self._materialize_cond(c, nom.varsorts) for c in nom.conds], prop
            )
        vid = nom.hook.vid
        var_sort = vs_get(nom.varsorts, vid)
        body = self._and_join(
            [self._materialize_cond(c, nom.varsorts) for c in nom.conds], prop
        )
        var = logform.VarRef(vid, var_sort)
        if nom.kind == "event" or nom.det is None:
            return logform.Quant("exists", None, var, None, body, prop)
        det = logform.Constant(nom.det.name, nom.det.sort)
        return logform.Quant("qterm", det, var, body, None, var_sort)

    def _materialize_cond(self, cond, varsorts):
        prop = terms.Atom(self.config.prop_sort)
        if isinstance(cond, Wrap):
            body = self._and_join(
                [self._materialize_cond(c, varsorts) for c in cond.conds], prop
            )
            var = logform.VarRef(cond.vid, vs_get(varsorts, cond.vid))
            return logform.Quant("exists", None, var, None, body, prop)
        args = []
        for a in cond.args:
            if isinstance(a, VRef):
                args.append(logform.VarRef(a.vid, vs_get(varsorts, a.vid)))
            elif isinstance(a, CRef):
                args.append(logform.Constant(a.name, a.sort))
            elif isinstance(a, PRef):
                args.append(a.lf)
            else:
                raise ParseError("unfilled argument slot survived to readout")
        return logform.Predication(cond.predicate, tuple(args), cond.result)

    def _and_join(self, lfs, prop):
        if len(lfs) == 1:
            return lfs[0]
        return logform.Predication("and", tuple(lfs), prop)

    def _score(self, lf, deriv, fragments):
        preds = sum(1 for _ in logform.predications(lf))
        return Analysis(lf, fragments, preds, _attachment_sum(deriv), logform.serialize_lf(lf))

    # -- fragment fallback

    def _fragment_analyses(self, spans, n):
        if not self.fragment_rules:
            return []
        chunks = []
        pos = 0
        while pos < n:
            best = None
            for end in range(n, pos, -1):
                options = [
                    e for e in spans.get((pos, end), ()) if e.cat in self.fragment_rules
                ]
                if options:
                    best = (pos, end, options)
                    break
            if best is None:
                pos += 1  # token contributes to no wrappable chunk
                continue
            chunks.append(best)
            pos = best[1]
        if not chunks:
            return []
        per_chunk = []
        for _, _, options in chunks:
            closed = []
            for edge in options:
                lf = self._close_edge(edge)
                if lf is None:
                    continue
                for wrapped in self._wrap_fragment(edge, lf):
                    closed.append((wrapped, edge.deriv))
            if not closed:
                return []
            per_chunk.append(closed)
        analyses = []
        prop = terms.Atom(self.config.prop_sort)
        for combo in itertools.product(*per_chunk):
            lf = self._and_join([c[0] for c in combo], prop)
            attach = sum(_attachment_sum(c[1]) for c in combo)
            preds = sum(1 for _ in logform.predications(lf))
            analyses.append(
                Analysis(lf, len(combo), preds, attach, logform.serialize_lf(lf))
            )
        return analyses

    def _wrap_fragment(self, edge, lf):
        wrapper = self.fragment_rules[edge.cat]
        out = []
        for (narrowed,), result in self.rules.license(wrapper, [lf.annotation]):
            inner = logform.annotate(lf, narrowed)
            out.append(logform.Predication(wrapper, (inner,), result))
        return out


def select_plf(analyses):
    """Index of the lexicographically minimal score; deterministic
    because the canonical serialization is the last component."""
    if not analyses:
        raise ValueError("select_plf needs at least one analysis")
    return min(range(len(analyses)), key=lambda i: analyses[i].score)


def _attachment_sum(deriv, depth=0):
    if isinstance(deriv, Lex):
        return 0
    total = depth if isinstance(deriv.rule.op, (Connect, NounNoun)) else 0
    for child in deriv.children:
        total += _attachment_sum(child.deriv, depth + 1)
    return total


# --- corpus-level API ------------------------------------------------------

def parse_corpus(sentences, lexicon_idx, grammar, rule_list, h, config=ParserConfig()):
    """Parse every sentence; failures are recorded, never raised.

    With ``config.workers > 1`` sentences are parsed by a thread pool
    and the results merged back into corpus order by sentence id, so
    the output is identical to a serial run.
    """
    parser = Parser(lexicon_idx, grammar, RuleIndex(rule_list, h), config)
    if config.workers <= 1:
        return [parser.parse(s) for s in sentences]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        results = {r.sentence.sid: r for r in pool.map(parser.parse, sentences)}
    return [results[s.sid] for s in sentences]


def licensed(lf, rule_list, h, structural=("and",)):
    """Post-hoc check that a logical form is admitted by a rule set.

    Every predication (apart from the structural conjunction) must
    unify argument-wise and result-wise with some rule, and every
    constant occurrence needs a zero-arity rule for its name.
    """
    index = RuleIndex(rule_list, h)
    for node, _ in logform.walk(lf):
        if isinstance(node, logform.Predication) and node.predicate not in structural:
            sorts = [a.annotation for a in node.args]
            if not any(
                terms.unify(node.annotation, result, h) is not None
                for _, result in index.license(node.predicate, sorts)
            ):
                return False
        elif isinstance(node, logform.Constant):
            if not any(
                terms.unify(node.annotation, s, h) is not None
                for s in index.constant_sorts(node.name)
            ):
                return False
    return True
