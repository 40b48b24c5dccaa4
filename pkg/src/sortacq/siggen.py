"""Signature generation from the lexicon.

Signatures are permissive schematic rules: they pin each lexical
predicate's arity and inherent sort while leaving every combinatorial
position as a variable, so a first parsing pass accepts whatever the
grammar can build and the harvester can read concrete sorts off the
results.  Shapes by category:

    noun/verb      pred(inherent) -> [prop]
    adj/adv        pred(inherent, A, B) -> [prop]
    prep           pred(X, Y) -> [prop]
    det/tool/number  zero-arity constant with its inherent sort
    name           zero-arity constant with the name table's sort

Connector predicates introduced by grammar rules rather than words
(actor, n_n_rel, fragment wrappers, the aspect marker) get all
variable arguments at the arity the grammar dictates.

A lexical entry with no inherent sort gets a fresh sort ``lex_<pred>``
placed directly under the hierarchy root, keeping the generated part
of the hierarchy almost entirely flat.  Hand-written signatures live
in their own file and are merged on top of the generated ones; on a
predicate/arity collision the hand entry wins.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import terms
from .rules import SortRule, rule_sort_key

PROP = "prop"


class SignatureError(ValueError):
    pass


@dataclass(frozen=True)
class SignatureStats:
    total: int
    zero_arity: int
    hand_added: int


def generate_signatures(lexicon, names, connectors, h):
    """Build the signature rule set for *lexicon*.

    *names* maps constant names to sorts; *connectors* is the
    (predicate, arity) list the grammar introduces.  Returns the rules
    plus the hierarchy extended with any fresh lexical sorts.
    """
    fresh = {}
    prop = terms.Atom(PROP)
    collected = {}

    def emit(predicate, args, result):
        key = (predicate, len(args))
        rule = SortRule("signature", predicate, tuple(args), result)
        if key in collected and collected[key] != rule:
            raise SignatureError(
                f"conflicting signatures for {predicate}/{len(args)}"
            )
        collected[key] = rule

    def inherent_sort(entry):
        if entry.inherent is not None:
            terms.validate_sorts(entry.inherent, h.extended(fresh))
            return entry.inherent
        name = f"lex_{entry.predicate}"
        if name not in fresh and name in h:
            raise SignatureError(f"fresh sort {name!r} collides with the hierarchy")
        fresh[name] = "top"
        return terms.Atom(name)

    for entry in lexicon:
        if entry.category in ("noun", "verb"):
            emit(entry.predicate, (inherent_sort(entry),), prop)
        elif entry.category in ("adj", "adv"):
            emit(
                entry.predicate,
                (inherent_sort(entry), terms.Variable(), terms.Variable()),
                prop,
            )
        elif entry.category == "prep":
            emit(entry.predicate, (terms.Variable(), terms.Variable()), prop)
        elif entry.category == "name":
            if entry.predicate not in names:
                raise SignatureError(f"name {entry.predicate!r} missing from the name table")
            emit(entry.predicate, (), names[entry.predicate])
        elif entry.category in ("det", "tool", "number"):
            if entry.inherent is None:
                raise SignatureError(
                    f"{entry.category} entry {entry.word!r} needs an inherent sort"
                )
            emit(entry.predicate, (), entry.inherent)
        else:
            raise SignatureError(f"no signature shape for category {entry.category!r}")

    for predicate, arity in connectors:
        emit(predicate, tuple(terms.Variable() for _ in range(arity)), prop)

    signatures = sorted(collected.values(), key=rule_sort_key)
    return signatures, h.extended(fresh)


def merge_signatures(generated, hand):
    """Generated set with hand-written rules layered on top.

    A hand rule replaces the generated rule with the same predicate
    and arity; otherwise it is added.
    """
    merged = {(r.predicate, r.arity): r for r in generated}
    for r in hand:
        merged[(r.predicate, r.arity)] = r
    return sorted(merged.values(), key=rule_sort_key)


def signature_stats(signatures, hand=()):
    combined = merge_signatures(signatures, hand)
    return SignatureStats(
        total=len(combined),
        zero_arity=sum(1 for r in combined if r.arity == 0),
        hand_added=len(list(hand)),
    )
