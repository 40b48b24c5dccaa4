"""Map harvested rules onto a hand-built reference set and score them.

Every corpus rule is assigned exactly one category against the
reference (see rules.compare_rule): Exact, Subsumed-by, Subsumes,
Incomparable, or Incompatible.  Zero-arity rules carry no selectional
information and are dropped from both sides before mapping, and both
sides are deduplicated, so the Exact count and the number of distinct
reference rules hit coincide unless a caller overrides the latter.

Metrics over the counts:

    precision_low   = Exact / total
    precision_high  = (Exact + Subsumed-by) / total
    overgeneration  = Incompatible / total
    recall          = distinct reference rules exactly hit / reference size

All four are exact fractions; rendering converts to percentages.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from . import fileio, rules, terms
from .rules import MappingCategory


class MappingError(ValueError):
    pass


@dataclass(frozen=True)
class Metrics:
    precision_low: Fraction
    precision_high: Fraction
    overgeneration: Fraction
    recall: Fraction


@dataclass(frozen=True)
class MappingReport:
    assignments: tuple  # ((rule, category), ...) in canonical rule order
    counts: dict  # MappingCategory -> int, every category present
    total: int
    reference_size: int
    matched_references: tuple  # distinct reference rules hit exactly
    metrics: Metrics | None  # None when either side is empty


def _dedup_positive_arity(rule_list):
    seen = {}
    for rule in rule_list:
        if rule.arity == 0:
            continue
        seen.setdefault(rules.format_rule(rule), rule)
    return sorted(seen.values(), key=rules.rule_sort_key)


def map_rules(corpus, reference, h):
    """Categorize each corpus rule against the reference set."""
    corpus_rules = _dedup_positive_arity(corpus)
    reference_rules = _dedup_positive_arity(reference)
    for rule in itertools.chain(corpus_rules, reference_rules):
        for sort in rule.args + (rule.result,):
            terms.validate_sorts(sort, h)
    assignments = tuple(
        (rule, rules.compare_rule(rule, reference_rules, h)) for rule in corpus_rules
    )
    counts = {category: 0 for category in MappingCategory}
    for _, category in assignments:
        counts[category] += 1
    matched = tuple(
        ref
        for ref in reference_rules
        if any(rules.alpha_equal_rules(ref, rule) for rule in corpus_rules)
    )
    total = len(corpus_rules)
    reference_size = len(reference_rules)
    metrics = None
    if total > 0 and reference_size > 0:
        metrics = compute_metrics(counts, total, reference_size, len(matched))
    return MappingReport(assignments, counts, total, reference_size, matched, metrics)


def compute_metrics(counts, total, reference_size, exact_matched=None):
    """Score a category tally; *exact_matched* defaults to the Exact count."""
    if total <= 0:
        raise MappingError("no corpus rules to score")
    if reference_size <= 0:
        raise MappingError("empty reference set")
    if exact_matched is None:
        exact_matched = counts.get(MappingCategory.EXACT, 0)
    exact = counts.get(MappingCategory.EXACT, 0)
    subsumed = counts.get(MappingCategory.SUBSUMED_BY, 0)
    return Metrics(
        precision_low=Fraction(exact, total),
        precision_high=Fraction(exact + subsumed, total),
        overgeneration=Fraction(counts.get(MappingCategory.INCOMPATIBLE, 0), total),
        recall=Fraction(exact_matched, reference_size),
    )


# ---------------------------------------------------------------------------
# Closure expansion

def expand_closure(rule_list, h):
    """Specialize every atom one hierarchy level before mapping.

    Each atom occurrence becomes a choice between itself and each of
    its direct children; the cartesian product over all occurrences
    yields the expanded set, deduplicated.
    """
    out = []
    seen = set()
    for rule in rule_list:
        parts = rule.args + (rule.result,)
        for combo in itertools.product(*(_variants(p, h) for p in parts)):
            expanded = rules.SortRule(rule.kind, rule.predicate, combo[:-1], combo[-1])
            key = rules.format_rule(expanded)
            if key not in seen:
                seen.add(key)
                out.append(expanded)
    return sorted(out, key=rules.rule_sort_key)


def _variants(sort, h):
    if isinstance(sort, terms.Atom):
        terms.validate_sorts(sort, h)
        return [sort] + [terms.Atom(c) for c in sorted(h.children(sort.sort))]
    if isinstance(sort, terms.Func):
        inner = itertools.product(
            *(_variants(a, h) for a in sort.args), _variants(sort.result, h)
        )
        return [terms.Func(c[:-1], c[-1]) for c in inner]
    return [sort]


# ---------------------------------------------------------------------------
# Report rendering

_LABELS = {
    MappingCategory.EXACT: "Exact",
    MappingCategory.INCOMPATIBLE: "Incompatible",
    MappingCategory.SUBSUMED_BY: "Subsumed by",
    MappingCategory.SUBSUMES: "Subsumes",
    MappingCategory.INCOMPARABLE: "Incomparable",
}


def _pct(fraction):
    return f"{float(fraction) * 100:.1f}%"


def render_report(report):
    """Counts table in category order, then the metric lines."""
    rows = [(_LABELS[c], report.counts[c]) for c in MappingCategory]
    rows.append(("Total", report.total))
    width = max(len(name) for name, _ in rows)
    numwidth = max(len(str(n)) for _, n in rows)
    lines = [f"{name:<{width}}  {count:>{numwidth}}" for name, count in rows]
    if report.metrics is not None:
        m = report.metrics
        lines += [
            "",
            f"precision (exact)        {_pct(m.precision_low)}",
            f"precision (+subsumed by) {_pct(m.precision_high)}",
            f"overgeneration           {_pct(m.overgeneration)}",
            f"recall                   {_pct(m.recall)}",
        ]
    return "\n".join(lines) + "\n"


def format_records(report):
    """One tab-separated line per corpus rule: category, then the clause."""
    return "".join(
        f"{category.value}\t{rules.format_rule(rule)}.\n"
        for rule, category in report.assignments
    )


def parse_records(text, h=None):
    by_value = {c.value: c for c in MappingCategory}
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        name, sep, clause = line.partition("\t")
        if not sep or name not in by_value:
            raise MappingError(f"line {lineno}: malformed record")
        [rule] = rules.parse_rules(clause, h)
        out.append((rule, by_value[name]))
    return out


def save_records(path, report):
    fileio.atomic_write_text(path, format_records(report))


def load_records(path, h=None):
    return parse_records(fileio.read_text(path), h)
