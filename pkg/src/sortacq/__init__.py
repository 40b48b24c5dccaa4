"""Corpus-driven acquisition of domain-dependent sortal constraints.

The toolkit parses a corpus with a sort-annotated grammar, harvests the
sort rules its logical forms instantiate, scores them, and feeds the
kept rules back in as the next iteration's constraints.  An HTTP editor
service exposes the working rule set for interactive review.
"""

from .hierarchy import SortHierarchy, HierarchyError, load_hierarchy, parse_hierarchy
from .terms import Variable, Atom, Func, subsumes, unify, alpha_equal, parse_sort, format_sort
from .rules import (
    SortRule,
    MappingCategory,
    rule_subsumes,
    compare_rule,
    load_rules,
    parse_rules,
    format_rule,
)

__all__ = [
    "SortHierarchy",
    "HierarchyError",
    "load_hierarchy",
    "parse_hierarchy",
    "Variable",
    "Atom",
    "Func",
    "subsumes",
    "unify",
    "alpha_equal",
    "parse_sort",
    "format_sort",
    "SortRule",
    "MappingCategory",
    "rule_subsumes",
    "compare_rule",
    "load_rules",
    "parse_rules",
    "format_rule",
]
