"""Lexicon, grammar, name-sort table, and corpus loaders.

Lexicon clauses map surface words to predicates, optionally with an
inherent sort::

    lex(flights, noun, flight, [flight]).
    lex(boston, name, 'BOSTON').
    lex(to, prep, to).

Grammar clauses pair a context-free backbone (one or two right-hand
symbols) with a semantic operation::

    rule(np, [det, nbar], quantify(0, 1)).
    rule(nbar, [nbar, pp], connect(prep, 0, 1)).
    rule(frag, [np], fragment(frag_np)).

Connector names in connect/3 are ordinary predicate names except for
two reserved words: ``prep`` takes the connector from the dependent
prepositional phrase's own preposition, and ``self`` fills the open
argument slot of the dependent modifier (adjectives) with the head's
referent instead of introducing a new predication.  Index arguments
address right-hand-side positions; for connect they name the sources
of the new predication's first and second argument.

The corpus is one sentence per line: ``id<TAB>raw text``.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import clauses, terms

CATEGORIES = ("noun", "verb", "adj", "adv", "prep", "det", "name", "number", "tool")
RESERVED_CONNECTORS = ("prep", "self")
FRAGMENT_PREDICATES = ("frag_np", "np_frag")


class LexiconError(ValueError):
    pass


class GrammarError(ValueError):
    pass


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class LexEntry:
    word: str
    category: str
    predicate: str
    inherent: terms.SortTerm | None = None


@dataclass(frozen=True)
class Head:
    index: int


@dataclass(frozen=True)
class Connect:
    predicate: str
    first: int
    second: int


@dataclass(frozen=True)
class Quantify:
    det: int | None
    head: int


@dataclass(frozen=True)
class NounNoun:
    predicate: str = "n_n_rel"


@dataclass(frozen=True)
class Fragment:
    predicate: str


@dataclass(frozen=True)
class GrammarRule:
    lhs: str
    rhs: tuple
    op: "Head | Connect | Quantify | NounNoun | Fragment"


@dataclass(frozen=True)
class Sentence:
    sid: str
    text: str
    tokens: tuple

    @classmethod
    def from_line(cls, sid, text):
        return cls(sid, text, tuple(text.lower().split()))


# ---------------------------------------------------------------------------
# Lexicon

def lexicon_from_clauses(clause_list):
    entries = []
    seen = set()
    for term, line in clause_list:
        if not isinstance(term, clauses.Struct) or term.functor != "lex":
            raise LexiconError(f"expected lex(...) at line {line}")
        if len(term.args) not in (3, 4):
            raise LexiconError(f"lex needs 3 or 4 arguments at line {line}")
        word, category, predicate = term.args[:3]
        if not isinstance(word, clauses.Atom) or not isinstance(predicate, clauses.Atom):
            raise LexiconError(f"malformed lex clause at line {line}")
        if not isinstance(category, clauses.Atom) or category.name not in CATEGORIES:
            raise LexiconError(f"unknown category {category!r} at line {line}")
        inherent = None
        if len(term.args) == 4:
            inherent = terms.sort_from_clause(term.args[3])
        key = (word.name, category.name, predicate.name)
        if key in seen:
            raise LexiconError(f"duplicate lexicon entry {key} at line {line}")
        seen.add(key)
        entries.append(LexEntry(word.name, category.name, predicate.name, inherent))
    return entries


def parse_lexicon(text):
    return lexicon_from_clauses(clauses.read_clauses(text))


def load_lexicon(path):
    return lexicon_from_clauses(clauses.load_clauses(path))


def lexicon_index(entries):
    index = {}
    for e in entries:
        index.setdefault(e.word, []).append(e)
    return index


# ---------------------------------------------------------------------------
# Name-sort table

def names_from_clauses(clause_list):
    table = {}
    for term, line in clause_list:
        if (
            not isinstance(term, clauses.Struct)
            or term.functor != "name_sort"
            or len(term.args) != 2
            or not isinstance(term.args[0], clauses.Atom)
        ):
            raise LexiconError(f"expected name_sort(name, sort) at line {line}")
        name = term.args[0].name
        if name in table:
            raise LexiconError(f"duplicate name {name!r} at line {line}")
        table[name] = terms.sort_from_clause(term.args[1])
    return table


def parse_names(text):
    return names_from_clauses(clauses.read_clauses(text))


def load_names(path):
    return names_from_clauses(clauses.load_clauses(path))


# ---------------------------------------------------------------------------
# Grammar

def _index_arg(arg, rule_len, line, allow_none=False):
    if allow_none and isinstance(arg, clauses.Atom) and arg.name == "none":
        return None
    if isinstance(arg, clauses.Atom) and arg.name.isdigit():
        i = int(arg.name)
        if 0 <= i < rule_len:
            return i
    raise GrammarError(f"index out of range in semantic operation at line {line}")


def _sem_op(term, rule_len, line):
    if isinstance(term, clauses.Atom) and term.name == "nn_rel":
        return NounNoun()
    if not isinstance(term, clauses.Struct):
        raise GrammarError(f"malformed semantic operation at line {line}")
    if term.functor == "head" and len(term.args) == 1:
        return Head(_index_arg(term.args[0], rule_len, line))
    if term.functor == "connect" and len(term.args) == 3:
        pred = term.args[0]
        if not isinstance(pred, clauses.Atom):
            raise GrammarError(f"connector must be a predicate name at line {line}")
        first = _index_arg(term.args[1], rule_len, line)
        second = _index_arg(term.args[2], rule_len, line)
        if first == second:
            raise GrammarError(f"connect argument sources must differ at line {line}")
        return Connect(pred.name, first, second)
    if term.functor == "quantify" and len(term.args) == 2:
        det = _index_arg(term.args[0], rule_len, line, allow_none=True)
        head = _index_arg(term.args[1], rule_len, line)
        if det == head:
            raise GrammarError(f"quantify needs distinct positions at line {line}")
        return Quantify(det, head)
    if term.functor == "fragment" and len(term.args) == 1:
        pred = term.args[0]
        if not isinstance(pred, clauses.Atom) or pred.name not in FRAGMENT_PREDICATES:
            raise GrammarError(f"unknown fragment wrapper at line {line}")
        return Fragment(pred.name)
    raise GrammarError(f"unknown semantic operation {term!r} at line {line}")


def grammar_from_clauses(clause_list):
    grammar = []
    for term, line in clause_list:
        if not isinstance(term, clauses.Struct) or term.functor != "rule" or len(term.args) != 3:
            raise GrammarError(f"expected rule(lhs, [rhs...], op) at line {line}")
        lhs, rhs, op = term.args
        if not isinstance(lhs, clauses.Atom) or not isinstance(rhs, clauses.List):
            raise GrammarError(f"malformed rule clause at line {line}")
        if not 1 <= len(rhs.items) <= 2:
            raise GrammarError(f"rule needs one or two rhs symbols at line {line}")
        symbols = []
        for item in rhs.items:
            if not isinstance(item, clauses.Atom):
                raise GrammarError(f"rhs symbols must be category names at line {line}")
            symbols.append(item.name)
        grammar.append(GrammarRule(lhs.name, tuple(symbols), _sem_op(op, len(symbols), line)))
    _check_unary_cycles(grammar)
    return grammar


def _check_unary_cycles(grammar):
    edges = {}
    for r in grammar:
        if len(r.rhs) == 1 and not isinstance(r.op, Fragment):
            edges.setdefault(r.rhs[0], set()).add(r.lhs)
    for start in edges:
        seen, frontier = set(), {start}
        while frontier:
            frontier = {n for cur in frontier for n in edges.get(cur, ())} - seen
            if start in frontier:
                raise GrammarError(f"unary rule cycle through {start!r}")
            seen |= frontier


def parse_grammar(text):
    return grammar_from_clauses(clauses.read_clauses(text))


def load_grammar(path):
    return grammar_from_clauses(clauses.load_clauses(path))


def connector_specs(grammar, lexicon=()):
    """(predicate, arity) pairs the grammar's semantic rules introduce.

    These predicates need signatures even though no word carries them:
    literal connectors and the noun-noun relation take two arguments,
    fragment wrappers one, and the aspect marker two whenever the
    lexicon contains verbs.
    """
    specs = {}
    for r in grammar:
        if isinstance(r.op, Connect) and r.op.predicate not in RESERVED_CONNECTORS:
            specs[r.op.predicate] = 2
        elif isinstance(r.op, NounNoun):
            specs[r.op.predicate] = 2
        elif isinstance(r.op, Fragment):
            specs[r.op.predicate] = 1
    if any(e.category == "verb" for e in lexicon):
        specs["has_aspect"] = 2
    return sorted(specs.items())


# ---------------------------------------------------------------------------
# Corpus

def parse_corpus_text(text):
    sentences = []
    seen = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if "\t" not in line:
            raise CorpusError(f"line {lineno}: expected id<TAB>sentence")
        sid, raw = line.split("\t", 1)
        sid = sid.strip()
        if not sid or sid in seen:
            raise CorpusError(f"line {lineno}: missing or duplicate sentence id")
        seen.add(sid)
        sentences.append(Sentence.from_line(sid, raw.strip()))
    return sentences


def load_corpus(path):
    with open(path, encoding="utf-8") as fh:
        return parse_corpus_text(fh.read())
