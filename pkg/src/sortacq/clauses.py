"""Reader for the clause-style data files used throughout the toolkit.

Every persistent artifact (hierarchies, lexicons, grammars, rule sets)
is a line-oriented text file of Prolog-flavoured clauses::

    isa(city, location).
    lex(flights, noun, flight, [flight]).
    rule(np, [det, nbar], quantify(0, 1)).   % a comment

One clause per line, terminated by a period.  `%` starts a comment that
runs to end of line.  This module supplies the shared tokenizer and a
small term reader; each loader interprets the resulting terms itself.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


class ClauseError(ValueError):
    """Malformed clause text; carries the source position."""

    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        where = ""
        if line is not None:
            where = f" at line {line}" + (f", column {col}" if col is not None else "")
        super().__init__(message + where)


# Clause terms are plain trees.  Numbers are kept as atoms whose name is
# the digit string, which is all the file formats need.

@dataclass(frozen=True)
class Atom:
    name: str
    quoted: bool = False


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Struct:
    functor: str
    args: tuple


@dataclass(frozen=True)
class List:
    items: tuple


@dataclass(frozen=True)
class Tuple:
    items: tuple


@dataclass(frozen=True)
class Token:
    kind: str  # name | var | num | quoted | punct
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>%[^\n]*)
  | (?P<quoted>'(?:[^'\\]|\\.)*')
  | (?P<name>[a-z][A-Za-z0-9_]*)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<num>\d+)
  | (?P<punct>[()\[\],.;^])
    """,
    re.VERBOSE,
)


def tokenize(text, line_offset=1):
    """Split clause text into tokens, recording line/column positions."""
    tokens = []
    line = line_offset
    col = 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ClauseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    return tokens


class TokenStream:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            raise ClauseError("unexpected end of input")
        self.i += 1
        return tok

    def expect(self, text):
        tok = self.next()
        if tok.text != text:
            raise ClauseError(f"expected {text!r}, found {tok.text!r}", tok.line, tok.col)
        return tok

    def at_end(self):
        return self.i >= len(self.tokens)


def _unquote(text):
    body = text[1:-1]
    return body.replace("\\'", "'").replace("\\\\", "\\")


def parse_term(stream):
    tok = stream.next()
    if tok.kind in ("name", "num", "quoted"):
        name = _unquote(tok.text) if tok.kind == "quoted" else tok.text
        quoted = tok.kind == "quoted"
        nxt = stream.peek()
        if nxt is not None and nxt.text == "(" and not quoted:
            stream.next()
            args = _parse_args(stream, ")")
            return Struct(tok.text, tuple(args))
        return Atom(name, quoted)
    if tok.kind == "var":
        return Var(tok.text)
    if tok.text == "[":
        return List(tuple(_parse_args(stream, "]")))
    if tok.text == "(":
        items = _parse_args(stream, ")")
        if len(items) == 1:
            return items[0]
        return Tuple(tuple(items))
    raise ClauseError(f"unexpected token {tok.text!r}", tok.line, tok.col)


def _parse_args(stream, closer):
    items = []
    tok = stream.peek()
    if tok is not None and tok.text == closer:
        stream.next()
        return items
    while True:
        items.append(parse_term(stream))
        tok = stream.next()
        if tok.text == closer:
            return items
        if tok.text != ",":
            raise ClauseError(f"expected ',' or {closer!r}, found {tok.text!r}", tok.line, tok.col)


def read_clauses(text):
    """Yield (term, line) for each period-terminated clause in *text*."""
    clauses = []
    tokens = tokenize(text)
    stream = TokenStream(tokens)
    while not stream.at_end():
        start = stream.peek()
        term = parse_term(stream)
        tok = stream.next() if not stream.at_end() else None
        if tok is None or tok.text != ".":
            raise ClauseError("clause is not terminated by '.'", start.line, start.col)
        clauses.append((term, start.line))
    return clauses


def load_clauses(path):
    with open(path, encoding="utf-8") as fh:
        return read_clauses(fh.read())
