"""Monadic datalog programs: atoms, rules, queries, text format, validation.

Grammar::

    rule  := atom ":-" atom ("," atom)* "."
    atom  := pred "(" var ("," var)* ")"
    query := "query" pred "."

``%`` starts a line comment.  Exactly one ``query`` directive is required.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

from .trees import BINARY_PREDICATES, LABEL_PREFIX, STRUCTURAL_PREDICATES, Schema


class DatalogError(ValueError):
    pass


class DatalogSyntaxError(DatalogError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


def is_edb_name(pred: str) -> bool:
    return pred in STRUCTURAL_PREDICATES or pred.startswith(LABEL_PREFIX)


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[str, ...]

    def __post_init__(self):
        if not self.args:
            raise DatalogError(f"atom {self.pred}() has no arguments")

    def __str__(self) -> str:
        return f"{self.pred}({','.join(self.args)})"


@dataclass(frozen=True)
class Rule:
    head: Atom
    body: tuple[Atom, ...]

    def __post_init__(self):
        if not self.body:
            raise DatalogError(f"rule for {self.head} has an empty body")

    def variables(self) -> set[str]:
        out = set(self.head.args)
        for a in self.body:
            out.update(a.args)
        return out

    def __str__(self) -> str:
        return f"{self.head} :- {', '.join(map(str, self.body))}."


@dataclass(frozen=True)
class Program:
    rules: tuple[Rule, ...] = ()

    @property
    def idb(self) -> frozenset[str]:
        """Head predicates plus every body predicate whose name is not extensional."""
        heads = {r.head.pred for r in self.rules}
        return frozenset(heads | {a.pred for r in self.rules for a in r.body if not is_edb_name(a.pred)})

    @property
    def edb(self) -> frozenset[str]:
        heads = {r.head.pred for r in self.rules}
        return frozenset(a.pred for r in self.rules for a in r.body if is_edb_name(a.pred) and a.pred not in heads)

    def arities(self) -> dict[str, set[int]]:
        out: dict[str, set[int]] = {}
        for r in self.rules:
            for a in (r.head, *r.body):
                out.setdefault(a.pred, set()).add(len(a.args))
        return out

    def __len__(self) -> int:
        return len(self.rules)


@dataclass(frozen=True)
class Query:
    program: Program
    query_predicate: str

    @property
    def rules(self) -> tuple[Rule, ...]:
        return self.program.rules

    def size(self) -> int:
        """Total number of atom occurrences, a convenient measure of |Q|."""
        return sum(1 + len(r.body) for r in self.program.rules)


def atom(pred: str, *args: str) -> Atom:
    return Atom(pred, tuple(args))


def rule(head: Atom, *body: Atom) -> Rule:
    return Rule(head, tuple(body))


def make_query(rules: Iterable[Rule], query_predicate: str) -> Query:
    return Query(Program(tuple(rules)), query_predicate)


# -- text format ---------------------------------------------------------------

_TOKEN = re.compile(r"\s+|%[^\n]*|:-|[A-Za-z_][A-Za-z0-9_]*|[(),.]|.")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def _tokenize(text: str):
    line, line_start = 1, 0
    out = []
    for m in _TOKEN.finditer(text):
        tok = m.group()
        if tok[0].isspace() or tok[0] == "%":
            for i, ch in enumerate(tok):
                if ch == "\n":
                    line += 1
                    line_start = m.start() + i + 1
            continue
        out.append((tok, line, m.start() - line_start + 1))
    out.append((None, line, len(text) - line_start + 1))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.toks[self.pos]

    def take(self, want: str | None = None):
        tok, line, col = self.toks[self.pos]
        if want is not None and tok != want:
            raise DatalogSyntaxError(f"expected {want!r}, found {tok or 'end of input'!r}", line, col)
        self.pos += 1
        return tok

    def ident(self) -> str:
        tok, line, col = self.peek()
        if tok is None or not _IDENT.fullmatch(tok):
            raise DatalogSyntaxError(f"expected an identifier, found {tok or 'end of input'!r}", line, col)
        self.pos += 1
        return tok

    def atom(self) -> Atom:
        pred = self.ident()
        _, line, col = self.peek()
        self.take("(")
        if self.peek()[0] == ")":
            raise DatalogSyntaxError(f"zero-arity atom {pred}()", line, col)
        args = [self.ident()]
        while self.peek()[0] == ",":
            self.take(",")
            args.append(self.ident())
        self.take(")")
        return Atom(pred, tuple(args))


def parse_rules(text: str) -> tuple[list[Rule], list[tuple[str, int, int]]]:
    """Parse rules and collect ``query`` directives (name, line, column)."""
    p = _Parser(text)
    rules: list[Rule] = []
    directives = []
    while p.peek()[0] is not None:
        tok, line, col = p.peek()
        if tok == "query" and p.toks[p.pos + 1][0] not in ("(",):
            p.take()
            directives.append((p.ident(), line, col))
            p.take(".")
            continue
        head = p.atom()
        p.take(":-")
        body = [p.atom()]
        while p.peek()[0] == ",":
            p.take(",")
            body.append(p.atom())
        p.take(".")
        rules.append(Rule(head, tuple(body)))
    return rules, directives


def parse_program(text: str) -> Query:
    rules, directives = parse_rules(text)
    if not directives:
        tok, line, col = _tokenize(text)[-1]
        raise DatalogSyntaxError("missing 'query' directive", line, col)
    if len(directives) > 1:
        _, line, col = directives[1]
        raise DatalogSyntaxError("duplicate 'query' directive", line, col)
    return Query(Program(tuple(rules)), directives[0][0])


def render_program(query: Query) -> str:
    lines = [str(r) for r in query.program.rules]
    lines.append(f"query {query.query_predicate}.")
    return "\n".join(lines) + "\n"


# -- validation ----------------------------------------------------------------


def validate(query: Query, schema: Schema) -> list[str]:
    """Return human-readable diagnostics; an empty list means the query is usable."""
    diags: list[str] = []
    program = query.program
    idb = program.idb
    for n, r in enumerate(program.rules, 1):
        h = r.head
        if is_edb_name(h.pred):
            diags.append(f"rule {n}: extensional head {h}")
        elif len(h.args) != 1:
            diags.append(f"rule {n}: non-unary idb head {h}")
        body_vars = {v for a in r.body for v in a.args}
        for v in h.args:
            if v not in body_vars:
                diags.append(f"rule {n}: unsafe head variable {v}")
        for a in r.body:
            if a.pred in idb:
                if len(a.args) != 1:
                    diags.append(f"rule {n}: idb atom {a} must be unary")
                continue
            expected = schema.arity(a.pred)
            if expected is None:
                diags.append(f"rule {n}: predicate outside schema: {a.pred}")
            elif expected != len(a.args):
                diags.append(f"rule {n}: arity mismatch for {a.pred}: expected {expected}, got {len(a.args)}")
    if is_edb_name(query.query_predicate):
        diags.append(f"query predicate {query.query_predicate} is extensional")
    return diags


def check_valid(query: Query, schema: Schema) -> None:
    diags = validate(query, schema)
    if diags:
        raise DatalogError("invalid query:\n  " + "\n  ".join(diags))


def edb_arity(pred: str) -> int:
    return 2 if pred in BINARY_PREDICATES else 1
