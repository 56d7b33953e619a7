"""Finite labeled trees, their text format, and relational encodings.

A tree is stored once, with ordered child lists.  Whether the order matters
is decided by the caller: ordered schemas (``fc``, ``ns``, ``ls``) read it,
unordered semantics go through :func:`canonical_text` or through the
order-insensitive predicates.

Text format::

    node := label | label "(" node ("," node)* ")"

Whitespace between tokens is ignored and ``%`` starts a line comment.
"""

from __future__ import annotations

import random
import sys
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

IDENT = re.compile(r"[a-zA-Z_][a-zA-Z0-9_]*")

BINARY_PREDICATES = frozenset({"child", "desc", "fc", "ns"})
UNARY_PREDICATES = frozenset({"root", "leaf", "ls"})
STRUCTURAL_PREDICATES = BINARY_PREDICATES | UNARY_PREDICATES
ORDERED_PREDICATES = frozenset({"fc", "ns", "ls"})
LABEL_PREFIX = "label_"

Fact = tuple  # (predicate, (node, ...))
FactSet = frozenset


class TreeError(ValueError):
    pass


class TreeSyntaxError(TreeError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple[str, ...]

    def __post_init__(self):
        if not self.symbols:
            raise TreeError("alphabet must be nonempty")
        if len(set(self.symbols)) != len(self.symbols):
            raise TreeError(f"duplicate symbols in alphabet {self.symbols}")
        for sym in self.symbols:
            if not IDENT.fullmatch(sym):
                raise TreeError(f"bad symbol {sym!r}")

    @classmethod
    def of(cls, symbols: Iterable[str]) -> "Alphabet":
        return cls(tuple(symbols))

    def __contains__(self, sym: str) -> bool:
        return sym in self.symbols

    def __iter__(self) -> Iterator[str]:
        return iter(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)


@dataclass(frozen=True)
class RankedAlphabet:
    entries: tuple[tuple[str, int], ...]

    def __post_init__(self):
        names = [s for s, _ in self.entries]
        if len(set(names)) != len(names):
            raise TreeError("duplicate symbols in ranked alphabet")
        if any(a < 0 for _, a in self.entries):
            raise TreeError("arities must be non-negative")
        if not any(a == 0 for _, a in self.entries):
            raise TreeError("a ranked alphabet needs a symbol of arity 0")

    @classmethod
    def of(cls, mapping: Mapping[str, int]) -> "RankedAlphabet":
        return cls(tuple(mapping.items()))

    @property
    def arity(self) -> dict[str, int]:
        return dict(self.entries)

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet(tuple(s for s, _ in self.entries))


@dataclass(frozen=True)
class LabeledTree:
    """Nodes are ``1..N`` in preorder; node 1 is the root.

    ``labels[v-1]`` is the label of node ``v`` and ``children[v-1]`` its
    ordered child list.  Build trees with :meth:`build` or :func:`parse_tree`
    so that the preorder numbering holds.
    """

    labels: tuple[str, ...]
    children: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.labels)
        if n == 0 or len(self.children) != n:
            raise TreeError("a tree needs at least one node")
        seen = [False] * (n + 1)
        seen[1] = True
        for kids in self.children:
            for c in kids:
                if not 2 <= c <= n or seen[c]:
                    raise TreeError("children lists must cover every non-root node exactly once")
                seen[c] = True
        if not all(seen[1:]):
            raise TreeError("disconnected node")

    @classmethod
    def build(cls, nested) -> "LabeledTree":
        """Build from ``(label, [subtree, ...])`` pairs (a bare label is a leaf)."""
        labels: list[str] = []
        children: list[list[int]] = []

        stack = [(nested, None)]
        while stack:
            item, parent = stack.pop()
            if isinstance(item, str):
                label, kids = item, ()
            else:
                label, kids = item
            labels.append(label)
            children.append([])
            me = len(labels)
            if parent is not None:
                children[parent - 1].append(me)
            for kid in reversed(list(kids)):
                stack.append((kid, me))
        return cls(tuple(labels), tuple(tuple(c) for c in children))

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def root(self) -> int:
        return 1

    @property
    def nodes(self) -> range:
        return range(1, len(self.labels) + 1)

    def label(self, v: int) -> str:
        return self.labels[v - 1]

    def kids(self, v: int) -> tuple[int, ...]:
        return self.children[v - 1]

    def parents(self) -> dict[int, int]:
        return {c: v for v in self.nodes for c in self.kids(v)}

    def nested(self, v: int = 1):
        return (self.label(v), [self.nested(c) for c in self.kids(v)])

    def subtree(self, v: int) -> "LabeledTree":
        return LabeledTree.build(self.nested(v))

    def depth(self) -> int:
        best = 0
        stack = [(1, 0)]
        while stack:
            v, d = stack.pop()
            best = max(best, d)
            stack.extend((c, d + 1) for c in self.kids(v))
        return best

    def __str__(self) -> str:
        return render_tree(self)


# -- text format -------------------------------------------------------------

_TOKEN = re.compile(r"\s+|%[^\n]*|[a-zA-Z_][a-zA-Z0-9_]*|[(),]|.")


def _tokens(text: str):
    line, line_start = 1, 0
    for m in _TOKEN.finditer(text):
        tok = m.group()
        col = m.start() - line_start + 1
        if tok[0].isspace() or tok[0] == "%":
            for i, ch in enumerate(tok):
                if ch == "\n":
                    line += 1
                    line_start = m.start() + i + 1
            continue
        yield tok, line, col
    yield None, line, len(text) - line_start + 1


def parse_tree(text: str, alphabet: Alphabet | None = None) -> LabeledTree:
    return _parse_iterative(list(_tokens(text)), alphabet)


def _parse_iterative(toks, alphabet) -> LabeledTree:
    pos = 0
    labels: list[str] = []
    children: list[list[int]] = []
    open_nodes: list[int] = []

    def expect_label():
        nonlocal pos
        tok, line, col = toks[pos]
        if tok is None or not IDENT.fullmatch(tok):
            raise TreeSyntaxError(f"expected a label, found {tok or 'end of input'!r}", line, col)
        if alphabet is not None and tok not in alphabet:
            raise TreeSyntaxError(f"unknown symbol {tok!r}", line, col)
        pos += 1
        labels.append(tok)
        children.append([])
        me = len(labels)
        if open_nodes:
            children[open_nodes[-1] - 1].append(me)
        return me

    me = expect_label()
    while True:
        tok, line, col = toks[pos]
        if tok == "(":
            pos += 1
            open_nodes.append(me)
            me = expect_label()
            continue
        if not open_nodes:
            if tok is not None:
                raise TreeSyntaxError(f"unexpected {tok!r} after tree", line, col)
            break
        if tok == ",":
            pos += 1
            me = expect_label()
        elif tok == ")":
            pos += 1
            me = open_nodes.pop()
        else:
            raise TreeSyntaxError(f"expected ')' or ',', found {tok or 'end of input'!r}", line, col)
    return LabeledTree(tuple(labels), tuple(tuple(c) for c in children))


def render_tree(tree: LabeledTree) -> str:
    out: list[str] = []

    def emit(v: int):
        out.append(tree.label(v))
        kids = tree.kids(v)
        if kids:
            out.append("(")
            for i, c in enumerate(kids):
                if i:
                    out.append(",")
                emit(c)
            out.append(")")

    _with_deep_recursion(emit, 1, tree.size)
    return "".join(out)


def _with_deep_recursion(fn, arg, size):
    limit = sys.getrecursionlimit()
    if size + 100 > limit:
        sys.setrecursionlimit(size + 1000)
    return fn(arg)


# -- unordered canonical form --------------------------------------------------


def canonical_text(tree: LabeledTree, v: int = 1) -> str:
    """Text of the tree with every child list sorted by its own canonical text."""
    memo: dict[int, str] = {}
    order = []
    stack = [v]
    while stack:
        u = stack.pop()
        order.append(u)
        stack.extend(tree.kids(u))
    for u in reversed(order):
        kids = sorted(memo[c] for c in tree.kids(u))
        memo[u] = tree.label(u) + ("(" + ",".join(kids) + ")" if kids else "")
    return memo[v]


def canonicalize(tree: LabeledTree) -> LabeledTree:
    return parse_tree(canonical_text(tree))


def trees_equal_unordered(t1: LabeledTree, t2: LabeledTree) -> bool:
    return t1.size == t2.size and canonical_text(t1) == canonical_text(t2)


def shuffle_siblings(tree: LabeledTree, rng: random.Random) -> LabeledTree:
    def go(v):
        kids = [go(c) for c in tree.kids(v)]
        rng.shuffle(kids)
        return (tree.label(v), kids)

    return LabeledTree.build(_with_deep_recursion(go, 1, tree.size))


# -- relational encodings ------------------------------------------------------


@dataclass(frozen=True)
class Schema:
    """Structural predicates available to a query; label predicates are implicit."""

    predicates: frozenset[str]
    name: str = ""

    def __post_init__(self):
        unknown = set(self.predicates) - STRUCTURAL_PREDICATES
        if unknown:
            raise TreeError(f"unknown schema predicates {sorted(unknown)}")

    @property
    def ordered(self) -> bool:
        return bool(self.predicates & ORDERED_PREDICATES)

    def arity(self, predicate: str) -> int | None:
        if predicate.startswith(LABEL_PREFIX):
            return 1
        if predicate in self.predicates:
            return 2 if predicate in BINARY_PREDICATES else 1
        return None

    def allows(self, predicate: str) -> bool:
        return self.arity(predicate) is not None


def _schema(name: str, *preds: str) -> Schema:
    return Schema(frozenset(preds), name)


SCHEMAS: dict[str, Schema] = {
    s.name: s
    for s in (
        _schema("tau_u", "child"),
        _schema("tau_u_desc", "child", "desc"),
        _schema("tau_u_root_leaf_desc", "child", "root", "leaf", "desc"),
        _schema("tau_o", "fc", "ns"),
        _schema("tau_gk", "fc", "ns", "root", "leaf", "ls"),
        _schema("tau_gk_child", "fc", "ns", "root", "leaf", "ls", "child"),
        _schema("tau_gk_child_desc", "fc", "ns", "root", "leaf", "ls", "child", "desc"),
    )
}


def get_schema(name: str) -> Schema:
    try:
        return SCHEMAS[name]
    except KeyError:
        raise TreeError(f"unknown schema {name!r}; choose from {', '.join(SCHEMAS)}") from None


def extract_facts(tree: LabeledTree, schema: Schema, mode: str = "ordered") -> FactSet:
    if mode not in ("ordered", "unordered"):
        raise TreeError(f"mode must be 'ordered' or 'unordered', not {mode!r}")
    if mode == "unordered" and schema.ordered:
        raise TreeError(
            f"schema {schema.name or sorted(schema.predicates)} uses fc/ns/ls, "
            "which need ordered mode"
        )
    preds = schema.predicates
    facts: set = set()
    for v in tree.nodes:
        facts.add((LABEL_PREFIX + tree.label(v), (v,)))
        kids = tree.kids(v)
        if "child" in preds:
            facts.update(("child", (v, c)) for c in kids)
        if "leaf" in preds and not kids:
            facts.add(("leaf", (v,)))
        if kids:
            if "fc" in preds:
                facts.add(("fc", (v, kids[0])))
            if "ns" in preds:
                facts.update(("ns", (a, b)) for a, b in zip(kids, kids[1:]))
            if "ls" in preds:
                facts.add(("ls", (kids[-1],)))
    if "root" in preds:
        facts.add(("root", (1,)))
    if "ls" in preds:
        # the root has no siblings, so it is its own rightmost sibling
        facts.add(("ls", (1,)))
    if "desc" in preds:
        for v in tree.nodes:
            stack = list(tree.kids(v))
            while stack:
                u = stack.pop()
                facts.add(("desc", (v, u)))
                stack.extend(tree.kids(u))
    return frozenset(facts)


def check_ranked(tree: LabeledTree, ranked: RankedAlphabet) -> bool:
    arity = ranked.arity
    ok = True
    for v in tree.nodes:
        lab = tree.label(v)
        if lab not in arity:
            raise TreeError(f"label {lab!r} is not in the ranked alphabet")
        if len(tree.kids(v)) != arity[lab]:
            ok = False
    return ok


def random_tree(rng: random.Random, symbols: Sequence[str], max_nodes: int) -> LabeledTree:
    """Uniform-ish random tree: each new node attaches to a random earlier node."""
    n = rng.randint(1, max_nodes)
    parent = [None] + [rng.randrange(i) for i in range(1, n)]
    kids: list[list] = [[] for _ in range(n)]
    for i in range(1, n):
        kids[parent[i]].append(i)
    labels = [rng.choice(list(symbols)) for _ in range(n)]

    def go(i):
        return (labels[i], [go(c) for c in kids[i]])

    return LabeledTree.build(go(0))
