"""Computation trees of an ATM as ranked trees with navigation and cell gadgets.

Every configuration becomes a node whose label says whether it is universal,
existential (left or right child of its universal parent) or halting.  One of
its children is an ``r`` node carrying a full binary skeleton of height ``n``;
the ``2**n`` skeleton leaves hold the configuration cells, left to right, in
the order given by the navigation gadgets on the path from ``r``.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from functools import cached_property
from typing import Union

from .atm import ATM, ComputationTree, Configuration, Transition, head_letter
from .trees import LabeledTree, RankedAlphabet


class EncodingError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class BCell:
    letter: str

    def __str__(self) -> str:
        return f"B[{self.letter}]"


@dataclass(frozen=True, order=True)
class CCell:
    letter: str
    via: Transition

    def __str__(self) -> str:
        return f"C[{self.letter},{self.via}]"


@dataclass(frozen=True, order=True)
class PCell:
    letter: str
    prev_state: str
    prev_letter: str

    def __str__(self) -> str:
        return f"P[{self.letter},({self.prev_state},{self.prev_letter})]"


Cell = Union[BCell, CCell, PCell]

SIGMA_PRIME = RankedAlphabet.of(
    {
        "top": 1,
        "ctA": 3,
        "haltA": 1,
        "ctEL": 2,
        "ctER": 2,
        "haltEL": 1,
        "haltER": 1,
        "r": 2,
        "s": 3,
        "sleaf": 2,
        "p": 1,
        "m": 1,
        "d0": 1,
        "d1": 1,
        "bot": 0,
    }
)
CT_LABELS = ("ctA", "ctEL", "ctER")
HALT_LABELS = ("haltA", "haltEL", "haltER")


def start_transition(atm: ATM) -> Transition:
    return Transition(atm.initial, atm.blank, atm.initial, atm.blank, "S")


@dataclass(frozen=True)
class CellAlphabet:
    atm: ATM
    cells: tuple = field(init=False)

    def __post_init__(self):
        atm = self.atm
        blank = atm.blank
        letters = [blank] + sorted(c for c in atm.tape_alphabet if c != blank)
        transitions = set(atm.transitions) | {start_transition(atm)}
        bcells = [BCell(a) for a in letters]
        ccells = sorted(CCell(a, t) for a in atm.tape_alphabet for t in transitions)
        pcells = sorted(PCell(a, q, b) for a in atm.tape_alphabet for q in atm.states for b in atm.tape_alphabet)
        object.__setattr__(self, "cells", tuple(bcells + ccells + pcells))

    @property
    def k(self) -> int:
        return len(self.cells)

    @cached_property
    def _index(self) -> dict:
        return {c: i for i, c in enumerate(self.cells, 1)}

    def index(self, cell: Cell) -> int:
        try:
            return self._index[cell]
        except KeyError:
            raise EncodingError(f"{cell} is not a cell of this machine") from None

    def cell(self, i: int) -> Cell:
        if not 1 <= i <= self.k:
            raise EncodingError(f"cell index {i} outside 1..{self.k}")
        return self.cells[i - 1]

    @property
    def start_cell(self) -> CCell:
        return CCell(self.atm.blank, start_transition(self.atm))

    def ccell_indices(self) -> list[int]:
        return [i for i, c in enumerate(self.cells, 1) if isinstance(c, CCell)]

    def cells_entering(self, kind: str) -> list[int]:
        """CCell indices whose transition enters a state of the given kind (E, A or H)."""
        return [i for i in self.ccell_indices() if self.atm.kind(self.cells[i - 1].via.new_state) == kind]

    def accepting_cells(self) -> list[int]:
        return [i for i in self.ccell_indices() if self.cells[i - 1].via.new_state == self.atm.accept]


def cell_alphabet(atm: ATM) -> CellAlphabet:
    return CellAlphabet(atm)


def expected_k(atm: ATM) -> int:
    pseudo = 0 if start_transition(atm) in set(atm.transitions) else 1
    g = len(atm.tape_alphabet)
    return g + g * (len(set(atm.transitions)) + pseudo) + g * g * len(atm.states)


# -- constraints ------------------------------------------------------------------


def horizontal_allowed(ca: CellAlphabet, i: int, j: int) -> bool:
    left, right = ca.cell(i), ca.cell(j)
    if isinstance(right, CCell) and right.via.move == "R":
        t = right.via
        if left != PCell(t.write, t.state, t.read):
            return False
    if isinstance(left, CCell) and left.via.move == "L":
        t = left.via
        if right != PCell(t.write, t.state, t.read):
            return False
    if left == BCell(ca.atm.blank) and right != left:
        return False
    return True


def vertical_allowed(ca: CellAlphabet, i: int, j: int) -> bool:
    up, down = ca.cell(i), ca.cell(j)
    if isinstance(up, (BCell, PCell)):
        if down == BCell(up.letter):
            return True
        return isinstance(down, CCell) and down.letter == up.letter and down.via.move in ("L", "R")
    q2 = up.via.new_state
    if isinstance(down, PCell):
        return down.prev_state == q2 and down.prev_letter == up.letter
    if isinstance(down, CCell):
        t = down.via
        return t.state == q2 and t.read == up.letter and t.write == down.letter and t.move == "S"
    return False


@dataclass(frozen=True)
class ConstraintTables:
    H: frozenset
    V: frozenset


def constraint_tables(ca: CellAlphabet) -> ConstraintTables:
    rng = range(1, ca.k + 1)
    return ConstraintTables(
        frozenset((i, j) for i in rng for j in rng if horizontal_allowed(ca, i, j)),
        frozenset((i, j) for i in rng for j in rng if vertical_allowed(ca, i, j)),
    )


# -- configurations as cell rows ----------------------------------------------------


def config_cells(ca: CellAlphabet, config: Configuration, via: Transition | None, n: int) -> list[Cell]:
    atm = ca.atm
    width = 2**n
    tape = list(config.tape())
    if len(tape) > width or config.head >= width:
        raise EncodingError(f"{config} does not fit into {width} cells")
    tape += [atm.blank] * (width - len(tape))
    cells: list[Cell] = [BCell(a) for a in tape]
    if via is None:
        via = start_transition(atm)
        if config.state != atm.initial:
            raise EncodingError("only the initial configuration may lack an incoming transition")
    head = config.head
    cells[head] = CCell(head_letter(atm, config), via)
    prev = head + {"L": 1, "R": -1, "S": 0}[via.move]
    if prev != head:
        cells[prev] = PCell(tape[prev], via.state, via.read)
    return cells


def cells_to_config(ca: CellAlphabet, cells: list[Cell]) -> Configuration:
    heads = [i for i, c in enumerate(cells) if isinstance(c, CCell)]
    if len(heads) != 1:
        raise EncodingError(f"expected exactly one head cell, found {len(heads)}")
    h = heads[0]
    letters = [c.letter for c in cells]
    right = letters[h:]
    while right and right[-1] == ca.atm.blank:
        right.pop()
    return Configuration(tuple(letters[:h]), cells[h].via.new_state, tuple(right))


# -- gadgets and trees -------------------------------------------------------------


def nav_gadget(bit: int):
    first, second = ("d0", "d1") if bit == 0 else ("d1", "d0")
    return ("p", [(first, [(second, ["bot"])])])


def cell_gadget(index: int, k: int):
    node = "bot"
    for pos in range(k, 0, -1):
        node = ("d1" if pos == index else "d0", [node])
    return ("m", [node])


def config_subtree(ca: CellAlphabet, cells: list[Cell], n: int):
    """Nested form of the ``r``-rooted subtree for a row of ``2**n`` cells."""
    if n < 1 or len(cells) != 2**n:
        raise EncodingError(f"need 2**{n} cells, got {len(cells)}")

    def skeleton(level: int, pos: int, bit: int):
        if level == n:
            return ("sleaf", [nav_gadget(bit), cell_gadget(ca.index(cells[pos]), ca.k)])
        return ("s", [nav_gadget(bit), skeleton(level + 1, 2 * pos, 0), skeleton(level + 1, 2 * pos + 1, 1)])

    return ("r", [skeleton(1, 0, 0), skeleton(1, 1, 1)])


def config_label(atm: ATM, node: ComputationTree, parent_kind: str | None, side: str) -> str:
    q = node.config.state
    if q in atm.halting:
        if parent_kind == "E":
            return "haltA"
        return "haltER" if side == "R" else "haltEL"
    if atm.kind(q) == "A":
        return "ctA"
    return "ctER" if side == "R" else "ctEL"


def encode_nested(ct: ComputationTree, n: int, ca: CellAlphabet):
    if n < 2:
        raise EncodingError("the encoding needs at least 2 address bits")
    atm = ca.atm

    def go(node: ComputationTree, parent_kind: str | None, side: str):
        q = node.config.state
        kind = atm.kind(q)
        if kind == "H" and node.children:
            raise EncodingError(f"halting configuration {node.config} has children")
        if kind == "E" and len(node.children) != 1:
            raise EncodingError(f"existential configuration {node.config} needs exactly one child")
        if kind == "A" and len(node.children) != 2:
            raise EncodingError(f"universal configuration {node.config} needs exactly two children")
        cells = config_cells(ca, node.config, node.via, n)
        kids = [config_subtree(ca, cells, n)]
        if kind == "E":
            kids.append(go(node.children[0], "E", "L"))
        elif kind == "A":
            kids.append(go(node.children[0], "A", "L"))
            kids.append(go(node.children[1], "A", "R"))
        return (config_label(atm, node, parent_kind, side), kids)

    depth = ct.depth() * (n + ca.k + 8) + 100
    if sys.getrecursionlimit() < depth + 1000:
        sys.setrecursionlimit(depth + 1000)
    return ("top", [go(ct, None, "L")])


def encode(ct: ComputationTree, n: int, ca: CellAlphabet) -> LabeledTree:
    return LabeledTree.build(encode_nested(ct, n, ca))


# -- decoding ----------------------------------------------------------------------


def _path(tree: LabeledTree, v: int) -> list[str]:
    labels = []
    while True:
        labels.append(tree.label(v))
        kids = tree.kids(v)
        if not kids:
            return labels
        if len(kids) != 1:
            raise EncodingError(f"gadget node {v} has {len(kids)} children")
        v = kids[0]


def _nav_bit(tree: LabeledTree, v: int) -> int:
    path = _path(tree, v)
    if path == ["p", "d0", "d1", "bot"]:
        return 0
    if path == ["p", "d1", "d0", "bot"]:
        return 1
    raise EncodingError(f"malformed navigation gadget {'-'.join(path)}")


def _cell_index(tree: LabeledTree, v: int, k: int) -> int:
    path = _path(tree, v)
    if len(path) != k + 2 or path[0] != "m" or path[-1] != "bot":
        raise EncodingError(f"malformed cell gadget of length {len(path)}")
    digits = path[1:-1]
    if any(d not in ("d0", "d1") for d in digits):
        raise EncodingError("cell gadget contains a non-digit")
    ones = [i for i, d in enumerate(digits, 1) if d == "d1"]
    if len(ones) != 1:
        raise EncodingError(f"cell gadget has {len(ones)} one-digits")
    return ones[0]


def decode_cells(tree: LabeledTree, n: int, ca: CellAlphabet, root: int = 1) -> list[Cell]:
    if tree.label(root) != "r":
        raise EncodingError("a configuration subtree starts with r")
    cells: dict[int, Cell] = {}

    def visit(v: int, level: int, pos: int):
        lab = tree.label(v)
        kids = tree.kids(v)
        gadgets = [c for c in kids if tree.label(c) == "p"]
        if len(gadgets) != 1:
            raise EncodingError(f"skeleton node {v} needs one navigation gadget")
        pos = 2 * pos + _nav_bit(tree, gadgets[0])
        rest = [c for c in kids if c != gadgets[0]]
        if level == n:
            if lab != "sleaf" or len(rest) != 1 or tree.label(rest[0]) != "m":
                raise EncodingError(f"node {v} at depth {n} must be a skeleton leaf with one cell gadget")
            cells[pos] = ca.cell(_cell_index(tree, rest[0], ca.k))
            return
        if lab != "s" or len(rest) != 2:
            raise EncodingError(f"inner skeleton node {v} must be s with two skeleton children")
        for c in rest:
            visit(c, level + 1, pos)

    kids = tree.kids(root)
    if len(kids) != 2:
        raise EncodingError("r needs two skeleton children")
    for c in kids:
        visit(c, 1, 0)
    if sorted(cells) != list(range(2**n)):
        raise EncodingError("skeleton leaves do not cover every address exactly once")
    return [cells[i] for i in range(2**n)]


def decode_config(tree: LabeledTree, n: int, ca: CellAlphabet, root: int = 1) -> Configuration:
    return cells_to_config(ca, decode_cells(tree, n, ca, root))


def leaf_address_cells(tree: LabeledTree, n: int, ca: CellAlphabet) -> list[tuple[int, list[Cell]]]:
    """Every ``r`` node of an encoded tree with its decoded row of cells."""
    return [(v, decode_cells(tree, n, ca, v)) for v in tree.nodes if tree.label(v) == "r"]

