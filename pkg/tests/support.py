"""Shared machines, encodings and tree mutations for the test suite."""

from __future__ import annotations

import copy
from functools import lru_cache

from mdltree.atm import Transition, initial_config, make_config, parse_atm, search_accepting_tree
from mdltree.encoding import (
    BCell,
    CCell,
    PCell,
    cell_alphabet,
    cell_gadget,
    config_cells,
    config_subtree,
    constraint_tables,
    encode_nested,
    nav_gadget,
)
from mdltree.reductions import gen_containment_pair, gen_emptiness_query
from mdltree.trees import LabeledTree

# one existential step straight into the accepting state
MICRO_ATM = """\
states_exist q0
accept qa
reject qr
initial q0
tape_alphabet B
trans q0 B qa B S
trans q0 B qr B S
"""

# writes, moves right, branches universally, then walks back and accepts
MOVING_ATM = """\
states_exist q0 e1 e2
states_univ u1
accept qa
reject qr
initial q0
tape_alphabet a B
trans q0 B u1 a R
trans q0 B qr B S
trans u1 B e1 B S
trans u1 B e2 B S
trans e1 B qa B L
trans e1 B qr B S
trans e2 B qa B L
trans e2 B qr B S
"""

# every branch ends in the rejecting state
REJECTING_ATM = """\
states_exist q0
accept qa
reject qr
initial q0
tape_alphabet B
trans q0 B qr B S
trans q0 B qr B R
"""

N = 2


def micro():
    return parse_atm(MICRO_ATM)


def moving():
    return parse_atm(MOVING_ATM)


@lru_cache(maxsize=None)
def micro_setup():
    atm = micro()
    ct = search_accepting_tree(atm, 5, N)
    ca = cell_alphabet(atm)
    nested = encode_nested(ct, N, ca)
    return atm, ct, ca, nested


@lru_cache(maxsize=None)
def micro_emptiness():
    return gen_emptiness_query(micro(), N)


@lru_cache(maxsize=None)
def micro_containment():
    return gen_containment_pair(micro(), N)


def micro_tree() -> LabeledTree:
    return LabeledTree.build(micro_setup()[3])


# -- editing nested trees --------------------------------------------------------------


def editable(nested):
    if isinstance(nested, str):
        return [nested, []]
    label, kids = nested
    return [label, [editable(k) for k in kids]]


def at(node, path):
    for i in path:
        node = node[1][i]
    return node


ROOT_CONFIG = (0,)
HALT_CONFIG = (0, 1)


def cell_path(config, pos: int):
    """Path to the skeleton leaf holding tape position ``pos`` (two address bits)."""
    return config + (0, pos // 2, 1 + pos % 2)


def set_cell(tree, config, pos: int, index: int, k: int):
    leaf = at(tree, cell_path(config, pos))
    leaf[1][1] = editable(cell_gadget(index, k))


def _gadget_digits(gadget):
    node, out = gadget, []
    while node[1]:
        node = node[1][0]
        out.append(node)
    return out


# -- the mutation catalogue ----------------------------------------------------------------
# each entry takes an editable copy of the micro encoding and damages it in place


def mut_gadget_digit_flip(t, k):
    p = at(t, ROOT_CONFIG + (0, 0, 0))
    assert p[0] == "p"
    first = _gadget_digits(p)[0]
    first[0] = "d1" if first[0] == "d0" else "d0"


def mut_duplicate_d1(t, k):
    m = at(t, cell_path(ROOT_CONFIG, 1) + (1,))
    digits = _gadget_digits(m)
    zero = next(d for d in digits if d[0] == "d0")
    zero[0] = "d1"


def mut_wrong_skeleton_height(t, k):
    s_left = at(t, ROOT_CONFIG + (0, 0))
    s_left[1][1] = ["s", [editable(nav_gadget(0)), *s_left[1][1:]]]


def mut_vertical_violation(t, k):
    # the halting row keeps every horizontal constraint, but position 1 claims the head
    # came from there although the row above shows a blank
    set_cell(t, HALT_CONFIG, 1, 5, k)


def mut_horizontal_violation(t, k):
    set_cell(t, ROOT_CONFIG, 2, 5, k)


def mut_missing_r_child(t, k):
    at(t, HALT_CONFIG)[1] = []


def mut_non_alternating_labels(t, k):
    at(t, ROOT_CONFIG)[0] = "ctA"


def mut_non_accepting_halt(t, k):
    set_cell(t, HALT_CONFIG, 0, 4, k)


def mut_wrong_start_cell(t, k):
    set_cell(t, ROOT_CONFIG, 0, 3, k)


def mut_bot_with_child(t, k):
    m = at(t, cell_path(ROOT_CONFIG, 0) + (1,))
    _gadget_digits(m)[-1][1].append(["bot", []])


def mut_digit_relabeled_bot(t, k):
    m = at(t, cell_path(ROOT_CONFIG, 0) + (1,))
    _gadget_digits(m)[-2][0] = "bot"


MUTATIONS = {
    "gadget_digit_flip": mut_gadget_digit_flip,
    "duplicate_d1": mut_duplicate_d1,
    "wrong_skeleton_height": mut_wrong_skeleton_height,
    "vertical_violation": mut_vertical_violation,
    "horizontal_violation": mut_horizontal_violation,
    "missing_r_child": mut_missing_r_child,
    "non_alternating_labels": mut_non_alternating_labels,
    "non_accepting_halt": mut_non_accepting_halt,
    "wrong_start_cell": mut_wrong_start_cell,
    "bot_with_child": mut_bot_with_child,
    "digit_relabeled_bot": mut_digit_relabeled_bot,
}


def mutated(name: str) -> LabeledTree:
    _, _, ca, nested = micro_setup()
    t = editable(nested)
    MUTATIONS[name](t, ca.k)
    return LabeledTree.build(t)


def twin_cell_tree() -> LabeledTree:
    """Two skeleton leaves at the same address of one configuration, holding different cells."""
    _, _, ca, nested = micro_setup()
    t = editable(nested)
    s_left = at(t, HALT_CONFIG + (0, 0))
    twin = copy.deepcopy(s_left[1][1])
    twin[1][1] = editable(cell_gadget(4, ca.k))
    s_left[1].append(twin)
    return LabeledTree.build(t)


def twin_gadget_tree() -> LabeledTree:
    """A skeleton leaf carrying two cell gadgets for different cells."""
    _, _, ca, nested = micro_setup()
    t = editable(nested)
    leaf = at(t, cell_path(ROOT_CONFIG, 3))
    leaf[1].append(editable(cell_gadget(3, ca.k)))
    return LabeledTree.build(t)


def tables():
    return constraint_tables(micro_setup()[2])


def start_config():
    return initial_config(micro())


# never accepts: the only accepting moves start from unreachable states
FORGERY_ATM = """\
states_exist q0 e8 e9
states_univ u0
accept qa
reject qr
initial q0
tape_alphabet B
trans q0 B u0 B R
trans q0 B qr B S
trans u0 B qr B S
trans e8 B qa B R
trans e9 B qa B R
"""


def forgery_tree() -> LabeledTree:
    """An encoding whose halting rows put a right-moving head cell on tape position 0.

    No left neighbour exists there, so nothing ties the cell's transition to the
    previous head position and an unreachable accepting move slips in.
    """
    atm = parse_atm(FORGERY_ATM)
    ca = cell_alphabet(atm)
    row0 = config_cells(ca, initial_config(atm), None, N)
    row1 = config_cells(ca, make_config(atm, ("B",), "u0", ()), Transition("q0", "B", "u0", "B", "R"), N)
    halts = [
        [CCell("B", Transition(src, "B", "qa", "B", "R")), PCell("B", "u0", "B"), BCell("B"), BCell("B")]
        for src in ("e8", "e9")
    ]
    universal = ("ctA", [
        config_subtree(ca, row1, N),
        ("haltEL", [config_subtree(ca, halts[0], N)]),
        ("haltER", [config_subtree(ca, halts[1], N)]),
    ])
    return LabeledTree.build(("top", [("ctEL", [config_subtree(ca, row0, N), universal])]))


@lru_cache(maxsize=None)
def moving_containment():
    return gen_containment_pair(moving(), N)


@lru_cache(maxsize=None)
def moving_tree() -> LabeledTree:
    atm = moving()
    return LabeledTree.build(encode_nested(search_accepting_tree(atm, 6, N), N, cell_alphabet(atm)))
