"""Emptiness and containment instances whose answers encode ATM acceptance.

``gen_emptiness_query`` produces a Boolean query over ``child``/``desc`` and
labels that holds exactly on encoded accepting computation trees (see
:mod:`mdltree.encoding`).  ``gen_containment_pair`` adds a second query that
detects every way an unranked tree can deviate from such an encoding, so the
first query is contained in the second iff the machine rejects.

All generated intensional predicates carry a ``g_`` prefix.  Binary helper
relations (child chains, successive configurations, equal cells) are macro
expanded into plain atoms with fresh ``_m<i>`` variables.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable

from .atm import ATM
from .datalog import Atom, Program, Query, Rule, parse_program, render_program
from .encoding import CT_LABELS, HALT_LABELS, SIGMA_PRIME, _nav_bit, CellAlphabet, ConstraintTables, cell_alphabet, constraint_tables
from .engine import eval_unary
from .trees import LABEL_PREFIX, Alphabet, LabeledTree, RankedAlphabet, Schema, _with_deep_recursion, get_schema

SCHEMA_NAME = "tau_u_desc"
UNRANKED = Alphabet(SIGMA_PRIME.alphabet.symbols)

CT_TYPES = ("g_ct_a", "g_halt_a", "g_ct_el", "g_halt_el", "g_ct_er", "g_halt_er")


class ReductionError(ValueError):
    pass


def lab(sym: str, v: str) -> Atom:
    return Atom(LABEL_PREFIX + sym, (v,))


def un(pred: str, v: str) -> Atom:
    return Atom(pred, (v,))


def ch(x: str, y: str) -> Atom:
    return Atom("child", (x, y))


class Fresh:
    def __init__(self, prefix: str = "_m"):
        self.prefix = prefix
        self.count = 0

    def __call__(self) -> str:
        self.count += 1
        return f"{self.prefix}{self.count}"


def expand_child_chain(x: str, y: str, i: int, fresh: Fresh | None = None) -> list[Atom]:
    """``child`` atoms linking ``x`` to its descendant ``y`` exactly ``i`` generations down."""
    if i < 1:
        raise ReductionError("a child chain needs length at least 1")
    fresh = fresh or Fresh()
    nodes = [x] + [fresh() for _ in range(i - 1)] + [y]
    return [ch(a, b) for a, b in zip(nodes, nodes[1:])]


def _dedupe(atoms: Iterable[Atom]) -> tuple[Atom, ...]:
    return tuple(dict.fromkeys(atoms))


def _rule(head: Atom, *parts) -> Rule:
    body: list[Atom] = []
    for p in parts:
        if isinstance(p, Atom):
            body.append(p)
        else:
            body.extend(p)
    return Rule(head, _dedupe(body))


# -- macro expansions -------------------------------------------------------------------


def succ_atoms(r1: str, r2: str, c1: str, c2: str) -> list[Atom]:
    """``r1`` and ``r2`` are the configuration trees of a configuration and its successor."""
    return [un("g_r", r1), un("g_r", r2), un("g_ct", c1), un("g_ct", c2), ch(c1, c2), ch(c1, r1), ch(c2, r2)]


def _same_side_atoms(s1: str, s2: str, i: int, near: int, far: int, fresh: Fresh) -> list[Atom]:
    """Both skeleton nodes sit on the same side, read off the depth of their gadget's 1-digit."""
    p1, p2, t1, t2, z = fresh(), fresh(), fresh(), fresh(), fresh()
    return [
        ch(s1, p1),
        un("g_p", p1),
        ch(s2, p2),
        un("g_p", p2),
        Atom("desc", (p1, t1)),
        un("g_d1", t1),
        Atom("desc", (p2, t2)),
        un("g_d1", t2),
        *expand_child_chain(z, t1, i + near, fresh),
        *expand_child_chain(z, t2, i + far, fresh),
    ]


def same_level_lr_atoms(s1: str, s2: str, i: int, r1: str, r2: str, fresh: Fresh) -> list[Atom]:
    """Level-``i`` skeleton nodes of successive configurations, both left or both right children.

    The successor relation between ``r1`` and ``r2`` is emitted once by the caller.
    """
    return [
        un("g_s", s1),
        un("g_s", s2),
        *expand_child_chain(r1, s1, i, fresh),
        *expand_child_chain(r2, s2, i, fresh),
        *_same_side_atoms(s1, s2, i, 4, 5, fresh),
    ]


def same_cell_atoms(s1: str, s2: str, n: int, fresh: Fresh) -> list[Atom]:
    """Skeleton leaves ``s1``/``s2`` hold the same tape position of successive configurations."""
    r1, r2, c1, c2 = fresh(), fresh(), fresh(), fresh()
    xs = [fresh() for _ in range(n - 1)] + [s1]
    ys = [fresh() for _ in range(n - 1)] + [s2]
    atoms = succ_atoms(r1, r2, c1, c2)
    for lvl in range(1, n + 1):
        x, y = xs[lvl - 1], ys[lvl - 1]
        if lvl < n:
            atoms += [ch(x, xs[lvl]), ch(y, ys[lvl])]
        atoms += same_level_lr_atoms(x, y, lvl, r1, r2, fresh)
    return atoms


def equi_level_lr_atoms(s1: str, s2: str, i: int, top: str, r1: str, r2: str, fresh: Fresh) -> list[Atom]:
    return [
        un("g_s", s1),
        un("g_s", s2),
        *expand_child_chain(r1, s1, i, fresh),
        *expand_child_chain(r2, s2, i, fresh),
        *_same_side_atoms(s1, s2, i, 4, 4, fresh),
    ]


def equi_cell_atoms(s1: str, s2: str, n: int, top: str, fresh: Fresh) -> list[Atom]:
    """Skeleton leaves at the same address in configurations hanging below the same node ``top``."""
    r1, r2 = fresh(), fresh()
    atoms = [
        *expand_child_chain(top, r1, 2, fresh),
        *expand_child_chain(top, r2, 2, fresh),
        un("g_r", r1),
        un("g_r", r2),
    ]
    xs = [fresh() for _ in range(n - 1)] + [s1]
    ys = [fresh() for _ in range(n - 1)] + [s2]
    for lvl in range(1, n + 1):
        x, y = xs[lvl - 1], ys[lvl - 1]
        if lvl < n:
            atoms += [ch(x, xs[lvl]), ch(y, ys[lvl])]
        atoms += equi_level_lr_atoms(x, y, lvl, top, r1, r2, fresh)
    return atoms


# -- PP1: the tree is shaped like an encoded computation --------------------------------------


def _check_params(n: int, k: int) -> None:
    if n < 2:
        raise ReductionError("address bits n must be at least 2")
    if k < 2:
        raise ReductionError("the cell count k must be at least 2")


def gen_structure_program(n: int, ca: CellAlphabet, tables: ConstraintTables | None = None) -> Program:
    k = ca.k
    _check_params(n, k)
    tables = tables or constraint_tables(ca)
    cc = ca.ccell_indices()
    cc_set = set(cc)
    R: list[Rule] = []
    x = "x"

    R.append(_rule(un("g_leaf", x), lab("bot", x)))
    R.append(_rule(un("g_d0", x), lab("d0", x)))
    R.append(_rule(un("g_d1", x), lab("d1", x)))
    R.append(_rule(un("g_digit", x), un("g_d0", x)))
    R.append(_rule(un("g_digit", x), un("g_d1", x)))
    R.append(_rule(un("g_digit_0", x), un("g_leaf", x)))
    for j in range(1, k + 1):
        R.append(_rule(un(f"g_digit_{j}", x), un("g_digit", x), ch(x, "y"), un(f"g_digit_{j - 1}", "y")))

    R.append(_rule(un("g_count_lt1", x), un("g_leaf", x)))
    R.append(_rule(un("g_count_lt1", x), un("g_d0", x), ch(x, "y"), un("g_count_lt1", "y")))
    R.append(_rule(un("g_count_eq1", x), un("g_d1", x), ch(x, "y"), un("g_count_lt1", "y")))
    R.append(_rule(un("g_count_eq1", x), un("g_d0", x), ch(x, "y"), un("g_count_eq1", "y")))

    R.append(_rule(un("g_count_eq1", x), lab("p", x), ch(x, "y"), un("g_count_eq1", "y")))
    R.append(_rule(un("g_digit_2", x), lab("p", x), ch(x, "y"), un("g_digit_2", "y")))
    R.append(_rule(un("g_p", x), lab("p", x), un("g_count_eq1", x), un("g_digit_2", x)))
    R.append(_rule(un("g_count_eq1", x), lab("m", x), ch(x, "y"), un("g_count_eq1", "y")))
    R.append(_rule(un(f"g_digit_{k}", x), lab("m", x), ch(x, "y"), un(f"g_digit_{k}", "y")))
    R.append(_rule(un("g_m", x), lab("m", x), un("g_count_eq1", x), un(f"g_digit_{k}", x)))

    for i in range(1, k + 1):
        fresh = Fresh()
        R.append(_rule(un(f"g_mk_{i}", x), un("g_m", x), expand_child_chain(x, "xi", i, fresh), un("g_d1", "xi")))

    R.append(_rule(un("g_sleaf", x), lab("sleaf", x), ch(x, "xm"), un("g_m", "xm"), ch(x, "xp"), un("g_p", "xp")))
    for sym in ("sleaf", "s"):
        for side, digit in (("g_sl", "g_d0"), ("g_sr", "g_d1")):
            R.append(_rule(un(side, x), lab(sym, x), ch(x, "xp"), un("g_p", "xp"), ch("xp", "xn"), un(digit, "xn")))

    def both_children(pred_l: Iterable[str], pred_r: Iterable[str]) -> list[Atom]:
        return [
            ch(x, "xl"),
            un("g_sl", "xl"),
            *(un(p, "xl") for p in pred_l),
            ch(x, "xr"),
            un("g_sr", "xr"),
            *(un(p, "xr") for p in pred_r),
        ]

    R.append(_rule(un("g_s", x), un("g_sleaf", x)))
    R.append(_rule(un("g_s", x), un("g_sl", x), both_children(["g_s"], ["g_s"])))
    R.append(_rule(un("g_s", x), un("g_sr", x), both_children(["g_s"], ["g_s"])))

    R.append(_rule(un("g_h_0", x), un("g_sleaf", x)))
    for j in range(1, n):
        R.append(_rule(un(f"g_h_{j}", x), both_children([f"g_h_{j - 1}"], [f"g_h_{j - 1}"])))
    top = f"g_h_{n - 1}"
    R.append(_rule(un("g_rnav", x), lab("r", x), both_children(["g_s", top], ["g_s", top])))

    for i in range(1, k + 1):
        R.append(_rule(un(f"g_kleaf_{i}", x), un("g_sleaf", x), ch(x, "y"), un(f"g_mk_{i}", "y")))
    for i in range(1, k + 1):
        R.append(_rule(un(f"g_kleft_{i}", x), un("g_s", x), un(f"g_kleaf_{i}", x)))
        R.append(_rule(un(f"g_kright_{i}", x), un("g_s", x), un(f"g_kleaf_{i}", x)))
        R.append(_rule(un(f"g_kleft_{i}", x), un("g_s", x), ch(x, "xl"), un("g_sl", "xl"), un(f"g_kleft_{i}", "xl")))
        R.append(
            _rule(un(f"g_kright_{i}", x), un("g_s", x), ch(x, "xr"), un("g_sr", "xr"), un(f"g_kright_{i}", "xr"))
        )
        # the leftmost cell must also be visible at the configuration root
        R.append(_rule(un(f"g_kleft_{i}", x), lab("r", x), ch(x, "xl"), un("g_sl", "xl"), un(f"g_kleft_{i}", "xl")))

    for i, j in sorted(tables.H):
        right_i, left_j = f"g_kright_{i}", f"g_kleft_{j}"
        R.append(_rule(un("g_h", x), un("g_s", x), both_children(["g_sleaf", right_i], ["g_sleaf", left_j])))
        R.append(_rule(un("g_h", x), un("g_s", x), both_children(["g_h", right_i], ["g_h", left_j])))
        R.append(_rule(un("g_h", x), lab("r", x), both_children(["g_h", right_i], ["g_h", left_j])))

    for i in range(1, k + 1):
        target = f"g_theta_{i}" if i in cc_set else "g_nontheta"
        R.append(_rule(un(target, x), un(f"g_kleaf_{i}", x)))
    for i in cc:
        R.append(_rule(un(f"g_theta_{i}", x), both_children([f"g_theta_{i}"], ["g_nontheta"])))
        R.append(_rule(un(f"g_theta_{i}", x), both_children(["g_nontheta"], [f"g_theta_{i}"])))
    R.append(_rule(un("g_nontheta", x), both_children(["g_nontheta"], ["g_nontheta"])))

    for i in cc:
        R.append(_rule(un("g_r", x), lab("r", x), un("g_h", x), un("g_rnav", x), un(f"g_theta_{i}", x)))

    for i in ca.accepting_cells():
        for sym, pred in (("haltA", "g_halt_a"), ("haltEL", "g_halt_el"), ("haltER", "g_halt_er")):
            R.append(
                _rule(
                    un(pred, x),
                    lab(sym, x),
                    ch(x, "xr"),
                    un("g_r", "xr"),
                    un(f"g_theta_{i}", "xr"),
                    un(f"g_kleft_{i}", "xr"),
                )
            )

    for i in ca.cells_entering("E"):
        R.append(_rule(un("g_state_e", x), un("g_r", x), un(f"g_theta_{i}", x)))
    for i in ca.cells_entering("A"):
        R.append(_rule(un("g_state_a", x), un("g_r", x), un(f"g_theta_{i}", x)))

    for sym, pred, halt in (("ctEL", "g_ct_el", "g_halt_el"), ("ctER", "g_ct_er", "g_halt_er")):
        R.append(_rule(un(pred, x), un(halt, x)))
        R.append(
            _rule(
                un(pred, x),
                lab(sym, x),
                ch(x, "xr"),
                un("g_r", "xr"),
                un("g_state_e", "xr"),
                ch(x, "xa"),
                un("g_ct_a", "xa"),
            )
        )
    R.append(_rule(un("g_ct_a", x), un("g_halt_a", x)))
    for i in cc:
        for j in cc:
            if i == j:
                continue
            R.append(
                _rule(
                    un("g_ct_a", x),
                    lab("ctA", x),
                    ch(x, "xr"),
                    un("g_r", "xr"),
                    un("g_state_a", "xr"),
                    ch(x, "x1"),
                    un("g_ct_el", "x1"),
                    ch("x1", "x1r"),
                    un("g_r", "x1r"),
                    un(f"g_theta_{i}", "x1r"),
                    ch(x, "x2"),
                    un("g_ct_er", "x2"),
                    ch("x2", "x2r"),
                    un("g_r", "x2r"),
                    un(f"g_theta_{j}", "x2r"),
                )
            )

    start = ca.index(ca.start_cell)
    for pred in ("g_ct_a", "g_ct_el"):
        R.append(_rule(un("g_startct", x), un(pred, x), ch(x, "xr"), un("g_r", "xr"), un(f"g_theta_{start}", "xr")))
    R.append(_rule(un("g_structure", "xt"), lab("top", "xt"), ch("xt", "xc"), un("g_startct", "xc")))
    return Program(tuple(R))



def gen_transition_rules(n: int, ca: CellAlphabet, tables: ConstraintTables) -> list[Rule]:
    R: list[Rule] = []
    x = "x"
    for pred in ("g_ct_a", "g_ct_el", "g_ct_er"):
        R.append(_rule(un("g_ct", x), un(pred, x)))
    for pred in ("g_halt_a", "g_halt_el", "g_halt_er"):
        R.append(_rule(un("g_leafct", x), un(pred, x)))
    for i, j in sorted(tables.V):
        fresh = Fresh()
        R.append(
            _rule(
                un("g_delta", "xs2"),
                same_cell_atoms("xs1", "xs2", n, fresh),
                ch("xs1", "xm1"),
                un("g_m", "xm1"),
                un(f"g_mk_{i}", "xm1"),
                ch("xs2", "xm2"),
                un("g_m", "xm2"),
                un(f"g_mk_{j}", "xm2"),
            )
        )
    R.append(
        _rule(
            un("g_delta", x),
            ch(x, "xl"),
            un("g_sl", "xl"),
            un("g_delta", "xl"),
            ch(x, "xr"),
            un("g_sr", "xr"),
            un("g_delta", "xr"),
        )
    )
    R.append(_rule(un("g_delta", x), un("g_ct", x), ch(x, "xr"), un("g_r", "xr"), un("g_delta", "xr")))
    R.append(_rule(un("g_bigdelta", x), un("g_leafct", x)))
    for pred in ("g_ct_el", "g_ct_er"):
        R.append(
            _rule(
                un("g_bigdelta", x),
                un(pred, x),
                ch(x, "xa"),
                un("g_ct_a", "xa"),
                un("g_bigdelta", "xa"),
                un("g_delta", "xa"),
            )
        )
    R.append(
        _rule(
            un("g_bigdelta", x),
            un("g_ct_a", x),
            ch(x, "x1"),
            un("g_ct_el", "x1"),
            un("g_bigdelta", "x1"),
            un("g_delta", "x1"),
            ch(x, "x2"),
            un("g_ct_er", "x2"),
            un("g_bigdelta", "x2"),
            un("g_delta", "x2"),
        )
    )
    R.append(_rule(un("g_ans", x), un("g_structure", x), ch(x, "xc"), un("g_bigdelta", "xc")))
    return R


def gen_reject_rules(n: int, ca: CellAlphabet, alphabet: Alphabet = UNRANKED) -> list[Rule]:
    k = ca.k
    sigma = list(alphabet)
    R: list[Rule] = []
    x = "x"
    reject = un("g_reject", x)

    def others(*allowed: str) -> list[str]:
        return [a for a in sigma if a not in allowed]

    R.append(_rule(reject, ch(x, "x1"), un("g_reject", "x1")))
    R.append(_rule(reject, ch(x, "x1"), lab("top", "x1")))
    for a in others("ctA", "ctEL", "ctER"):
        R.append(_rule(reject, lab("top", x), ch(x, "x1"), lab(a, "x1")))
    for parent in ("ctEL", "ctER"):
        for a in others("r", "ctA", "haltA"):
            R.append(_rule(reject, lab(parent, x), ch(x, "x1"), lab(a, "x1")))
    for a in others("r", "ctER", "ctEL", "haltER", "haltEL"):
        R.append(_rule(reject, lab("ctA", x), ch(x, "x1"), lab(a, "x1")))
    for parent in ("haltA", "haltEL", "haltER"):
        for a in others("r"):
            R.append(_rule(reject, lab(parent, x), ch(x, "x1"), lab(a, "x1")))
    for a in others("s"):
        R.append(_rule(reject, lab("r", x), ch(x, "x1"), lab(a, "x1")))
    for a in others("p", "s", "sleaf"):
        R.append(_rule(reject, lab("s", x), ch(x, "x1"), lab(a, "x1")))
    for a in others("p", "m"):
        R.append(_rule(reject, lab("sleaf", x), ch(x, "x1"), lab(a, "x1")))
    for parent in ("p", "m"):
        for a in others("d0", "d1"):
            R.append(_rule(reject, lab(parent, x), ch(x, "x1"), lab(a, "x1")))
    for parent in ("d0", "d1"):
        for a in others("d0", "d1", "bot"):
            R.append(_rule(reject, lab(parent, x), ch(x, "x1"), lab(a, "x1")))
    R.append(_rule(reject, lab("bot", x), ch(x, "x1")))

    def chain(i: int, end: str):
        return expand_child_chain(x, "x1", i, Fresh()) + [lab(end, "x1")]

    for gadget, length in (("p", 3), ("m", k + 1)):
        for i in range(1, length):
            R.append(_rule(reject, lab(gadget, x), chain(i, "bot")))
        for digit in ("d0", "d1"):
            R.append(_rule(reject, lab(gadget, x), chain(length, digit)))
    for i in range(1, n):
        R.append(_rule(reject, lab("r", x), chain(i, "sleaf")))
    R.append(_rule(reject, lab("r", x), chain(n, "s")))

    for gadget, length in (("p", 2), ("m", k)):
        for i in range(1, length + 1):
            fresh = Fresh()
            R.append(
                _rule(
                    un("g_reject", "xs"),
                    ch("xs", "xg1"),
                    ch("xs", "xg2"),
                    lab(gadget, "xg1"),
                    lab(gadget, "xg2"),
                    expand_child_chain("xg1", "x1", i, fresh),
                    lab("d1", "x1"),
                    expand_child_chain("xg2", "x0", i, fresh),
                    lab("d0", "x0"),
                )
            )

    for typ in CT_TYPES:
        for i in range(1, k + 1):
            for j in range(1, k + 1):
                if i == j:
                    continue
                fresh = Fresh()
                R.append(
                    _rule(
                        reject,
                        un(typ, "xc1"),
                        un(typ, "xc2"),
                        expand_child_chain("xc1", "xs1", n + 1, fresh),
                        expand_child_chain("xc2", "xs2", n + 1, fresh),
                        equi_cell_atoms("xs1", "xs2", n, x, fresh),
                        ch("xs1", "xm1"),
                        un("g_m", "xm1"),
                        un(f"g_mk_{i}", "xm1"),
                        ch("xs2", "xm2"),
                        un("g_m", "xm2"),
                        un(f"g_mk_{j}", "xm2"),
                    )
                )
    return R


# -- instances ---------------------------------------------------------------------------


@dataclass
class ReductionInstance:
    kind: str  # "emptiness" or "containment"
    n: int
    ca: CellAlphabet
    tables: ConstraintTables
    queries: dict[str, Query]
    alphabet: object = field(default=SIGMA_PRIME)

    @property
    def k(self) -> int:
        return self.ca.k

    @property
    def schema(self) -> Schema:
        return get_schema(SCHEMA_NAME)


def gen_emptiness_query(atm: ATM, n: int) -> ReductionInstance:
    ca = cell_alphabet(atm)
    _check_params(n, ca.k)
    tables = constraint_tables(ca)
    structure = gen_structure_program(n, ca, tables)
    rules = structure.rules + tuple(gen_transition_rules(n, ca, tables))
    q = Query(Program(rules), "g_ans")
    return ReductionInstance("emptiness", n, ca, tables, {"q": q}, SIGMA_PRIME)


def gen_containment_pair(atm: ATM, n: int) -> ReductionInstance:
    base = gen_emptiness_query(atm, n)
    q1 = base.queries["q"]
    q2 = Query(Program(q1.program.rules + tuple(gen_reject_rules(n, base.ca))), "g_reject")
    return ReductionInstance("containment", n, base.ca, base.tables, {"q1": q1, "q2": q2}, UNRANKED)


def structure_query(inst: ReductionInstance) -> Query:
    """The shape-only query (top-level ``g_structure``) contained in the emptiness program."""
    q = next(iter(inst.queries.values()))
    return Query(q.program, "g_structure")


# -- closed-form counts --------------------------------------------------------------------


def expected_rule_counts(
    n: int,
    k: int,
    h_pairs: int,
    v_pairs: int,
    ccells: int,
    ccells_exist: int,
    ccells_univ: int,
    accepting: int,
    sigma: int = 15,
) -> dict[str, int]:
    structure = (
        1  # leaf
        + 4  # digit labels
        + (k + 1)  # digit_0..digit_k
        + 4  # one-counting
        + 6  # p and m gadget roots
        + k  # m_{k=i}
        + 1  # sleaf
        + 4  # left/right marks
        + 3  # s
        + n  # heights 0..n-1
        + 1  # r_nav
        + k  # (k=i)_Leaf
        + 5 * k  # Left/Right propagation, including the r-level Left rule
        + 3 * h_pairs
        + k  # theta / non-theta seeds
        + 2 * ccells
        + 1  # non-theta propagation
        + ccells  # r
        + 3 * accepting
        + ccells_exist
        + ccells_univ
        + 5  # ctEL, ctER, ctA base cases and existential rules
        + ccells * (ccells - 1)
        + 2  # startCT
        + 1  # structure
    )
    transition = 3 + 3 + v_pairs + 2 + 4 + 1
    reject = (
        1
        + 1
        + (sigma - 3)
        + 2 * (sigma - 3)
        + (sigma - 5)
        + 3 * (sigma - 1)
        + (sigma - 1)
        + (sigma - 3)
        + (sigma - 2)
        + 2 * (sigma - 2)
        + 2 * (sigma - 3)
        + 1
        + 4
        + (k + 2)
        + n
        + 2
        + k
        + 6 * k * (k - 1)
    )
    return {
        "structure": structure,
        "emptiness": structure + transition,
        "reject": reject,
        "q2": structure + transition + reject,
    }


def instance_counts(inst: ReductionInstance) -> dict[str, int]:
    ca = inst.ca
    return expected_rule_counts(
        inst.n,
        ca.k,
        len(inst.tables.H),
        len(inst.tables.V),
        len(ca.ccell_indices()),
        len(ca.cells_entering("E")),
        len(ca.cells_entering("A")),
        len(ca.accepting_cells()),
    )


def delta_body_sizes(inst: ReductionInstance) -> list[int]:
    q = next(iter(inst.queries.values()))
    return [len(r.body) for r in q.program.rules if r.head.pred == "g_delta" and r.head.args == ("xs2",)]


def expected_delta_body_size(n: int) -> int:
    return 2 * n * n + 23 * n + 11


# -- EquiCell reach ---------------------------------------------------------------------

PROBE = "g_probe"
MARKER = "haltA"  # never a child of a skeleton leaf in a well-formed encoding


def _skeleton_leaves(tree: LabeledTree, r: int, n: int) -> dict[tuple[int, ...], int]:
    out: dict[tuple[int, ...], int] = {}

    def walk(v: int, address: tuple[int, ...]):
        for c in tree.kids(v):
            if tree.label(c) in ("s", "sleaf"):
                p = next(g for g in tree.kids(c) if tree.label(g) == "p")
                a = address + (_nav_bit(tree, p),)
                if len(a) == n:
                    out[a] = c
                else:
                    walk(c, a)

    walk(r, ())
    return out


def equi_cell_partners(inst: ReductionInstance, tree: LabeledTree, leaf: int) -> set[int]:
    """Skeleton leaves that the EquiCell expansion relates to ``leaf`` in ``tree``."""
    fresh = Fresh()
    probe = _rule(
        un(PROBE, "xs2"),
        equi_cell_atoms("xs1", "xs2", inst.n, "x", fresh),
        ch("xs1", "xw"),
        lab(MARKER, "xw"),
    )
    base = next(iter(inst.queries.values())).program.rules
    q = Query(Program(base + (probe,)), PROBE)
    marked = _with_marker(tree, leaf)
    new_to_old = {b: a for a, b in _preorder_map(tree, marked).items()}
    hits = eval_unary(q, marked, get_schema(SCHEMA_NAME), "unordered")
    return {new_to_old[h] for h in hits if h in new_to_old}


def _with_marker(tree: LabeledTree, leaf: int) -> LabeledTree:
    def go(v):
        kids = [go(c) for c in tree.kids(v)]
        if v == leaf:
            kids.append(MARKER)
        return (tree.label(v), kids)

    return LabeledTree.build(_with_deep_recursion(go, tree.root, tree.size))


def _preorder_map(old: LabeledTree, new: LabeledTree) -> dict[int, int]:
    out = {}
    stack = [(old.root, new.root)]
    while stack:
        a, b = stack.pop()
        out[a] = b
        stack.extend(zip(old.kids(a), new.kids(b)))
    return out


def equi_cell_blind_spots(inst: ReductionInstance, tree: LabeledTree) -> list[tuple[int, int, tuple[int, ...]]]:
    """Same-address skeleton leaves of sibling configurations that EquiCell never compares.

    Returns ``(leaf1, leaf2, address)`` triples.
    """
    n = inst.n
    configs = [v for v in tree.nodes if tree.label(v) in CT_LABELS + HALT_LABELS]
    config_set = set(configs)
    gaps = []
    for parent in tree.nodes:
        kids = [c for c in tree.kids(parent) if c in config_set]
        if len(kids) < 2:
            continue
        rows = []
        for c in kids:
            r = next((x for x in tree.kids(c) if tree.label(x) == "r"), None)
            if r is not None:
                rows.append(_skeleton_leaves(tree, r, n))
        for i, row1 in enumerate(rows):
            for row2 in rows[i + 1 :]:
                for address, leaf1 in sorted(row1.items()):
                    leaf2 = row2.get(address)
                    if leaf2 is not None and leaf2 not in equi_cell_partners(inst, tree, leaf1):
                        gaps.append((leaf1, leaf2, address))
    return gaps


# -- files -------------------------------------------------------------------------------


def write_instance(inst: ReductionInstance, out_dir: str) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    written = []

    def put(name: str, text: str):
        path = os.path.join(out_dir, name)
        with open(path, "w") as fh:
            fh.write(text)
        written.append(path)

    if isinstance(inst.alphabet, RankedAlphabet):
        put("alphabet.txt", "".join(f"{s} {a}\n" for s, a in inst.alphabet.entries))
    else:
        put("alphabet.txt", "".join(f"{s}\n" for s in inst.alphabet))
    for name, q in inst.queries.items():
        put(f"{name}.dl", render_program(q))
    lines = [f"kind {inst.kind}", f"n {inst.n}", f"k {inst.k}", f"schema {SCHEMA_NAME}"]
    lines += [f"cell {i} {c}" for i, c in enumerate(inst.ca.cells, 1)]
    put("params.txt", "\n".join(lines) + "\n")
    return written


def read_alphabet(text: str):
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    if all(len(r) == 2 for r in rows):
        return RankedAlphabet(tuple((s, int(a)) for s, a in rows))
    if all(len(r) == 1 for r in rows):
        return Alphabet(tuple(r[0] for r in rows))
    raise ReductionError("alphabet file mixes ranked and unranked entries")


def read_params(text: str) -> dict:
    out: dict = {"cells": {}}
    for ln in text.splitlines():
        words = ln.split(maxsplit=2)
        if not words:
            continue
        if words[0] == "cell":
            out["cells"][int(words[1])] = words[2]
        elif words[0] in ("n", "k"):
            out[words[0]] = int(words[1])
        else:
            out[words[0]] = words[1]
    return out


def read_instance_dir(path: str) -> dict:
    def get(name):
        with open(os.path.join(path, name)) as fh:
            return fh.read()

    out = {"alphabet": read_alphabet(get("alphabet.txt")), "params": read_params(get("params.txt")), "queries": {}}
    for name in ("q", "q1", "q2"):
        file = os.path.join(path, f"{name}.dl")
        if os.path.exists(file):
            out["queries"][name] = parse_program(get(f"{name}.dl"))
    return out
