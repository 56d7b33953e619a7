"""Translations into monadic datalog: tree automata and Boolean conjunctive queries."""

from __future__ import annotations

from dataclasses import dataclass

from .automata import NTA
from .datalog import Atom, DatalogError, Query, Rule, _Parser, atom, make_query, rule
from .trees import LABEL_PREFIX

QUERY_PREDICATE = "P"
CQ_PREDICATES = frozenset({"child", "desc"})


class CompileError(ValueError):
    pass


def state_pred(s: str) -> str:
    return f"st_{s}"


def nfa_state_pred(lang: str, q: str) -> str:
    return f"q_{lang}_{q}"


def acc_pred(lang: str) -> str:
    return f"acc_{lang}"


def child_acc_pred(lang: str) -> str:
    return f"chacc_{lang}"


def compile_nta(nta: NTA) -> Query:
    """Monadic datalog over fc/ns/root/leaf/ls/child that accepts exactly L(nta)."""
    names: dict[str, tuple] = {}

    def claim(name: str, owner: tuple) -> str:
        if names.setdefault(name, owner) != owner:
            raise CompileError(f"predicate name {name} is produced by both {names[name]} and {owner}")
        return name

    for s in nta.states:
        claim(state_pred(s), ("state", s))
    for lang, nfa in nta.nfas.items():
        claim(acc_pred(lang), ("acc", lang))
        claim(child_acc_pred(lang), ("chacc", lang))
        for q in nfa.states:
            claim(nfa_state_pred(lang, q), ("nfa", lang, q))
    claim(QUERY_PREDICATE, ("query",))

    rules: list[Rule] = []
    for lang, nfa in nta.nfas.items():
        q_of = lambda q: nfa_state_pred(lang, q)  # noqa: E731
        for q, s, q2 in nfa.transitions:
            if q == nfa.initial:
                rules.append(rule(atom(q_of(q2), "x"), atom("fc", "y", "x"), atom(state_pred(s), "x")))
        for q, s, q2 in nfa.transitions:
            rules.append(
                rule(atom(q_of(q2), "x2"), atom(q_of(q), "x"), atom("ns", "x", "x2"), atom(state_pred(s), "x2"))
            )
        for q in sorted(nfa.accepting):
            rules.append(rule(atom(acc_pred(lang), "x"), atom("ls", "x"), atom(q_of(q), "x")))
    for s, a, lang in nta.rules:
        if nta.nfas[lang].accepts_epsilon():
            rules.append(rule(atom(state_pred(s), "x"), atom(LABEL_PREFIX + a, "x"), atom("leaf", "x")))
    for lang in nta.nfas:
        rules.append(
            rule(atom(child_acc_pred(lang), "y"), atom("child", "y", "x"), atom("ls", "x"), atom(acc_pred(lang), "x"))
        )
    for s, a, lang in nta.rules:
        rules.append(rule(atom(state_pred(s), "x"), atom(child_acc_pred(lang), "x"), atom(LABEL_PREFIX + a, "x")))
    for s in sorted(nta.accepting):
        rules.append(rule(atom(QUERY_PREDICATE, "x"), atom("root", "x"), atom(state_pred(s), "x")))
    return make_query(rules, QUERY_PREDICATE)


def expected_rule_count(nta: NTA) -> int:
    per_lang = sum(
        sum(1 for q, _, _ in nfa.transitions if q == nfa.initial) + len(nfa.transitions) + len(nfa.accepting) + 1
        for nfa in nta.nfas.values()
    )
    eps = sum(1 for _, _, lang in nta.rules if nta.nfas[lang].accepts_epsilon())
    return per_lang + eps + len(nta.rules) + len(nta.accepting)


# -- conjunctive queries ---------------------------------------------------------


@dataclass(frozen=True)
class CQ:
    atoms: tuple[Atom, ...]

    def __post_init__(self):
        if not self.atoms:
            raise CompileError("a conjunctive query needs at least one atom")
        for a in self.atoms:
            if a.pred in CQ_PREDICATES:
                if len(a.args) != 2:
                    raise CompileError(f"{a.pred} is binary: {a}")
            elif a.pred.startswith(LABEL_PREFIX):
                if len(a.args) != 1:
                    raise CompileError(f"label predicates are unary: {a}")
            else:
                raise CompileError(f"predicate {a.pred} is outside child/desc/labels")

    @property
    def variables(self) -> list[str]:
        return sorted({v for a in self.atoms for v in a.args})

    def __str__(self) -> str:
        return "ans :- " + ", ".join(map(str, self.atoms)) + "."


def parse_cq(text: str) -> CQ:
    p = _Parser(text)
    head = p.ident()
    if head != "ans":
        raise CompileError(f"a conjunctive query starts with 'ans', not {head!r}")
    p.take(":-")
    atoms = [p.atom()]
    while p.peek()[0] == ",":
        p.take(",")
        atoms.append(p.atom())
    p.take(".")
    tok, line, col = p.peek()
    if tok is not None:
        raise DatalogError(f"trailing input {tok!r} at line {line}, column {col}")
    return CQ(tuple(atoms))


def translate_cq(cq: CQ, root_var: str | None = None) -> Query:
    """Two-rule monadic program: match the CQ anywhere, then lift the match to the root."""
    x = root_var if root_var is not None else cq.variables[0]
    if x not in cq.variables:
        raise CompileError(f"{x} is not a variable of the query")
    y = "y" if x != "y" else "z"
    return make_query(
        [
            Rule(atom(QUERY_PREDICATE, x), cq.atoms),
            rule(atom(QUERY_PREDICATE, x), atom("child", x, y), atom(QUERY_PREDICATE, y)),
        ],
        QUERY_PREDICATE,
    )
