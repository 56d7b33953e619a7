"""NFAs over automaton states and unranked tree automata (NTAs) built from them.

Line-oriented text format::

    alphabet a b
    states s0 s1
    accepting s1
    rule s0 a L1
    nfa L1
      states q0 q1
      initial q0
      accepting q1
      trans q0 s0 q1
    end

``%`` starts a comment.  State names must be distinct across the NTA's
states and every NFA's states.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .trees import IDENT, LabeledTree


class AutomatonError(ValueError):
    pass


@dataclass(frozen=True)
class NFA:
    name: str
    states: tuple[str, ...]
    initial: str
    accepting: frozenset[str]
    transitions: tuple[tuple[str, str, str], ...]

    def __post_init__(self):
        known = set(self.states)
        if len(known) != len(self.states):
            raise AutomatonError(f"NFA {self.name}: duplicate states")
        if self.initial not in known:
            raise AutomatonError(f"NFA {self.name}: initial state {self.initial} not declared")
        if not self.accepting <= known:
            raise AutomatonError(f"NFA {self.name}: accepting states {sorted(self.accepting - known)} not declared")
        for q, _, q2 in self.transitions:
            if q not in known or q2 not in known:
                raise AutomatonError(f"NFA {self.name}: transition ({q},{q2}) uses undeclared states")

    def step(self, current: Iterable[str], symbols: Iterable[str]) -> set[str]:
        symbols = set(symbols)
        current = set(current)
        return {q2 for q, s, q2 in self.transitions if q in current and s in symbols}

    def accepts_epsilon(self) -> bool:
        return self.initial in self.accepting


def nfa_accepts(nfa: NFA, word: Sequence[str], symbols: Iterable[str] | None = None) -> bool:
    if symbols is not None:
        allowed = set(symbols)
        for c in word:
            if c not in allowed:
                raise AutomatonError(f"unknown symbol {c!r}")
    current = {nfa.initial}
    for c in word:
        current = nfa.step(current, (c,))
        if not current:
            return False
    return bool(current & nfa.accepting)


def nfa_accepts_set_word(nfa: NFA, word: Sequence[Iterable[str]]) -> bool:
    """Is some word ``c1..cn`` with each ``ci`` drawn from ``word[i]`` in the language?"""
    current = {nfa.initial}
    for options in word:
        current = nfa.step(current, options)
        if not current:
            return False
    return bool(current & nfa.accepting)


@dataclass(frozen=True)
class NTA:
    alphabet: tuple[str, ...]
    states: tuple[str, ...]
    accepting: frozenset[str]
    rules: tuple[tuple[str, str, str], ...]
    nfas: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.alphabet)) != len(self.alphabet):
            raise AutomatonError("duplicate alphabet symbols")
        states = set(self.states)
        if len(states) != len(self.states):
            raise AutomatonError("duplicate NTA states")
        if not self.accepting <= states:
            raise AutomatonError(f"accepting states {sorted(self.accepting - states)} not declared")
        seen = set(states)
        for nfa in self.nfas.values():
            overlap = seen & set(nfa.states)
            if overlap:
                raise AutomatonError(f"state names {sorted(overlap)} are not globally unique")
            seen.update(nfa.states)
            for _, s, _ in nfa.transitions:
                if s not in states:
                    raise AutomatonError(f"NFA {nfa.name} reads {s!r}, which is not an NTA state")
        for s, a, lang in self.rules:
            if s not in states:
                raise AutomatonError(f"rule uses undeclared state {s!r}")
            if a not in self.alphabet:
                raise AutomatonError(f"rule uses undeclared symbol {a!r}")
            if lang not in self.nfas:
                raise AutomatonError(f"rule references undeclared NFA {lang!r}")

    def __hash__(self):
        return hash((self.alphabet, self.states, self.accepting, self.rules))


def nta_state_sets(nta: NTA, tree: LabeledTree) -> dict[int, frozenset[str]]:
    by_symbol: dict[str, list[tuple[str, NFA]]] = {}
    for s, a, lang in nta.rules:
        by_symbol.setdefault(a, []).append((s, nta.nfas[lang]))
    order = []
    stack = [tree.root]
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(tree.kids(v))
    sets: dict[int, frozenset[str]] = {}
    for v in reversed(order):
        lab = tree.label(v)
        if lab not in nta.alphabet:
            raise AutomatonError(f"label {lab!r} is not in the automaton's alphabet")
        word = [sets[c] for c in tree.kids(v)]
        sets[v] = frozenset(s for s, nfa in by_symbol.get(lab, ()) if nfa_accepts_set_word(nfa, word))
    return sets


def nta_accepts(nta: NTA, tree: LabeledTree) -> bool:
    return bool(nta_state_sets(nta, tree)[tree.root] & nta.accepting)


def nta_size(nta: NTA) -> int:
    return (
        len(nta.alphabet)
        + len(nta.states)
        + len(nta.rules)
        + sum(len(n.states) + len(n.transitions) for n in nta.nfas.values())
    )


# -- text format ---------------------------------------------------------------


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("%", 1)[0].split()
        if line:
            yield no, line


def _idents(words, no):
    for w in words:
        if not IDENT.fullmatch(w):
            raise AutomatonError(f"line {no}: bad identifier {w!r}")
    return tuple(words)


def parse_nta(text: str) -> NTA:
    alphabet = states = None
    accepting: tuple[str, ...] = ()
    rules = []
    nfas: dict[str, NFA] = {}
    block = None
    for no, words in _lines(text):
        key, rest = words[0], words[1:]
        if block is not None:
            if key == "end":
                if block["initial"] is None:
                    raise AutomatonError(f"line {no}: NFA {block['name']} has no initial state")
                nfas[block["name"]] = NFA(
                    block["name"],
                    block["states"],
                    block["initial"],
                    frozenset(block["accepting"]),
                    tuple(block["trans"]),
                )
                block = None
            elif key == "states":
                block["states"] = _idents(rest, no)
            elif key == "initial" and len(rest) == 1:
                block["initial"] = rest[0]
            elif key == "accepting":
                block["accepting"] = _idents(rest, no)
            elif key == "trans" and len(rest) == 3:
                block["trans"].append(tuple(rest))
            else:
                raise AutomatonError(f"line {no}: unexpected {' '.join(words)!r} inside nfa block")
            continue
        if key == "alphabet":
            alphabet = _idents(rest, no)
        elif key == "states":
            states = _idents(rest, no)
        elif key == "accepting":
            accepting = _idents(rest, no)
        elif key == "rule" and len(rest) == 3:
            rules.append(tuple(rest))
        elif key == "nfa" and len(rest) == 1:
            if rest[0] in nfas:
                raise AutomatonError(f"line {no}: NFA {rest[0]} declared twice")
            block = {"name": rest[0], "states": (), "initial": None, "accepting": (), "trans": []}
        else:
            raise AutomatonError(f"line {no}: cannot parse {' '.join(words)!r}")
    if block is not None:
        raise AutomatonError(f"NFA {block['name']} is missing 'end'")
    if alphabet is None or states is None:
        raise AutomatonError("an NTA needs 'alphabet' and 'states' lines")
    return NTA(alphabet, states, frozenset(accepting), tuple(rules), nfas)


def render_nta(nta: NTA) -> str:
    out = [
        "alphabet " + " ".join(nta.alphabet),
        "states " + " ".join(nta.states),
        ("accepting " + " ".join(sorted(nta.accepting))).rstrip(),
    ]
    out += [f"rule {s} {a} {lang}" for s, a, lang in nta.rules]
    for name, nfa in nta.nfas.items():
        out.append(f"nfa {name}")
        out.append("  states " + " ".join(nfa.states))
        out.append(f"  initial {nfa.initial}")
        out.append(("  accepting " + " ".join(sorted(nfa.accepting))).rstrip())
        out += [f"  trans {q} {s} {q2}" for q, s, q2 in nfa.transitions]
        out.append("end")
    return "\n".join(out) + "\n"
