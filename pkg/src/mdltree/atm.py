"""Alternating Turing machines with a one-sided tape.

Text format, one directive per line (``%`` comments)::

    states_exist q0
    states_univ u1
    accept qa
    reject qr
    initial q0
    input_alphabet a
    tape_alphabet a B        % the last symbol is the blank
    trans q0 B qa B S

A configuration ``left q right`` has the head on ``right[0]`` (a blank when
``right`` is empty).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

from .trees import IDENT

MOVES = ("L", "R", "S")


class ATMError(ValueError):
    pass


class SpaceBoundExceeded(ATMError):
    pass


@dataclass(frozen=True, order=True)
class Transition:
    state: str
    read: str
    new_state: str
    write: str
    move: str

    def __str__(self) -> str:
        return f"(({self.state},{self.read}),({self.new_state},{self.write},{self.move}))"


@dataclass(frozen=True)
class ATM:
    exist: tuple[str, ...]
    univ: tuple[str, ...]
    accept: str
    reject: str
    initial: str
    input_alphabet: tuple[str, ...]
    tape_alphabet: tuple[str, ...]
    transitions: tuple[Transition, ...]

    def __post_init__(self):
        groups = [*self.exist, *self.univ, self.accept, self.reject]
        if len(set(groups)) != len(groups):
            raise ATMError("state sets must be pairwise disjoint")
        for q in groups:
            if not IDENT.fullmatch(q):
                raise ATMError(f"bad state name {q!r}")
        if self.initial not in groups:
            raise ATMError(f"initial state {self.initial} is not declared")
        if not self.tape_alphabet:
            raise ATMError("the tape alphabet needs at least the blank")
        if len(set(self.tape_alphabet)) != len(self.tape_alphabet):
            raise ATMError("duplicate tape symbols")
        if not set(self.input_alphabet) <= set(self.tape_alphabet):
            raise ATMError("input alphabet must be contained in the tape alphabet")
        if self.blank in self.input_alphabet:
            raise ATMError("the blank may not be an input symbol")
        states = set(groups)
        gamma = set(self.tape_alphabet)
        for t in self.transitions:
            if t.state in (self.accept, self.reject):
                raise ATMError(f"halting state {t.state} has an outgoing transition {t}")
            if t.state not in states or t.new_state not in states:
                raise ATMError(f"transition {t} uses an undeclared state")
            if t.read not in gamma or t.write not in gamma:
                raise ATMError(f"transition {t} uses an undeclared tape symbol")
            if t.move not in MOVES:
                raise ATMError(f"transition {t} has a bad move")

    @property
    def blank(self) -> str:
        return self.tape_alphabet[-1]

    @property
    def states(self) -> tuple[str, ...]:
        return (*self.exist, *self.univ, self.accept, self.reject)

    @property
    def halting(self) -> frozenset[str]:
        return frozenset((self.accept, self.reject))

    def kind(self, q: str) -> str:
        if q in self.halting:
            return "H"
        return "A" if q in self.univ_set else "E"

    @cached_property
    def univ_set(self) -> frozenset[str]:
        return frozenset(self.univ)

    @cached_property
    def by_key(self) -> dict[tuple[str, str], tuple[Transition, ...]]:
        out: dict[tuple[str, str], list[Transition]] = {}
        for t in self.transitions:
            out.setdefault((t.state, t.read), []).append(t)
        return {k: tuple(v) for k, v in out.items()}

    def size(self) -> int:
        return len(self.states) + len(self.tape_alphabet) + len(self.transitions)


@dataclass(frozen=True)
class Configuration:
    left: tuple[str, ...]
    state: str
    right: tuple[str, ...]

    @property
    def head(self) -> int:
        return len(self.left)

    def tape(self) -> tuple[str, ...]:
        return self.left + self.right

    def __str__(self) -> str:
        return " ".join([*self.left, f"[{self.state}]", *self.right])


def make_config(atm: ATM, left: Iterable[str], state: str, right: Iterable[str]) -> Configuration:
    right = list(right)
    while right and right[-1] == atm.blank:
        right.pop()
    return Configuration(tuple(left), state, tuple(right))


def initial_config(atm: ATM, word: Iterable[str] = ()) -> Configuration:
    return make_config(atm, (), atm.initial, word)


def head_letter(atm: ATM, config: Configuration) -> str:
    return config.right[0] if config.right else atm.blank


def apply_transition(atm: ATM, config: Configuration, t: Transition) -> Configuration:
    if t.state != config.state or t.read != head_letter(atm, config):
        raise ATMError(f"transition {t} does not apply to {config}")
    tape = list(config.tape())
    pos = config.head
    if pos >= len(tape):
        tape.extend([atm.blank] * (pos + 1 - len(tape)))
    tape[pos] = t.write
    if t.move == "L":
        if pos == 0:
            raise ATMError(f"transition {t} moves left off the tape in {config}")
        pos -= 1
    elif t.move == "R":
        pos += 1
    if pos > len(tape):
        tape.extend([atm.blank] * (pos - len(tape)))
    return make_config(atm, tape[:pos], t.new_state, tape[pos:])


def successors(atm: ATM, config: Configuration) -> list[Configuration]:
    return [c for _, c in successor_steps(atm, config)]


def successor_steps(atm: ATM, config: Configuration) -> list[tuple[Transition, Configuration]]:
    if config.state in atm.halting:
        raise ATMError(f"halting configuration {config} has no successors")
    key = (config.state, head_letter(atm, config))
    return [(t, apply_transition(atm, config, t)) for t in atm.by_key.get(key, ())]


# -- text format -----------------------------------------------------------------


def parse_atm(text: str) -> ATM:
    fields: dict[str, tuple[str, ...]] = {}
    trans: list[Transition] = []
    single = {"accept", "reject", "initial"}
    lists = {"states_exist", "states_univ", "input_alphabet", "tape_alphabet"}
    for no, raw in enumerate(text.splitlines(), 1):
        words = raw.split("%", 1)[0].split()
        if not words:
            continue
        key, rest = words[0], tuple(words[1:])
        for w in rest:
            if not IDENT.fullmatch(w):
                raise ATMError(f"line {no}: bad identifier {w!r}")
        if key == "trans":
            if len(rest) != 5 or rest[4] not in MOVES:
                raise ATMError(f"line {no}: expected 'trans q a q2 b L|R|S'")
            trans.append(Transition(*rest))
        elif key in single:
            if len(rest) != 1:
                raise ATMError(f"line {no}: {key} takes exactly one state")
            if key in fields:
                raise ATMError(f"line {no}: duplicate {key}")
            fields[key] = rest
        elif key in lists:
            fields[key] = fields.get(key, ()) + rest
        else:
            raise ATMError(f"line {no}: unknown directive {key!r}")
    for key in ("accept", "reject", "initial", "tape_alphabet"):
        if key not in fields:
            raise ATMError(f"missing '{key}' line")
    return ATM(
        exist=fields.get("states_exist", ()),
        univ=fields.get("states_univ", ()),
        accept=fields["accept"][0],
        reject=fields["reject"][0],
        initial=fields["initial"][0],
        input_alphabet=fields.get("input_alphabet", ()),
        tape_alphabet=fields["tape_alphabet"],
        transitions=tuple(trans),
    )


def render_atm(atm: ATM) -> str:
    lines = [
        "states_exist " + " ".join(atm.exist),
        "states_univ " + " ".join(atm.univ),
        f"accept {atm.accept}",
        f"reject {atm.reject}",
        f"initial {atm.initial}",
        "input_alphabet " + " ".join(atm.input_alphabet),
        "tape_alphabet " + " ".join(atm.tape_alphabet),
    ]
    lines = [ln.rstrip() for ln in lines]
    lines += [f"trans {t.state} {t.read} {t.new_state} {t.write} {t.move}" for t in atm.transitions]
    return "\n".join(lines) + "\n"


# -- constructions ----------------------------------------------------------------


class _Names:
    def __init__(self, taken: Iterable[str]):
        self.taken = set(taken)

    def fresh(self, base: str) -> str:
        name, i = base, 1
        while name in self.taken:
            i += 1
            name = f"{base}{i}"
        self.taken.add(name)
        return name


def build_input_machine(atm: ATM, word: Iterable[str]) -> ATM:
    """A machine that writes ``word`` on the empty tape, walks back to cell 0 and runs ``atm``.

    Returning needs one state per cell because the machine cannot see the
    left tape end, so ``2*len(word)`` states are added.
    """
    word = tuple(word)
    for c in word:
        if c not in atm.input_alphabet:
            raise ATMError(f"{c!r} is not an input symbol")
    if not word:
        return atm
    names = _Names(atm.states)
    m = len(word)
    writers = [names.fresh(f"wr{i}") for i in range(m)]
    walkers = [names.fresh(f"back{j}") for j in range(1, m + 1)]  # walkers[j-1] still has j steps
    blank = atm.blank
    trans: list[Transition] = []
    for i, c in enumerate(word):
        nxt = writers[i + 1] if i + 1 < m else walkers[m - 1]
        trans.append(Transition(writers[i], blank, nxt, c, "R"))
    for j in range(1, m + 1):
        target = walkers[j - 2] if j > 1 else atm.initial
        for x in atm.tape_alphabet:
            trans.append(Transition(walkers[j - 1], x, target, x, "L"))
    return ATM(
        exist=tuple(writers) + tuple(walkers) + atm.exist,
        univ=atm.univ,
        accept=atm.accept,
        reject=atm.reject,
        initial=writers[0],
        input_alphabet=atm.input_alphabet,
        tape_alphabet=atm.tape_alphabet,
        transitions=tuple(trans) + atm.transitions,
    )


def normalize(atm: ATM) -> ATM:
    """Exactly two successors everywhere, state-only universal steps, strict alternation.

    Fresh states: existential helpers that perform a universal step's write and
    move, universal relays whose two branches lead to a state and its twin,
    existential relays that offer a non-accepting sink as the second choice,
    and two pairs of sink states that alternate forever.  A machine that is
    already normalized comes back unchanged.
    """
    gamma = atm.tape_alphabet
    names = _Names(atm.states)
    kind = {q: atm.kind(q) for q in atm.states}
    trans: dict[tuple[str, str], list[tuple[str, str, str]]] = {}
    for t in atm.transitions:
        lst = trans.setdefault((t.state, t.read), [])
        if (t.new_state, t.write, t.move) not in lst:
            lst.append((t.new_state, t.write, t.move))
    order = [q for q in atm.states if kind[q] != "H"]

    def new_state(base: str, k: str) -> str:
        q = names.fresh(base)
        kind[q] = k
        order.append(q)
        return q

    # universal steps may only change the state
    for q in list(order):
        if kind[q] != "A":
            continue
        for c in gamma:
            out = []
            for p, d, mv in trans.get((q, c), []):
                if d == c and mv == "S":
                    out.append((p, d, mv))
                else:
                    e = new_state(f"{q}_do", "E")
                    trans[(e, c)] = [(p, d, mv)]
                    out.append((e, c, "S"))
            if (q, c) in trans:
                trans[(q, c)] = out

    sinks: dict[str, str] = {}

    def sink(k: str, i: int) -> str:
        key = f"{k}{i}"
        if key not in sinks:
            for kk in ("E", "A"):
                for ii in (1, 2):
                    sinks[f"{kk}{ii}"] = new_state(f"sink{kk}{ii}", kk)
            for ii in (1, 2):
                for c in gamma:
                    trans[(sinks[f"E{ii}"], c)] = [(sinks["A1"], c, "S"), (sinks["A2"], c, "S")]
                    trans[(sinks[f"A{ii}"], c)] = [(sinks["E1"], c, "S"), (sinks["E2"], c, "S")]
        return sinks[key]

    twins: dict[str, str] = {}

    def twin(p: str) -> str:
        if p not in twins:
            twins[p] = new_state(f"{p}_twin", kind[p])
        return twins[p]

    univ_relay: dict[str, str] = {}
    exist_relay: dict[str, str] = {}

    def via_univ(p: str) -> str:
        if p not in univ_relay:
            u = new_state(f"{p}_all", "A")
            univ_relay[p] = u
            for c in gamma:
                trans[(u, c)] = [(p, c, "S"), (twin(p), c, "S")]
        return univ_relay[p]

    def via_exist(p: str) -> str:
        if p not in exist_relay:
            e = new_state(f"{p}_any", "E")
            exist_relay[p] = e
            for c in gamma:
                trans[(e, c)] = [(p, c, "S")]
        return exist_relay[p]

    # strict alternation
    for q in list(order):
        for c in gamma:
            lst = trans.get((q, c))
            if not lst:
                continue
            fixed = []
            for p, d, mv in lst:
                if kind[q] == "E" and kind[p] == "E":
                    p = via_univ(p)
                elif kind[q] == "A" and kind[p] == "A":
                    p = via_exist(p)
                fixed.append((p, d, mv))
            trans[(q, c)] = fixed

    # fan-out exactly two
    i = 0
    while i < len(order):
        q = order[i]
        i += 1
        if q in twins.values():
            continue
        for c in gamma:
            lst = trans.get((q, c), [])
            if kind[q] == "E":
                if not lst:
                    lst = [(sink("A", 1), c, "S"), (sink("A", 2), c, "S")]
                elif len(lst) == 1:
                    s1 = sink("A", 1)
                    lst = lst + [(s1 if lst[0] != (s1, c, "S") else sink("A", 2), c, "S")]
                elif len(lst) > 2:
                    rest = new_state(f"{q}_more", "E")
                    trans[(rest, c)] = lst[1:]
                    lst = [lst[0], (via_univ(rest), c, "S")]
            else:
                if not lst:
                    lst = [(sink("E", 1), c, "S"), (sink("E", 2), c, "S")]
                elif len(lst) == 1:
                    p = lst[0][0]
                    if kind[p] == "H":
                        r1 = new_state(f"{p}_via", "E")
                        r2 = new_state(f"{p}_via", "E")
                        for x in gamma:
                            trans[(r1, x)] = [(p, x, "S")]
                            trans[(r2, x)] = [(p, x, "S")]
                        lst = [(r1, c, "S"), (r2, c, "S")]
                    else:
                        lst = lst + [(twin(p), c, "S")]
                elif len(lst) > 2:
                    rest = new_state(f"{q}_more", "A")
                    trans[(rest, c)] = lst[1:]
                    lst = [lst[0], (via_exist(rest), c, "S")]
            trans[(q, c)] = lst

    for p, tw in twins.items():
        for c in gamma:
            if (p, c) in trans:
                trans[(tw, c)] = list(trans[(p, c)])

    out: list[Transition] = []
    for q in order:
        for c in gamma:
            for p, d, mv in trans.get((q, c), []):
                out.append(Transition(q, c, p, d, mv))
    # keep the original transition order for an untouched machine
    original = [t for t in atm.transitions if t in set(out)]
    extra = [t for t in out if t not in set(atm.transitions)]
    return ATM(
        exist=tuple(q for q in order if kind[q] == "E"),
        univ=tuple(q for q in order if kind[q] == "A"),
        accept=atm.accept,
        reject=atm.reject,
        initial=atm.initial,
        input_alphabet=atm.input_alphabet,
        tape_alphabet=atm.tape_alphabet,
        transitions=tuple(dict.fromkeys(original + extra)),
    )


def normalization_violations(atm: ATM, keys: Iterable[tuple[str, str]] | None = None) -> list[str]:
    """Static check of the three normal-form properties on (state, letter) pairs."""
    if keys is None:
        keys = [(q, c) for q in atm.states if q not in atm.halting for c in atm.tape_alphabet]
    problems = []
    for q, c in keys:
        ts = atm.by_key.get((q, c), ())
        if len(ts) != 2:
            problems.append(f"({q},{c}) has {len(ts)} transitions")
        for t in ts:
            if atm.kind(q) == "A" and (t.write != t.read or t.move != "S"):
                problems.append(f"universal transition {t} writes or moves")
            if atm.kind(t.new_state) == atm.kind(q):
                problems.append(f"transition {t} does not alternate")
    return problems


def is_normalized(atm: ATM) -> bool:
    return not normalization_violations(atm)


def reachable_configs(atm: ATM, start: Configuration, depth: int, space_bits: int | None = None):
    seen = {start}
    frontier = [start]
    for _ in range(depth):
        nxt = []
        for c in frontier:
            if c.state in atm.halting:
                continue
            for s in successors(atm, c):
                if space_bits is not None:
                    _check_space(s, space_bits)
                if s not in seen:
                    seen.add(s)
                    nxt.append(s)
        frontier = nxt
    return seen


def normalized_on_reachable(atm: ATM, start: Configuration, depth: int) -> list[str]:
    keys = {(c.state, head_letter(atm, c)) for c in reachable_configs(atm, start, depth) if c.state not in atm.halting}
    problems = normalization_violations(atm, sorted(keys))
    for c in reachable_configs(atm, start, depth):
        if c.state not in atm.halting and len(set(successors(atm, c))) != 2:
            problems.append(f"{c} does not have two distinct successors")
    return problems


# -- computation trees -------------------------------------------------------------


@dataclass(frozen=True)
class ComputationTree:
    config: Configuration
    via: Transition | None
    children: tuple["ComputationTree", ...] = ()

    def depth(self) -> int:
        return 1 + max((c.depth() for c in self.children), default=-1)

    def nodes(self):
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def size(self) -> int:
        return sum(1 for _ in self.nodes())


def _check_space(config: Configuration, space_bits: int) -> None:
    limit = 2**space_bits
    if len(config.tape()) > limit or config.head >= limit:
        raise SpaceBoundExceeded(f"configuration {config} needs more than {limit} cells")


def search_accepting_tree(
    atm: ATM,
    depth_bound: int,
    space_bits: int,
    word: Iterable[str] = (),
    require_leftmost_halt: bool = True,
) -> ComputationTree | None:
    """AND-OR search for an accepting computation tree of depth at most ``depth_bound``.

    With ``require_leftmost_halt`` an accepting leaf must have its head on
    cell 0, which is the shape the tree encoding relies on.
    """
    start = initial_config(atm, word)
    _check_space(start, space_bits)
    memo: dict[tuple[Configuration, int], ComputationTree | None] = {}

    def solve(config: Configuration, via: Transition | None, budget: int):
        key = (config, budget)
        if key in memo:
            found = memo[key]
            return None if found is None else ComputationTree(config, via, found.children)
        result = None
        if config.state == atm.accept:
            if not require_leftmost_halt or config.head == 0:
                result = ComputationTree(config, via)
        elif config.state != atm.reject and budget > 0:
            steps = successor_steps(atm, config)
            for _, s in steps:
                _check_space(s, space_bits)
            if atm.kind(config.state) == "E":
                for t, s in steps:
                    sub = solve(s, t, budget - 1)
                    if sub is not None:
                        result = ComputationTree(config, via, (sub,))
                        break
            elif steps:
                kids = []
                seen = set()
                for t, s in steps:
                    if s in seen:
                        continue
                    seen.add(s)
                    sub = solve(s, t, budget - 1)
                    if sub is None:
                        kids = None
                        break
                    kids.append(sub)
                if kids is not None:
                    result = ComputationTree(config, via, tuple(kids))
        memo[key] = result
        return result

    return solve(start, None, depth_bound)


def accepts_bounded(atm: ATM, depth_bound: int, space_bits: int, word: Iterable[str] = (), **kw) -> bool:
    return search_accepting_tree(atm, depth_bound, space_bits, word, **kw) is not None


def leftmost_halt_matters(atm: ATM, depth_bound: int, space_bits: int, word: Iterable[str] = ()) -> bool:
    """True when demanding head-on-cell-0 at acceptance changes the bounded verdict."""
    strict = accepts_bounded(atm, depth_bound, space_bits, word, require_leftmost_halt=True)
    loose = accepts_bounded(atm, depth_bound, space_bits, word, require_leftmost_halt=False)
    return strict != loose


def computation_tree_problems(atm: ATM, ct: ComputationTree, word: Iterable[str] = ()) -> list[str]:
    problems = []
    if ct.config != initial_config(atm, word):
        problems.append("root is not the initial configuration")
    for node in ct.nodes():
        c = node.config
        if c.state in atm.halting:
            if node.children:
                problems.append(f"halting configuration {c} has children")
            continue
        succ = {s: t for t, s in successor_steps(atm, c)}
        for kid in node.children:
            if kid.config not in succ:
                problems.append(f"{kid.config} is not a successor of {c}")
        if atm.kind(c.state) == "E" and len(node.children) > 1:
            problems.append(f"existential {c} has {len(node.children)} children")
        if atm.kind(c.state) == "A" and {k.config for k in node.children} != set(succ):
            problems.append(f"universal {c} does not have one child per successor")
    return problems
