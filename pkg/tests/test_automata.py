import itertools
import random

import pytest

from mdltree.automata import (
    NFA,
    NTA,
    AutomatonError,
    nfa_accepts,
    nta_accepts,
    nta_size,
    nta_state_sets,
    parse_nta,
    render_nta,
)
from mdltree.oracles import enumerate_trees
from mdltree.trees import Alphabet, parse_tree
from randgen import random_nfa, random_nta

MINIMAL = """\
alphabet a
states s0
accepting s0
rule s0 a L
nfa L
  states q0
  initial q0
  accepting q0
  trans q0 s0 q0
end
"""


def test_parse_minimal():
    nta = parse_nta(MINIMAL)
    assert nta.states == ("s0",) and nta.rules == (("s0", "a", "L"),)
    assert nta.nfas["L"].transitions == (("q0", "s0", "q0"),)


@pytest.mark.parametrize(
    "text",
    [
        MINIMAL.replace("rule s0 a L", "rule s0 a M"),
        MINIMAL.replace("trans q0 s0 q0", "trans q0 s9 q0"),
        MINIMAL.replace("rule s0 a L", "rule s0 z L"),
        MINIMAL.replace("states q0", "states s0"),
        MINIMAL.replace("end\n", ""),
        MINIMAL + "bogus line\n",
    ],
)
def test_parse_errors(text):
    with pytest.raises(AutomatonError):
        parse_nta(text)


def test_round_trip():
    rng = random.Random(1)
    assert parse_nta(render_nta(parse_nta(MINIMAL))) == parse_nta(MINIMAL)
    for _ in range(30):
        nta = random_nta(rng)
        assert parse_nta(render_nta(nta)) == nta


def test_epsilon():
    acc = NFA("L", ("q0",), "q0", frozenset({"q0"}), ())
    rej = NFA("L", ("q0",), "q0", frozenset(), ())
    assert nfa_accepts(acc, [])
    assert not nfa_accepts(rej, [])


def test_unknown_symbol():
    acc = NFA("L", ("q0",), "q0", frozenset({"q0"}), ())
    with pytest.raises(AutomatonError):
        nfa_accepts(acc, ["zz"], symbols=["s0"])


def _dfa_accepts(nfa, word):
    """Explicit subset construction, built up front, then a deterministic run."""
    start = frozenset({nfa.initial})
    symbols = sorted({s for _, s, _ in nfa.transitions})
    table, todo = {}, [start]
    while todo:
        cur = todo.pop()
        if cur in table:
            continue
        table[cur] = {}
        for s in symbols:
            nxt = frozenset(q2 for q, a, q2 in nfa.transitions if q in cur and a == s)
            table[cur][s] = nxt
            todo.append(nxt)
    state = start
    for c in word:
        state = table.get(state, {}).get(c, frozenset())
    return bool(state & nfa.accepting)


def test_nfa_matches_subset_construction():
    rng = random.Random(9)
    inputs = ("s0", "s1")
    for i in range(40):
        nfa = random_nfa(rng, f"L{i}", inputs)
        for n in range(5):
            for word in itertools.product(inputs, repeat=n):
                assert nfa_accepts(nfa, word) == _dfa_accepts(nfa, word)


def test_leaf_state_sets():
    nta = parse_nta(MINIMAL)
    assert nta_state_sets(nta, parse_tree("a")) == {1: frozenset({"s0"})}
    nta2 = parse_nta(MINIMAL.replace("alphabet a", "alphabet a b"))
    assert nta_state_sets(nta2, parse_tree("b"))[1] == frozenset()


def test_unknown_label():
    with pytest.raises(AutomatonError):
        nta_state_sets(parse_nta(MINIMAL), parse_tree("z"))


def _brute_sets(nta, tree):
    """Per node, every state some run of its subtree assigns there, by trying all mappings."""
    out = {}
    for v in tree.nodes:
        sub = tree.subtree(v)
        found = set()
        for rho in itertools.product(nta.states, repeat=sub.size):
            ok = all(
                any(
                    s == rho[u - 1] and a == sub.label(u) and nfa_accepts(nta.nfas[lang], [rho[c - 1] for c in sub.kids(u)])
                    for s, a, lang in nta.rules
                )
                for u in sub.nodes
            )
            if ok:
                found.add(rho[0])
        out[v] = frozenset(found)
    return out


def test_state_sets_match_brute_force():
    rng = random.Random(17)
    for _ in range(25):
        nta = random_nta(rng)
        for tree in enumerate_trees(Alphabet(nta.alphabet), 4):
            assert nta_state_sets(nta, tree) == _brute_sets(nta, tree)


def test_no_accepting_states():
    nta = NTA(("a",), ("s0",), frozenset(), (("s0", "a", "L"),), parse_nta(MINIMAL).nfas)
    assert not any(nta_accepts(nta, t) for t in enumerate_trees(Alphabet(("a",)), 5))


def test_universal_automaton():
    nta = parse_nta(MINIMAL.replace("alphabet a", "alphabet a b") + "rule s0 b L\n")
    assert all(nta_accepts(nta, t) for t in enumerate_trees(Alphabet(("a", "b")), 5))


def test_locality_under_grafting():
    rng = random.Random(23)
    for _ in range(20):
        nta = random_nta(rng)
        trees = list(enumerate_trees(Alphabet(nta.alphabet), 3))
        sub = rng.choice(trees)
        host = rng.choice(trees)
        grafted = parse_tree(f"{host.label(1)}({str(sub)})")
        assert nta_state_sets(nta, grafted)[2] == nta_state_sets(nta, sub)[1]


def test_size():
    nta = parse_nta(MINIMAL.replace("  trans q0 s0 q0\n", ""))
    assert nta_size(nta) == 4
    assert nta_size(parse_nta(MINIMAL)) == 5
