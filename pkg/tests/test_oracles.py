import random

import pytest

from mdltree.compilers import parse_cq, translate_cq
from mdltree.datalog import parse_program
from mdltree.engine import eval_boolean
from mdltree.oracles import (
    COUNTEREXAMPLE,
    HOLDS,
    check_containment_bounded,
    check_emptiness_bounded,
    count_trees,
    enumerate_trees,
    eval_cq,
    replay_containment,
)
from mdltree.trees import Alphabet, RankedAlphabet, canonical_text, get_schema, parse_tree, render_tree
from randgen import random_query

U = get_schema("tau_u_desc")
AB = Alphabet(("a", "b"))
ONE = Alphabet(("a",))


def prog(text):
    return parse_program(text + " query P.")


# (q1, q2, least tree where q1 holds at the root and q2 does not)
NON_CONTAINMENTS = [
    (prog("P(x) :- label_a(x)."), prog("P(x) :- label_b(x)."), "a"),
    (prog("P(x) :- label_b(x)."), prog("P(x) :- label_a(x)."), "b"),
    (prog("P(x) :- child(x,y)."), prog("P(x) :- label_b(x)."), "a(a)"),
    (prog("P(x) :- label_a(x)."), prog("P(x) :- child(x,y)."), "a"),
    (translate_cq(parse_cq("ans :- label_b(x).")), prog("P(x) :- label_b(x)."), "a(b)"),
    (prog("P(x) :- child(x,y), child(y,z)."), prog("P(x) :- label_a(x)."), "b(a(a))"),
    (prog("P(x) :- child(x,y), label_a(y), child(x,z), label_b(z)."), prog("P(x) :- label_b(x)."), "a(a,b)"),
    (prog("P(x) :- label_b(x). P(x) :- child(x,y), P(y)."), prog("P(x) :- child(x,y), label_b(y)."), "b"),
    (prog("P(x) :- desc(x,y), label_b(y)."), prog("P(x) :- child(x,y), label_b(y)."), "a(a(b))"),
    (prog("P(x) :- child(x,y)."), prog("P(x) :- child(x,y), child(y,z)."), "a(a)"),
]


@pytest.mark.parametrize("mode,counts", [("ordered", [1, 1, 2, 5, 14]), ("unordered", [1, 1, 2, 4, 9])])
def test_counts(mode, counts):
    assert [count_trees(ONE, n, mode) for n in range(1, 6)] == counts
    assert len(list(enumerate_trees(ONE, 5, mode))) == sum(counts)


def test_two_symbol_counts():
    assert [count_trees(AB, n) for n in range(1, 4)] == [2, 4, 16]


def test_order_and_uniqueness():
    trees = [render_tree(t) for t in enumerate_trees(AB, 4)]
    assert trees[:6] == ["a", "b", "a(a)", "a(b)", "b(a)", "b(b)"]
    assert len(set(trees)) == len(trees)
    sizes = [parse_tree(t).size for t in trees]
    assert sizes == sorted(sizes)


def test_unordered_are_canonical():
    trees = list(enumerate_trees(AB, 4, "unordered"))
    forms = [canonical_text(t) for t in trees]
    assert len(set(forms)) == len(forms)
    ordered_forms = {canonical_text(t) for t in enumerate_trees(AB, 4)}
    assert set(forms) == ordered_forms


def test_ranked_filter():
    ranked = RankedAlphabet.of({"f": 2, "c": 0})
    got = [render_tree(t) for t in enumerate_trees(Alphabet(("c", "f")), 5, ranked=ranked)]
    assert got == ["c", "f(c,c)", "f(c,f(c,c))", "f(f(c,c),c)"]


def test_bad_arguments():
    with pytest.raises(ValueError):
        list(enumerate_trees(ONE, 0))
    with pytest.raises(ValueError):
        list(enumerate_trees(ONE, 2, "sideways"))


def test_reflexive_on_random_queries():
    rng = random.Random(10)
    for _ in range(50):
        q = random_query(rng)
        v = check_containment_bounded(q, q, AB, U, "ordered", 4)
        assert v.holds and v.witness is None and v.checked == 2 + 4 + 16 + 80


@pytest.mark.parametrize("q1,q2,witness", NON_CONTAINMENTS, ids=[w for _, _, w in NON_CONTAINMENTS])
def test_least_witness(q1, q2, witness):
    v = check_containment_bounded(q1, q2, AB, U, "ordered", 4)
    assert v.status == COUNTEREXAMPLE
    assert render_tree(v.witness) == witness
    assert replay_containment(v, q1, q2, U, "ordered")
    earlier = list(enumerate_trees(AB, 4))[: v.checked - 1]
    assert not any(eval_boolean(q1, t, U) and not eval_boolean(q2, t, U) for t in earlier)


def test_workers_agree():
    q1, q2, witness = NON_CONTAINMENTS[8]
    v = check_containment_bounded(q1, q2, AB, U, "ordered", 4, workers=2)
    assert render_tree(v.witness) == witness


def test_emptiness():
    v = check_emptiness_bounded(prog("P(x) :- child(x,y), label_b(y)."), AB, U, "ordered", 3)
    assert v.status == COUNTEREXAMPLE and render_tree(v.witness) == "a(b)"
    v = check_emptiness_bounded(prog("P(x) :- child(x,x)."), AB, U, "ordered", 3)
    assert v.status == HOLDS and v.checked == 22


def test_cq_oracle_examples():
    t = parse_tree("a(b(a),c)")
    assert eval_cq(parse_cq("ans :- child(x,y), label_b(y), child(y,z), label_a(z)."), t)
    assert eval_cq(parse_cq("ans :- desc(x,y), label_a(x), label_a(y)."), t)
    assert not eval_cq(parse_cq("ans :- child(x,y), label_c(x)."), t)
    assert not eval_cq(parse_cq("ans :- desc(x,x)."), t)
    assert eval_cq(parse_cq("ans :- child(x,y), child(x,z)."), parse_tree("a(b)"))
