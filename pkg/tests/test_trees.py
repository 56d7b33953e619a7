import random

import pytest

from mdltree.trees import (
    Alphabet,
    LabeledTree,
    RankedAlphabet,
    TreeError,
    TreeSyntaxError,
    canonical_text,
    canonicalize,
    check_ranked,
    extract_facts,
    get_schema,
    parse_tree,
    random_tree,
    render_tree,
    shuffle_siblings,
    trees_equal_unordered,
)


def test_parse_single_node():
    t = parse_tree("a")
    assert t.size == 1 and t.label(1) == "a" and t.kids(1) == ()


def test_parse_nested_preorder():
    t = parse_tree("a(b,c(d))")
    assert t.size == 4
    assert [t.label(v) for v in t.kids(1)] == ["b", "c"]
    assert t.labels == ("a", "b", "c", "d")


def test_parse_whitespace_and_comments():
    assert render_tree(parse_tree("a ( b , % note\n c )")) == "a(b,c)"


@pytest.mark.parametrize("text", ["a(b,", "a()", "a(b))", "(a)", "", "a b"])
def test_parse_errors(text):
    with pytest.raises(TreeSyntaxError):
        parse_tree(text)


def test_syntax_error_position():
    with pytest.raises(TreeSyntaxError) as e:
        parse_tree("a(\n  b,)")
    assert e.value.line == 2


def test_unknown_symbol_with_alphabet():
    with pytest.raises(TreeError):
        parse_tree("a(z)", Alphabet(("a", "b")))


def test_render_examples():
    assert render_tree(parse_tree("a")) == "a"
    assert render_tree(LabeledTree.build(("a", ["b", "c"]))) == "a(b,c)"


def test_round_trip_random():
    rng = random.Random(7)
    for _ in range(100):
        t = random_tree(rng, "abc", 12)
        assert parse_tree(render_tree(t)) == t


def test_deep_tree_round_trip():
    text = "a(" * 3000 + "b" + ")" * 3000
    t = parse_tree(text)
    assert t.size == 3001 and render_tree(t) == text


def test_alphabet_invariants():
    with pytest.raises(TreeError):
        Alphabet(("a", "a"))
    with pytest.raises(TreeError):
        Alphabet(())
    with pytest.raises(TreeError):
        Alphabet(("1a",))
    with pytest.raises(TreeError):
        RankedAlphabet.of({"a": 1})


def test_facts_child_desc():
    facts = extract_facts(parse_tree("a(b)"), get_schema("tau_u_desc"), "unordered")
    assert facts == {("label_a", (1,)), ("label_b", (2,)), ("child", (1, 2)), ("desc", (1, 2))}


def test_facts_single_node_gk():
    facts = extract_facts(parse_tree("a"), get_schema("tau_gk"))
    assert facts == {("label_a", (1,)), ("root", (1,)), ("leaf", (1,)), ("ls", (1,))}


def test_facts_ordered_siblings():
    facts = extract_facts(parse_tree("a(b,c)"), get_schema("tau_o"))
    assert ("fc", (1, 2)) in facts and ("ns", (2, 3)) in facts
    assert not any(p == "ns" and a[0] == 3 for p, a in facts)


def test_facts_mode_mismatch():
    with pytest.raises(TreeError):
        extract_facts(parse_tree("a"), get_schema("tau_gk"), "unordered")


def _closure(pairs):
    rel = set(pairs)
    while True:
        extra = {(a, d) for a, b in rel for c, d in rel if b == c} - rel
        if not extra:
            return rel
        rel |= extra


def test_fact_properties_random():
    rng = random.Random(3)
    schema = get_schema("tau_gk_child_desc")
    for _ in range(60):
        t = random_tree(rng, "ab", 9)
        facts = extract_facts(t, schema)
        child = {a for p, a in facts if p == "child"}
        desc = {a for p, a in facts if p == "desc"}
        assert len(child) == t.size - 1
        assert desc == _closure(child)
        fc = {a for p, a in facts if p == "fc"}
        ns = {a for p, a in facts if p == "ns"}
        ls = {a[0] for p, a in facts if p == "ls"}
        for v in t.nodes:
            kids = t.kids(v)
            if not kids:
                continue
            chain = [next(c for (u, c) in fc if u == v)]
            while True:
                nxt = [b for (a, b) in ns if a == chain[-1]]
                if not nxt:
                    break
                chain += nxt
            assert chain == list(kids) and chain[-1] in ls


def test_check_ranked():
    ranked = RankedAlphabet.of({"p": 1, "bot": 0})
    assert check_ranked(parse_tree("bot"), ranked)
    assert check_ranked(parse_tree("p(bot)"), ranked)
    assert not check_ranked(parse_tree("p(bot,bot)"), ranked)
    with pytest.raises(TreeError):
        check_ranked(parse_tree("q"), ranked)


def test_unordered_equality():
    assert trees_equal_unordered(parse_tree("a(b,c)"), parse_tree("a(c,b)"))
    assert not trees_equal_unordered(parse_tree("a(b,c)"), parse_tree("a(b,b)"))


def test_canonical_idempotent_and_shuffle_invariant():
    rng = random.Random(11)
    for _ in range(100):
        t = random_tree(rng, "abc", 10)
        c = canonicalize(t)
        assert canonicalize(c) == c
        s = shuffle_siblings(t, rng)
        assert trees_equal_unordered(t, s)
        assert canonical_text(s) == canonical_text(t)
