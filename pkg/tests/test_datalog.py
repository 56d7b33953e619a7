import random

import pytest

from mdltree.compilers import compile_nta
from mdltree.datalog import (
    Atom,
    DatalogError,
    DatalogSyntaxError,
    Program,
    Query,
    Rule,
    check_valid,
    parse_program,
    render_program,
    validate,
)
from mdltree.trees import get_schema
from randgen import random_nta, random_query


def test_parse_one_rule():
    q = parse_program("P(x) :- label_a(x). query P.")
    assert q.query_predicate == "P" and len(q.rules) == 1
    assert q.rules[0] == Rule(Atom("P", ("x",)), (Atom("label_a", ("x",)),))


def test_parse_recursive_rule():
    q = parse_program("P(x) :- child(x,y), P(y). query P.")
    assert q.rules[0].body[1] == Atom("P", ("y",))
    assert q.program.idb == {"P"} and q.program.edb == {"child"}


def test_query_without_rules():
    q = parse_program("query P.")
    assert q.rules == () and render_program(q) == "query P.\n"


@pytest.mark.parametrize(
    "text",
    [
        "P(x) :- label_a(x).",
        "query P. query Q.",
        "P(x) :- label_a(). query P.",
        "P(x) :- . query P.",
        "P(x) label_a(x). query P.",
        "P(x) :- label_a(x) query P.",
    ],
)
def test_parse_errors(text):
    with pytest.raises(DatalogSyntaxError):
        parse_program(text)


def test_comments_ignored():
    q = parse_program("% header\nP(x) :- label_a(x). % tail\nquery P.\n")
    assert len(q.rules) == 1


def test_render_one_rule():
    q = parse_program("P(x):-label_a(x).query P.")
    assert render_program(q) == "P(x) :- label_a(x).\nquery P.\n"


def test_round_trip_random():
    rng = random.Random(5)
    for _ in range(100):
        q = random_query(rng)
        assert parse_program(render_program(q)) == q


def test_validate_extensional_head():
    q = Query(Program((Rule(Atom("child", ("x", "y")), (Atom("label_a", ("x",)), Atom("label_a", ("y",)))),)), "P")
    assert any("extensional head" in d for d in validate(q, get_schema("tau_u")))


def test_validate_outside_schema():
    q = parse_program("P(x) :- desc(x,y). query P.")
    diags = validate(q, get_schema("tau_u"))
    assert diags and "predicate outside schema" in diags[0]
    assert validate(q, get_schema("tau_u_desc")) == []


def test_validate_each_clause():
    schema = get_schema("tau_u_desc")
    cases = {
        "non-unary idb head": "P(x,y) :- child(x,y). query P.",
        "unsafe head variable": "P(x) :- label_a(y). query P.",
        "arity mismatch": "P(x) :- child(x). query P.",
        "must be unary": "P(x) :- label_a(x). Q(x) :- P(x,x). query Q.",
        "extensional": "P(x) :- label_a(x). query label_a.",
    }
    for needle, text in cases.items():
        diags = validate(parse_program(text), schema)
        assert any(needle in d for d in diags), (needle, diags)


def test_check_valid_raises():
    with pytest.raises(DatalogError):
        check_valid(parse_program("P(x) :- fc(x,y). query P."), get_schema("tau_u"))


def test_compiled_nta_validates():
    rng = random.Random(2)
    schema = get_schema("tau_gk_child")
    for _ in range(20):
        assert validate(compile_nta(random_nta(rng)), schema) == []


def test_partition_stable_under_reordering():
    rng = random.Random(8)
    for _ in range(30):
        q = random_query(rng)
        rules = list(q.rules)
        rng.shuffle(rules)
        p = Program(tuple(rules))
        assert p.idb == q.program.idb and p.edb == q.program.edb
