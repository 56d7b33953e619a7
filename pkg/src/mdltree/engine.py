"""Bottom-up evaluation of monadic datalog via the immediate consequence operator."""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable

from .datalog import Atom, Program, Query, Rule, check_valid
from .trees import LabeledTree, Schema, extract_facts


class EngineError(RuntimeError):
    pass


class _Relations:
    """Indexed storage for unary and binary ground facts."""

    def __init__(self):
        self.unary: dict[str, set] = defaultdict(set)
        self.pairs: dict[str, set] = defaultdict(set)
        self.fwd: dict[str, dict] = defaultdict(lambda: defaultdict(set))
        self.bwd: dict[str, dict] = defaultdict(lambda: defaultdict(set))

    @classmethod
    def of(cls, facts: Iterable) -> "_Relations":
        rel = cls()
        for pred, args in facts:
            rel.add(pred, args)
        return rel

    def add(self, pred: str, args: tuple) -> bool:
        if len(args) == 1:
            s = self.unary[pred]
            if args[0] in s:
                return False
            s.add(args[0])
            return True
        if len(args) == 2:
            s = self.pairs[pred]
            if args in s:
                return False
            s.add(args)
            self.fwd[pred][args[0]].add(args[1])
            self.bwd[pred][args[1]].add(args[0])
            return True
        raise EngineError(f"facts must be unary or binary, got {pred}{args}")

    def size(self, pred: str, arity: int) -> int:
        return len(self.unary.get(pred, ())) if arity == 1 else len(self.pairs.get(pred, ()))

    def fanout(self, pred: str, by_second: bool) -> float:
        index = self.bwd.get(pred) if by_second else self.fwd.get(pred)
        if not index:
            return 0.0
        return len(self.pairs[pred]) / len(index)

    def facts(self) -> frozenset:
        out = {(p, (v,)) for p, s in self.unary.items() for v in s}
        out.update((p, a) for p, s in self.pairs.items() for a in s)
        return frozenset(out)


def _plan(body: tuple[Atom, ...], first: int | None, rel: _Relations, delta: _Relations | None):
    """Greedy join order: bound-variable filters first, then the cheapest extension."""
    remaining = list(range(len(body)))
    order: list[int] = []
    bound: set[str] = set()

    def cost(i: int) -> float:
        a = body[i]
        src = delta if (i == first and delta is not None) else rel
        free = [v for v in a.args if v not in bound]
        if not free:
            return -1.0
        if len(a.args) == 1:
            return float(src.size(a.pred, 1))
        x, y = a.args
        if x == y:
            return float(src.size(a.pred, 2))
        if x in bound:
            return src.fanout(a.pred, by_second=False)
        if y in bound:
            return src.fanout(a.pred, by_second=True)
        return float(src.size(a.pred, 2)) * 2

    if first is not None:
        order.append(first)
        remaining.remove(first)
        bound.update(body[first].args)
    while remaining:
        best = min(remaining, key=cost)
        order.append(best)
        remaining.remove(best)
        bound.update(body[best].args)
    return order


def _matches(rule: Rule, rel: _Relations, first: int | None = None, delta: _Relations | None = None):
    """Yield every head node derivable from ``rule`` over ``rel``.

    When ``first`` is given, the body atom at that position ranges over
    ``delta`` instead of ``rel`` (the semi-naive restriction).
    """
    body = rule.body
    for i, a in enumerate(body):
        src = delta if (i == first and delta is not None) else rel
        if not src.size(a.pred, len(a.args)):
            return iter(())
    order = _plan(body, first, rel, delta)
    env: dict[str, int] = {}
    head_var = rule.head.args[0]
    steps = []
    for i in order:
        a = body[i]
        src = delta if (i == first and delta is not None) else rel
        steps.append((a.pred, a.args, src))
    n = len(steps)

    def go(k: int):
        if k == n:
            yield env[head_var]
            return
        pred, args, src = steps[k]
        if len(args) == 1:
            v = args[0]
            s = src.unary.get(pred)
            if not s:
                return
            if v in env:
                if env[v] in s:
                    yield from go(k + 1)
                return
            for node in list(s):
                env[v] = node
                yield from go(k + 1)
            del env[v]
            return
        x, y = args
        pairs = src.pairs.get(pred)
        if not pairs:
            return
        if x in env and y in env:
            if (env[x], env[y]) in pairs:
                yield from go(k + 1)
            return
        if x in env:
            targets = src.fwd[pred].get(env[x])
            if targets:
                for node in list(targets):
                    env[y] = node
                    yield from go(k + 1)
                del env[y]
            return
        if y in env:
            sources = src.bwd[pred].get(env[y])
            if sources:
                for node in list(sources):
                    env[x] = node
                    yield from go(k + 1)
                del env[x]
            return
        for a, b in list(pairs):
            if x == y and a != b:
                continue
            env[x] = a
            env[y] = b
            yield from go(k + 1)
        env.pop(x, None)
        env.pop(y, None)

    return go(0)


def _check_arities(program: Program, facts: Iterable) -> None:
    arities = program.arities()
    for pred, ars in arities.items():
        if len(ars) > 1:
            raise EngineError(f"predicate {pred} used with arities {sorted(ars)}")
    seen: dict[str, int] = {}
    for pred, args in facts:
        if seen.setdefault(pred, len(args)) != len(args):
            raise EngineError(f"facts use {pred} with several arities")
        want = arities.get(pred)
        if want is not None and len(args) not in want:
            raise EngineError(f"arity mismatch between facts and program for {pred}")


def apply_tp(program: Program, facts: frozenset) -> frozenset:
    """One application of the immediate consequence operator (inflationary)."""
    _check_arities(program, facts)
    rel = _Relations.of(facts)
    new = set(facts)
    for r in program.rules:
        for v in _matches(r, rel):
            new.add((r.head.pred, (v,)))
    return frozenset(new)


def iteration_cap(program: Program, facts: Iterable) -> int:
    nodes = {v for _, args in facts for v in args}
    return len(program.idb) * max(len(nodes), 1) + 1


def fixpoint_with_stats(program: Program, facts: frozenset, strategy: str = "semi-naive"):
    """Least fixpoint plus the number of operator applications it took."""
    _check_arities(program, facts)
    cap = iteration_cap(program, facts)
    if strategy == "naive":
        current = frozenset(facts)
        rounds = 0
        while True:
            rounds += 1
            if rounds > cap:
                raise EngineError(f"fixpoint did not stabilise within {cap} iterations")
            nxt = apply_tp(program, current)
            if nxt == current:
                return current, rounds
            current = nxt
    if strategy != "semi-naive":
        raise ValueError(f"unknown strategy {strategy!r}")

    rel = _Relations.of(facts)
    idb = program.idb
    # rules whose bodies mention idb predicates, keyed by the positions to restrict
    recursive = [(r, [i for i, a in enumerate(r.body) if a.pred in idb]) for r in program.rules]

    delta = _Relations()
    for r in program.rules:
        for v in _matches(r, rel):
            if v not in rel.unary.get(r.head.pred, ()):
                delta.add(r.head.pred, (v,))
    rounds = 1
    while any(delta.unary.values()):
        for pred, nodes in delta.unary.items():
            for v in nodes:
                rel.add(pred, (v,))
        rounds += 1
        if rounds > cap:
            raise EngineError(f"fixpoint did not stabilise within {cap} iterations")
        fresh = _Relations()
        for r, positions in recursive:
            head = r.head.pred
            known = rel.unary.get(head, ())
            for i in positions:
                if not delta.unary.get(r.body[i].pred):
                    continue
                for v in _matches(r, rel, first=i, delta=delta):
                    if v not in known:
                        fresh.add(head, (v,))
        delta = fresh
    return rel.facts(), rounds


def fixpoint(program: Program, facts: frozenset, strategy: str = "semi-naive") -> frozenset:
    return fixpoint_with_stats(program, facts, strategy)[0]


def eval_unary(
    query: Query,
    tree: LabeledTree,
    schema: Schema,
    mode: str = "ordered",
    strategy: str = "semi-naive",
) -> set[int]:
    check_valid(query, schema)
    facts = extract_facts(tree, schema, mode)
    result = fixpoint(query.program, facts, strategy)
    return {args[0] for pred, args in result if pred == query.query_predicate}


def eval_boolean(
    query: Query,
    tree: LabeledTree,
    schema: Schema,
    mode: str = "ordered",
    strategy: str = "semi-naive",
) -> bool:
    return tree.root in eval_unary(query, tree, schema, mode, strategy)
