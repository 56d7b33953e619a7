"""Ground truth by exhaustion over small trees."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from itertools import islice
from typing import Iterator, Optional

from .compilers import CQ
from .datalog import Query, check_valid
from .engine import fixpoint
from .trees import (
    LABEL_PREFIX,
    Alphabet,
    LabeledTree,
    RankedAlphabet,
    Schema,
    check_ranked,
    extract_facts,
    parse_tree,
    render_tree,
)

HOLDS = "holds-up-to-bound"
COUNTEREXAMPLE = "counterexample"


# -- enumeration --------------------------------------------------------------


@lru_cache(maxsize=None)
def _ordered_texts(symbols: tuple[str, ...], n: int) -> tuple[str, ...]:
    out = []
    for lab in symbols:
        for forest in _ordered_forests(symbols, n - 1):
            out.append(lab + ("(" + ",".join(forest) + ")" if forest else ""))
    return tuple(out)


@lru_cache(maxsize=None)
def _ordered_forests(symbols: tuple[str, ...], n: int) -> tuple[tuple[str, ...], ...]:
    if n == 0:
        return ((),)
    out = []
    for first in range(1, n + 1):
        for head in _ordered_texts(symbols, first):
            for rest in _ordered_forests(symbols, n - first):
                out.append((head,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def _unordered_texts(symbols: tuple[str, ...], n: int) -> tuple[str, ...]:
    """Canonical texts of all unordered trees with exactly ``n`` nodes."""
    out = []
    for lab in symbols:
        for forest in _multisets(symbols, n - 1, None):
            kids = sorted(forest)
            out.append(lab + ("(" + ",".join(kids) + ")" if kids else ""))
    return tuple(out)


def _multisets(symbols, n: int, bound):
    """Multisets of canonical subtrees with total size ``n``.

    Members are produced in non-increasing (size, text) order, and ``bound`` caps
    the first member, so each multiset appears once.
    """
    if n == 0:
        yield ()
        return
    top = n if bound is None else min(n, bound[0])
    for size in range(top, 0, -1):
        for text in _unordered_texts(symbols, size):
            if bound is not None and (size, text) > bound:
                continue
            for rest in _multisets(symbols, n - size, (size, text)):
                yield (text,) + rest


def enumerate_trees(
    alphabet: Alphabet,
    max_nodes: int,
    mode: str = "ordered",
    ranked: Optional[RankedAlphabet] = None,
) -> Iterator[LabeledTree]:
    """Every tree up to ``max_nodes`` nodes, by size and then by text.

    In unordered mode each isomorphism class appears once, as its canonical form.
    """
    if max_nodes < 1:
        raise ValueError("max_nodes must be at least 1")
    if mode not in ("ordered", "unordered"):
        raise ValueError(f"mode must be 'ordered' or 'unordered', not {mode!r}")
    symbols = tuple(sorted(alphabet))
    gen = _ordered_texts if mode == "ordered" else _unordered_texts
    for n in range(1, max_nodes + 1):
        for text in sorted(gen(symbols, n)):
            tree = parse_tree(text)
            if ranked is not None and not check_ranked(tree, ranked):
                continue
            yield tree


def count_trees(alphabet: Alphabet, n: int, mode: str = "ordered") -> int:
    symbols = tuple(sorted(alphabet))
    gen = _ordered_texts if mode == "ordered" else _unordered_texts
    return len(gen(symbols, n))


# -- bounded decision procedures ------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    status: str
    witness: Optional[LabeledTree]
    bound: int
    checked: int = 0

    @property
    def holds(self) -> bool:
        return self.status == HOLDS

    def __str__(self) -> str:
        if self.witness is not None:
            return render_tree(self.witness)
        return f"{self.status} (bound {self.bound}, {self.checked} trees)"


def _truth(query: Query, tree: LabeledTree, schema: Schema, mode: str) -> bool:
    facts = extract_facts(tree, schema, mode)
    return (query.query_predicate, (tree.root,)) in fixpoint(query.program, facts)


def _containment_fails(args) -> bool:
    q1, q2, text, schema, mode = args
    tree = parse_tree(text)
    return _truth(q1, tree, schema, mode) and not _truth(q2, tree, schema, mode)


def _nonempty(args) -> bool:
    q, text, schema, mode = args
    return _truth(q, parse_tree(text), schema, mode)


def _first_hit(fn, jobs, trees, workers: int):
    """Index of the first job for which ``fn`` holds, scanning in enumeration order."""
    if workers <= 1:
        for i, job in enumerate(jobs):
            if fn(job):
                return i
        return None
    batch = 64 * workers
    base = 0
    with ProcessPoolExecutor(max_workers=workers) as pool:
        it = iter(jobs)
        while True:
            chunk = list(islice(it, batch))
            if not chunk:
                return None
            for i, hit in enumerate(pool.map(fn, chunk)):
                if hit:
                    return base + i
            base += len(chunk)


def check_containment_bounded(
    q1: Query,
    q2: Query,
    alphabet: Alphabet,
    schema: Schema,
    mode: str,
    max_nodes: int,
    ranked: Optional[RankedAlphabet] = None,
    workers: int = 1,
) -> Verdict:
    check_valid(q1, schema)
    check_valid(q2, schema)
    trees = list(enumerate_trees(alphabet, max_nodes, mode, ranked))
    jobs = ((q1, q2, render_tree(t), schema, mode) for t in trees)
    hit = _first_hit(_containment_fails, jobs, trees, workers)
    if hit is None:
        return Verdict(HOLDS, None, max_nodes, len(trees))
    return Verdict(COUNTEREXAMPLE, trees[hit], max_nodes, hit + 1)


def check_emptiness_bounded(
    q: Query,
    alphabet: Alphabet,
    schema: Schema,
    mode: str,
    max_nodes: int,
    ranked: Optional[RankedAlphabet] = None,
    workers: int = 1,
) -> Verdict:
    check_valid(q, schema)
    trees = list(enumerate_trees(alphabet, max_nodes, mode, ranked))
    jobs = ((q, render_tree(t), schema, mode) for t in trees)
    hit = _first_hit(_nonempty, jobs, trees, workers)
    if hit is None:
        return Verdict(HOLDS, None, max_nodes, len(trees))
    return Verdict(COUNTEREXAMPLE, trees[hit], max_nodes, hit + 1)


def replay_containment(v: Verdict, q1: Query, q2: Query, schema: Schema, mode: str) -> bool:
    """Does the witness still show ``q1`` true and ``q2`` false?"""
    if v.witness is None:
        return False
    return _truth(q1, v.witness, schema, mode) and not _truth(q2, v.witness, schema, mode)


# -- conjunctive queries by homomorphism search -----------------------------------------


def eval_cq(cq: CQ, tree: LabeledTree) -> bool:
    parent = tree.parents()

    def is_desc(a: int, b: int) -> bool:
        while b in parent:
            b = parent[b]
            if b == a:
                return True
        return False

    def holds(atom, env) -> bool:
        vals = [env[v] for v in atom.args]
        if atom.pred == "child":
            return parent.get(vals[1]) == vals[0]
        if atom.pred == "desc":
            return is_desc(vals[0], vals[1])
        return tree.label(vals[0]) == atom.pred[len(LABEL_PREFIX) :]

    variables = cq.variables
    env: dict[str, int] = {}

    def search(i: int) -> bool:
        if i == len(variables):
            return True
        var = variables[i]
        for v in tree.nodes:
            env[var] = v
            if all(holds(a, env) for a in cq.atoms if all(x in env for x in a.args) and var in a.args):
                if search(i + 1):
                    return True
        del env[var]
        return False

    return search(0)
