"""Reference machinery used as ground truth by the tests.

Nothing here is tuned for speed: saturation enumerates every valuation of
every axiom over the whole store, the congruence-closure reference works on
explicit term sets, and equivalence compares full truth tables.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .axioms import USEFUL, AxiomSet, apply_fast
from .collection import CapacityExceeded, Collection
from .term import LETTERS, Node, SplitMix64, Term, evaluate, letters, subterms, truth_table

EXHAUSTIVE_LIMIT = 16


@dataclass
class SaturationReport:
    classes: int
    structures: int
    reached_fixpoint: bool
    rounds: int = 0
    store: Optional[Collection] = None


def saturate(constants: Sequence[str], axioms: AxiomSet, limit: int = 200_000) -> SaturationReport:
    """Bottom-up saturation from the given constants.

    Each round snapshots the live ids and applies every axiom, unconditionally,
    to every tuple of them (all orders).  Stops after a round that changed
    nothing, or when the store reaches ``limit`` structures.
    """
    store = Collection(capacity=limit)
    for c in constants:
        store.intern((c,))
    by_arity = {k: [a for a in axioms if a.arity == k] for k in (1, 2, 3)}
    rounds = 0
    try:
        while True:
            rounds += 1
            changed = False
            ids = store.live_ids()
            for arity, group in by_arity.items():
                for axiom in group:
                    for val in product(ids, repeat=arity):
                        val = tuple(store.find(i) for i in val)
                        if apply_fast(store, axiom, val, bottom_up=True, guard=False) & USEFUL:
                            changed = True
            if not changed:
                break
    except CapacityExceeded:
        store.normalize()
        return SaturationReport(store.num_ids, len(store), False, rounds, store)
    return SaturationReport(store.num_ids, len(store), True, rounds, store)


def class_truth_tables(store: Collection, names: Sequence[str]) -> Dict[int, int]:
    """Truth table of a minimal representative of every class."""
    return {i: truth_table(store.extract_min(i), names) for i in store.live_ids()}


# ------------------------------------------------------------------ ground equations


def solve_ground(equations: Iterable[Tuple[Term, Term]], capacity: int = 500_000) -> Collection:
    """Store in which ``s`` and ``t`` get the same id for every equation ``s = t``.

    Further terms can be added with ``to_set``; two terms are provably equal
    iff their ids coincide.
    """
    store = Collection(capacity)
    for s, t in equations:
        store.unify(store.to_set(s), store.to_set(t))
    return store


def naive_congruence(
    equations: Sequence[Tuple[Term, Term]], queries: Sequence[Term] = ()
) -> Dict[Term, Term]:
    """Congruence closure over the explicit set of subterms.

    Returns a map from each subterm of the equations and queries to the
    representative of its class.  Quadratic per round, repeated to fixpoint.
    """
    universe: Dict[Term, None] = {}
    for s, t in equations:
        for n in subterms(s):
            universe[n] = None  # type: ignore[index]
        for n in subterms(t):
            universe[n] = None  # type: ignore[index]
    for q in queries:
        for n in subterms(q):
            universe[n] = None  # type: ignore[index]
    parent: Dict[Term, Term] = {t: t for t in universe}

    def root(t: Term) -> Term:
        while parent[t] != t:
            t = parent[t]
        return t

    def union(a: Term, b: Term) -> bool:
        ra, rb = root(a), root(b)
        if ra == rb:
            return False
        parent[rb] = ra
        return True

    for s, t in equations:
        union(s, t)
    terms = list(universe)
    changed = True
    while changed:
        changed = False
        for n, u in enumerate(terms):
            for v in terms[n + 1:]:
                if (
                    u.op == v.op
                    and len(u.args) == len(v.args)
                    and u.args
                    and all(root(a) == root(b) for a, b in zip(u.args, v.args))
                    and union(u, v)
                ):
                    changed = True
    return {t: root(t) for t in terms}


# ------------------------------------------------------------------ semantics


def equivalent(t1: Node, t2: Node) -> bool:
    """Exhaustive truth-table comparison over the letters of both terms."""
    names = sorted(set(letters(t1)) | set(letters(t2)))
    if len(names) > EXHAUSTIVE_LIMIT:
        raise ValueError(f"{len(names)} letters; use sampled_equivalent")
    return truth_table(t1, names) == truth_table(t2, names)


def sampled_equivalent(t1: Node, t2: Node, samples: int = 4096, seed: int = 0) -> bool:
    """Compare ``t1`` and ``t2`` on ``samples`` pseudo-random assignments."""
    names = sorted(set(letters(t1)) | set(letters(t2)))
    rng = SplitMix64(seed)
    for _ in range(samples):
        bits = rng.next()
        env = {name: (bits >> k) & 1 for k, name in enumerate(names)}
        if evaluate(t1, env) != evaluate(t2, env):
            return False
    return True


# ------------------------------------------------------------------ sizes


def bounded_sizes(store: Collection, depth: int) -> Dict[int, Optional[int]]:
    """Smallest term of each class among terms of height at most ``depth``.

    A class with no such term maps to None.  With ``depth`` at least the number
    of ids this equals the true minimal size.
    """
    best: Dict[int, Optional[int]] = {i: None for i in store.live_ids()}
    for _ in range(depth):
        nxt = dict(best)
        for key, i in store.structures():
            kids = [best[c] for c in key[1:]]
            if any(k is None for k in kids):
                continue
            s = 1 + sum(kids)  # type: ignore[arg-type]
            if nxt[i] is None or s < nxt[i]:  # type: ignore[operator]
                nxt[i] = s
        best = nxt
    return best


def alphabet(n_letters: int, truth_constants: bool = True) -> List[str]:
    """Constants of a saturation run: 0, 1 and the first ``n_letters`` letters."""
    return (["0", "1"] if truth_constants else []) + list(LETTERS[:n_letters])
