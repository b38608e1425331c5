"""Valuation generation.

A valuation is a tuple of ids bound positionally to the variables x, y, z.
Types 0 to 2 only look at structures that pass a filter: nothing younger than
the current sub-iteration horizon and, with the size guard, no child larger
than the structure's own class.  "Younger" is judged on the identifiers of
the structure (rule "ids") or on the structure's own creation tick (rule
"birth").  Rule "top" applies the birth test to the processed id's own
structures only and admits everything below; rule "split", the simplifier's
default, applies the birth test to the processed id's own structures and the
"ids" test one level down.
"""
from __future__ import annotations

from itertools import permutations, product
from typing import Dict, Iterator, List, Optional, Tuple

from .collection import Collection, Key

Valuation = Tuple[int, ...]

VARIABLES = ("x", "y", "z")


def bindings(v: Valuation) -> Dict[str, int]:
    return dict(zip(VARIABLES, v))


RULES = ("ids", "birth", "top", "split")


class StructureFilter:
    """Admissibility of structures for valuation generation."""

    def __init__(
        self, horizon: Optional[int] = None, size_guard: bool = True, rule: str = "ids"
    ) -> None:
        if rule not in RULES:
            raise ValueError(f"rule must be one of {RULES}")
        self.horizon = horizon
        self.size_guard = size_guard
        self.rule = rule
        self.by_birth = rule != "ids"

    def below(self) -> "StructureFilter":
        """Filter for the structures one level under the processed id."""
        if self.rule == "top":
            return StructureFilter(None, self.size_guard)
        if self.rule == "split":
            return StructureFilter(self.horizon, self.size_guard, "ids")
        return self

    def admissible(self, store: Collection, key: Key, i: int) -> bool:
        h = self.horizon
        if h is not None:
            if self.by_birth:
                if store.born[key] > h:
                    return False
            elif i > h or any(c > h for c in key[1:]):
                return False
        if self.size_guard:
            limit = store.size[i]
            size = store.size
            for c in key[1:]:
                if size[c] > limit:
                    return False
        return True


NO_FILTER = StructureFilter(None, size_guard=False)


def _children(store: Collection, i: int, flt: StructureFilter) -> List[Tuple[int, int]]:
    """(j1, j2) of admissible compound structures of ``i``; unary gives (j, j)."""
    out = []
    horizon = flt.horizon
    by_birth = flt.by_birth
    if horizon is not None and not by_birth and i > horizon:
        return out
    born = store.born
    size = store.size
    limit = size[i]
    guard = flt.size_guard
    for key in store.same_id[i]:
        n = len(key)
        if n == 1:
            continue
        if horizon is not None and by_birth and born[key] > horizon:
            continue
        if n == 3:
            j1, j2 = key[1], key[2]
            if horizon is not None and not by_birth and (j1 > horizon or j2 > horizon):
                continue
            if guard and (size[j1] > limit or size[j2] > limit):
                continue
            out.append((j1, j2))
        else:
            j = key[1]
            if horizon is not None and not by_birth and j > horizon:
                continue
            if guard and size[j] > limit:
                continue
            out.append((j, j))
    return out


def gen_type0(store: Collection, i: int, flt: StructureFilter = NO_FILTER) -> List[Valuation]:
    """{x->i}; a pair per structure of ``i``; triples one level further down."""
    out: Dict[Valuation, None] = {(i,): None}
    pairs = _children(store, i, flt)
    for pair in pairs:
        out[pair] = None
    low = flt.below()
    below: Dict[int, List[Tuple[int, int]]] = {}
    for j1, j2 in pairs:
        if j1 not in below:
            below[j1] = _children(store, j1, low)
        for k1, k2 in below[j1]:
            out[(k1, k2, j2)] = None
        if j2 not in below:
            below[j2] = _children(store, j2, low)
        for k1, k2 in below[j2]:
            out[(j1, k1, k2)] = None
    return list(out)


def _neighbourhood(out: Dict[Valuation, None], ids: Tuple[int, ...]) -> None:
    hood = tuple(dict.fromkeys(ids))
    for v in product(hood, repeat=2):
        out[v] = None
    for v in product(hood, repeat=3):
        out[v] = None


def gen_type1(store: Collection, i: int, flt: StructureFilter = NO_FILTER) -> List[Valuation]:
    """Type 0 plus every pair and triple over {i, j1, j2} for each structure of ``i``."""
    out = dict.fromkeys(gen_type0(store, i, flt))
    for j1, j2 in _children(store, i, flt):
        _neighbourhood(out, (i, j1, j2))
    return list(out)


def gen_type2(store: Collection, i: int, flt: StructureFilter = NO_FILTER) -> List[Valuation]:
    """Type 1 widened one level: neighbourhoods {i, j1, j2, k1, k2}."""
    out = dict.fromkeys(gen_type1(store, i, flt))
    low = flt.below()
    for j1, j2 in _children(store, i, flt):
        for j in dict.fromkeys((j1, j2)):
            for k1, k2 in _children(store, j, low):
                _neighbourhood(out, (i, j1, j2, k1, k2))
    return list(out)


def gen_type3(store: Collection, i: int) -> Iterator[Valuation]:
    """Every combination of ``i`` with no-younger ids, lazily.

    Yields (i,), then (i, i') and (i, i', i'') with time(i) >= time(i') >=
    time(i''), i' and then i'' running from youngest to oldest.
    """
    older = sorted((j for j in store.live_ids() if j <= i), reverse=True)
    yield (i,)
    for j in older:
        yield (i, j)
    for n, j in enumerate(older):
        for k in older[n:]:
            yield (i, j, k)


def expand_multiple(v: Valuation) -> List[Valuation]:
    """All distinct reassignments of the ids of ``v`` among its variables."""
    if len(v) == 1:
        return [v]
    if len(v) == 2:
        a, b = v
        return [v] if a == b else [v, (b, a)]
    a, b, c = v
    if a != b and b != c and a != c:
        return [v, (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)]
    return list(dict.fromkeys(permutations(v)))


GENERATORS = {0: gen_type0, 1: gen_type1, 2: gen_type2}
