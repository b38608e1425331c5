import random
from itertools import permutations

import pytest

from eqsimp.collection import Collection
from eqsimp.term import parse, random_expr
from eqsimp.valuation import (
    NO_FILTER,
    StructureFilter,
    bindings,
    expand_multiple,
    gen_type0,
    gen_type1,
    gen_type2,
    gen_type3,
)


def example1_store():
    store = Collection()
    store.intern(("0",))
    store.intern(("1",))
    store.main_id = store.to_set(parse("a + b + !b + a"))
    return store


def random_store(seed):
    rng = random.Random(seed)
    store = Collection()
    ids = [store.to_set(random_expr(seed * 10 + k, 3, rng.randint(1, 15))) for k in range(4)]
    for _ in range(2):
        store.unify(store.find(rng.choice(ids)), store.find(rng.choice(ids)))
    return store


def test_example1_triple_at_id_7():
    store = example1_store()
    vals = gen_type0(store, 7)
    assert (3, 4, 6) in vals
    assert bindings((3, 4, 6)) == {"x": 3, "y": 4, "z": 6}


def test_type0_of_example1_id_7_in_full():
    store = example1_store()
    # {x->7}, the pair of +(5, 6), triples through +(3, 4):5 and !(4):6
    assert gen_type0(store, 7) == [(7,), (5, 6), (3, 4, 6), (5, 4, 4)]


def test_constant_id_has_only_the_single_valuation():
    store = example1_store()
    for gen in (gen_type0, gen_type1, gen_type2):
        assert gen(store, 3) == [(3,)]


def test_valuation_types_are_nested():
    for seed in range(100):
        store = random_store(seed)
        for i in store.live_ids():
            t0, t1, t2 = (set(g(store, i)) for g in (gen_type0, gen_type1, gen_type2))
            assert t0 <= t1 <= t2


def test_type1_covers_the_neighbourhood():
    store = example1_store()
    vals = set(gen_type1(store, 7))
    hood = (7, 5, 6)
    assert all(v in vals for v in permutations(hood, 2))
    assert all(v in vals for v in permutations(hood, 3))


def test_generated_ids_are_live_and_arities_small():
    for seed in range(100):
        store = random_store(seed)
        for i in store.live_ids():
            for v in gen_type2(store, i):
                assert 1 <= len(v) <= 3
                assert all(c in store.size for c in v)


@pytest.mark.parametrize("seed", range(20))
def test_type3_enumeration_count(seed):
    store = random_store(seed)
    for i in store.live_ids():
        r = len([j for j in store.live_ids() if j <= i])
        vals = list(gen_type3(store, i))
        assert len(vals) == 1 + r + r * (r + 1) // 2
        assert len(set(vals)) == len(vals)
        # never a younger id than the processed one
        assert all(c <= i for v in vals for c in v)


def test_type3_is_lazy():
    store = random_store(3)
    gen = gen_type3(store, store.live_ids()[-1])
    assert next(gen) == (store.live_ids()[-1],)


def test_expand_multiple():
    assert expand_multiple((5,)) == [(5,)]
    assert expand_multiple((5, 5)) == [(5, 5)]
    assert sorted(expand_multiple((5, 6))) == [(5, 6), (6, 5)]
    assert sorted(expand_multiple((1, 1, 2))) == [(1, 1, 2), (1, 2, 1), (2, 1, 1)]
    assert sorted(expand_multiple((1, 2, 3))) == sorted(permutations((1, 2, 3)))
    assert expand_multiple((4, 4, 4)) == [(4, 4, 4)]
    assert expand_multiple((1, 2, 3))[0] == (1, 2, 3)


def test_size_guard_only_admits_small_children():
    for seed in range(100):
        store = random_store(seed)
        guard = StructureFilter(None, size_guard=True)
        for i in store.live_ids():
            pairs = [v for v in gen_type0(store, i, guard) if len(v) == 2]
            for j1, j2 in pairs:
                assert store.size[j1] <= store.size[i] and store.size[j2] <= store.size[i]


def test_guard_never_adds_valuations():
    for seed in range(100):
        store = random_store(seed)
        guard = StructureFilter(None, size_guard=True)
        for i in store.live_ids():
            assert set(gen_type0(store, i, guard)) <= set(gen_type0(store, i, NO_FILTER))


def test_horizon_rules():
    store = Collection()
    store.intern(("0",))
    store.intern(("1",))
    store.main_id = store.to_set(parse("a + ab"))
    a, one, b, ab = (store.lookup(k) for k in (("a",), ("1",), ("b",), (".", 3, 4)))
    horizon = store.clock
    # a new structure over old ids: a.1 = a
    store.unify(a, store.intern((".", a, one)))
    for rule in ("ids", "split", "top"):
        flt = StructureFilter(horizon, size_guard=True, rule=rule)
        # one level down the new structure is visible: this is how a + ab reaches a
        assert (a, one, b) in gen_type0(store, ab, flt)
    birth = StructureFilter(horizon, size_guard=True, rule="birth")
    assert (a, one, b) not in gen_type0(store, ab, birth)
    # at the top, "split" and "birth" ignore the structures born after the horizon
    for rule in ("split", "birth"):
        assert (a, one) not in gen_type0(store, a, StructureFilter(horizon, True, rule))
    assert (a, one) in gen_type0(store, a, StructureFilter(horizon, True, "ids"))


def test_ids_rule_hides_young_ids():
    store = example1_store()
    horizon = store.clock
    young = store.intern(("c",))
    store.unify(3, store.intern(("+", young, young)))  # a = c + c, only for the test
    flt = StructureFilter(horizon, size_guard=False, rule="ids")
    assert all(young not in v for v in gen_type0(store, 3, flt))
    # the processed id itself is always its own valuation
    assert gen_type0(store, young, flt) == [(young,)]


def test_unknown_rule():
    with pytest.raises(ValueError):
        StructureFilter(None, True, rule="nope")
