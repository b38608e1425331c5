import random

import pytest
from hypothesis import given, settings, strategies as st

from eqsimp.collection import CapacityExceeded, Collection, GcMode, UnboundVariable, UnknownId
from eqsimp.oracle import bounded_sizes
from eqsimp.term import Term, const, parse, polish_size, random_expr, to_string


def example1_store():
    store = Collection()
    store.intern(("0",))
    store.intern(("1",))
    store.main_id = store.to_set(parse("a + b + !b + a"))
    return store


def test_example1_identifiers():
    store = example1_store()
    got = {key: i for key, i in store.structures()}
    assert got == {
        ("0",): 1, ("1",): 2, ("a",): 3, ("b",): 4,
        ("+", 3, 4): 5, ("!", 4): 6, ("+", 5, 6): 7, ("+", 7, 3): 8,
    }
    assert store.main_id == 8
    assert store.size[8] == 8


def test_to_set_is_idempotent():
    store = Collection()
    i = store.to_set(const("a"))
    clock = store.clock
    assert store.to_set(const("a")) == i
    assert store.clock == clock


def test_to_set_with_valuation():
    store = example1_store()
    assert store.to_set(parse("x + y", variables=True), {"x": 3, "y": 4}) == 5
    with pytest.raises(UnboundVariable):
        store.to_set(parse("x + y", variables=True), {"x": 3})


def test_substitute_rewrites_example1():
    store = example1_store()
    store.substitute(2, 7)
    assert store.lookup(("+", 5, 6)) == 2
    assert store.lookup(("+", 2, 3)) == 8
    assert not store.is_live(7)
    store.normalize()
    store.check_invariants()


def test_normalize_merges_colliding_keys():
    store = example1_store()
    store.intern(("+", 2, 3))  # 1 + a, id 9
    store.substitute(2, 7)
    # +(7,3):8 became +(2,3):8, colliding with +(2,3):9
    assert not store.normalized
    store.normalize()
    assert store.normalized
    assert store.find(9) == 8 or store.find(8) == 9
    store.check_invariants()


def test_unify_example1_simplifies_to_1():
    store = example1_store()
    # 1 + a = 1 has been learnt earlier
    store.unify(2, store.intern(("+", 2, 3)))
    # then 7 and 2 are unified: +(7,3):8 becomes +(2,3):8 and collides
    store.unify(2, 7)
    assert store.main_id == 2
    assert store.size[2] == 1
    assert to_string(store.extract_min()) == "1"
    store.check_invariants()


def test_unify_same_id_is_noop():
    store = example1_store()
    before = store.dump()
    assert store.unify(5, 5) == 5
    assert store.dump() == before


def test_unify_keeps_the_older_id():
    store = example1_store()
    assert store.unify(8, 3) == 3
    assert store.main_id == 3
    assert store.time(3) == 3


def test_unknown_id():
    store = example1_store()
    with pytest.raises(UnknownId):
        store.unify(3, 99)
    with pytest.raises(UnknownId):
        store.time(99)


def test_capacity():
    store = Collection(capacity=3)
    store.to_set(parse("!a"))
    store.intern(("b",))
    with pytest.raises(CapacityExceeded):
        store.intern(("c",))


def test_dump_format():
    store = Collection()
    store.to_set(parse("!a"))
    assert store.dump() == "a:1 @1\n!(1):2 @2"


def test_extract_min_constant():
    store = Collection()
    i = store.to_set(const("a"))
    assert store.extract_min(i) == const("a")


def test_gc_one_minimal_after_merge():
    store = example1_store()
    store.unify(2, 8)
    store.gc(GcMode.ONE_MINIMAL, [store.main_id])
    assert list(store.structures()) == [(("1",), 2)]


def test_gc_reachable_keeps_everything_reachable():
    store = example1_store()
    store.gc(GcMode.REACHABLE, [8])
    assert len(store) == 6  # the constants 0 and 1 are not reachable from 8
    store = example1_store()
    store.gc(GcMode.REACHABLE, [8, 1, 2])
    assert len(store) == 8


def test_gc_all_minimal_keeps_every_minimal_structure():
    store = Collection()
    main = store.to_set(parse("ab"))
    store.unify(main, store.to_set(parse("ba")))
    store.unify(main, store.to_set(parse("a(b1)")))
    store.gc(GcMode.ALL_MINIMAL, [main])
    keys = {k for k, _ in store.structures()}
    assert ("." , 1, 2) in keys and (".", 2, 1) in keys
    assert ("1",) not in keys
    store.check_invariants()


# ------------------------------------------------------------------ random stores


def random_store(seed, n_terms=6, n_unify=4, size=9):
    rng = random.Random(seed)
    store = Collection()
    ids = [store.to_set(random_expr(seed * 100 + k, 3, rng.randint(1, size))) for k in range(n_terms)]
    for _ in range(n_unify):
        i = store.find(rng.choice(ids))
        j = store.find(rng.choice(ids))
        if i in store.size and j in store.size:
            store.unify(i, j)
            store.check_invariants()
    return store


def test_invariants_on_random_stores():
    for seed in range(200):
        store = random_store(seed)
        store.check_invariants()
        keys = [k for k, _ in store.structures()]
        assert len(keys) == len(set(keys))


def test_sizes_match_depth_bounded_enumeration():
    for seed in range(500):
        store = random_store(seed)
        ref = bounded_sizes(store, store.num_ids + 1)
        assert ref == store.size


def test_extract_min_has_cached_size():
    for seed in range(500):
        store = random_store(seed)
        for i in store.live_ids():
            assert polish_size(store.extract_min(i)) == store.size[i]


def test_substitute_leaves_no_trace_of_renamed_id():
    for seed in range(200):
        store = random_store(seed, n_unify=0)
        ids = store.live_ids()
        k, l = ids[0], ids[-1]
        if k == l:
            continue
        store.substitute(k, l)
        assert all(l not in key[1:] and i != l for key, i in store.structures())
        store.normalize()
        store.check_invariants()


def rescan_partition(structures, merges):
    """Merge ids by repeated full scans for colliding keys until none is left."""
    parent = {}

    def root(i):
        while parent.get(i, i) != i:
            i = parent[i]
        return i

    for i, j in merges:
        parent[root(j)] = root(i)
    changed = True
    while changed:
        changed = False
        seen = {}
        for key, i in structures:
            canon = (key[0],) + tuple(root(c) for c in key[1:])
            other = seen.setdefault(canon, root(i))
            if root(other) != root(i):
                parent[root(i)] = root(other)
                changed = True
    return root


def test_cascading_collisions_resolve_fully():
    store = Collection()
    # !-chains over a and b: merging a and b forces every level to merge
    ta, tb = const("a"), const("b")
    for _ in range(6):
        ta, tb = Term("!", (ta,)), Term("!", (tb,))
    top_a, top_b = store.to_set(ta), store.to_set(tb)
    store.unify(store.to_set(const("a")), store.to_set(const("b")))
    assert store.find(top_a) == store.find(top_b)
    store.check_invariants()
    assert store.num_ids == 7


def test_normalize_agrees_with_rescan_oracle():
    for seed in range(200):
        rng = random.Random(seed)
        store = Collection()
        ids = [store.to_set(random_expr(seed * 7 + k, 2, rng.randint(1, 9))) for k in range(6)]
        original = list(store.structures())
        merges = [(rng.choice(ids), rng.choice(ids)) for _ in range(3)]
        for i, j in merges:
            store.unify(store.find(i), store.find(j))
        root = rescan_partition(original, merges)
        all_ids = {i for _, i in original}
        for i in all_ids:
            for j in all_ids:
                assert (store.find(i) == store.find(j)) == (root(i) == root(j))


@settings(max_examples=150, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 7), st.integers(0, 7)), max_size=6), st.integers(0, 10**6))
def test_gc_preserves_root_size(merges, seed):
    store = Collection()
    ids = [store.to_set(random_expr(seed + k, 3, 1 + (seed + k) % 11)) for k in range(8)]
    for x, y in merges:
        i, j = store.find(ids[x]), store.find(ids[y])
        store.unify(i, j)
    root = store.find(ids[0])
    before = store.size[root]
    for mode in (GcMode.REACHABLE, GcMode.ALL_MINIMAL, GcMode.ONE_MINIMAL):
        store.gc(mode, [root])
        store.check_invariants()
        assert store.size[root] == before
        assert polish_size(store.extract_min(root)) == before
