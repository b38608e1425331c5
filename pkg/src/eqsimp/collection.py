"""The collection-of-structures store.

A structure ``f(i1, i2):i`` says that every term ``f(t1, t2)`` with ``t1`` in
class ``i1`` and ``t2`` in class ``i2`` belongs to class ``i``.  A key is the
tuple ``(symbol, *children)``; constants have no children.

Identifiers are drawn from a single clock that ticks once per created
structure, and every created structure gets a fresh identifier, so an id is
also the tick of its first structure: ``time(i) == i``.  The older of two ids
is the smaller one.
"""
from __future__ import annotations

import enum
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Set, Tuple

from .term import Node, Term, Var, subterms

Key = Tuple  # (symbol,) | (symbol, child) | (symbol, left, right)

NULL_ID = 0


class CapacityExceeded(RuntimeError):
    pass


class UnknownId(KeyError):
    pass


class UnboundVariable(KeyError):
    pass


class GcMode(enum.Enum):
    ALL_MINIMAL = "all-minimal"
    ONE_MINIMAL = "one-minimal"
    REACHABLE = "reachable"


class Collection:
    def __init__(self, capacity: int = 500_000) -> None:
        self.capacity = capacity
        self.index: Dict[Key, int] = {}
        self.born: Dict[Key, int] = {}
        # dicts used as insertion-ordered sets of keys
        self.same_id: Dict[int, Dict[Key, None]] = {}
        self.same_id_1: Dict[int, Dict[Key, None]] = {}
        self.same_id_2: Dict[int, Dict[Key, None]] = {}
        self.size: Dict[int, int] = {}
        self.clock = 0
        # chronological; dead entries are skipped and dropped by gc
        self.id_list: List[int] = []
        self.main_id: Optional[int] = None
        self.forward: Dict[int, int] = {}
        self._pending: List[Tuple[int, int]] = []
        self._recheck: List[Key] = []
        self._dirty: List[int] = []
        # ids whose involvement in a rewrite is reported through `touched`
        self.watch: frozenset = frozenset()
        self.touched = False

    # ------------------------------------------------------------ queries

    def __len__(self) -> int:
        return len(self.index)

    @property
    def num_ids(self) -> int:
        return len(self.size)

    @property
    def full(self) -> bool:
        return len(self.index) >= self.capacity

    def is_live(self, i: int) -> bool:
        return i in self.size

    def time(self, i: int) -> int:
        self._check(i)
        return i

    def live_ids(self) -> List[int]:
        size = self.size
        return [i for i in self.id_list if i in size]

    def structures(self) -> Iterator[Tuple[Key, int]]:
        return iter(self.index.items())

    def lookup(self, key: Key) -> Optional[int]:
        return self.index.get(key)

    def find(self, i: int) -> int:
        """Current name of ``i``, following renamings."""
        forward = self.forward
        root = i
        while root in forward:
            root = forward[root]
        while i in forward and forward[i] != root:
            forward[i], i = root, forward[i]
        return root

    def key_size(self, key: Key) -> int:
        size = self.size
        n = len(key)
        if n == 3:
            return 1 + size[key[1]] + size[key[2]]
        if n == 2:
            return 1 + size[key[1]]
        return 1

    def dump(self) -> str:
        """One structure per line, ``symbol(children):id @tick``, by tick."""
        lines = []
        for key, i in sorted(self.index.items(), key=lambda kv: self.born[kv[0]]):
            if len(key) == 1:
                head = key[0]
            else:
                head = f"{key[0]}({','.join(map(str, key[1:]))})"
            lines.append(f"{head}:{i} @{self.born[key]}")
        return "\n".join(lines)

    def _check(self, i: int) -> None:
        if i not in self.size:
            raise UnknownId(i)

    # ------------------------------------------------------------ to_set

    def intern(self, key: Key) -> int:
        """Id of ``key``, creating the structure with a fresh id if needed."""
        i = self.index.get(key)
        if i is not None:
            return i
        if len(self.index) >= self.capacity:
            raise CapacityExceeded(self.capacity)
        self.clock += 1
        i = self.clock
        self.same_id[i] = {}
        self.same_id_1[i] = {}
        self.same_id_2[i] = {}
        self.size[i] = self.key_size(key)
        self.id_list.append(i)
        self._link(key, i, i)
        return i

    def to_set(self, node: Node, val: Optional[Mapping[str, int]] = None) -> int:
        ids: List[int] = []
        for n in subterms(node):
            if isinstance(n, Var):
                if val is None or n.name not in val:
                    raise UnboundVariable(n.name)
                i = val[n.name]
                self._check(i)
                ids.append(i)
            elif not n.args:
                ids.append(self.intern((n.op,)))
            elif len(n.args) == 1:
                ids.append(self.intern((n.op, ids.pop())))
            else:
                r = ids.pop()
                l = ids.pop()
                ids.append(self.intern((n.op, l, r)))
        return ids[0]

    def id_of(self, node: Node, val: Optional[Mapping[str, int]] = None) -> Optional[int]:
        """Like ``to_set`` but never creates anything; None if absent."""
        ids: List[int] = []
        index = self.index
        for n in subterms(node):
            if isinstance(n, Var):
                ids.append(val[n.name])  # type: ignore[index]
                continue
            k = len(n.args)
            if k == 0:
                key: Key = (n.op,)
            elif k == 1:
                key = (n.op, ids.pop())
            else:
                r = ids.pop()
                key = (n.op, ids.pop(), r)
            i = index.get(key)
            if i is None:
                return None
            ids.append(i)
        return ids[0]

    # ------------------------------------------------------------ linking

    def _link(self, key: Key, i: int, born: int) -> None:
        self.index[key] = i
        self.born[key] = born
        self.same_id[i][key] = None
        n = len(key)
        if n > 1:
            self.same_id_1[key[1]][key] = None
            if n > 2:
                self.same_id_2[key[2]][key] = None

    def _unlink(self, key: Key) -> Tuple[int, int]:
        i = self.index.pop(key)
        born = self.born.pop(key)
        del self.same_id[i][key]
        n = len(key)
        if n > 1:
            del self.same_id_1[key[1]][key]
            if n > 2:
                del self.same_id_2[key[2]][key]
        return i, born

    # ------------------------------------------------------------ rewriting

    def substitute(self, k: int, l: int) -> None:
        """Rename ``l`` into ``k`` in every structure.

        Key collisions this creates are queued and resolved by ``normalize``.
        """
        size = self.size
        if k not in size:
            raise UnknownId(k)
        if l not in size:
            raise UnknownId(l)
        if k == l:
            raise ValueError("substitute needs two distinct ids")
        watch = self.watch
        if watch and (k in watch or l in watch):
            self.touched = True
        same_id, same_1, same_2 = self.same_id, self.same_id_1, self.same_id_2
        affected = dict.fromkeys(same_id[l])
        affected.update(same_1[l])
        affected.update(same_2[l])
        index = self.index
        unlink = self._unlink
        link = self._link
        recheck = self._recheck
        pending = self._pending
        for key in affected:
            i, born = unlink(key)
            n = len(key)
            if n == 3:
                a, b = key[1], key[2]
                new_key: Key = (key[0], k if a == l else a, k if b == l else b)
                if watch and (a in watch or b in watch):
                    self.touched = True
            elif n == 2:
                new_key = (key[0], k if key[1] == l else key[1])
            else:
                new_key = key
            new_i = k if i == l else i
            other = index.get(new_key)
            if other is None:
                link(new_key, new_i, born)
                recheck.append(new_key)
            elif other != new_i:
                pending.append((other, new_i))
        del same_id[l]
        del same_1[l]
        del same_2[l]
        sl = size.pop(l)
        if sl < size[k]:
            size[k] = sl
            self._dirty.append(k)
        self.forward[l] = k
        if self.main_id == l:
            self.main_id = k

    def normalize(self) -> None:
        """Resolve queued key collisions, renaming the younger id each time."""
        pending = self._pending
        while pending:
            a, b = pending.pop()
            a = self.find(a)
            b = self.find(b)
            if a != b:
                if a > b:
                    a, b = b, a
                self.substitute(a, b)
        self._propagate_sizes()

    @property
    def normalized(self) -> bool:
        return not self._pending

    def unify(self, i: int, j: int) -> int:
        """Merge the classes of ``i`` and ``j``; returns the surviving id."""
        self._check(i)
        self._check(j)
        if i == j:
            return i
        if i > j:
            i, j = j, i
        self.substitute(i, j)
        self.normalize()
        return self.find(i)

    # ------------------------------------------------------------ sizes

    def _propagate_sizes(self) -> None:
        size = self.size
        index = self.index
        work = self._dirty
        for key in self._recheck:
            i = index.get(key)
            if i is None:
                continue
            s = self.key_size(key)
            if s < size[i]:
                size[i] = s
                work.append(i)
        self._recheck = []
        same_1 = self.same_id_1
        same_2 = self.same_id_2
        while work:
            c = work.pop()
            if c not in size:
                continue
            for users in (same_1[c], same_2[c]):
                for key in users:
                    p = index[key]
                    s = 1 + size[key[1]] + size[key[2]] if len(key) == 3 else 1 + size[key[1]]
                    if s < size[p]:
                        size[p] = s
                        work.append(p)

    def recompute_sizes(self) -> Dict[int, int]:
        """Sizes from scratch by fixpoint iteration (used to audit the cache)."""
        inf = float("inf")
        sizes: Dict[int, float] = {i: inf for i in self.size}
        changed = True
        while changed:
            changed = False
            for key, i in self.index.items():
                s = 1 + sum(sizes[c] for c in key[1:])
                if s < sizes[i]:
                    sizes[i] = s
                    changed = True
        return {i: int(s) for i, s in sizes.items()}

    # ------------------------------------------------------------ extraction

    def minimal_keys(self, i: int) -> List[Key]:
        s = self.size[i]
        return [key for key in self.same_id[i] if self.key_size(key) == s]

    def best_key(self, i: int, newest: bool = False) -> Key:
        """A minimal structure of ``i``: oldest first (or newest), then symbol, children."""
        keys = self.minimal_keys(i)
        born = self.born
        if newest:
            return min(keys, key=lambda k: (-born[k], k[0], k[1:]))
        return min(keys, key=lambda k: (born[k], k[0], k[1:]))

    def extract_min(self, i: Optional[int] = None, newest: bool = False) -> Term:
        """A term of minimal size in class ``i`` (default: the main id)."""
        if i is None:
            i = self.main_id
        self._check(i)  # type: ignore[arg-type]
        built: Dict[int, Term] = {}
        stack: List[Tuple[int, bool]] = [(i, False)]  # type: ignore[list-item]
        while stack:
            c, expanded = stack.pop()
            if c in built:
                continue
            key = self.best_key(c, newest)
            if expanded:
                built[c] = Term(key[0], tuple(built[d] for d in key[1:]))
                continue
            stack.append((c, True))
            for d in key[1:]:
                if d not in built:
                    stack.append((d, False))
        return built[i]  # type: ignore[index]

    # ------------------------------------------------------------ gc

    def gc(self, mode: GcMode, roots: Iterable[int]) -> None:
        """Drop structures not needed for ``mode``; sizes of kept ids are unchanged."""
        self.normalize()
        roots = [r for r in roots if r in self.size]
        keep: Dict[Key, None] = {}
        seen: Set[int] = set()
        stack = list(roots)
        while stack:
            i = stack.pop()
            if i in seen:
                continue
            seen.add(i)
            if mode is GcMode.REACHABLE:
                chosen: Iterable[Key] = self.same_id[i]
            elif mode is GcMode.ALL_MINIMAL:
                chosen = self.minimal_keys(i)
            else:
                chosen = (self.best_key(i, newest=True),)
            for key in chosen:
                keep[key] = None
                stack.extend(key[1:])
        self._rebuild(keep, seen)

    def _rebuild(self, keep: Mapping[Key, None], ids: Set[int]) -> None:
        old_index, old_born, old_size = self.index, self.born, self.size
        self.index = {}
        self.born = {}
        self.same_id = {}
        self.same_id_1 = {}
        self.same_id_2 = {}
        self.size = {}
        self.id_list = sorted(ids)
        for i in self.id_list:
            self.same_id[i] = {}
            self.same_id_1[i] = {}
            self.same_id_2[i] = {}
            self.size[i] = old_size[i]
        for key in sorted(keep, key=old_born.__getitem__):
            self._link(key, old_index[key], old_born[key])
        self.forward = {}
        if self.main_id is not None and self.main_id not in self.size:
            self.main_id = None

    # ------------------------------------------------------------ audits

    def check_invariants(self) -> None:
        """Raise AssertionError if any store invariant is broken."""
        assert not self._pending, "pending merges"
        by_id: Dict[int, Set[Key]] = {i: set() for i in self.size}
        by_1: Dict[int, Set[Key]] = {i: set() for i in self.size}
        by_2: Dict[int, Set[Key]] = {i: set() for i in self.size}
        for key, i in self.index.items():
            assert i in self.size, f"structure {key} points to dead id {i}"
            by_id[i].add(key)
            for c in key[1:]:
                assert c in self.size, f"structure {key} uses dead id {c}"
            if len(key) > 1:
                by_1[key[1]].add(key)
            if len(key) > 2:
                by_2[key[2]].add(key)
        for i in self.size:
            assert by_id[i], f"id {i} has no structure"
            assert set(self.same_id[i]) == by_id[i], f"same_id({i})"
            assert set(self.same_id_1[i]) == by_1[i], f"same_id_1({i})"
            assert set(self.same_id_2[i]) == by_2[i], f"same_id_2({i})"
        assert set(self.same_id) == set(self.size)
        assert self.recompute_sizes() == self.size, "size cache out of date"
        assert set(self.live_ids()) == set(self.size)
