"""The simplification driver: saturate around the main id, collect garbage, repeat."""
from __future__ import annotations

import time as _time
from bisect import bisect_right
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Callable, Dict, List, Optional, Sequence

from .axioms import USED01, USEFUL, Axiom, AxiomSet, apply_fast, early_apply_single_var, make_group_check
from .axioms import extended_axioms, load, standard_axioms
from .collection import CapacityExceeded, Collection, GcMode
from .term import Term, polish_size
from .valuation import GENERATORS, StructureFilter, expand_multiple, gen_type3


class UnknownPreset(KeyError):
    pass


@dataclass(frozen=True)
class Config:
    valuation_type: int = 0
    application: str = "multiple"  # or "strict"
    max_sub_count: int = 6
    max_re_count: Optional[int] = None  # None: 3 when max_sub_count == 1, else 1
    max_count: int = 20
    expected_size: int = 1
    bottom_up: bool = False
    axiom_set: str = "standard"  # or "extended"
    one_var_first: bool = False
    capacity: int = 500_000
    iteration_timeout: Optional[float] = 60.0  # seconds; None or 0 disables
    seed: int = 0  # corpus seed when a config drives a benchmark
    size_guard: bool = True
    horizon_rule: str = "split"  # see valuation.StructureFilter
    # "id": valuations are deduplicated per processed id; "sub": per sub-iteration
    dedupe: str = "sub"
    early_gc: bool = True
    time_budget: Optional[float] = None  # whole-run wall clock cap, seconds

    def __post_init__(self) -> None:
        if self.valuation_type not in (0, 1, 2, 3):
            raise ValueError("valuation_type must be 0..3")
        if self.dedupe not in ("id", "sub"):
            raise ValueError("dedupe must be 'id' or 'sub'")
        if self.application not in ("multiple", "strict"):
            raise ValueError("application must be 'multiple' or 'strict'")
        if self.axiom_set not in ("standard", "extended"):
            raise ValueError("axiom_set must be 'standard' or 'extended'")
        for name in ("max_sub_count", "max_count", "expected_size", "capacity"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.max_re_count is not None and self.max_re_count < 1:
            raise ValueError("max_re_count must be at least 1")

    @property
    def re_count(self) -> int:
        if self.max_re_count is not None:
            return self.max_re_count
        return 3 if self.max_sub_count == 1 else 1


PRESETS: Dict[str, Config] = {
    "default": Config(),
    "var1": Config(application="strict"),
    "var2": Config(max_sub_count=1),
    "var3": Config(bottom_up=True),
    "var4": Config(axiom_set="extended"),
    "var5": Config(one_var_first=True),
    "var6": Config(application="strict", max_sub_count=1),
    "var7": Config(valuation_type=1),
    "var8": Config(valuation_type=1, max_sub_count=1, axiom_set="extended"),
    "var9": Config(valuation_type=2),
    "var10": Config(valuation_type=2, application="strict", max_sub_count=1),
    "var11": Config(valuation_type=3),
    "var12": Config(valuation_type=3, max_sub_count=1, one_var_first=True),
}


def preset(name: str, **overrides) -> Config:
    key = name.replace("/", "")
    if key not in PRESETS:
        raise UnknownPreset(name)
    return replace(PRESETS[key], **overrides)


def select_gc(plateau_len: int, bottom_up: bool, current: GcMode = GcMode.ALL_MINIMAL) -> GcMode:
    """Collector for the next call: stay put while sizes drop, tighten on a plateau."""
    if bottom_up:
        return GcMode.REACHABLE
    if plateau_len == 0:
        return current
    return GcMode.ONE_MINIMAL


@dataclass
class IterationStats:
    time: float = 0.0
    size: int = 0
    nval: int = 0
    napl: int = 0
    ds01: int = 0
    nd01: int = 0
    ods: int = 0
    nods: int = 0
    nid: int = 0
    nid1: int = 0
    Mi: int = 0
    Ni: int = 0
    Mf: int = 0
    Nf: int = 0
    start_size: int = 0
    boundaries: int = 0
    early_gcs: int = 0
    timed_out: bool = False
    gc: str = ""

    CSV_HEADER = "iter,time_ms,size,nval,napl,ds01,nd01,ods,nods,nid,nid1,Mi,Ni,Mf,Nf"

    def csv_row(self, n: int) -> str:
        return ",".join(
            str(v)
            for v in (
                n, int(self.time * 1000), self.size, self.nval, self.napl, self.ds01,
                self.nd01, self.ods, self.nods, self.nid, self.nid1,
                self.Mi, self.Ni, self.Mf, self.Nf,
            )
        )


@dataclass
class SimplifyResult:
    simplified: Term
    final_size: int
    iterations: List[IterationStats]
    termination: str  # "expected_size" | "max_count" | "time_budget"
    input_size: int = 0

    def stats_csv(self) -> str:
        lines = [IterationStats.CSV_HEADER]
        lines += [s.csv_row(n) for n, s in enumerate(self.iterations, 1)]
        return "\n".join(lines) + "\n"


def axioms_for(cfg: Config) -> AxiomSet:
    return extended_axioms() if cfg.axiom_set == "extended" else standard_axioms()


class _Timeout(Exception):
    pass


class Simplifier:
    """One run of the driver over a private store."""

    def __init__(self, cfg: Config, axioms: Optional[AxiomSet] = None) -> None:
        self.cfg = cfg
        self.axioms = axioms if axioms is not None else axioms_for(cfg)
        grouped = self.axioms.grouped()
        self.by_arity: Dict[int, List[Axiom]] = grouped
        self.group_check = {k: make_group_check(v) for k, v in grouped.items()}
        self.store = Collection(cfg.capacity)
        self.gc_mode = GcMode.REACHABLE if cfg.bottom_up else GcMode.ALL_MINIMAL
        self.stats = IterationStats()
        self.done1: set = set()
        self._seen: set = set()
        self.deadline: Optional[float] = None
        # observer of every useful application: (axiom, valuation, flags, drop, sides)
        # where sides holds the lhs/rhs ids that existed beforehand (None if absent)
        self.trace: Optional[Callable[[Axiom, tuple, int, int, tuple], None]] = None

    # -------------------------------------------------------- helpers

    @property
    def main_size(self) -> int:
        return self.store.size[self.store.main_id]

    def _constant_ids(self) -> List[int]:
        out = []
        for c in ("0", "1"):
            i = self.store.lookup((c,))
            if i is not None:
                out.append(i)
        return out

    def _apply(
        self, axiom: Axiom, val: tuple, probed=None, guard: Optional[bool] = None, used=None
    ) -> int:
        store = self.store
        before = store.size[store.main_id]
        if guard is None:
            guard = self.cfg.size_guard
        if probed is None and self.trace is not None:
            probed = axiom.probe(store.index.get, val)
        flags = apply_fast(store, axiom, val, self.cfg.bottom_up, guard, probed, used)
        if flags & USEFUL:
            st = self.stats
            st.napl += 1
            drop = before - store.size[store.main_id]
            if drop > 0:
                if flags & USED01:
                    st.ds01 += drop
                    st.nd01 += 1
                else:
                    st.ods += drop
                    st.nods += 1
            if self.trace is not None:
                self.trace(axiom, val, flags, drop, probed)
        return flags

    def _live(self, val: tuple) -> Optional[tuple]:
        size = self.store.size
        for c in val:
            if c not in size:
                break
        else:
            return val
        find = self.store.find
        val = tuple(find(c) for c in val)
        for c in val:
            if c not in size:
                return None
        return val

    def _collect(self, mode: GcMode) -> None:
        store = self.store
        store.gc(mode, [store.main_id] + self._constant_ids())
        store.watch = frozenset(self._constant_ids())

    # -------------------------------------------------------- one id

    def _one_var_first(self) -> None:
        store = self.store
        pending = [i for i in store.live_ids() if i not in self.done1]
        if not pending:
            return
        treated, _ = early_apply_single_var(
            store, self.by_arity[1], pending, apply=lambda a, v: self._apply(a, v)
        )
        self.stats.nid1 += treated
        self.done1.update(store.live_ids())

    def _process(self, i: int, horizon: int) -> bool:
        """Generate the valuations of ``i`` and apply them; True once the goal size is met."""
        cfg = self.cfg
        store = self.store
        size = store.size
        expected = cfg.expected_size
        deadline = self.deadline
        multiple = cfg.application == "multiple"
        skip1 = cfg.one_var_first and i in self.done1
        if cfg.one_var_first:
            self.done1.add(i)
        if cfg.valuation_type == 3:
            vals = gen_type3(store, i)
            dedupe = False
        else:
            flt = StructureFilter(horizon, cfg.size_guard, cfg.horizon_rule)
            vals = GENERATORS[cfg.valuation_type](store, i, flt)
            dedupe = True
        st = self.stats
        st.nid += 1
        seen = self._seen if cfg.dedupe == "sub" else set()
        by_arity = self.by_arity
        get = store.index.get
        bottom_up = cfg.bottom_up
        # the common case folds probe, no-op test and size guard into one call
        checked = cfg.size_guard and not bottom_up
        apply = self._apply
        group_check = self.group_check
        for v in vals:
            if skip1 and len(v) == 1:
                continue
            if dedupe:
                # under multiple application a valuation stands for all its
                # permutations, so its sorted form identifies the whole batch
                canon = tuple(sorted(v)) if multiple else v
                if canon in seen:
                    continue
                seen.add(canon)
            for e in expand_multiple(v) if multiple else (v,):
                st.nval += 1
                if deadline is not None and not st.nval & 63 and _time.perf_counter() > deadline:
                    raise _Timeout
                for c in e:
                    if c not in size:
                        live = self._live(e)
                        break
                else:
                    live = e
                if live is None:
                    continue
                if checked:
                    group = by_arity[len(e)]
                    check = group_check[len(e)]
                    k = 0
                    while True:
                        hit = check(get, size, live, k, store.watch)
                        if hit is None:
                            break
                        k, l, r, used = hit
                        flags = apply(group[k], live, (l, r), False, used)
                        k += 1
                        if flags & USEFUL:
                            if size[store.main_id] <= expected:
                                return True
                            live = self._live(live)
                            if live is None:
                                break
                    continue
                for axiom in by_arity[len(e)]:
                    probed = axiom.probe(get, live)
                    l, r = probed
                    if l is None:
                        if r is None and not bottom_up:
                            continue
                    elif l == r:
                        continue
                    if apply(axiom, live, probed) & USEFUL:
                        if size[store.main_id] <= expected:
                            return True
                        live = self._live(live)
                        if live is None:
                            break
        return False

    # -------------------------------------------------------- iterations

    def _pass(self) -> str:
        """One traversal of the id list; returns why it stopped."""
        cfg = self.cfg
        store = self.store
        st = self.stats
        horizon = store.clock
        sub = 0
        early_done = False
        self._seen = set()
        if cfg.one_var_first:
            self._one_var_first()
            horizon = store.clock
        ids = store.id_list
        pos = 0
        last = 0
        while True:
            if self.main_size <= cfg.expected_size:
                return "goal"
            if store.id_list is not ids:
                ids = store.id_list
                pos = bisect_right(ids, last)
            size = store.size
            while pos < len(ids) and ids[pos] not in size:
                pos += 1
            if pos == len(ids):
                return "done"
            i = ids[pos]
            try:
                if i > horizon:
                    sub += 1
                    st.boundaries += 1
                    if sub == cfg.max_sub_count:
                        return "subcount"
                    if cfg.one_var_first:
                        self._one_var_first()
                    horizon = store.clock
                    self._seen = set()
                    if i not in store.size:
                        continue
                pos += 1
                last = i
                if self._process(i, horizon):
                    return "goal"
            except CapacityExceeded:
                if cfg.early_gc and sub == 0 and not early_done:
                    early_done = True
                    st.early_gcs += 1
                    self._collect(self.gc_mode)
                    continue
                return "full"

    def _iteration(self) -> IterationStats:
        cfg = self.cfg
        store = self.store
        self.stats = st = IterationStats(Mi=store.num_ids, Ni=len(store), start_size=self.main_size)
        started = _time.perf_counter()
        timeout = cfg.iteration_timeout
        self.deadline = started + timeout if timeout else None
        self.done1 = set()
        try:
            for _ in range(cfg.re_count):
                if self._pass() in ("goal", "full") or store.full:
                    break
        except _Timeout:
            st.timed_out = True
        self.deadline = None
        st.Mf = store.num_ids
        st.Nf = len(store)
        st.size = self.main_size
        st.time = _time.perf_counter() - started
        return st

    def run(self, expr: Term) -> SimplifyResult:
        cfg = self.cfg
        store = self.store
        store.intern(("0",))
        store.intern(("1",))
        store.watch = frozenset(self._constant_ids())
        store.main_id = store.to_set(expr)
        previous = self.main_size
        count = 0
        plateau = 0
        iterations: List[IterationStats] = []
        started = _time.perf_counter()
        termination = "expected_size"
        while count != cfg.max_count and self.main_size > cfg.expected_size:
            if cfg.time_budget and _time.perf_counter() - started > cfg.time_budget:
                termination = "time_budget"
                break
            st = self._iteration()
            plateau = 0 if st.size < previous else plateau + 1
            self.gc_mode = select_gc(plateau, cfg.bottom_up, self.gc_mode)
            st.gc = self.gc_mode.value
            self._collect(self.gc_mode)
            iterations.append(st)
            if st.size == previous:
                count += 1
            if st.size < previous:
                count = 0
                previous = st.size
        else:
            termination = "expected_size" if self.main_size <= cfg.expected_size else "max_count"
        simplified = store.extract_min(store.main_id)
        return SimplifyResult(
            simplified, self.main_size, iterations, termination, polish_size(expr)
        )


def simplify(expr: Term, cfg: Optional[Config] = None, axioms: Optional[AxiomSet] = None) -> SimplifyResult:
    return Simplifier(cfg or Config(), axioms).run(expr)
