"""Axioms, the shipped boolean axiom sets, and axiom application."""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .collection import Collection
from .term import Node, Term, Var, parse, subterms, to_string, variables

AXIOM_DIR_ENV = "EQSIMP_AXIOM_DIR"
_DATA = Path(__file__).with_name("data")

# (symbol, left register, right register); -1 marks an absent child
Op = Tuple[str, int, int]

USEFUL = 1
USED01 = 2


def _compile(node: Node, names: Sequence[str]) -> Tuple[List[Op], int]:
    """Straight-line program building ``node``; registers start with the variables."""
    ops: List[Op] = []
    stack: List[int] = []
    for n in subterms(node):
        if isinstance(n, Var):
            stack.append(names.index(n.name))
            continue
        if n.arity == 0:
            ops.append((n.op, -1, -1))
        elif n.arity == 1:
            ops.append((n.op, stack.pop(), -1))
        else:
            r = stack.pop()
            ops.append((n.op, stack.pop(), r))
        stack.append(len(names) + len(ops) - 1)
    return ops, stack[0]


def _probe_source(prog: Tuple[List[Op], int], n_vars: int, out: str, tmp: str) -> List[str]:
    """Lookup-only code for one side; ``out`` ends up None when the side is absent."""
    ops, top = prog
    if top < n_vars:
        return [f"    {out} = v[{top}]"]

    def ref(r: int) -> str:
        return f"v[{r}]" if r < n_vars else f"{tmp}{r}"

    lines = []
    for n, (sym, a, b) in enumerate(ops, n_vars):
        name = out if n == top else f"{tmp}{n}"
        args = [r for r in (a, b) if r >= 0]
        key = ", ".join([repr(sym)] + [ref(r) for r in args])
        # variables are always bound; intermediate lookups may have failed
        maybe = [ref(r) for r in args if r >= n_vars]
        if maybe:
            cond = " and ".join(f"{m} is not None" for m in maybe)
            lines.append(f"    {name} = get(({key},)) if {cond} else None")
        else:
            lines.append(f"    {name} = get(({key},))")
    return lines


def _guard_source(prog: Tuple[List[Op], int], n_vars: int) -> List[str]:
    """Code for ``fits(get, size, v, limit)``: the size guard on a side about to be built."""
    ops, top = prog
    lines = ["def fits(get, size, v, limit):"]
    if top < n_vars:
        return lines + ["    return True"]

    def ref(r: int) -> str:
        return f"v[{r}]" if r < n_vars else f"t{r}"

    def sz(r: int) -> str:
        return f"size[v[{r}]]" if r < n_vars else f"s{r}"

    for n, (sym, a, b) in enumerate(ops, n_vars):
        args = [r for r in (a, b) if r >= 0]
        if n == top:
            checks = " and ".join(f"{sz(r)} <= limit" for r in args) or "True"
            lines.append(f"    return {checks}")
            break
        key = ", ".join([repr(sym)] + [ref(r) for r in args])
        maybe = [ref(r) for r in args if r >= n_vars]
        if maybe:
            cond = " and ".join(f"{m} is not None" for m in maybe)
            lines.append(f"    t{n} = get(({key},)) if {cond} else None")
        else:
            lines.append(f"    t{n} = get(({key},))")
        built = " + ".join(["1"] + [sz(r) for r in args])
        lines.append(f"    s{n} = size[t{n}] if t{n} is not None else {built}")
    return lines


def _exec(lines: List[str], name: str):
    scope: Dict[str, object] = {}
    exec("\n".join(lines), scope)
    return scope[name]


def _make_probe(lprog, rprog, n_vars: int):
    lines = ["def probe(get, v):"]
    lines += _probe_source(lprog, n_vars, "l", "a")
    lines += _probe_source(rprog, n_vars, "r", "b")
    lines.append("    return l, r")
    return _exec(lines, "probe")


def _make_check(lprog, rprog, n_vars: int, lhs_fits, rhs_fits):
    """``check(get, size, v)``: the probe result when a guarded conditional
    application would change something, else None."""
    lines = ["def make(lhs_fits, rhs_fits):", " def check(get, size, v):"]
    lines += [" " + x for x in _probe_source(lprog, n_vars, "l", "a")]
    lines += [" " + x for x in _probe_source(rprog, n_vars, "r", "b")]
    lines += [
        "     if l is None:",
        "         if r is None or not lhs_fits(get, size, v, size[r]):",
        "             return None",
        "     elif r is None:",
        "         if not rhs_fits(get, size, v, size[l]):",
        "             return None",
        "     elif l == r:",
        "         return None",
        "     return l, r",
        " return check",
    ]
    return _exec(lines, "make")(lhs_fits, rhs_fits)


def make_group_check(axioms: Sequence["Axiom"]):
    """One function checking a whole group of axioms of the same arity.

    ``check(get, size, v, start, watch)`` returns ``(k, l, r, used)`` for the
    first axiom ``k >= start`` whose guarded conditional application at ``v``
    would change something (``l``/``r`` as from ``probe``), or None.  ``used``
    tells whether an id of ``watch`` occurs among the existing parts of either
    side.  Subterms shared by several axioms are looked up once per call.
    """
    if not axioms:
        return lambda get, size, v, start, watch: None
    n_vars = axioms[0].arity
    names: Dict[Tuple, str] = {}
    nullable: Dict[str, bool] = {}
    built: Dict[str, str] = {}  # size of the term whether or not it exists
    body: List[str] = [f"    v{n} = v[{n}]" for n in range(n_vars)]

    def emit(prog) -> List[str]:
        ops, top = prog
        regs = [f"v{n}" for n in range(n_vars)]
        for sym, a, b in ops:
            args = [regs[r] for r in (a, b) if r >= 0]
            key = (sym,) + tuple(args)
            if key not in names:
                name = f"t{len(names)}"
                names[key] = name
                tup = ", ".join([repr(sym)] + args) + ","
                maybe = [x for x in args if nullable.get(x)]
                if maybe:
                    cond = " and ".join(f"{x} is not None" for x in maybe)
                    body.append(f"    {name} = get(({tup})) if {cond} else None")
                else:
                    body.append(f"    {name} = get(({tup}))")
                nullable[name] = True
                parts = " + ".join(["1"] + [built.get(x, f"size[{x}]") for x in args])
                built[name] = f"(size[{name}] if {name} is not None else {parts})"
            regs.append(names[(sym,) + tuple(args)])
        return regs

    def fits(regs, prog, limit: str) -> str:
        ops, top = prog
        if top < n_vars:
            return "True"
        _, a, b = ops[top - n_vars]
        kids = [regs[r] for r in (a, b) if r >= 0]
        return " and ".join(f"{built.get(x, f'size[{x}]')} <= {limit}" for x in kids) or "True"

    tests: List[str] = []
    for k, ax in enumerate(axioms):
        lregs, rregs = emit(ax.lhs_prog), emit(ax.rhs_prog)
        l, r = lregs[ax.lhs_prog[1]], rregs[ax.rhs_prog[1]]
        used = " or ".join(f"{x} in watch" for x in dict.fromkeys(lregs + rregs))
        ret = f"return {k}, l, r, ({used})"
        tests += [
            f"    if start <= {k}:",
            f"        l = {l}",
            f"        r = {r}",
            "        if l is None:",
            f"            if r is not None and {fits(lregs, ax.lhs_prog, 'size[r]')}:",
            f"                {ret}",
            "        elif r is None:",
            f"            if {fits(rregs, ax.rhs_prog, 'size[l]')}:",
            f"                {ret}",
            "        elif l != r:",
            f"            {ret}",
        ]
    lines = ["def check(get, size, v, start, watch):"] + body + tests + ["    return None"]
    return _exec(lines, "check")


@dataclass(frozen=True)
class Axiom:
    lhs: Node
    rhs: Node
    tag: str = ""
    names: Tuple[str, ...] = field(init=False, compare=False)
    lhs_prog: Tuple[List[Op], int] = field(init=False, compare=False, repr=False)
    rhs_prog: Tuple[List[Op], int] = field(init=False, compare=False, repr=False)
    # probe(index.get, valuation) -> (lhs id or None, rhs id or None)
    probe: Callable = field(init=False, compare=False, repr=False)
    # size guards for building the lhs / rhs: fits(index.get, size, valuation, limit)
    lhs_fits: Callable = field(init=False, compare=False, repr=False)
    rhs_fits: Callable = field(init=False, compare=False, repr=False)
    # check(index.get, size, valuation) -> probe result, or None for a no-op or guarded-out application
    check: Callable = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        names = tuple(sorted(set(variables(self.lhs)) | set(variables(self.rhs))))
        if not 1 <= len(names) <= 3:
            raise ValueError(f"axiom {self} must use one to three variables")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "lhs_prog", _compile(self.lhs, names))
        object.__setattr__(self, "rhs_prog", _compile(self.rhs, names))
        object.__setattr__(
            self, "probe", _make_probe(self.lhs_prog, self.rhs_prog, len(names))
        )
        object.__setattr__(self, "lhs_fits", _exec(_guard_source(self.lhs_prog, len(names)), "fits"))
        object.__setattr__(self, "rhs_fits", _exec(_guard_source(self.rhs_prog, len(names)), "fits"))
        object.__setattr__(
            self,
            "check",
            _make_check(self.lhs_prog, self.rhs_prog, len(names), self.lhs_fits, self.rhs_fits),
        )
        if not self.tag:
            object.__setattr__(self, "tag", str(self))

    @property
    def arity(self) -> int:
        return len(self.names)

    def __str__(self) -> str:
        return f"{to_string(self.lhs)} = {to_string(self.rhs)}"


@dataclass
class AxiomSet:
    name: str
    axioms: List[Axiom]
    symbols: Dict[str, int] = field(default_factory=dict)

    def by_arity(self, arity: int) -> List[Axiom]:
        return [a for a in self.axioms if a.arity == arity]

    def grouped(self) -> Dict[int, List[Axiom]]:
        return {k: self.by_arity(k) for k in (1, 2, 3)}

    def __len__(self) -> int:
        return len(self.axioms)

    def __iter__(self):
        return iter(self.axioms)


def parse_axiom(line: str) -> Axiom:
    if line.count("=") != 1:
        raise ValueError(f"axiom needs exactly one '=': {line!r}")
    left, right = line.split("=")
    return Axiom(parse(left, variables=True), parse(right, variables=True), line.strip())


def loads(text: str, name: str = "") -> AxiomSet:
    """Read a theory file: a ``symbols`` header, then ``lhs = rhs`` lines."""
    symbols: Dict[str, int] = {}
    axioms: List[Axiom] = []
    seen = set()
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("symbols"):
            for item in line.split()[1:]:
                sym, arity = item.rsplit("/", 1)
                symbols[sym] = int(arity)
            continue
        axiom = parse_axiom(line)
        for node in (axiom.lhs, axiom.rhs):
            for n in subterms(node):
                if isinstance(n, Term) and n.op in symbols and symbols[n.op] != n.arity:
                    raise ValueError(f"{n.op} used with arity {n.arity}: {line!r}")
        if (axiom.lhs, axiom.rhs) in seen:
            continue
        seen.add((axiom.lhs, axiom.rhs))
        axioms.append(axiom)
    return AxiomSet(name, axioms, symbols)


def load(path: os.PathLike | str) -> AxiomSet:
    path = Path(path)
    return loads(path.read_text(), path.stem)


def axiom_path(name: str) -> Path:
    """Locate ``<name>.axioms`` in $EQSIMP_AXIOM_DIR, then in the package data."""
    env = os.environ.get(AXIOM_DIR_ENV)
    if env:
        candidate = Path(env) / f"{name}.axioms"
        if candidate.exists():
            return candidate
    return _DATA / f"{name}.axioms"


def standard_axioms() -> AxiomSet:
    return load(axiom_path("boolean_standard"))


def extended_axioms() -> AxiomSet:
    return load(axiom_path("boolean_extended"))


# ------------------------------------------------------------------ application


@dataclass
class ApplyOutcome:
    useful: bool
    used01: bool
    size_drop: int


def _resolve(prog: Tuple[List[Op], int], val: Sequence[int], index) -> List[Optional[int]]:
    """Registers of ``prog`` looked up without creating; None marks absent terms."""
    regs: List[Optional[int]] = list(val)
    push = regs.append
    get = index.get
    for sym, a, b in prog[0]:
        if a < 0:
            push(get((sym,)))
            continue
        ra = regs[a]
        if ra is None:
            push(None)
        elif b < 0:
            push(get((sym, ra)))
        else:
            rb = regs[b]
            push(None if rb is None else get((sym, ra, rb)))
    return regs


def _commit(prog: Tuple[List[Op], int], val: Sequence[int], store: Collection) -> int:
    regs = list(val)
    push = regs.append
    intern = store.intern
    for sym, a, b in prog[0]:
        if a < 0:
            push(intern((sym,)))
        elif b < 0:
            push(intern((sym, regs[a])))
        else:
            push(intern((sym, regs[a], regs[b])))
    return regs[prog[1]]


def _fits(prog: Tuple[List[Op], int], regs: List[Optional[int]], size, limit: int) -> bool:
    """Whether the top structure of a new side keeps its children within ``limit``."""
    ops, top = prog
    nv = len(regs) - len(ops)
    if top < nv:
        return True
    sizes = [0] * len(regs)
    for r in range(nv):
        sizes[r] = size[regs[r]]
    for n, (sym, a, b) in enumerate(ops, nv):
        r = regs[n]
        if r is not None:
            sizes[n] = size[r]
        else:
            sizes[n] = 1 + (sizes[a] if a >= 0 else 0) + (sizes[b] if b >= 0 else 0)
    _, a, b = ops[top - nv]
    return (a < 0 or sizes[a] <= limit) and (b < 0 or sizes[b] <= limit)


def apply_fast(
    store: Collection,
    axiom: Axiom,
    val: Sequence[int],
    bottom_up: bool = False,
    guard: bool = True,
    probed: Optional[Tuple[Optional[int], Optional[int]]] = None,
    used: Optional[bool] = None,
) -> int:
    """Apply ``val`` to ``axiom``; returns USEFUL | USED01 bit flags.

    Applications that change nothing return 0.  Conditional mode only
    commits when one side already exists.  With ``guard`` a side about to be
    created is rejected when a child of its top structure is larger than the
    existing side it would be unified with.  ``probed`` passes the result of
    ``axiom.probe`` when the caller already has it, ``used`` the matching
    watch test.
    """
    index = store.index
    l, r = probed if probed is not None else axiom.probe(index.get, val)
    if l is None:
        if r is None and not bottom_up:
            return 0
    elif l == r:
        return 0
    if guard and (l is None) != (r is None):
        if l is None:
            ok = axiom.lhs_fits(index.get, store.size, val, store.size[r])
        else:
            ok = axiom.rhs_fits(index.get, store.size, val, store.size[l])
        if not ok:
            return 0
    watch = store.watch
    flags = 0
    if used is not None:
        if used:
            flags = USED01
    elif watch:
        for prog in (axiom.lhs_prog, axiom.rhs_prog):
            if any(reg in watch for reg in _resolve(prog, val, index)):
                flags = USED01
                break
    if l is not None and r is not None:
        store.touched = False
        store.unify(l, r)
        return flags | USEFUL | (USED01 if store.touched else 0)
    if l is None and r is None:
        clock = store.clock
        l = _commit(axiom.lhs_prog, val, store)
        r = _commit(axiom.rhs_prog, val, store)
        if l != r:
            store.touched = False
            store.unify(l, r)
            if store.touched:
                flags |= USED01
        elif store.clock == clock:
            return flags
        return flags | USEFUL
    if l is None:
        existing, prog = r, axiom.lhs_prog
    else:
        existing, prog = l, axiom.rhs_prog
    new = _commit(prog, val, store)
    store.touched = False
    store.unify(existing, new)
    if store.touched or existing in watch:
        flags |= USED01
    return flags | USEFUL


def apply(
    store: Collection,
    val: Sequence[int],
    axiom: Axiom,
    bottom_up: bool = False,
    guard: bool = True,
) -> ApplyOutcome:
    """Apply the valuation ``val`` (ids for x, y, z in order) to ``axiom``."""
    if len(val) != axiom.arity:
        raise ValueError(f"valuation of arity {len(val)} for axiom of arity {axiom.arity}")
    for i in val:
        store.time(i)
    before = store.size[store.main_id] if store.main_id in store.size else None
    flags = apply_fast(store, axiom, val, bottom_up, guard)
    drop = 0
    if before is not None and store.main_id in store.size:
        drop = before - store.size[store.main_id]
    return ApplyOutcome(bool(flags & USEFUL), bool(flags & USED01), drop)


def early_apply_single_var(
    store: Collection,
    axioms: Iterable[Axiom],
    pending: Iterable[int],
    bottom_up: bool = False,
    guard: bool = True,
    max_rounds: int = 8,
    apply: Optional[Callable[[Axiom, Tuple[int, ...]], int]] = None,
) -> Tuple[int, int]:
    """Apply every one-variable axiom to each pending id, oldest first.

    Further rounds over all processed ids run while the previous round was
    useful, so that merges made late in a round reach the ids already passed.
    ``apply`` replaces the plain application (the driver uses it to keep
    statistics).  Returns (number of ids treated, number of useful
    applications).
    """
    if apply is None:
        def apply(axiom: Axiom, val: Tuple[int, ...]) -> int:
            return apply_fast(store, axiom, val, bottom_up, guard)

    unary_axioms = [a for a in axioms if a.arity == 1]
    todo = sorted(pending)
    treated = 0
    useful = 0
    processed: List[int] = []
    for _ in range(max_rounds):
        round_useful = 0
        for i in todo:
            i = store.find(i)
            if i not in store.size:
                continue
            treated += 1
            processed.append(i)
            for axiom in unary_axioms:
                if i not in store.size:
                    break
                if apply(axiom, (i,)) & USEFUL:
                    round_useful += 1
        useful += round_useful
        if not round_useful:
            break
        todo = sorted(set(store.find(i) for i in processed))
        processed = []
    return treated, useful
