"""Concrete syntax for boolean expressions, plus the theory-agnostic term tree.

Operators: ``+`` (or), ``.`` or juxtaposition (and), ``!`` (not).  Constants are
``0``, ``1`` and the letters ``a`` .. ``p``; axioms additionally use the
variables ``x``, ``y`` and ``z``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Tuple, Union

LETTERS = "abcdefghijklmnop"
VARIABLES = "xyz"
CONSTANTS = "01"

OR = "+"
AND = "."
NOT = "!"

# binding strength used by the printer; atoms bind tightest
_PREC = {OR: 1, AND: 2, NOT: 3}


@dataclass(frozen=True)
class Term:
    """A node of an expression tree: ``op`` applied to zero, one or two args."""

    op: str
    args: Tuple["Term", ...] = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    def __str__(self) -> str:
        return to_string(self)


@dataclass(frozen=True)
class Var:
    """An axiom variable."""

    name: str

    @property
    def arity(self) -> int:
        return 0

    def __str__(self) -> str:
        return self.name


Node = Union[Term, Var]


def const(symbol: str) -> Term:
    return Term(symbol)


def unary(op: str, child: Node) -> Term:
    return Term(op, (child,))


def binary(op: str, left: Node, right: Node) -> Term:
    return Term(op, (left, right))


class ParseError(ValueError):
    def __init__(self, position: int, message: str) -> None:
        super().__init__(f"position {position}: {message}")
        self.position = position
        self.message = message


class UnboundLetter(KeyError):
    pass


class InvalidParameter(ValueError):
    pass


# ---------------------------------------------------------------- parsing


class _Parser:
    def __init__(self, text: str, variables: bool) -> None:
        self.tokens: List[Tuple[int, str]] = [
            (pos, ch) for pos, ch in enumerate(text) if not ch.isspace()
        ]
        self.end = len(text)
        self.i = 0
        self.variables = variables

    def peek(self) -> Optional[str]:
        if self.i < len(self.tokens):
            return self.tokens[self.i][1]
        return None

    def pos(self) -> int:
        if self.i < len(self.tokens):
            return self.tokens[self.i][0]
        return self.end

    def is_atom_start(self, ch: Optional[str]) -> bool:
        if ch is None:
            return False
        return (
            ch in LETTERS
            or ch in CONSTANTS
            or ch in "(!"
            or (self.variables and ch in VARIABLES)
        )

    def parse(self) -> Node:
        if not self.tokens:
            raise ParseError(0, "empty expression")
        node = self.sum()
        if self.i != len(self.tokens):
            ch = self.peek()
            if ch == ")":
                raise ParseError(self.pos(), "unbalanced ')'")
            raise ParseError(self.pos(), f"unexpected token {ch!r}")
        return node

    def sum(self) -> Node:
        node = self.product()
        while self.peek() == OR:
            self.i += 1
            node = Term(OR, (node, self.product()))
        return node

    def product(self) -> Node:
        node = self.negation()
        while True:
            ch = self.peek()
            if ch == AND:
                self.i += 1
            elif not self.is_atom_start(ch):
                return node
            node = Term(AND, (node, self.negation()))

    def negation(self) -> Node:
        depth = 0
        while self.peek() == NOT:
            self.i += 1
            depth += 1
        node = self.atom()
        for _ in range(depth):
            node = Term(NOT, (node,))
        return node

    def atom(self) -> Node:
        ch = self.peek()
        pos = self.pos()
        if ch is None:
            raise ParseError(pos, "expression ends where an operand is expected")
        if ch == "(":
            self.i += 1
            node = self.sum()
            if self.peek() != ")":
                raise ParseError(self.pos(), "missing ')'")
            self.i += 1
            return node
        if ch in LETTERS or ch in CONSTANTS:
            self.i += 1
            return Term(ch)
        if self.variables and ch in VARIABLES:
            self.i += 1
            return Var(ch)
        if ch in (OR, AND, ")"):
            raise ParseError(pos, f"operand expected before {ch!r}")
        raise ParseError(pos, f"unknown token {ch!r}")


def parse(text: str, variables: bool = False) -> Node:
    """Parse an expression; with ``variables`` the letters x, y, z are variables."""
    return _Parser(text, variables).parse()


# ---------------------------------------------------------------- printing


def _prec(node: Node) -> int:
    if isinstance(node, Term) and node.args:
        return _PREC[node.op]
    return 4


def to_string(node: Node) -> str:
    out: List[str] = []
    _emit(node, out)
    return "".join(out)


def _emit(node: Node, out: List[str]) -> None:
    if isinstance(node, Var) or not node.args:
        out.append(node.op if isinstance(node, Term) else node.name)
        return
    if node.arity == 1:
        out.append(node.op)
        _wrap(node.args[0], _prec(node.args[0]) < 3, out)
        return
    left, right = node.args
    mine = _PREC.get(node.op, 0)
    _wrap(left, _prec(left) < mine, out)
    out.append(" + " if node.op == OR else "" if node.op == AND else f" {node.op} ")
    _wrap(right, _prec(right) <= mine, out)


def _wrap(node: Node, parens: bool, out: List[str]) -> None:
    if parens:
        out.append("(")
        _emit(node, out)
        out.append(")")
    else:
        _emit(node, out)


# ---------------------------------------------------------------- measures


def polish_size(node: Node) -> int:
    """Number of symbols of ``node`` written in Polish notation."""
    count = 0
    stack = [node]
    while stack:
        n = stack.pop()
        count += 1
        if isinstance(n, Term):
            stack.extend(n.args)
    return count


def letters(node: Node) -> List[str]:
    """Distinct letters of ``node`` in alphabetical order."""
    seen = set()
    stack = [node]
    while stack:
        n = stack.pop()
        if isinstance(n, Term):
            if not n.args and n.op not in CONSTANTS:
                seen.add(n.op)
            stack.extend(n.args)
    return sorted(seen)


def variables(node: Node) -> List[str]:
    seen = set()
    stack = [node]
    while stack:
        n = stack.pop()
        if isinstance(n, Var):
            seen.add(n.name)
        else:
            stack.extend(n.args)
    return sorted(seen)


def subterms(node: Node) -> Iterator[Node]:
    """Post-order traversal, children left to right."""
    stack: List[Tuple[Node, bool]] = [(node, False)]
    while stack:
        n, expanded = stack.pop()
        if expanded or isinstance(n, Var) or not n.args:
            yield n
            continue
        stack.append((n, True))
        for child in reversed(n.args):
            stack.append((child, False))


# ---------------------------------------------------------------- semantics


def evaluate(node: Node, assignment: Mapping[str, int]) -> int:
    """Boolean value of ``node``; letters are looked up in ``assignment``."""
    values: List[int] = []
    for n in subterms(node):
        if isinstance(n, Var):
            raise UnboundLetter(n.name)
        if not n.args:
            if n.op == "0":
                values.append(0)
            elif n.op == "1":
                values.append(1)
            else:
                try:
                    values.append(1 if assignment[n.op] else 0)
                except KeyError:
                    raise UnboundLetter(n.op) from None
        elif n.op == NOT:
            values.append(1 - values.pop())
        else:
            r = values.pop()
            l = values.pop()
            values.append(l & r if n.op == AND else l | r)
    return values[0]


def truth_table(node: Node, names: Iterable[str]) -> int:
    """Truth table of ``node`` over ``names`` packed into one integer.

    Bit ``k`` holds the value under the assignment where ``names[j]`` is set
    iff bit ``j`` of ``k`` is set.
    """
    names = list(names)
    n = len(names)
    full = (1 << (1 << n)) - 1
    columns: Dict[str, int] = {}
    for j, name in enumerate(names):
        # period 2^(j+1): 2^j zeros then 2^j ones
        block = ((1 << (1 << j)) - 1) << (1 << j)
        pattern = 0
        period = 1 << (j + 1)
        for start in range(0, 1 << n, period):
            pattern |= block << start
        columns[name] = pattern
    values: List[int] = []
    for t in subterms(node):
        if isinstance(t, Var):
            raise UnboundLetter(t.name)
        if not t.args:
            if t.op == "0":
                values.append(0)
            elif t.op == "1":
                values.append(full)
            elif t.op in columns:
                values.append(columns[t.op])
            else:
                raise UnboundLetter(t.op)
        elif t.op == NOT:
            values.append(full ^ values.pop())
        else:
            r = values.pop()
            l = values.pop()
            values.append(l & r if t.op == AND else l | r)
    return values[0]


# ---------------------------------------------------------------- generation

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """The splitmix64 generator.

    state += 0x9E3779B97F4A7C15
    z = (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)                      (all arithmetic mod 2**64)

    ``below(n)`` is ``next() % n``.
    """

    def __init__(self, seed: int) -> None:
        self.state = seed & _MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        return self.next() % n


def random_expr(
    seed: int, n_letters: int, target_size: int, const_odds: int = 8
) -> Term:
    """Random expression of exactly ``target_size`` symbols.

    A leaf is one of the first ``n_letters`` letters, or with probability
    ``1/const_odds`` the constant 0 or 1 (``const_odds=0`` disables constants).
    A budget of 2 is a negated leaf; larger budgets are a negation with
    probability 1/4, otherwise a sum or product whose left operand gets a
    uniform share in ``[1, budget - 2]``.
    """
    if not 1 <= n_letters <= len(LETTERS):
        raise InvalidParameter(f"n_letters must be in 1..{len(LETTERS)}")
    if target_size < 1:
        raise InvalidParameter("target_size must be at least 1")
    rng = SplitMix64(seed)
    return _grow(rng, n_letters, target_size, const_odds)


def _grow(rng: SplitMix64, n_letters: int, budget: int, const_odds: int) -> Term:
    if budget == 1:
        if const_odds and rng.below(const_odds) == 0:
            return Term(CONSTANTS[rng.below(2)])
        return Term(LETTERS[rng.below(n_letters)])
    if budget == 2 or rng.below(4) == 0:
        return Term(NOT, (_grow(rng, n_letters, budget - 1, const_odds),))
    op = (AND, OR)[rng.below(2)]
    left = 1 + rng.below(budget - 2)
    return Term(
        op,
        (
            _grow(rng, n_letters, left, const_odds),
            _grow(rng, n_letters, budget - 1 - left, const_odds),
        ),
    )
