"""Closed terms over the layered signature and their syntactic machinery.

Terms are hash-consed: constructing a term that already exists returns the
existing object, so syntactic equality is identity.  Every node caches its
size, rank and the set of indeterminates it contains.
"""

from __future__ import annotations

import os
import re
import threading
import weakref
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence

from .sexpr import Atom, SexprError, SList, read_one

DEFAULT_MAX_TERM_NODES = 10_000


class Layer(IntEnum):
    S1 = 1
    S2 = 2
    S3 = 3  # generators y1..yn
    S4 = 4  # indeterminates x, x1, x2, ...

    def __str__(self) -> str:
        return self.name


FUNCTION_LAYERS = (Layer.S1, Layer.S2)


class TermError(ValueError):
    pass


class TermSyntaxError(TermError):
    def __init__(self, message: str, pos: int | None = None):
        if pos is not None:
            message = f"{message} (at position {pos})"
        super().__init__(message)
        self.pos = pos


class UnknownSymbolError(TermSyntaxError):
    pass


class ArityError(TermSyntaxError):
    pass


class PureTermError(TermError):
    """Raised when an operation needs an impure term."""


class TermTooLarge(TermError):
    pass


class SignatureError(TermError):
    pass


_max_nodes = int(os.environ.get("ISOKIT_MAX_TERM_NODES", DEFAULT_MAX_TERM_NODES))


def max_term_nodes() -> int:
    return _max_nodes


def set_max_term_nodes(n: int) -> None:
    global _max_nodes
    if n < 1:
        raise ValueError("term size cap must be positive")
    _max_nodes = n


@dataclass(frozen=True)
class Symbol:
    name: str
    arity: int
    layer: Layer

    def __post_init__(self):
        if self.arity < 0:
            raise SignatureError(f"negative arity for {self.name}")
        if self.layer in (Layer.S3, Layer.S4) and self.arity != 0:
            raise SignatureError(f"{self.name}: layer {self.layer} symbols must be nullary")

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Var:
    """Variable leaf of an open term (axioms, contexts)."""

    name: str
    arity = 0
    layer = None

    def __str__(self) -> str:
        return "?" + self.name


@dataclass(frozen=True)
class Opaque:
    """Free constant that is not part of any signature.

    Solvers see these as distinct free generators; the combination layer
    uses them to stand for congruence classes of alien subterms.
    """

    key: object
    label: str = field(default="", compare=False)
    arity = 0
    layer = None

    def __str__(self) -> str:
        return "#" + (self.label or str(self.key))


Head = Symbol | Var | Opaque

X = Symbol("x", 0, Layer.S4)


def indeterminate(i: int) -> Symbol:
    """x for i == 0, otherwise x_i."""
    if i < 0:
        raise ValueError("indeterminate index must be >= 0")
    return X if i == 0 else Symbol(f"x{i}", 0, Layer.S4)


def indeterminate_index(sym: Symbol) -> int:
    if sym.layer is not Layer.S4:
        raise ValueError(f"{sym} is not an indeterminate")
    return 0 if sym.name == "x" else int(sym.name[1:])


def generator(j: int) -> Symbol:
    if j < 1:
        raise ValueError("generator index must be >= 1")
    return Symbol(f"y{j}", 0, Layer.S3)


_intern: "weakref.WeakValueDictionary[tuple, Term]" = weakref.WeakValueDictionary()
_intern_lock = threading.Lock()

_EMPTY: FrozenSet[Symbol] = frozenset()


class Term:
    """Interned first-order term.  ``Term(head, args)`` returns the shared node."""

    __slots__ = ("head", "args", "size", "rank", "ground", "indets", "__weakref__")

    head: Head
    args: tuple
    size: int
    rank: Optional[int]
    ground: bool
    indets: FrozenSet[Symbol]

    def __new__(cls, head: Head, args: Sequence["Term"] = ()):
        args = tuple(args)
        key = (head, args)
        t = _intern.get(key)
        if t is not None:
            return t
        if len(args) != head.arity:
            raise ArityError(f"{head} expects {head.arity} argument(s), got {len(args)}")
        size = 1
        for a in args:
            size += a.size
        if size > _max_nodes:
            raise TermTooLarge(f"term has {size} nodes, cap is {_max_nodes}")
        t = object.__new__(cls)
        t.head = head
        t.args = args
        t.size = size
        if isinstance(head, Symbol):
            t.ground = all(a.ground for a in args)
            if head.layer is Layer.S4:
                t.indets = frozenset((head,))
            elif not args:
                t.indets = _EMPTY
            elif len(args) == 1:
                t.indets = args[0].indets
            else:
                t.indets = frozenset().union(*(a.indets for a in args))
        else:
            t.ground = False
            t.indets = _EMPTY
        if t.ground:
            r = 0
            for a in args:
                ar = a.rank if a.head.layer is head.layer else a.rank + 1
                if ar > r:
                    r = ar
            t.rank = r
        else:
            t.rank = None
        with _intern_lock:
            existing = _intern.get(key)
            if existing is not None:
                return existing
            _intern[key] = t
        return t

    def __reduce__(self):
        return (Term, (self.head, self.args))

    def __repr__(self) -> str:
        return f"Term({print_term(self)!r})"

    def __str__(self) -> str:
        return print_term(self)

    @property
    def layer(self) -> Optional[Layer]:
        """Layer of the root symbol (None for variables and opaque constants)."""
        return self.head.layer

    def is_constant(self) -> bool:
        return not self.args


def app(head: Head, *args: Term) -> Term:
    return Term(head, args)


def const(head: Head) -> Term:
    return Term(head, ())


XT = Term(X)


def fold(t: Term, fn: Callable[[Term, list], object]) -> object:
    """Bottom-up evaluation ``fn(node, child_values)``, once per distinct subterm.

    Iterative, so arbitrarily deep terms are safe.
    """
    memo: Dict[Term, object] = {}
    stack = [t]
    while stack:
        n = stack[-1]
        if n in memo:
            stack.pop()
            continue
        pending = [a for a in n.args if a not in memo]
        if pending:
            stack.extend(pending)
            continue
        stack.pop()
        memo[n] = fn(n, [memo[a] for a in n.args])
    return memo[t]


def subterms(t: Term) -> Iterator[Term]:
    """Pre-order walk, left to right, with repetitions."""
    stack = [t]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(n.args))


def replace_leaves(t: Term, mapping: Dict[Head, Term] | Callable[[Term], Optional[Term]]) -> Term:
    if callable(mapping):
        leaf = mapping
    else:
        def leaf(n: Term) -> Optional[Term]:
            return mapping.get(n.head)

    def step(n: Term, kids: list) -> Term:
        if not n.args:
            r = leaf(n)
            return n if r is None else r
        if all(k is a for k, a in zip(kids, n.args)):
            return n
        return Term(n.head, kids)

    return fold(t, step)  # type: ignore[return-value]


# -- printing and parsing ---------------------------------------------------

def print_term(t: Term) -> str:
    def step(n: Term, kids: list) -> str:
        if not n.args:
            return str(n.head)
        return "(" + str(n.head) + " " + " ".join(kids) + ")"

    return fold(t, step)  # type: ignore[return-value]


_RESERVED = re.compile(r"^(x|x[1-9][0-9]*|y[1-9][0-9]*)$")
_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_\-+*/<>=!.']*$")


def is_reserved_name(name: str) -> bool:
    return bool(_RESERVED.match(name))


class SignatureTable:
    """All symbols of Σ1 ∪ Σ2 ∪ Σ3 ∪ Σ4 known to one session.

    ``generator_count=None`` makes the generator set grow on demand (any
    ``y<j>`` is accepted); otherwise only y1..yn are declared.  Indeterminates
    ``x<k>`` are always created on demand.
    """

    def __init__(self, symbols: Iterable[Symbol] = (), generator_count: int | None = 0):
        self._by_name: Dict[str, Symbol] = {}
        self._order: List[Symbol] = []
        self._auto_generators = generator_count is None
        self._n = 0
        for s in symbols:
            self.add(s)
        if generator_count is not None:
            if generator_count < 0:
                raise SignatureError("generator count must be >= 0")
            self._n = generator_count

    @property
    def generator_count(self) -> int:
        return self._n

    @property
    def auto_generators(self) -> bool:
        return self._auto_generators

    def add(self, sym: Symbol) -> Symbol:
        if sym.layer not in FUNCTION_LAYERS:
            raise SignatureError(f"only S1/S2 symbols are declared explicitly, got {sym}")
        if is_reserved_name(sym.name):
            raise SignatureError(f"symbol name {sym.name!r} is reserved")
        if not _IDENT.match(sym.name):
            raise SignatureError(f"bad symbol name {sym.name!r}")
        old = self._by_name.get(sym.name)
        if old is not None:
            if old == sym:
                return old
            raise SignatureError(f"symbol {sym.name!r} declared twice ({old.layer} and {sym.layer})")
        self._by_name[sym.name] = sym
        self._order.append(sym)
        return sym

    def lookup(self, name: str) -> Optional[Symbol]:
        sym = self._by_name.get(name)
        if sym is not None:
            return sym
        if not _RESERVED.match(name):
            return None
        if name[0] == "x":
            return X if name == "x" else Symbol(name, 0, Layer.S4)
        j = int(name[1:])
        if self._auto_generators:
            self._n = max(self._n, j)
            return generator(j)
        if j <= self._n:
            return generator(j)
        return None

    def symbols(self, layer: Layer | None = None) -> List[Symbol]:
        """Declared S1/S2 symbols in declaration order."""
        return [s for s in self._order if layer is None or s.layer is layer]

    def function_symbols(self) -> List[Symbol]:
        return [s for s in self._order if s.arity > 0]

    def generators(self) -> List[Symbol]:
        return [generator(j) for j in range(1, self._n + 1)]


def parse_term(text: str, table: SignatureTable, allow_vars: bool = False) -> Term:
    """Parse prefix syntax such as ``(oplus (otimes y1 y2) x)``.

    With ``allow_vars`` leaves written ``?name`` become variables.
    """
    try:
        tree = read_one(text)
    except SexprError as e:
        raise TermSyntaxError(str(e).rsplit(" (at", 1)[0], e.pos) from None
    return _build(tree, table, allow_vars)


def _atom_head(a: Atom, table: SignatureTable, allow_vars: bool) -> Head:
    if a.text.startswith("?"):
        if not allow_vars:
            raise TermSyntaxError(f"variable {a.text} not allowed in a closed term", a.pos)
        if len(a.text) == 1:
            raise TermSyntaxError("empty variable name", a.pos)
        return Var(a.text[1:])
    sym = table.lookup(a.text)
    if sym is None:
        raise UnknownSymbolError(f"unknown symbol {a.text!r}", a.pos)
    return sym


def _build(tree, table: SignatureTable, allow_vars: bool) -> Term:
    # explicit stack: (sexpr, head, built children)
    def head_of(node):
        if isinstance(node, Atom):
            h = _atom_head(node, table, allow_vars)
            if h.arity != 0:
                raise ArityError(f"{h} expects {h.arity} argument(s), got 0", node.pos)
            return h
        if not node.items:
            raise TermSyntaxError("empty application '()'", node.pos)
        first = node.items[0]
        if not isinstance(first, Atom):
            raise TermSyntaxError("application head must be a symbol", first.pos)
        h = _atom_head(first, table, allow_vars)
        if isinstance(h, Var):
            raise TermSyntaxError("variables cannot be applied", first.pos)
        if h.arity != len(node.items) - 1:
            raise ArityError(
                f"{h} expects {h.arity} argument(s), got {len(node.items) - 1}", node.pos)
        return h

    stack = [(tree, head_of(tree), [])]
    while True:
        node, h, kids = stack[-1]
        children = node.items[1:] if isinstance(node, SList) else ()
        if len(kids) < len(children):
            child = children[len(kids)]
            stack.append((child, head_of(child), []))
            continue
        stack.pop()
        t = Term(h, kids)
        if not stack:
            return t
        stack[-1][2].append(t)


# -- rank, aliens, decomposition -------------------------------------------

def rank(t: Term) -> int:
    if t.rank is None:
        raise TermError("rank is only defined for closed terms over the signature")
    return t.rank


def is_pure(t: Term) -> bool:
    return rank(t) == 0


@dataclass(frozen=True)
class Decomposition:
    """``term == context[v1 := aliens[0], ...]`` with a maximal layer-k context."""

    layer: Layer
    context: Term
    aliens: tuple

    def variables(self) -> List[Var]:
        return [Var(f"v{i}") for i in range(1, len(self.aliens) + 1)]

    def recompose(self, aliens: Sequence[Term] | None = None) -> Term:
        aliens = self.aliens if aliens is None else tuple(aliens)
        mapping = {v: a for v, a in zip(self.variables(), aliens)}
        return replace_leaves(self.context, mapping)


def decompose(t: Term) -> Decomposition:
    if rank(t) == 0:
        raise PureTermError(f"{print_term(t)} is pure")
    k = t.head.layer
    index: Dict[Term, Var] = {}
    aliens: List[Term] = []

    # aliens are numbered in leftmost-outermost (pre-order) order
    for n in _context_walk(t, k):
        if n.head.layer is not k and n not in index:
            index[n] = Var(f"v{len(aliens) + 1}")
            aliens.append(n)

    return Decomposition(k, _rebuild_context(t, k, index), tuple(aliens))


def _context_walk(t: Term, k: Layer) -> Iterator[Term]:
    """Pre-order over the layer-k context; yields aliens without entering them."""
    stack = [t]
    while stack:
        n = stack.pop()
        yield n
        if n.head.layer is k:
            stack.extend(reversed(n.args))


def _rebuild_context(t: Term, k: Layer, index: Dict[Term, Var]) -> Term:
    memo: Dict[Term, Term] = {}
    stack = [t]
    while stack:
        n = stack[-1]
        if n in memo:
            stack.pop()
            continue
        if n.head.layer is not k:
            memo[n] = Term(index[n])
            stack.pop()
            continue
        pending = [a for a in n.args if a not in memo]
        if pending:
            stack.extend(pending)
            continue
        stack.pop()
        memo[n] = Term(n.head, [memo[a] for a in n.args])
    return memo[t]


def aliens(t: Term) -> tuple:
    """Distinct alien subterms in first-occurrence order; empty when pure."""
    if rank(t) == 0:
        return ()
    k = t.head.layer
    seen: Dict[Term, None] = {}
    for n in _context_walk(t, k):
        if n.head.layer is not k:
            seen.setdefault(n, None)
    return tuple(seen)


def all_aliens(t: Term) -> FrozenSet[Term]:
    out: set = set()
    stack = [t]
    while stack:
        for a in aliens(stack.pop()):
            if a not in out:
                out.add(a)
                stack.append(a)
    return frozenset(out)


# -- indeterminates -----------------------------------------------------------

def substitute_x(t: Term, replacement: Term) -> Term:
    """``t[replacement/x]``."""
    if X not in t.indets:
        return t
    return replace_leaves(t, {X: replacement})


def indeterminates(t: Term) -> FrozenSet[Symbol]:
    return t.indets


def collapse_indeterminates(t: Term) -> Term:
    """``t[x/Ind(t)]``: every indeterminate leaf becomes x."""
    if not t.indets or t.indets == {X}:
        return t
    return replace_leaves(t, lambda n: XT if n.head.layer is Layer.S4 else None)


def layers_used(t: Term) -> FrozenSet[Layer]:
    return frozenset(n.head.layer for n in subterms(t))


def print_order_key(t: Term) -> tuple:
    """Total tie-break order used when choosing representatives."""
    return (rank(t), t.size, print_term(t))
