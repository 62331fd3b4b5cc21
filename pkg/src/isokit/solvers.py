"""Word-problem deciders for the component theories.

A component theory lives on one function layer (S1 or S2).  Its solver
decides provable equality between *generalized* terms: terms over the
layer's symbols whose leaves may also be :class:`Opaque` constants, treated
as pairwise distinct free generators.

The algebraic solvers decide by normal-form identity.  Symbols without a
role are either free (uninterpreted) or *defined* by an axiom of the shape
``g(?a, ..., ?b) = rhs`` with distinct variables; defined symbols are
unfolded before normalization.  Projection theories are exactly the free
term algebra plus such definitions.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from . import rewrite
from .sexpr import Atom, SexprError, SList, read_one
from .terms import (
    FUNCTION_LAYERS,
    Layer,
    Opaque,
    SignatureError,
    SignatureTable,
    Symbol,
    Term,
    TermSyntaxError,
    Var,
    fold,
    parse_term,
    print_term,
    replace_leaves,
    subterms,
)

DEFAULT_GENERIC_BUDGET = 20_000
DEFAULT_WITNESS_BUDGET = 5


class Verdict(Enum):
    EQUAL = "Equal"
    NOT_EQUAL = "NotEqual"
    UNKNOWN = "Unknown"

    @classmethod
    def of(cls, equal: bool) -> "Verdict":
        return cls.EQUAL if equal else cls.NOT_EQUAL

    def __str__(self) -> str:
        return self.value


#: is_projection's "could not decide" outcome
INDETERMINATE = Verdict.UNKNOWN


class UnsupportedShape(ValueError):
    """Input or theory violates the structural requirements of a solver."""


class TheoryFormatError(ValueError):
    pass


SOLVER_KINDS = (
    "free-monoid",
    "commutative-monoid",
    "free-group",
    "abelian-group",
    "semilattice",
    "projection",
    "bounded-generic",
)

_ROLE_ALIASES = {"mul": "mul", "product": "mul", "unit": "unit", "inv": "inv", "inverse": "inv"}
_ROLE_ARITY = {"mul": 2, "unit": 0, "inv": 1}
_REQUIRED_ROLES = {
    "free-monoid": ("mul",),
    "commutative-monoid": ("mul",),
    "semilattice": ("mul",),
    "free-group": ("mul", "unit", "inv"),
    "abelian-group": ("mul", "unit", "inv"),
    "projection": (),
    "bounded-generic": (),
}


@dataclass(frozen=True)
class Axiom:
    lhs: Term
    rhs: Term

    def __str__(self) -> str:
        return f"(= {print_term(self.lhs)} {print_term(self.rhs)})"


@dataclass(eq=False)
class Theory:
    name: str
    layer: Layer
    ops: tuple
    axioms: tuple
    solver_kind: str
    roles: Dict[str, Symbol] = field(default_factory=dict)
    generic_budget: int = DEFAULT_GENERIC_BUDGET

    def __post_init__(self):
        if self.layer not in FUNCTION_LAYERS:
            raise TheoryFormatError(f"theory layer must be S1 or S2, got {self.layer}")
        if self.solver_kind not in SOLVER_KINDS:
            raise TheoryFormatError(f"unknown solver kind {self.solver_kind!r}")
        for op in self.ops:
            if op.layer is not self.layer:
                raise TheoryFormatError(f"{op} is not in layer {self.layer}")
        for ax in self.axioms:
            for side in (ax.lhs, ax.rhs):
                for n in subterms(side):
                    if isinstance(n.head, Var):
                        continue
                    if n.head not in self.ops:
                        raise TheoryFormatError(f"axiom {ax} uses {n.head} outside the theory")
        self._solver: Optional[Solver] = None

    @property
    def solver(self) -> "Solver":
        if self._solver is None:
            self._solver = _SOLVERS[self.solver_kind](self)
        return self._solver

    def function_symbols(self) -> List[Symbol]:
        return [s for s in self.ops if s.arity > 0]

    def constants(self) -> List[Symbol]:
        return [s for s in self.ops if s.arity == 0]

    def is_trivial(self) -> Verdict:
        """Does the theory prove ``a = b`` for distinct variables?"""
        a, b = Term(Opaque(("triv", 0), "a")), Term(Opaque(("triv", 1), "b"))
        return decide_component(self, a, b)


# -- solver plumbing ------------------------------------------------------

def _check_shape(theory: Theory, t: Term) -> None:
    for n in subterms(t):
        h = n.head
        if isinstance(h, (Opaque, Var)):
            continue
        if h not in theory.ops:
            raise UnsupportedShape(f"{h} is not a symbol of theory {theory.name}")


def _opaque_atoms(nf) -> set:
    """Opaque constants (and variables) mentioned anywhere in a normal form."""
    out = set()
    stack = [nf]
    while stack:
        x = stack.pop()
        if isinstance(x, (Opaque, Var)):
            out.add(x)
        elif isinstance(x, Term):
            out.update(n.head for n in subterms(x) if isinstance(n.head, (Opaque, Var)))
        elif isinstance(x, (tuple, frozenset)):
            stack.extend(x)
    return out


class Solver:
    exact = True

    def __init__(self, theory: Theory):
        self.theory = theory

    def decide(self, s: Term, t: Term) -> Verdict:
        raise NotImplementedError

    def fingerprint(self, t: Term):
        """Hashable invariant of the provable-equality class, or None."""
        return None


class NormalFormSolver(Solver):
    """Free term algebra modulo definitional axioms; base of the algebraic kinds."""

    def __init__(self, theory: Theory):
        super().__init__(theory)
        self.roles = dict(theory.roles)
        for role in _REQUIRED_ROLES[theory.solver_kind]:
            if role not in self.roles:
                raise UnsupportedShape(f"{theory.solver_kind} needs a {role!r} role binding")
        for role, sym in self.roles.items():
            if sym not in theory.ops or sym.arity != _ROLE_ARITY[role]:
                raise UnsupportedShape(f"role {role} bound to unsuitable symbol {sym}")
        role_syms = set(self.roles.values())
        self.definitions: Dict[Symbol, Tuple[tuple, Term]] = {}
        others = []
        for ax in theory.axioms:
            d = self._as_definition(ax, role_syms)
            if d is None:
                others.append(ax)
            elif d[0] in self.definitions:
                others.append(ax)
            else:
                self.definitions[d[0]] = d[1:]
        self._expanded: Dict[Symbol, Term] = {}
        for sym in self.definitions:
            self._expand_definition(sym, ())
        for ax in others:
            if self.normalize(ax.lhs) != self.normalize(ax.rhs):
                raise UnsupportedShape(
                    f"axiom {ax} is not valid in a {theory.solver_kind} theory")

    @staticmethod
    def _as_definition(ax: Axiom, role_syms) -> Optional[tuple]:
        for lhs, rhs in ((ax.lhs, ax.rhs), (ax.rhs, ax.lhs)):
            h = lhs.head
            if not isinstance(h, Symbol) or h in role_syms or h.arity == 0:
                continue
            vs = [a.head for a in lhs.args]
            if not all(isinstance(v, Var) for v in vs) or len(set(vs)) != len(vs):
                continue
            if any(n.head == h for n in subterms(rhs)):
                continue
            if not set(rewrite.variables(rhs)) <= set(vs):
                continue
            return (h, tuple(vs), rhs)
        return None

    def _expand_definition(self, sym: Symbol, active: tuple) -> Term:
        if sym in self._expanded:
            return self._expanded[sym]
        if sym in active:
            raise UnsupportedShape(f"cyclic definitions through {sym}")
        _, rhs = self.definitions[sym]
        body = self._unfold(rhs, active + (sym,))
        self._expanded[sym] = body
        return body

    def _unfold(self, t: Term, active: tuple = ()) -> Term:
        if not self.definitions:
            return t

        def step(n: Term, kids: list) -> Term:
            d = self.definitions.get(n.head)
            if d is None:
                return n if all(k is a for k, a in zip(kids, n.args)) else Term(n.head, kids)
            body = self._expand_definition(n.head, active)
            return replace_leaves(body, dict(zip(d[0], kids)))

        return fold(t, step)  # type: ignore[return-value]

    # subclasses override the algebra; the base is the free term algebra
    def normalize(self, t: Term):
        return self._unfold(t)

    def decide(self, s: Term, t: Term) -> Verdict:
        _check_shape(self.theory, s)
        _check_shape(self.theory, t)
        return Verdict.of(self.normalize(s) == self.normalize(t))

    def fingerprint(self, t: Term):
        return self.normalize(t)

    def mentions(self, t: Term) -> set:
        """Opaque constants that survive normalization of ``t``."""
        return _opaque_atoms(self.normalize(t))


class AlgebraSolver(NormalFormSolver):
    """Normal forms built by folding role symbols over atoms."""

    def unit_nf(self):
        raise NotImplementedError

    def atom_nf(self, a):
        raise NotImplementedError

    def mul_nf(self, a, b):
        raise NotImplementedError

    def inv_nf(self, a):
        raise NotImplementedError

    def normalize(self, t: Term):
        t = self._unfold(t)
        mul, unit, inv = self.roles.get("mul"), self.roles.get("unit"), self.roles.get("inv")

        def step(n: Term, kids: list):
            h = n.head
            if h == mul:
                return self.mul_nf(kids[0], kids[1])
            if h == unit and unit is not None:
                return self.unit_nf()
            if h == inv and inv is not None:
                return self.inv_nf(kids[0])
            if n.args:
                return self.atom_nf(("app", h, tuple(kids)))
            return self.atom_nf(h)

        return fold(t, step)


class FreeMonoidSolver(AlgebraSolver):
    def unit_nf(self):
        return ()

    def atom_nf(self, a):
        return (a,)

    def mul_nf(self, a, b):
        return a + b


class CommutativeMonoidSolver(AlgebraSolver):
    def unit_nf(self):
        return frozenset()

    def atom_nf(self, a):
        return frozenset(((a, 1),))

    def mul_nf(self, a, b):
        c = Counter(dict(a))
        c.update(dict(b))
        return frozenset(c.items())


class SemilatticeSolver(AlgebraSolver):
    def unit_nf(self):
        return frozenset()

    def atom_nf(self, a):
        return frozenset((a,))

    def mul_nf(self, a, b):
        return a | b


class FreeGroupSolver(AlgebraSolver):
    def unit_nf(self):
        return ()

    def atom_nf(self, a):
        return ((a, 1),)

    def mul_nf(self, a, b):
        # cancel at the junction; both halves are already reduced
        i = 0
        while i < len(a) and i < len(b) and a[-1 - i][0] == b[i][0] and a[-1 - i][1] == -b[i][1]:
            i += 1
        return a[: len(a) - i] + b[i:]

    def inv_nf(self, a):
        return tuple((g, -e) for g, e in reversed(a))


class AbelianGroupSolver(AlgebraSolver):
    def unit_nf(self):
        return frozenset()

    def atom_nf(self, a):
        return frozenset(((a, 1),))

    def mul_nf(self, a, b):
        c = Counter(dict(a))
        for g, e in b:
            c[g] += e
        return frozenset((g, e) for g, e in c.items() if e != 0)

    def inv_nf(self, a):
        return frozenset((g, -e) for g, e in a)


class BoundedGenericSolver(Solver):
    """Bidirectional rewriting search over the raw axioms.  Incomplete."""

    exact = False

    def __init__(self, theory: Theory):
        super().__init__(theory)
        self.rules = rewrite.RuleSet(
            rewrite.rules_from_equations((a.lhs, a.rhs) for a in theory.axioms))
        self.constants = [Term(c) for c in theory.constants()]

    def decide(self, s: Term, t: Term, budget: int | None = None,
               slack: int = rewrite.DEFAULT_SLACK) -> Verdict:
        _check_shape(self.theory, s)
        _check_shape(self.theory, t)
        if s is t:
            return Verdict.EQUAL
        budget = self.theory.generic_budget if budget is None else budget
        pool = rewrite.leaf_pool((s, t), self.constants)
        res = rewrite.bidirectional_search(
            self.rules, s, t, budget, max(s.size, t.size) + slack, pool)
        return Verdict.EQUAL if res.found else Verdict.UNKNOWN


_SOLVERS = {
    "free-monoid": FreeMonoidSolver,
    "commutative-monoid": CommutativeMonoidSolver,
    "semilattice": SemilatticeSolver,
    "free-group": FreeGroupSolver,
    "abelian-group": AbelianGroupSolver,
    "projection": NormalFormSolver,
    "bounded-generic": BoundedGenericSolver,
}


# -- public operations ----------------------------------------------------

def decide_component(th: Theory, s: Term, t: Term) -> Verdict:
    return th.solver.decide(s, t)


def fresh_constants(m: int, tag: str = "c") -> List[Term]:
    return [Term(Opaque((tag, i), f"{tag}{i}")) for i in range(1, m + 1)]


def _check_function_symbol(th: Theory, f: Symbol) -> None:
    if f not in th.ops:
        raise ValueError(f"{f} is not a symbol of theory {th.name}")
    if f.arity < 1:
        raise ValueError(f"{f} is nullary")


def is_projection(th: Theory, f: Symbol):
    """Least 1-based i with ``f(v1..vm) = vi`` provable; None; or INDETERMINATE."""
    _check_function_symbol(th, f)
    cs = fresh_constants(f.arity)
    lhs = Term(f, cs)
    unknown = False
    for i, c in enumerate(cs, 1):
        v = decide_component(th, lhs, c)
        if v is Verdict.EQUAL:
            return i
        if v is Verdict.UNKNOWN:
            unknown = True
    return INDETERMINATE if unknown else None


def is_constant_symbol(th: Theory, f: Symbol, budget: int = DEFAULT_WITNESS_BUDGET) -> Verdict:
    """Is ``f(v1..vm)`` provably equal to some term free of v1..vm?

    Exact for the normal-form solvers: normal forms never gain constants, so
    the normal form of ``f(c1..cm)`` is itself the only witness worth
    checking.  The generic solver searches witnesses up to ``budget`` nodes,
    allowing one extra fresh constant.
    """
    _check_function_symbol(th, f)
    cs = fresh_constants(f.arity)
    lhs = Term(f, cs)
    solver = th.solver
    if isinstance(solver, NormalFormSolver):
        return Verdict.of(not (solver.mentions(lhs) & {c.head for c in cs}))
    extra = fresh_constants(1, "w")
    for w in enumerate_terms(th.ops, extra, budget):
        if decide_component(th, lhs, w) is Verdict.EQUAL:
            return Verdict.EQUAL
    return Verdict.UNKNOWN


def enumerate_terms(ops: Sequence[Symbol], leaves: Sequence[Term], max_size: int) -> Iterator[Term]:
    """All terms over ``ops`` plus ``leaves`` by increasing node count."""
    by_size: Dict[int, List[Term]] = {}
    consts = [Term(s) for s in ops if s.arity == 0] + list(leaves)
    funcs = [s for s in ops if s.arity > 0]
    for size in range(1, max_size + 1):
        level: List[Term] = list(consts) if size == 1 else []
        for f in funcs:
            for split in _compositions(size - 1, f.arity):
                pools = [by_size.get(k, ()) for k in split]
                for args in itertools.product(*pools):
                    level.append(Term(f, args))
        by_size[size] = level
        yield from level


def _compositions(total: int, parts: int) -> Iterator[tuple]:
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def decide_bruteforce(axioms: Sequence[Axiom], s: Term, t: Term, budget: int = 100_000,
                      size_cap: int | None = None, slack: int = rewrite.DEFAULT_SLACK,
                      constants: Iterable[Term] = ()) -> Verdict:
    """Semi-decide ``s = t`` by breadth-first rewriting at all positions.

    Returns EQUAL or UNKNOWN, never NOT_EQUAL.  ``size_cap`` bounds the
    intermediate terms (default: the larger input plus ``slack``).
    """
    if s is t:
        return Verdict.EQUAL
    rules = rewrite.RuleSet(rewrite.rules_from_equations((a.lhs, a.rhs) for a in axioms))
    nullary = {n for a in axioms for side in (a.lhs, a.rhs) for n in subterms(side)
               if not n.args and isinstance(n.head, Symbol)}
    pool = rewrite.leaf_pool((s, t), list(nullary) + list(constants))
    cap = size_cap if size_cap is not None else max(s.size, t.size) + slack
    res = rewrite.bidirectional_search(rules, s, t, budget, cap, pool)
    return Verdict.EQUAL if res.found else Verdict.UNKNOWN


# -- theory files -----------------------------------------------------------

def _fail(msg: str, node=None) -> TheoryFormatError:
    pos = getattr(node, "pos", None)
    return TheoryFormatError(msg if pos is None else f"{msg} (at position {pos})")


def _atom(node, what: str) -> str:
    if not isinstance(node, Atom):
        raise _fail(f"expected {what}", node)
    return node.text


def parse_theory(text: str, source: str = "<theory>") -> Theory:
    """Parse ``(theory <name> (layer k) (ops ...) (axioms ...) (solver ...))``."""
    try:
        tree = read_one(text)
    except SexprError as e:
        raise TheoryFormatError(f"{source}: {e}") from None
    if not isinstance(tree, SList) or len(tree.items) < 2 or \
            not isinstance(tree.items[0], Atom) or tree.items[0].text != "theory":
        raise _fail(f"{source}: expected (theory <name> ...)", tree)
    name = _atom(tree.items[1], "theory name")
    sections: Dict[str, SList] = {}
    for item in tree.items[2:]:
        if not isinstance(item, SList) or not item.items or not isinstance(item.items[0], Atom):
            raise _fail(f"{source}: malformed section", item)
        key = item.items[0].text
        if key in sections:
            raise _fail(f"{source}: duplicate section {key}", item)
        sections[key] = item
    unknown = set(sections) - {"layer", "ops", "axioms", "solver"}
    if unknown:
        raise _fail(f"{source}: unknown section(s) {sorted(unknown)}", tree)
    for key in ("layer", "ops", "solver"):
        if key not in sections:
            raise _fail(f"{source}: missing ({key} ...) section", tree)

    layer_items = sections["layer"].items
    if len(layer_items) != 2 or _atom(layer_items[1], "layer number") not in ("1", "2"):
        raise _fail(f"{source}: layer must be 1 or 2", sections["layer"])
    layer = Layer(int(layer_items[1].text))

    ops: List[Symbol] = []
    table = SignatureTable(generator_count=0)
    for op in sections["ops"].items[1:]:
        if not isinstance(op, SList) or len(op.items) != 2:
            raise _fail(f"{source}: op entries look like (<sym> <arity>)", op)
        sym_name, arity = _atom(op.items[0], "symbol"), _atom(op.items[1], "arity")
        if not arity.isdigit():
            raise _fail(f"{source}: bad arity {arity!r}", op.items[1])
        try:
            ops.append(table.add(Symbol(sym_name, int(arity), layer)))
        except SignatureError as e:
            raise _fail(f"{source}: {e}", op) from None

    axioms: List[Axiom] = []
    if "axioms" in sections:
        for ax in sections["axioms"].items[1:]:
            if not isinstance(ax, SList) or len(ax.items) != 3 or \
                    not isinstance(ax.items[0], Atom) or ax.items[0].text != "=":
                raise _fail(f"{source}: axioms look like (= <lhs> <rhs>)", ax)
            sides = []
            for side in ax.items[1:]:
                try:
                    sides.append(parse_term(_dump(side), table, allow_vars=True))
                except TermSyntaxError as e:
                    raise _fail(f"{source}: axiom side {_dump(side)}: {e}", side) from None
            axioms.append(Axiom(*sides))

    solver_items = sections["solver"].items
    if len(solver_items) < 2:
        raise _fail(f"{source}: (solver <kind> <role-bindings>...)", sections["solver"])
    kind = _atom(solver_items[1], "solver kind")
    roles: Dict[str, Symbol] = {}
    for binding in solver_items[2:]:
        if not isinstance(binding, SList) or len(binding.items) != 2:
            raise _fail(f"{source}: role bindings look like (<role> <sym>)", binding)
        role, sym_name = _atom(binding.items[0], "role"), _atom(binding.items[1], "symbol")
        if role not in _ROLE_ALIASES:
            raise _fail(f"{source}: unknown role {role!r}", binding)
        sym = table.lookup(sym_name)
        if sym is None:
            raise _fail(f"{source}: role bound to undeclared symbol {sym_name!r}", binding)
        roles[_ROLE_ALIASES[role]] = sym
    try:
        th = Theory(name, layer, tuple(ops), tuple(axioms), kind, roles)
        th.solver  # validate the structural requirements now
    except UnsupportedShape as e:
        raise TheoryFormatError(f"{source}: {e}") from None
    return th


def _dump(node) -> str:
    from .sexpr import dump
    return dump(node)


def load_theory(path: str | Path) -> Theory:
    """Load a theory file; bare names fall back to the bundled theories."""
    p = Path(path)
    if not p.exists():
        bundled = _bundled_path(str(path))
        if bundled is None:
            raise FileNotFoundError(f"no theory file {path!s}")
        p = bundled
    return parse_theory(p.read_text(), str(p))


def _bundled_path(name: str) -> Optional[Path]:
    base = Path(__file__).parent / "theories"
    for cand in (base / name, base / f"{name}.thy"):
        if cand.exists():
            return cand
    return None


def bundled_theories() -> List[str]:
    base = Path(__file__).parent / "theories"
    return sorted(p.stem for p in base.glob("*.thy"))
