"""Logical isotropy groups of free models of a combined theory.

A candidate is a closed term over Σ1 ∪ Σ2 ∪ {y1..yn} ∪ {x}.  It belongs to
the isotropy group when it commutes generically with every function symbol
and has a two-sided inverse under substitution into x.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Union

from .combine import ClassId, Combination
from .solvers import (
    INDETERMINATE,
    Theory,
    Verdict,
    enumerate_terms,
    is_constant_symbol,
    is_projection,
)
from .terms import (
    FUNCTION_LAYERS,
    X,
    XT,
    Layer,
    Symbol,
    Term,
    TermError,
    indeterminate,
    print_term,
    substitute_x,
)

DEFAULT_SIZE_BOUND = 7
DEFAULT_INVERSE_BOUND = 9


@dataclass(frozen=True)
class Member:
    inverse: Term
    kind = "Member"


@dataclass(frozen=True)
class RefutedCommutation:
    symbol: Symbol
    kind = "RefutedCommutation"


@dataclass(frozen=True)
class RefutedInvertibility:
    reason: str = "t[x1/x] = t[x2/x] is provable, so t ignores x"
    kind = "RefutedInvertibility"


@dataclass(frozen=True)
class InvertibilityUnknown:
    bound: int
    kind = "InvertibilityUnknown"


MembershipVerdict = Union[Member, RefutedCommutation, RefutedInvertibility, InvertibilityUnknown]


def check_candidate(comb: Combination, t: Term) -> Term:
    if not t.ground:
        raise TermError("candidate must be a closed term")
    if t.indets - {X}:
        names = ", ".join(sorted(s.name for s in t.indets - {X}))
        raise TermError(f"candidate may only use the indeterminate x (found {names})")
    n = comb.generator_count
    for sym in _symbols(t):
        if sym.layer is Layer.S3 and int(sym.name[1:]) > n and not comb.table.auto_generators:
            raise TermError(f"generator {sym} exceeds n = {n}")
    return t


def _symbols(t: Term):
    stack = [t]
    while stack:
        n = stack.pop()
        yield n.head
        stack.extend(n.args)


def commutes_generically(comb: Combination, t: Term, f: Symbol) -> Verdict:
    """``t[f(x1..xm)/x] = f(t[x1/x], ..., t[xm/x])``?  Nullary f imposes nothing."""
    m = f.arity
    if m == 0:
        return Verdict.EQUAL
    xs = [Term(indeterminate(i)) for i in range(1, m + 1)]
    lhs = substitute_x(t, Term(f, xs))
    rhs = Term(f, [substitute_x(t, xi) for xi in xs])
    return comb.decide(lhs, rhs, frozenset(range(1, m + 1)))


_enum_cache: "weakref.WeakKeyDictionary[Combination, Dict[int, List[Term]]]" = \
    weakref.WeakKeyDictionary()


def candidate_terms(comb: Combination, max_size: int) -> Iterator[Term]:
    """Closed terms over Σ1 ∪ Σ2 ∪ Σ3 ∪ {x} by node count, deterministic order."""
    cache = _enum_cache.setdefault(comb, {})
    if max_size not in cache:
        leaves = [XT] + [Term(g) for g in comb.table.generators()]
        ops = [s for lay in FUNCTION_LAYERS for s in comb.table.symbols(lay)]
        cache[max_size] = list(enumerate_terms(ops, leaves, max_size))
    return iter(cache[max_size])


def is_inverse(comb: Combination, t: Term, w: Term) -> bool:
    j0 = frozenset((0,))
    return (comb.decide(substitute_x(t, w), XT, j0) is Verdict.EQUAL
            and comb.decide(substitute_x(w, t), XT, j0) is Verdict.EQUAL)


def find_inverse(comb: Combination, t: Term, bound: int,
                 hints: Sequence[Term] = ()) -> Optional[Term]:
    """First ``w`` (hints, then terms of at most ``bound`` nodes) inverse to ``t``."""
    if bound < 1:
        raise ValueError("bound must be >= 1")
    for w in hints:
        if is_inverse(comb, t, w):
            return w
    trivial = comb.is_trivial_theory()
    tried: set = set()
    for w in candidate_terms(comb, bound):
        # an x-free w makes t[w/x] x-free, which equals x only in a trivial theory
        if not trivial and X not in w.indets:
            continue
        c = comb.interpret(w)
        if c in tried:
            continue
        tried.add(c)
        if is_inverse(comb, t, w):
            return w
    return None


def is_member(comb: Combination, t: Term, inverse_bound: int = DEFAULT_INVERSE_BOUND,
              inverse_hints: Sequence[Term] = ()) -> MembershipVerdict:
    check_candidate(comb, t)
    for f in comb.function_symbols():
        if commutes_generically(comb, t, f) is Verdict.NOT_EQUAL:
            return RefutedCommutation(f)
    if not comb.is_trivial_theory():
        x1, x2 = Term(indeterminate(1)), Term(indeterminate(2))
        if comb.decide(substitute_x(t, x1), substitute_x(t, x2),
                       frozenset((1, 2))) is Verdict.EQUAL:
            return RefutedInvertibility()
    w = find_inverse(comb, t, inverse_bound, inverse_hints)
    if w is None:
        return InvertibilityUnknown(inverse_bound)
    return Member(w)


def compose(a: Term, b: Term) -> Term:
    """Group multiplication: substitute ``b`` into ``x`` of ``a``."""
    return substitute_x(a, b)


@dataclass
class GroupMember:
    class_id: ClassId
    term: Term
    inverse: Term


@dataclass
class GroupReport:
    generators_count: int
    size_bound: int
    inverse_bound: int
    members: List[GroupMember] = field(default_factory=list)
    flagged: List[Term] = field(default_factory=list)
    candidates: int = 0
    classes: int = 0
    refuted_commutation: int = 0
    refuted_invertibility: int = 0
    closure_gaps: int = 0  # products of members not found among the members

    @property
    def trivial(self) -> bool:
        return len(self.members) == 1 and not self.flagged

    def as_dict(self) -> dict:
        return {
            "generators": self.generators_count,
            "size_bound": self.size_bound,
            "inverse_bound": self.inverse_bound,
            "candidates": self.candidates,
            "classes": self.classes,
            "refuted_commutation": self.refuted_commutation,
            "refuted_invertibility": self.refuted_invertibility,
            "members": [{"term": print_term(m.term), "inverse": print_term(m.inverse)}
                        for m in self.members],
            "flagged": [{"term": print_term(t), "verdict": "InvertibilityUnknown",
                         "bound": self.inverse_bound} for t in self.flagged],
            "closure_gaps": self.closure_gaps,
            "trivial": self.trivial,
        }


def enumerate_group(comb: Combination, size_bound: int = DEFAULT_SIZE_BOUND,
                    inverse_bound: int = DEFAULT_INVERSE_BOUND) -> GroupReport:
    """Explore the isotropy group over candidates of at most ``size_bound`` nodes."""
    report = GroupReport(comb.generator_count, size_bound, inverse_bound)
    trivial = comb.is_trivial_theory()
    x_class = comb.interpret(XT)
    reps: Dict[ClassId, Term] = {x_class: XT}
    for t in candidate_terms(comb, size_bound):
        if trivial:
            # a trivial theory proves every candidate equal to x
            report.candidates += 1
            continue
        if X not in t.indets:
            continue
        report.candidates += 1
        reps.setdefault(comb.interpret(t), t)
    report.classes = len(reps)
    for c, t in reps.items():
        v = is_member(comb, t, inverse_bound)
        if isinstance(v, Member):
            report.members.append(GroupMember(c, t, v.inverse))
        elif isinstance(v, RefutedCommutation):
            report.refuted_commutation += 1
        elif isinstance(v, RefutedInvertibility):
            report.refuted_invertibility += 1
        else:
            report.flagged.append(t)
    member_classes = {m.class_id for m in report.members}
    for a in report.members:
        for b in report.members:
            if comb.interpret(compose(a.term, b.term)) not in member_classes:
                report.closure_gaps += 1
    return report


def global_isotropy(comb: Combination, size_bound: int = DEFAULT_SIZE_BOUND,
                    inverse_bound: int = DEFAULT_INVERSE_BOUND) -> GroupReport:
    """Isotropy of the initial model (no generators)."""
    return enumerate_group(comb.with_generators(0), size_bound, inverse_bound)


# -- hypotheses -------------------------------------------------------------

@dataclass
class SymbolCheck:
    symbol: Symbol
    projection: object  # 1-based index, None, or INDETERMINATE
    constant: Verdict

    @property
    def neither(self) -> bool:
        return self.projection is None and self.constant is Verdict.NOT_EQUAL

    @property
    def excluded(self) -> bool:
        """Known to be a projection or constant."""
        return isinstance(self.projection, int) or self.constant is Verdict.EQUAL

    @property
    def undetermined(self) -> bool:
        return not self.neither and not self.excluded


@dataclass
class HypothesisReport:
    layer: Layer
    theory: Optional[str]
    symbols: List[SymbolCheck]
    status: str  # "holds" | "violated" | "unknown"
    reason: str

    def as_dict(self) -> dict:
        return {
            "layer": int(self.layer),
            "theory": self.theory,
            "status": self.status,
            "reason": self.reason,
            "symbols": [{
                "symbol": s.symbol.name,
                "arity": s.symbol.arity,
                "projection": (None if s.projection is None else
                               "Unknown" if s.projection is INDETERMINATE else s.projection),
                "constant": str(s.constant),
            } for s in self.symbols],
        }


def check_theory_hypothesis(th: Optional[Theory], layer: Layer,
                            witness_budget: int | None = None) -> HypothesisReport:
    if th is None:
        return HypothesisReport(layer, None, [], "violated",
                                "empty theory: no function symbols at all")
    checks = []
    for f in th.function_symbols():
        const = (is_constant_symbol(th, f) if witness_budget is None
                 else is_constant_symbol(th, f, witness_budget))
        checks.append(SymbolCheck(f, is_projection(th, f), const))
    good = [c for c in checks if c.neither]
    if good:
        return HypothesisReport(layer, th.name, checks, "holds",
                                f"{good[0].symbol} is neither constant nor a projection")
    if not checks:
        return HypothesisReport(layer, th.name, checks, "violated", "no function symbols")
    if any(c.undetermined for c in checks):
        return HypothesisReport(layer, th.name, checks, "unknown",
                                "some symbols could not be classified")
    parts = []
    for c in checks:
        if isinstance(c.projection, int):
            parts.append(f"{c.symbol} is a projection")
        else:
            parts.append(f"{c.symbol} is constant")
    return HypothesisReport(layer, th.name, checks, "violated", "; ".join(parts))


def check_hypotheses(comb: Combination) -> List[HypothesisReport]:
    return [check_theory_hypothesis(comb.theory(lay), lay) for lay in FUNCTION_LAYERS]


def hypotheses_hold(reports: Sequence[HypothesisReport]) -> bool:
    return all(r.status == "holds" for r in reports)
