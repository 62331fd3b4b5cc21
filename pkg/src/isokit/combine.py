"""Deciding equality in the disjoint combination of two theories.

Closed terms are sorted into classes of the layered congruence ``≅``: two
terms are related when their roots share a layer and their alien-abstracted
forms are provably equal in that layer's theory, with the classes of the
aliens standing in as free constants.  The classes carry an algebra whose
operations collapse a term onto one of its aliens whenever the component
theory proves them equal; interpreting two terms in that algebra and
comparing the resulting classes decides provable equality in the
combination.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence

from .solvers import Theory, Verdict, decide_component
from .terms import (
    FUNCTION_LAYERS,
    Layer,
    Opaque,
    SignatureTable,
    Symbol,
    Term,
    TermError,
    indeterminate_index,
    parse_term,
    print_term,
    subterms,
)


class AmbiguityError(RuntimeError):
    """A component solver answered Unknown where a classification was needed."""


class IndexSetViolation(ValueError):
    pass


class InternalError(RuntimeError):
    pass


class _All:
    def __repr__(self) -> str:
        return "ALL"

    def __contains__(self, item) -> bool:
        return True


ALL = _All()

IndexSet = FrozenSet[int] | _All


def index_set(indices: Iterable[int] | _All) -> IndexSet:
    if indices is ALL:
        return ALL
    return frozenset(indices)


@dataclass(eq=False)
class ClassId:
    """One ``≅``-class.  Identity is object identity."""

    index: int
    layer: Layer
    representative: Term
    abstraction: Term  # abstracted form used for comparisons
    opaque: Term = field(init=False, repr=False)

    def __post_init__(self):
        self.opaque = Term(Opaque(self, f"C{self.index}"))
        self._rep_key = (self.representative.rank, self.representative.size, None)

    def __repr__(self) -> str:
        return f"ClassId(C{self.index}, {self.layer}, {print_term(self.representative)})"

    def __str__(self) -> str:
        return f"C{self.index}"

    def _offer(self, t: Term) -> None:
        """Keep the representative minimal by (rank, size, printed form)."""
        key = (t.rank, t.size)
        if key > self._rep_key[:2]:
            return
        if key == self._rep_key[:2]:
            mine = self._rep_key[2]
            if mine is None:
                mine = print_term(self.representative)
            theirs = print_term(t)
            if theirs >= mine:
                self._rep_key = key + (mine,)
                return
            self._rep_key = key + (theirs,)
        else:
            self._rep_key = key + (None,)
        self.representative = t


class ClassRegistry:
    """Carrier of the quotient algebra: every class seen so far."""

    def __init__(self):
        self.classes: List[ClassId] = []
        self.by_layer: Dict[Layer, List[ClassId]] = {lay: [] for lay in Layer}
        self.buckets: Dict[tuple, List[ClassId]] = {}
        self.memo: Dict[Term, ClassId] = {}
        self.interpreted: Dict[Term, ClassId] = {}
        self.lock = threading.RLock()

    def new_class(self, layer: Layer, rep: Term, abstraction: Term, fingerprint) -> ClassId:
        c = ClassId(len(self.classes), layer, rep, abstraction)
        self.classes.append(c)
        self.by_layer[layer].append(c)
        self.buckets.setdefault((layer, fingerprint), []).append(c)
        return c

    def __len__(self) -> int:
        return len(self.classes)


class Combination:
    """The theory ``T1 + T2`` over n generators, with its class registry.

    One theory alone is allowed; the missing layer then has no symbols.
    ``generators=None`` accepts any ``y<j>`` on demand.
    """

    def __init__(self, theories: Sequence[Theory], generators: int | None = 0):
        theories = [t for t in theories if t is not None]
        if not 1 <= len(theories) <= 2:
            raise ValueError("a combination needs one or two theories")
        self.theories: Dict[Layer, Theory] = {}
        for th in theories:
            if th.layer in self.theories:
                raise ValueError(f"two theories on layer {th.layer}")
            self.theories[th.layer] = th
        self.table = SignatureTable(generator_count=generators)
        for lay in FUNCTION_LAYERS:
            th = self.theories.get(lay)
            for op in th.ops if th else ():
                self.table.add(op)
        self.registry = ClassRegistry()
        self._trivial: Optional[Verdict] = None

    # -- construction helpers --------------------------------------------

    def with_generators(self, n: int | None) -> "Combination":
        return Combination(list(self.theories.values()), n)

    @property
    def generator_count(self) -> int:
        return self.table.generator_count

    def parse(self, text: str) -> Term:
        return parse_term(text, self.table)

    def theory(self, layer: Layer) -> Optional[Theory]:
        return self.theories.get(layer)

    def function_symbols(self) -> List[Symbol]:
        """Σ1 then Σ2 function symbols, in declaration order."""
        return [s for lay in FUNCTION_LAYERS for s in self.table.symbols(lay) if s.arity > 0]

    def constants(self) -> List[Symbol]:
        return [s for lay in FUNCTION_LAYERS for s in self.table.symbols(lay) if s.arity == 0]

    # -- abstraction and the component tests -------------------------------

    def abstract_aliens(self, t: Term, k: Layer) -> Term:
        with self.registry.lock:
            return self._abstract(t, k)

    def _abstract(self, t: Term, k: Layer) -> Term:
        if t.head.layer is not k:
            return self._class_of(t).opaque
        if t.rank == 0:
            return t
        memo: Dict[Term, Term] = {}

        def rebuild(n: Term) -> Term:
            r = memo.get(n)
            if r is None:
                if n.head.layer is not k:
                    if n.rank >= t.rank:
                        raise InternalError(
                            f"alien {print_term(n)} does not have smaller rank than "
                            f"{print_term(t)}")
                    r = self._class_of(n).opaque
                else:
                    r = Term(n.head, [rebuild(a) for a in n.args])
                memo[n] = r
            return r

        return rebuild(t)

    def approx_equal(self, k: Layer, a: Term, b: Term) -> Verdict:
        if k in (Layer.S3, Layer.S4):
            return Verdict.of(a is b)
        th = self.theories.get(k)
        if th is None:
            return Verdict.of(a is b)
        return decide_component(th, a, b)

    # -- classes -------------------------------------------------------------

    def class_of(self, t: Term) -> ClassId:
        c = self.registry.memo.get(t)
        if c is not None:
            return c
        if not t.ground:
            raise TermError(f"class_of needs a closed signature term, got {print_term(t)}")
        with self.registry.lock:
            return self._class_of(t)

    def _class_of(self, t: Term) -> ClassId:
        reg = self.registry
        c = reg.memo.get(t)
        if c is not None:
            return c
        k = t.head.layer
        if k in (Layer.S3, Layer.S4):
            c = self._lookup(k, t, t)
        else:
            c = self._lookup(k, self._abstract(t, k), t)
        reg.memo[t] = c
        c._offer(t)
        return c

    def _lookup(self, k: Layer, abst: Term, t: Term) -> ClassId:
        reg = self.registry
        if k in (Layer.S3, Layer.S4):
            fp = abst
            exact = True
        else:
            solver = self.theories[k].solver
            fp = solver.fingerprint(abst)
            exact = solver.exact and fp is not None
        bucket = reg.buckets.get((k, fp), ())
        if exact:
            if bucket:
                return bucket[0]
        else:
            for c in bucket:
                v = self.approx_equal(k, abst, c.abstraction)
                if v is Verdict.EQUAL:
                    return c
                if v is Verdict.UNKNOWN:
                    raise AmbiguityError(
                        f"cannot decide {print_term(abst)} against {print_term(c.abstraction)} "
                        f"in theory {self.theories[k].name}")
        return reg.new_class(k, t, abst, fp)

    def interpret(self, t: Term) -> ClassId:
        """Value of ``t`` in the quotient algebra, evaluated bottom-up with collapse."""
        reg = self.registry
        c = reg.interpreted.get(t)
        if c is not None:
            return c
        if not t.ground:
            raise TermError(f"interpret needs a closed signature term, got {print_term(t)}")
        with reg.lock:
            stack = [t]
            while stack:
                n = stack[-1]
                if n in reg.interpreted:
                    stack.pop()
                    continue
                pending = [a for a in n.args if a not in reg.interpreted]
                if pending:
                    stack.extend(pending)
                    continue
                stack.pop()
                reg.interpreted[n] = self._apply(n)
            return reg.interpreted[t]

    def _apply(self, n: Term) -> ClassId:
        if not n.args:
            return self._class_of(n)
        reps = [self.registry.interpreted[a].representative for a in n.args]
        node = Term(n.head, reps)
        if node.rank == 0:
            return self._class_of(node)
        known = self.registry.memo.get(node)
        k = node.head.layer
        abst = self._abstract(node, k)
        seen = set()
        for leaf in subterms(abst):
            h = leaf.head
            if not isinstance(h, Opaque) or h in seen:
                continue
            seen.add(h)
            v = self.approx_equal(k, abst, leaf)
            if v is Verdict.EQUAL:
                return h.key
            if v is Verdict.UNKNOWN:
                raise AmbiguityError(
                    f"cannot decide whether {print_term(node)} collapses to {h}")
        if known is not None:
            return known
        c = self._lookup(k, abst, node)
        self.registry.memo[node] = c
        c._offer(node)
        return c

    def canonical_representative(self, t: Term) -> Term:
        return self.interpret(t).representative

    # -- the combined word problem --------------------------------------------

    def is_trivial_theory(self) -> bool:
        v = self._triviality()
        if v is Verdict.UNKNOWN:
            raise AmbiguityError("cannot decide whether a component theory is trivial")
        return v is Verdict.EQUAL

    def _triviality(self) -> Verdict:
        if self._trivial is None:
            verdicts = [th.is_trivial() for th in self.theories.values()]
            if Verdict.EQUAL in verdicts:
                self._trivial = Verdict.EQUAL
            elif Verdict.UNKNOWN in verdicts:
                self._trivial = Verdict.UNKNOWN
            else:
                self._trivial = Verdict.NOT_EQUAL
        return self._trivial

    def decide(self, s: Term, t: Term, J: IndexSet = ALL) -> Verdict:
        """``s ∼_J t``: provable equality with indeterminates indexed by J."""
        if J is not ALL:
            for ind in s.indets | t.indets:
                if indeterminate_index(ind) not in J:
                    raise IndexSetViolation(
                        f"indeterminate {ind} occurs but {indeterminate_index(ind)} not in J")
        if self._triviality() is Verdict.EQUAL:
            return Verdict.EQUAL
        return Verdict.of(self.interpret(s) is self.interpret(t))

    def decide_text(self, s: str, t: str, J: IndexSet = ALL) -> Verdict:
        return self.decide(self.parse(s), self.parse(t), J)


def decide_combined(comb: Combination, s: Term, t: Term, J: IndexSet = ALL) -> Verdict:
    return comb.decide(s, t, J)
