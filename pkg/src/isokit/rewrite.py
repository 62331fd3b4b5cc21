"""Bounded equational search: rewriting with axioms in both directions.

This is the semi-decision procedure behind the ``bounded-generic`` solver and
the brute-force oracle.  It only ever proves equalities; running out of
budget yields UNKNOWN, never NOT_EQUAL.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .terms import Term, Var, subterms

DEFAULT_SLACK = 2


@dataclass(frozen=True)
class Rule:
    lhs: Term
    rhs: Term
    free: tuple  # variables of rhs not bound by lhs


def variables(t: Term) -> List[Var]:
    seen: Dict[Var, None] = {}
    for n in subterms(t):
        if isinstance(n.head, Var):
            seen.setdefault(n.head, None)
    return list(seen)


def rules_from_equations(pairs: Iterable[Tuple[Term, Term]]) -> List[Rule]:
    rules = []
    seen = set()
    for l, r in pairs:
        for a, b in ((l, r), (r, l)):
            if a is b or (a, b) in seen:
                continue
            seen.add((a, b))
            bound = set(variables(a))
            free = tuple(v for v in variables(b) if v not in bound)
            rules.append(Rule(a, b, free))
    return rules


def match(pattern: Term, t: Term, subst: Dict[Var, Term]) -> Optional[Dict[Var, Term]]:
    stack = [(pattern, t)]
    while stack:
        p, u = stack.pop()
        if isinstance(p.head, Var):
            bound = subst.get(p.head)
            if bound is None:
                subst[p.head] = u
            elif bound is not u:
                return None
            continue
        if p.head != u.head:
            return None
        stack.extend(zip(p.args, u.args))
    return subst


def instantiate(pattern: Term, subst: Dict[Var, Term]) -> Term:
    if not pattern.args:
        if isinstance(pattern.head, Var):
            return subst[pattern.head]
        return pattern
    return Term(pattern.head, [instantiate(a, subst) for a in pattern.args])


class RuleSet:
    def __init__(self, rules: Sequence[Rule]):
        self.by_head: Dict[object, List[Rule]] = {}
        self.anywhere: List[Rule] = []
        for r in rules:
            if isinstance(r.lhs.head, Var):
                self.anywhere.append(r)
            else:
                self.by_head.setdefault(r.lhs.head, []).append(r)

    def rewrites_at(self, t: Term, pool: Sequence[Term]) -> Iterator[Term]:
        for rule in itertools.chain(self.by_head.get(t.head, ()), self.anywhere):
            sub = match(rule.lhs, t, {})
            if sub is None:
                continue
            if not rule.free:
                yield instantiate(rule.rhs, sub)
                continue
            for choice in itertools.product(pool, repeat=len(rule.free)):
                full = dict(sub)
                full.update(zip(rule.free, choice))
                yield instantiate(rule.rhs, full)

    def successors(self, t: Term, pool: Sequence[Term], cap: int) -> Iterator[Term]:
        """All terms one rewrite step away from ``t`` with at most ``cap`` nodes."""
        for u in self.rewrites_at(t, pool):
            if u.size <= cap:
                yield u
        for i, a in enumerate(t.args):
            budget = cap - (t.size - a.size)
            if budget < 1:
                continue
            for b in self.successors(a, pool, budget):
                args = list(t.args)
                args[i] = b
                yield Term(t.head, args)


def leaf_pool(terms: Iterable[Term], extra: Iterable[Term] = ()) -> List[Term]:
    seen: Dict[Term, None] = {}
    for t in terms:
        for n in subterms(t):
            if not n.args and not isinstance(n.head, Var):
                seen.setdefault(n, None)
    for e in extra:
        seen.setdefault(e, None)
    return list(seen)


@dataclass
class SearchResult:
    found: bool
    states: int
    exhausted: bool  # whole reachable space under the size cap was explored


def bidirectional_search(rules: RuleSet, s: Term, t: Term, budget: int, cap: int,
                         pool: Sequence[Term]) -> SearchResult:
    """Breadth-first closure from both ends until the frontiers meet."""
    if s is t:
        return SearchResult(True, 1, False)
    seen = ({s: None}, {t: None})
    frontier = ([s], [t])
    while frontier[0] and frontier[1]:
        side = 0 if len(frontier[0]) <= len(frontier[1]) else 1
        mine, other = seen[side], seen[1 - side]
        nxt = []
        for u in frontier[side]:
            for v in rules.successors(u, pool, cap):
                if v in mine:
                    continue
                if v in other:
                    return SearchResult(True, len(mine) + len(other), False)
                mine[v] = None
                nxt.append(v)
                if len(mine) + len(other) >= budget:
                    return SearchResult(False, budget, False)
        frontier = (nxt, frontier[1]) if side == 0 else (frontier[0], nxt)
    return SearchResult(False, len(seen[0]) + len(seen[1]), True)
