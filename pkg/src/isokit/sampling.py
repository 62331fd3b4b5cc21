"""Random closed terms and equal/unequal term pairs for differential testing."""

from __future__ import annotations

import random
from typing import List, Optional, Sequence, Tuple

from . import rewrite
from .combine import Combination
from .solvers import Axiom
from .terms import XT, Symbol, Term, rank


def leaves_for(comb: Combination, with_x: bool = True, extra: Sequence[Term] = ()) -> List[Term]:
    out = [Term(c) for c in comb.constants()] + [Term(g) for g in comb.table.generators()]
    if with_x:
        out.append(XT)
    return out + list(extra)


def random_term(comb: Combination, rng: random.Random, max_size: int = 12,
                max_rank: Optional[int] = None, leaves: Sequence[Term] | None = None,
                tries: int = 1000, symbols: Sequence[Symbol] | None = None) -> Term:
    """Random closed term of at most ``max_size`` nodes, rejecting ones above ``max_rank``.

    ``symbols`` restricts the function symbols used (default: all of them).
    """
    leaves = list(leaves) if leaves is not None else leaves_for(comb)
    funcs = list(symbols) if symbols is not None else comb.function_symbols()
    for _ in range(tries):
        t = _grow(rng, funcs, leaves, rng.randint(1, max_size))
        if max_rank is None or rank(t) <= max_rank:
            return t
    raise RuntimeError("could not sample a term within the rank bound")


def _grow(rng: random.Random, funcs, leaves, budget: int) -> Term:
    fits = [f for f in funcs if f.arity < budget]
    if budget <= 1 or not fits:
        return rng.choice(leaves)
    f = rng.choice(fits)
    remaining = budget - 1
    # split the remaining budget among the arguments, each getting at least one node
    cuts = sorted(rng.sample(range(1, remaining), f.arity - 1)) if f.arity > 1 else []
    parts = [b - a for a, b in zip([0] + cuts, cuts + [remaining])]
    return Term(f, [_grow(rng, funcs, leaves, p) for p in parts])


def random_rewrite(axioms: Sequence[Axiom], t: Term, rng: random.Random, steps: int,
                   cap: int, pool: Sequence[Term]) -> Term:
    """Walk ``steps`` random axiom applications from ``t`` (a provably equal term)."""
    rules = rewrite.RuleSet(rewrite.rules_from_equations((a.lhs, a.rhs) for a in axioms))
    for _ in range(steps):
        succ = list(rules.successors(t, pool, cap))
        if not succ:
            break
        t = rng.choice(succ)
    return t


def mutate(comb: Combination, t: Term, rng: random.Random, leaves: Sequence[Term]) -> Term:
    """Replace one random subterm by a random leaf (usually changes the class)."""
    paths = []
    stack: List[Tuple[Term, tuple]] = [(t, ())]
    while stack:
        n, p = stack.pop()
        paths.append(p)
        stack.extend((a, p + (i,)) for i, a in enumerate(n.args))
    path = rng.choice(paths)
    return _replace_at(t, path, rng.choice(list(leaves)))


def _replace_at(t: Term, path: tuple, new: Term) -> Term:
    if not path:
        return new
    args = list(t.args)
    args[path[0]] = _replace_at(args[path[0]], path[1:], new)
    return Term(t.head, args)


def random_pairs(comb: Combination, rng: random.Random, count: int, max_size: int = 12,
                 max_rank: int = 3, leaves: Sequence[Term] | None = None) -> List[Tuple[Term, Term]]:
    """Mix of provably-equal pairs (random rewrites), near misses and unrelated pairs."""
    axioms = [a for th in comb.theories.values() for a in th.axioms]
    leaves = list(leaves) if leaves is not None else leaves_for(comb)
    out = []
    while len(out) < count:
        s = random_term(comb, rng, max_size, max_rank, leaves)
        kind = len(out) % 4
        if kind in (0, 1):
            t = random_rewrite(axioms, s, rng, rng.randint(1, 4), max_size, leaves)
        elif kind == 2:
            t = mutate(comb, s, rng, leaves)
        else:
            t = random_term(comb, rng, max_size, max_rank, leaves)
        if t.size <= max_size and rank(t) <= max_rank:
            out.append((s, t))
    return out
