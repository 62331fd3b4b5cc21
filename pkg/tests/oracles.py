"""Independent semantic oracles: evaluate closed terms in concrete models.

A model of a combined theory that separates two terms proves they are not
provably equal, which gives NotEqual witnesses the rewriting oracle cannot.
"""

from __future__ import annotations

import random
from typing import Callable, Dict

from isokit.terms import Layer, Opaque, Symbol, Term, fold

P = 1_000_003


def mat_add(a, b):
    return tuple((u + v) % P for u, v in zip(a, b))


def mat_mul(a, b):
    a0, a1, a2, a3 = a
    b0, b1, b2, b3 = b
    return ((a0 * b0 + a1 * b2) % P, (a0 * b1 + a1 * b3) % P,
            (a2 * b0 + a3 * b2) % P, (a2 * b1 + a3 * b3) % P)


def perm_mul(a, b):
    return tuple(a[i] for i in b)


def perm_inv(a):
    out = [0] * len(a)
    for i, v in enumerate(a):
        out[v] = i
    return tuple(out)


# 2x2 matrices mod P: (+, 0) is a commutative monoid and (*, I) a monoid
MATRIX_OPS: Dict[str, Callable] = {
    "oplus": mat_add, "zero": lambda: (0, 0, 0, 0),
    "otimes": mat_mul, "one": lambda: (1, 0, 0, 1),
}

# permutations of 7 points: a group, plus the first projection f
PERM_OPS: Dict[str, Callable] = {
    "mul": perm_mul, "inv": perm_inv, "e": lambda: tuple(range(7)),
    "f": lambda a, b: a,
}


def evaluate(t: Term, ops: Dict[str, Callable], env: Dict, leaf: Callable[[], object]):
    def step(n: Term, kids):
        head = n.head
        if isinstance(head, Symbol) and head.layer in (Layer.S1, Layer.S2):
            return ops[head.name](*kids)
        key = head.key if isinstance(head, Opaque) else head
        if key not in env:
            env[key] = leaf()
        return env[key]
    return fold(t, step)


def separated(s: Term, t: Term, ops: Dict[str, Callable], leaf_factory, trials: int = 4,
              seed: int = 0) -> bool:
    """True when some random interpretation of the leaves tells s and t apart."""
    rng = random.Random(seed)
    for _ in range(trials):
        env: Dict = {}
        leaf = leaf_factory(rng)
        if evaluate(s, ops, env, leaf) != evaluate(t, ops, env, leaf):
            return True
    return False


def random_matrix(rng: random.Random):
    return lambda: tuple(rng.randrange(P) for _ in range(4))


def random_perm(rng: random.Random):
    def make():
        p = list(range(7))
        rng.shuffle(p)
        return tuple(p)
    return make


def matrix_separated(s: Term, t: Term, trials: int = 4, seed: int = 0) -> bool:
    return separated(s, t, MATRIX_OPS, random_matrix, trials, seed)


def perm_separated(s: Term, t: Term, trials: int = 6, seed: int = 0) -> bool:
    return separated(s, t, PERM_OPS, random_perm, trials, seed)


# free models: values coincide exactly when the component theory proves equality


def _leaf_name(head) -> str:
    return f"o{head.key}" if isinstance(head, Opaque) else str(head)


def _group_word(a, b):
    out = list(a)
    for g in b:
        if out and out[-1][0] == g[0] and out[-1][1] == -g[1]:
            out.pop()
        else:
            out.append(g)
    return tuple(out)


def _abelian(a, b):
    d = dict(a)
    for k, v in b:
        d[k] = d.get(k, 0) + v
    return frozenset((k, v) for k, v in d.items() if v)


_FREE = {
    "free-monoid": (lambda n: (n,), lambda a, b: a + b, lambda: (), None),
    "commutative-monoid": (lambda n: (n,), lambda a, b: tuple(sorted(a + b)), lambda: (), None),
    "semilattice": (lambda n: frozenset([n]), lambda a, b: a | b, frozenset, None),
    "free-group": (lambda n: ((n, 1),), _group_word, lambda: (),
                   lambda a: tuple((g, -e) for g, e in reversed(a))),
    "abelian-group": (lambda n: frozenset([(n, 1)]), _abelian, frozenset,
                      lambda a: frozenset((k, -v) for k, v in a)),
}


def free_value(th, t: Term):
    """Value of ``t`` in the free model of an algebraic theory on its leaves."""
    atom, mul, unit, inv = _FREE[th.solver_kind]
    roles = th.roles

    def step(n: Term, kids):
        h = n.head
        if h == roles.get("mul"):
            return mul(*kids)
        if h == roles.get("unit"):
            return unit()
        if h == roles.get("inv"):
            return inv(*kids)
        if isinstance(h, Symbol) and h.arity:
            raise NotImplementedError(h)
        return atom(_leaf_name(h))
    return fold(t, step)
