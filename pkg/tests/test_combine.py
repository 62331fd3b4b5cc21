from __future__ import annotations

import random

import pytest
from hypothesis import given, strategies as st

from isokit.combine import (
    ALL,
    AmbiguityError,
    Combination,
    IndexSetViolation,
    decide_combined,
    index_set,
)
from isokit.sampling import random_pairs, random_term
from isokit.solvers import Verdict, decide_bruteforce, load_theory, parse_theory
from isokit.terms import XT, Layer, Opaque, Term, indeterminate, is_pure, print_term, rank, substitute_x

from oracles import matrix_separated
from strategies import leaves, terms

E, NE = Verdict.EQUAL, Verdict.NOT_EQUAL


def axioms_of(comb):
    return [a for th in comb.theories.values() for a in th.axioms]


def test_abstract_alien_root(monoids):
    y1 = monoids.parse("y1")
    leaf = monoids.abstract_aliens(y1, Layer.S1)
    assert isinstance(leaf.head, Opaque) and leaf.head.key is monoids.class_of(y1)


def test_abstract_pure_unchanged(monoids):
    t = monoids.parse("(oplus zero zero)")
    assert monoids.abstract_aliens(t, Layer.S1) is t


def test_abstract_mixed(monoids):
    t = monoids.parse("(oplus (otimes y1 y2) y1)")
    a = monoids.abstract_aliens(t, Layer.S1)
    c1 = monoids.class_of(monoids.parse("(otimes y1 y2)"))
    c2 = monoids.class_of(monoids.parse("y1"))
    assert a is Term(t.head, [c1.opaque, c2.opaque])


def test_approx_equal_constant_layers(monoids):
    y1, y2 = monoids.parse("y1"), monoids.parse("y2")
    assert monoids.approx_equal(Layer.S3, y1, y1) is E
    assert monoids.approx_equal(Layer.S3, y1, y2) is NE


def test_approx_equal_with_classes(monoids):
    c1 = monoids.class_of(monoids.parse("y1")).opaque
    c2 = monoids.class_of(monoids.parse("x")).opaque
    oplus, otimes = monoids.table.lookup("oplus"), monoids.table.lookup("otimes")
    one = Term(monoids.table.lookup("one"))
    assert monoids.approx_equal(Layer.S1, Term(oplus, [c1, c2]), Term(oplus, [c2, c1])) is E
    assert monoids.approx_equal(Layer.S2, Term(otimes, [c1, one]), c1) is E


def test_class_of_examples(monoids):
    p = monoids.parse
    assert monoids.class_of(p("(oplus (otimes y1 y2) y1)")) is monoids.class_of(
        p("(oplus y1 (otimes y1 y2))"))
    assert monoids.class_of(p("(otimes y1 y2)")) is not monoids.class_of(p("(otimes y2 y1)"))
    assert monoids.class_of(XT) is not monoids.class_of(p("y1"))


def test_class_of_memo_stable(monoids):
    t = monoids.parse("(otimes (oplus y1 y2) x)")
    assert monoids.class_of(t) is monoids.class_of(t)


def test_interpret_examples(monoids):
    p = monoids.parse
    assert monoids.interpret(p("y1")) is monoids.class_of(p("y1"))
    assert monoids.interpret(p("(oplus (otimes y1 y2) zero)")) is monoids.class_of(p("(otimes y1 y2)"))
    assert monoids.interpret(p("(oplus y1 y2)")) is monoids.class_of(p("(oplus y1 y2)"))


def test_collapse_confirmed_by_rewriting(monoids):
    s, t = monoids.parse("(oplus (otimes y1 y2) zero)"), monoids.parse("(otimes y1 y2)")
    assert decide_bruteforce(axioms_of(monoids), s, t) is E


def test_canonical_representative_examples(monoids):
    p = monoids.parse
    assert monoids.canonical_representative(p("y1")) is p("y1")
    assert monoids.canonical_representative(p("(oplus y1 zero)")) is p("y1")
    assert monoids.canonical_representative(p("(oplus (otimes y1 y2) zero)")) is p("(otimes y1 y2)")


def test_representative_prefers_low_rank(monoids):
    p = monoids.parse
    # register the rank-2 member first; the rank-1 one must take over
    big = p("(otimes (oplus y1 zero) (oplus (otimes y2 one) zero))")
    rep = monoids.canonical_representative(big)
    assert rank(rep) <= 1 and monoids.decide(big, rep) is E


def test_decide_examples(monoids):
    p = monoids.parse
    assert monoids.decide(p("(oplus (otimes y1 y2) y1)"), p("(oplus y1 (otimes y1 y2))"),
                          index_set(())) is E
    s, t = p("(otimes (oplus y1 y2) y1)"), p("(otimes y1 (oplus y1 y2))")
    assert monoids.decide(s, t, index_set(())) is NE
    assert matrix_separated(s, t)
    assert decide_combined(monoids, s, s, ALL) is E


def test_index_set_violation(monoids):
    with pytest.raises(IndexSetViolation):
        monoids.decide(monoids.parse("x1"), monoids.parse("x1"), index_set({0}))
    assert monoids.decide(monoids.parse("x1"), monoids.parse("x1"), index_set({1})) is E


def test_triviality(monoids):
    assert monoids.is_trivial_theory() is False
    assert monoids.decide(monoids.parse("x1"), monoids.parse("x2"), index_set({1, 2})) is NE
    triv = Combination([load_theory("comm_monoid"), load_theory("trivial")], 1)
    assert triv.is_trivial_theory() is True
    assert triv.decide(triv.parse("x1"), triv.parse("(oplus y1 x2)"), index_set({1, 2})) is E
    free = Combination([load_theory("free_magma")], 0)
    assert free.is_trivial_theory() is False


def test_generic_unknown_raises_ambiguity():
    th = parse_theory("(theory c (layer 2) (ops (m 2)) (axioms (= (m ?a ?b) (m ?b ?a)))"
                      " (solver bounded-generic))")
    comb = Combination([load_theory("comm_monoid"), th], 2)
    comb.class_of(comb.parse("(m y1 y2)"))
    assert comb.class_of(comb.parse("(m y2 y1)")) is comb.class_of(comb.parse("(m y1 y2)"))
    with pytest.raises(AmbiguityError):
        comb.class_of(comb.parse("(m y1 y1)"))


def test_layer_mismatch_rejected():
    with pytest.raises(ValueError):
        Combination([load_theory("free_monoid"), load_theory("projection")])


# properties over the commutative monoid + free monoid pair

COMB = Combination([load_theory("comm_monoid"), load_theory("free_monoid")], 2)
TERMS = terms(COMB, max_leaves=10)


@given(TERMS, TERMS, TERMS)
def test_class_of_is_equivalence(s, t, u):
    cs, ct, cu = COMB.class_of(s), COMB.class_of(t), COMB.class_of(u)
    assert COMB.class_of(s) is cs
    if cs is ct and ct is cu:
        assert cs is cu
    assert cs.layer is s.head.layer


@given(TERMS, TERMS, st.data())
def test_class_of_is_congruence(s, t, data):
    s2 = data.draw(st.sampled_from([s, COMB.canonical_representative(s)]))
    if COMB.class_of(s) is not COMB.class_of(s2):
        return
    for f in COMB.function_symbols():
        for i in range(f.arity):
            a, b = [t] * f.arity, [t] * f.arity
            a[i], b[i] = s, s2
            assert COMB.class_of(Term(f, a)) is COMB.class_of(Term(f, b))


@given(TERMS)
def test_lemma_pure_interpretation(t):
    if is_pure(t):
        assert COMB.interpret(t) is COMB.class_of(t)


@given(TERMS)
def test_lemma_representative_rank(t):
    r = COMB.canonical_representative(t)
    assert rank(r) <= rank(t)
    assert COMB.decide(t, r) is E
    assert COMB.interpret(r) is COMB.class_of(r)


@given(TERMS, TERMS, st.integers(1, 3))
def test_lemma_indeterminate_substitution(u, v, i):
    xi = Term(indeterminate(i))
    u2, v2 = substitute_x(u, xi), substitute_x(v, xi)
    assert COMB.decide(u, v, index_set({0})) is COMB.decide(u2, v2, index_set({0, i}))
    assert (COMB.class_of(u) is COMB.class_of(v)) == (COMB.class_of(u2) is COMB.class_of(v2))


@given(TERMS, TERMS)
def test_decide_sound_in_matrix_model(s, t):
    if COMB.decide(s, t) is E:
        assert not matrix_separated(s, t)


@given(TERMS)
def test_decide_is_congruence_with_x_substitution(t):
    # equal terms stay equal after plugging the same term into x
    r = COMB.canonical_representative(t)
    for w in leaves(COMB):
        assert COMB.decide(substitute_x(t, w), substitute_x(r, w)) is E


def test_oracle_agreement_sample():
    rng = random.Random(7)
    comb = Combination([load_theory("comm_monoid"), load_theory("free_monoid")], 2)
    for s, t in random_pairs(comb, rng, 60, max_size=9, max_rank=3):
        oracle = decide_bruteforce(axioms_of(comb), s, t, 20_000)
        verdict = comb.decide(s, t)
        if oracle is E:
            assert verdict is E, (print_term(s), print_term(t))


def _partition(comb, queries):
    groups = {}
    for t in queries:
        groups.setdefault(comb.interpret(t), set()).add(t)
    return {frozenset(g) for g in groups.values()}


def test_registry_order_independence():
    rng = random.Random(3)
    base = Combination([load_theory("comm_monoid"), load_theory("free_monoid")], 2)
    queries = [random_term(base, rng, 12, 3) for _ in range(300)]
    parts = []
    for seed in (1, 2):
        order = list(queries)
        random.Random(seed).shuffle(order)
        parts.append(_partition(base.with_generators(2), order))
    assert parts[0] == parts[1]


def test_concurrent_queries_agree():
    from concurrent.futures import ThreadPoolExecutor
    rng = random.Random(11)
    base = Combination([load_theory("comm_monoid"), load_theory("free_monoid")], 2)
    queries = [random_term(base, rng, 10, 3) for _ in range(200)]
    shared = base.with_generators(2)
    with ThreadPoolExecutor(4) as pool:
        classes = list(pool.map(shared.interpret, queries))
    serial = base.with_generators(2)
    for i in range(len(queries) - 1):
        same = serial.interpret(queries[i]) is serial.interpret(queries[i + 1])
        assert (classes[i] is classes[i + 1]) == same
