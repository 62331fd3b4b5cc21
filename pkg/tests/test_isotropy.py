from __future__ import annotations

import itertools

import pytest
from hypothesis import given

from isokit.combine import Combination, index_set
from isokit.isotropy import (
    InvertibilityUnknown,
    Member,
    RefutedCommutation,
    RefutedInvertibility,
    check_hypotheses,
    commutes_generically,
    compose,
    enumerate_group,
    find_inverse,
    global_isotropy,
    hypotheses_hold,
    is_inverse,
    is_member,
)
from isokit.solvers import Verdict, load_theory, parse_theory
from isokit.terms import XT, TermError, print_term

from oracles import perm_separated
from strategies import terms

CONJ = "(mul y1 (mul x (inv y1)))"
CONJ_INV = "(mul (inv y1) (mul x y1))"


def test_x_commutes_with_everything(monoids, groups_proj):
    for comb in (monoids, groups_proj):
        for f in comb.function_symbols():
            assert commutes_generically(comb, XT, f) is Verdict.EQUAL


def test_conjugation_commutes_with_mul(groups):
    mul = groups.table.lookup("mul")
    assert commutes_generically(groups, groups.parse(CONJ), mul) is Verdict.EQUAL


def test_conjugation_commutes_with_projection(groups_proj):
    f = groups_proj.table.lookup("f")
    assert commutes_generically(groups_proj, groups_proj.parse(CONJ), f) is Verdict.EQUAL


def test_find_inverse_examples(monoids, groups):
    assert find_inverse(monoids, XT, 1) is XT
    assert find_inverse(groups, groups.parse(CONJ), 9) is groups.parse(CONJ_INV)
    assert find_inverse(monoids, monoids.parse("(oplus x y1)"), 7) is None


def test_inverse_witness_in_permutation_model(groups):
    t, w = groups.parse(CONJ), groups.parse(CONJ_INV)
    assert not perm_separated(compose(t, w), XT)
    assert not perm_separated(compose(w, t), XT)


def test_member_examples(monoids, groups):
    assert is_member(monoids, XT) == Member(XT)
    v = is_member(monoids, monoids.parse("(oplus x x)"))
    assert v == RefutedCommutation(monoids.table.lookup("otimes"))
    assert is_member(groups, groups.parse(CONJ)) == Member(groups.parse(CONJ_INV))


def test_x_free_candidate_refuted(groups):
    assert isinstance(is_member(groups, groups.parse("y1")), (RefutedInvertibility, RefutedCommutation))
    assert isinstance(is_member(groups, groups.parse("e")), (RefutedInvertibility, RefutedCommutation))


def test_small_inverse_bound_is_inconclusive(groups):
    assert is_member(groups, groups.parse(CONJ), inverse_bound=3) == InvertibilityUnknown(3)


def test_candidate_validation(monoids):
    with pytest.raises(TermError):
        is_member(monoids, monoids.parse("(oplus x1 y1)"))


def test_enumerate_size_one_is_trivial(monoids, groups_proj):
    for comb in (monoids.with_generators(0), groups_proj.with_generators(0)):
        report = enumerate_group(comb, 1, 1)
        assert [print_term(m.term) for m in report.members] == ["x"]
        assert report.trivial


def test_enumerate_small_monoids(monoids):
    report = enumerate_group(monoids.with_generators(1), 5, 7)
    assert report.trivial and not report.flagged


def test_enumerate_groups_with_projection(groups_proj):
    report = enumerate_group(groups_proj, 6, 9)
    terms_found = {print_term(m.term) for m in report.members}
    assert CONJ in terms_found
    assert not report.trivial


def test_compose_unit_law(groups):
    t = groups.parse(CONJ)
    assert compose(XT, t) is t and compose(t, XT) is t


def test_global_isotropy(monoids, groups):
    assert global_isotropy(monoids, 5, 5).trivial
    assert global_isotropy(groups, 5, 5).trivial
    triv = Combination([load_theory("comm_monoid"), load_theory("trivial")], 1)
    report = global_isotropy(triv, 3, 3)
    assert [print_term(m.term) for m in report.members] == ["x"]


def test_trivial_theory_everything_is_x():
    triv = Combination([load_theory("comm_monoid"), load_theory("trivial")], 1)
    assert isinstance(is_member(triv, triv.parse("(oplus x y1)")), Member)


def _statuses(comb):
    return [r.status for r in check_hypotheses(comb)]


def test_hypotheses_examples(monoids, groups, groups_proj):
    assert _statuses(monoids) == ["holds", "holds"]
    assert hypotheses_hold(check_hypotheses(monoids))
    reports = check_hypotheses(groups)
    assert reports[1].status == "violated" and "empty" in reports[1].reason
    reports = check_hypotheses(groups_proj)
    assert reports[1].status == "violated" and reports[1].reason == "f is a projection"


def test_hypothesis_constant_symbol():
    comb = Combination([load_theory("erasing_monoid"), load_theory("projection")], 0)
    reports = check_hypotheses(comb)
    assert reports[0].status == "holds"  # mul still qualifies
    only_g = parse_theory("(theory k (layer 2) (ops (g 1) (z 0)) (axioms (= (g ?a) z))"
                          " (solver projection))")
    reports = check_hypotheses(Combination([load_theory("group"), only_g], 0))
    assert reports[1].status == "violated" and reports[1].reason == "g is constant"


def test_hypothesis_unknown_for_generic():
    th = parse_theory("(theory c (layer 2) (ops (m 2)) (axioms (= (m ?a ?b) (m ?b ?a)))"
                      " (solver bounded-generic))")
    reports = check_hypotheses(Combination([load_theory("group"), th], 0))
    assert reports[1].status == "unknown"


# properties

GROUPS = Combination([load_theory("group"), load_theory("projection")], 1)
GTERMS = terms(GROUPS, max_leaves=6)


@given(GTERMS, GTERMS)
def test_group_decide_sound_in_permutation_model(s, t):
    if GROUPS.decide(s, t) is Verdict.EQUAL:
        assert not perm_separated(s, t)


@given(GTERMS)
def test_class_invariance_of_verdicts(t):
    r = GROUPS.canonical_representative(t)
    assert GROUPS.decide(t, r, index_set({0})) is Verdict.EQUAL
    assert type(is_member(GROUPS, t, 5)) is type(is_member(GROUPS, r, 5))


def test_members_closed_under_composition(groups_proj):
    report = enumerate_group(groups_proj, 6, 9)
    hints = [m.inverse for m in report.members]
    for a, b in itertools.product(report.members, repeat=2):
        c = compose(a.term, b.term)
        v = is_member(groups_proj, c, 9, [compose(b.inverse, a.inverse)] + hints)
        assert not isinstance(v, RefutedCommutation)
        assert isinstance(v, Member)
        assert is_inverse(groups_proj, c, v.inverse)
