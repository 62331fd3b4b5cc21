"""Decision procedures for disjoint combinations of equational theories and
their logical isotropy groups."""

from __future__ import annotations

__version__ = "0.1.0"

from .combine import (
    ALL,
    AmbiguityError,
    ClassId,
    Combination,
    IndexSetViolation,
    decide_combined,
    index_set,
)
from .isotropy import (
    GroupReport,
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
    is_member,
)
from .solvers import (
    Axiom,
    Theory,
    Verdict,
    decide_bruteforce,
    decide_component,
    is_constant_symbol,
    is_projection,
    load_theory,
    parse_theory,
)
from .terms import (
    Layer,
    SignatureTable,
    Symbol,
    Term,
    aliens,
    all_aliens,
    collapse_indeterminates,
    decompose,
    parse_term,
    print_term,
    rank,
    substitute_x,
)

__all__ = [name for name in dir() if not name.startswith("_")]
