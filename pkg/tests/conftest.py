from __future__ import annotations

import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from isokit.combine import Combination  # noqa: E402
from isokit.solvers import load_theory  # noqa: E402

settings.register_profile(
    "default", deadline=None, max_examples=150,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def cm():
    return load_theory("comm_monoid")


@pytest.fixture
def fm():
    return load_theory("free_monoid")


@pytest.fixture
def monoids(cm, fm):
    """Commutative monoid on S1 with free monoid on S2, generators y1, y2."""
    return Combination([cm, fm], 2)


@pytest.fixture
def groups():
    return Combination([load_theory("group")], 1)


@pytest.fixture
def groups_proj():
    return Combination([load_theory("group"), load_theory("projection")], 1)
