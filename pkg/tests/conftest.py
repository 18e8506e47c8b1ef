from fractions import Fraction

import pytest

from wfomc.frontends import _Parser, parse_theory
from wfomc.logic import Constant, Domain


def formula(text: str):
    """Parse a single formula (possibly with free variables)."""
    p = _Parser(text)
    f = p.formula()
    assert p.at("EOF"), f"trailing input in {text!r}"
    return f


def theory(text: str):
    t, _ = parse_theory(text)
    return t


def domain(*names: str) -> Domain:
    return Domain(tuple(Constant(n) for n in names))


@pytest.fixture
def fr():
    return Fraction
