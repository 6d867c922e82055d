import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from fkqc.quadratic import QuadraticField, golden_field


def test_golden_identity():
    f = golden_field()
    phi = f.lam()
    assert phi * phi == phi + 1
    assert (phi - 1) * phi == f.one()
    assert phi.inverse() == phi - 1


def test_conjugate_and_norm():
    f = golden_field()
    x = f.element(3, -2)
    assert x * x.conjugate() == f.element(x.norm())
    assert x.norm() == Fraction(3 * 3 + 3 * (-2) - (-2) * (-2) * 1)


def test_exact_ordering():
    f = golden_field()
    phi = f.lam()
    assert phi > Fraction(8, 5)
    assert phi < Fraction(13, 8)
    assert phi > 1.6180339  # float coerced exactly
    vals = [f.element(2), phi, f.element(1), phi + 1]
    assert sorted(vals) == [f.element(1), phi, f.element(2), phi + 1]


def test_sign_matches_float_shadow():
    f = golden_field()
    for a in range(-6, 7):
        for b in range(-6, 7):
            x = f.element(a, b)
            s = x.sign()
            shadow = float(x)
            if abs(shadow) > 1e-9:
                assert s == (1 if shadow > 0 else -1)
            else:
                assert (a, b) == (0, 0) and s == 0


def test_float_embedding_is_exact():
    f = golden_field()
    x = f.coerce(0.1)
    assert x.a == Fraction(0.1)  # dyadic, not 1/10
    assert f.coerce(7.2) - f.coerce(3.2) == f.coerce(4)


def test_hash_and_dict_keys():
    f = golden_field()
    d = {f.element(1, 1): "a"}
    assert d[f.lam() + 1] == "a"


def test_rational_generator_rejected():
    with pytest.raises(ValueError):
        QuadraticField(2, -1)  # x^2 = 2x - 1 has rational root 1
    with pytest.raises(ValueError):
        QuadraticField(0, -1)  # complex


def test_division_and_pow():
    f = golden_field()
    phi = f.lam()
    x = (phi + 2) / (phi - 1)
    assert x * (phi - 1) == phi + 2
    assert phi ** 5 == f.element(3, 5)  # phi^5 = 5 phi + 3
    assert phi ** -2 == (phi * phi).inverse()


small_fracs = st.fractions(
    min_value=-10, max_value=10, max_denominator=16
)


@settings(max_examples=200, deadline=None)
@given(a=small_fracs, b=small_fracs, c=small_fracs, d=small_fracs)
def test_ring_axioms(a, b, c, d):
    f = golden_field()
    x = f.element(a, b)
    y = f.element(c, d)
    assert x + y == y + x
    assert x * y == y * x
    assert x * (y + 1) == x * y + x
    assert float(x * y) == pytest.approx(float(x) * float(y), rel=1e-12, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(a=small_fracs, b=small_fracs)
def test_total_order_consistent(a, b):
    f = golden_field()
    x = f.element(a, b)
    assert (x < 0) == (x.sign() < 0)
    assert (x > 0) == (x.sign() > 0)
    if x.sign() != 0:
        assert x.inverse() * x == f.one()
