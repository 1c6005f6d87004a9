import cmath
import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from tronquee.exact import I, OMEGA, ONE, SQRT3, ZERO, ZETA, Cyclo, parse_exact, to_exact

small = st.fractions(min_value=-20, max_value=20, max_denominator=12)
cyclo = st.tuples(small, small, small, small).map(Cyclo)
nonzero = cyclo.filter(lambda c: not c.is_zero())


def close(a, b, tol=1e-9):
    return abs(complex(a) - complex(b)) <= tol * max(1.0, abs(complex(b)))


def test_named_constants():
    assert ZETA ** 12 == ONE and ZETA ** 6 == -ONE
    assert I * I == -ONE
    assert OMEGA ** 3 == ONE and OMEGA != ONE
    assert SQRT3 * SQRT3 == Cyclo.rational(3)
    assert close(ZETA, cmath.exp(1j * math.pi / 6))


@given(cyclo, cyclo, cyclo)
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == ZERO


@given(nonzero)
def test_inverse(a):
    assert a * a.inverse() == ONE
    assert ONE / a == a.inverse()


@given(cyclo, cyclo)
def test_embedding_is_a_ring_homomorphism(a, b):
    assert close(a + b, complex(a) + complex(b))
    assert close(a * b, complex(a) * complex(b))
    assert close(a.conjugate(), complex(a).conjugate())


@given(cyclo)
def test_field_tag_is_smallest(a):
    tag = a.field
    if tag == "Q":
        assert a.is_rational()
    if tag in ("Q", "Q(i)"):
        assert a.galois(5) == a  # fixed by zeta -> zeta^5 exactly on Q(i)
    if tag in ("Q", "Q(omega)"):
        assert a.galois(7) == a


@given(cyclo)
def test_hash_consistent_with_equality(a):
    b = Cyclo(a.coords)
    assert a == b and hash(a) == hash(b)


@pytest.mark.parametrize("text, want", [
    ("1/3", Cyclo.rational(Fraction(1, 3))),
    ("-2", Cyclo.rational(-2)),
    ("0.25", Cyclo.rational(Fraction(1, 4))),
    ("1/2+3/4i", Cyclo.gaussian(Fraction(1, 2), Fraction(3, 4))),
    ("2i", Cyclo.gaussian(0, 2)),
    ("-i", Cyclo.gaussian(0, -1)),
    ("-2+1j", Cyclo.gaussian(-2, 1)),
])
def test_parse_exact(text, want):
    assert parse_exact(text) == want


@pytest.mark.parametrize("bad", ["", "abc", "1/0"])
def test_parse_exact_rejects(bad):
    with pytest.raises((ValueError, ZeroDivisionError)):
        parse_exact(bad)


def test_to_exact():
    assert to_exact(3) == Cyclo.rational(3)
    assert to_exact(Fraction(2, 7)) == Cyclo.rational(Fraction(2, 7))
    assert to_exact("1+i") == Cyclo.gaussian(1, 1)
    with pytest.raises(TypeError):
        to_exact(0.5)
    with pytest.raises(TypeError):
        to_exact(1j)


def test_immutable():
    with pytest.raises(AttributeError):
        ONE.x = 1
