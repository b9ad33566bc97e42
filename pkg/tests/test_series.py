import pytest
from hypothesis import given, strategies as st

from conftest import fields, vectors
from pcontract.errors import DimensionMismatch, PrecisionError, WindowOverflow
from pcontract.series import DEGREE_BOUND, SeriesVector, parse_poly, project, shift, vec_add, vec_sum

e1 = SeriesVector.monomial(2, 2, 0, 0)


def test_shift_examples():
    assert shift(e1, 1) == SeriesVector.monomial(2, 2, 0, 1)
    assert shift(e1, 0) == e1


def test_shift_moves_precision_and_lo():
    z = SeriesVector(3, 1, {2: [1]}, prec=5, lo=-1)
    w = shift(z, -4)
    assert (w.lo, w.prec, w.coeffs) == (-5, 1, {-2: (1,)})


@given(fields(), st.integers(-10, 10), st.data())
def test_shift_is_an_additive_bijection(pd, m, data):
    p, d = pd
    a, b = data.draw(vectors(p, d)), data.draw(vectors(p, d))
    assert shift(shift(a, m), -m) == a
    assert shift(a + b, m) == shift(a, m) + shift(b, m)


@given(fields(), st.integers(-6, 6), st.integers(-8, 8), st.data())
def test_project_commutes_with_shift(pd, n, i, data):
    p, d = pd
    z = data.draw(vectors(p, d))
    assert project(shift(z, n), i) == project(z, i - n)


def test_project_examples():
    assert project(e1, 0) == (1, 0)
    assert project(e1, 5) == (0, 0)
    with pytest.raises(PrecisionError):
        project(e1.truncate(3), 3)


@given(fields(), st.data())
def test_addition_in_characteristic_p(pd, data):
    p, d = pd
    a = data.draw(vectors(p, d))
    assert a + SeriesVector.zero(p, d) == a
    assert (a + a.scale(p - 1)).is_zero()


def test_sum_precision_is_the_minimum():
    a = SeriesVector(2, 1, {0: [1]}, prec=8)
    b = SeriesVector(2, 1, {1: [1]}, prec=5)
    assert vec_add(a, b).prec == 5
    assert vec_sum([a, b, SeriesVector.zero(2, 1)], 2, 1).prec == 5


def test_mismatch_and_window():
    with pytest.raises(DimensionMismatch):
        vec_add(e1, SeriesVector.zero(3, 2))
    with pytest.raises(DimensionMismatch):
        SeriesVector(2, 2, {0: [1]})
    with pytest.raises(WindowOverflow):
        SeriesVector(2, 1, {DEGREE_BOUND + 1: [1]})


def test_coefficients_beyond_precision_are_dropped():
    z = SeriesVector(5, 1, {0: [6], 3: [1]}, prec=2)
    assert z.coeffs == {0: (1,)}


def test_parse_poly():
    assert parse_poly("1 + t", 2).scalar_terms() == {0: 1, 1: 1}
    assert parse_poly("3*t^-2 - t", 5).scalar_terms() == {-2: 3, 1: 4}
    assert parse_poly("2t^4+t^4", 3).is_zero()
    assert parse_poly("t^(-1)", 2).scalar_terms() == {-1: 1}
    with pytest.raises(ValueError):
        parse_poly("t^", 2)
    with pytest.raises(ValueError):
        parse_poly("", 2)
