import pytest
from hypothesis import given

from conftest import holo_polys, polys
from starquant.errors import ParseError
from starquant.parser import format_poly, parse_expr
from starquant.poly import HOLOMORPHIC, PhasePoly


def test_literal_construction():
    assert parse_expr("q*p + hbar").terms == {(1, 1, 0): 1, (0, 0, 1): 1}


def test_holomorphic_monomial():
    f = parse_expr("a^2*abar")
    assert f.basis == HOLOMORPHIC
    assert f.terms == {(2, 1, 0): 1}


def test_negative_exponent_rejected():
    with pytest.raises(ParseError) as info:
        parse_expr("q^-1")
    assert info.value.position == 2


@pytest.mark.parametrize("text", ["2q", "q +", "(q", "q)", "x*q", "q ^ 1.5", "q $ p", ""])
def test_syntax_errors(text):
    with pytest.raises(ParseError):
        parse_expr(text)


def test_arithmetic_and_constants():
    f = parse_expr("(q + i*p)^2 / 2 - 0.5*hbar")
    want = PhasePoly({(2, 0, 0): 0.5, (1, 1, 0): 1j, (0, 2, 0): -0.5, (0, 0, 1): -0.5})
    assert f == want


def test_pretty_printer_order():
    assert format_poly(parse_expr("hbar + p + q^2 + q*p")) == "q^2 + q*p + p + hbar"
    assert format_poly(parse_expr("q*p + i*hbar/2")) == "q*p + (i/2)*hbar"
    assert format_poly(PhasePoly.zero()) == "0"


@given(polys(5))
def test_round_trip_canonical(f):
    assert parse_expr(format_poly(f)) == f


@given(holo_polys(5))
def test_round_trip_holomorphic(f):
    assert parse_expr(format_poly(f), HOLOMORPHIC) == f
