import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from freeconv.transforms.rexpr import (FreePoisson, PoleError, RationalPert, Sum, Translate, atom_location, eval_k,
                                       eval_k_deriv, eval_k_prime, eval_r, free_convolve, k_poles, parse_spec,
                                       simplify, to_spec)

lams = st.floats(0.01, 10)
pts = st.complex_numbers(min_magnitude=0.1, max_magnitude=5).filter(lambda z: abs(z - 1) > 0.1 and abs(z - 3) > 0.1)


def test_free_poisson_value():
    assert abs(eval_r(FreePoisson(2.0), 0.5) - 4.0) < 1e-15


def test_k_is_inverse_plus_r():
    e = FreePoisson(0.5) + Translate(1.0)
    z = 0.3 + 0.2j
    assert abs(eval_k(e, z) - (1 / z + 0.5 / (1 - z) + 1)) < 1e-14


def test_pole_guard():
    with pytest.raises(PoleError):
        eval_r(FreePoisson(1.0), 1.0)
    with pytest.raises(PoleError):
        eval_k(Sum(()), 0.0)


def test_negative_lambda_rejected():
    with pytest.raises(ValueError):
        FreePoisson(-1.0)


@given(lams, lams, pts)
def test_convolution_adds_r(a, b, z):
    e = FreePoisson(a) + FreePoisson(b)
    assert abs(eval_r(e, z) - (a + b) / (1 - z)) <= 1e-12 * (1 + abs((a + b) / (1 - z)))


@given(st.floats(-1, 1), st.integers(1, 4), pts)
def test_pert_derivative_matches_difference(eps, order, z):
    p = RationalPert(eps, 3.0, order)
    h = 1e-6
    fd = (p.deriv(z + h) - p.deriv(z - h)) / (2 * h)
    assert abs(fd - p.deriv(z, 1)) <= 1e-5 * (1 + abs(p.deriv(z, 1)))


@given(lams, pts)
def test_k_derivatives_consistent(lam, z):
    e = FreePoisson(lam) + RationalPert(0.1, 3.0)
    assert abs(eval_k_deriv(e, z, 1) - eval_k_prime(e, z)) < 1e-12 * (1 + abs(eval_k_prime(e, z)))
    assert abs(eval_k_deriv(e, z, 0) - eval_k(e, z)) < 1e-12 * (1 + abs(eval_k(e, z)))


def test_simplify_cancels_perturbations():
    e = FreePoisson(0.5) + RationalPert(0.01, 2.0) + RationalPert(-0.01, 2.0) + FreePoisson(1.0)
    assert simplify(e) == FreePoisson(1.5)


def test_simplify_keeps_distinct_poles():
    e = simplify(RationalPert(0.1, 2.0) + RationalPert(0.1, 3.0) + Translate(1) + Translate(-0.5))
    assert len(e.terms()) == 3
    assert atom_location(e) == 0.5


def test_flatten_and_poles():
    e = free_convolve(FreePoisson(1.0) + RationalPert(0.1, 2.0), Translate(3.0))
    assert len(e.terms()) == 3
    assert k_poles(e) == [0.0, 1.0, 2.0]


@given(st.lists(st.one_of(
    st.builds(FreePoisson, lams),
    st.builds(Translate, st.floats(-5, 5)),
    st.builds(RationalPert, st.floats(-1, 1), st.floats(2, 5), st.integers(1, 3), st.floats(0.1, 2)),
), min_size=1, max_size=5))
def test_spec_round_trip(terms):
    e = Sum(tuple(terms))
    assert parse_spec(to_spec(e)) == e


def test_parse_spec_errors():
    with pytest.raises(ValueError):
        parse_spec("")
    with pytest.raises(ValueError):
        parse_spec("fp:1,2")
    with pytest.raises(ValueError):
        parse_spec("gauss:1")
