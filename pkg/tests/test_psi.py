import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from freeconv.theorem.psi import (HypothesisError, PsiMap, affine, check_hypotheses, im_psi_factored, preimage_roots,
                                  psi_closed_form, psi_prime_closed_form, split_expr)
from freeconv.transforms.rexpr import FreePoisson, PoleError, RationalPert, Translate, eval_k

lams = st.floats(0.05, 0.95)
zs = st.complex_numbers(max_magnitude=4).filter(lambda z: abs(z) > 1e-3)


def off_poles(lam, z):
    s = math.sqrt(lam)
    return abs(z + s) > 1e-2 and abs(z + 1 / s) > 1e-2


def test_closed_form_values():
    assert psi_closed_form(0.25, 0) == 0
    assert abs(psi_closed_form(0.25, 1) - 0.25) < 1e-15
    assert abs(psi_closed_form(0.25, -1) - 2.25) < 1e-14
    # psi(z) ~ z (1-lam)^2/sqrt(lam) near 0, so the slope at 0 is +1.125
    assert abs(psi_prime_closed_form(0.25, 0) - 1.125) < 1e-15


@given(lams)
def test_derivative_vanishes_at_plus_minus_one(lam):
    assert abs(psi_prime_closed_form(lam, 1.0)) < 1e-12
    assert abs(psi_prime_closed_form(lam, -1.0)) < 1e-12


@given(lams, zs)
def test_closed_form_equals_affine_k(lam, z):
    if not off_poles(lam, z):
        return
    s, t0 = affine(lam)
    want = eval_k(FreePoisson(lam), s * z + t0)
    got = psi_closed_form(lam, z)
    assert abs(got - want) <= 1e-12 * (1 + abs(want))
    assert abs(PsiMap(FreePoisson(lam), lam)(z) - got) <= 1e-12 * (1 + abs(got))


@given(lams, zs)
def test_im_factorization(lam, z):
    if not off_poles(lam, z):
        return
    assert abs(psi_closed_form(lam, z).imag - im_psi_factored(lam, z)) <= 1e-12 * (1 + abs(psi_closed_form(lam, z)))


@given(lams, zs)
def test_derivative_matches_difference(lam, z):
    if not off_poles(lam, z) or min(abs(z + math.sqrt(lam)), abs(z + 1 / math.sqrt(lam))) < 0.1:
        return
    h = 1e-6
    fd = (psi_closed_form(lam, z + h) - psi_closed_form(lam, z - h)) / (2 * h)
    assert abs(fd - psi_prime_closed_form(lam, z)) <= 1e-6 * (1 + abs(fd))


@given(lams, zs)
def test_preimage_product_is_one(lam, z0):
    if not off_poles(lam, z0) or abs(psi_closed_form(lam, z0)) < 1e-6:
        return
    roots = preimage_roots(lam, psi_closed_form(lam, z0))
    assert abs(roots[0] * roots[1] - 1) < 1e-10
    assert min(abs(roots - z0)) < 1e-6 * (1 + abs(z0))


def test_preimage_example():
    lam = 0.5
    roots = preimage_roots(lam, psi_closed_form(lam, -0.5 - 0.5j))
    assert abs(np.prod(roots) - 1) < 1e-10


def test_pole_guard():
    with pytest.raises(PoleError):
        psi_closed_form(0.25, -0.5)


def test_perturbed_psi_example():
    lam = 0.5
    e = FreePoisson(lam) + RationalPert(0.001, 2.0)
    s, t0 = affine(lam)
    w = s * -2j + t0
    want = 1 / w + lam / (1 - w) + 0.001 / (w - 2) ** 2
    got = PsiMap(e, lam)(-2j)
    assert abs(got - want) < 1e-14 and got.imag > 0


@given(zs)
def test_reflection_is_identity_for_symmetric_perturbation(z):
    e = FreePoisson(0.5) + RationalPert(0.01, 2.0)
    if abs(PsiMap(e, 0.5).to_w(z) - 2.0) < 1e-2 or not off_poles(0.5, z):
        return
    a, b = PsiMap(e, 0.5)(z), PsiMap(e, 0.5, reflect=True)(z)
    assert abs(a - b) <= 1e-12 * (1 + abs(a))


def test_split_expr():
    sp = split_expr(FreePoisson(0.5) + RationalPert(-0.01, 2.0) + FreePoisson(0.5) + Translate(1.0), 0.5)
    assert sp.perturbation == (RationalPert(-0.01, 2.0),)
    assert sp.remainder == (FreePoisson(0.5), Translate(1.0))
    with pytest.raises(HypothesisError):
        split_expr(FreePoisson(0.2), 0.5)
    with pytest.raises(HypothesisError):
        split_expr(FreePoisson(2.0), 1.5)


def test_hypotheses_report():
    lam = 0.5
    sp = split_expr(FreePoisson(lam) + RationalPert(0.001, 2.0), lam)
    h = check_hypotheses(sp, 0.1)
    assert h["conjugate_symmetric"] and h["vanishes_at_infinity"] and h["analytic_off_disk"] and h["radius_ok"]
    far = split_expr(FreePoisson(lam) + RationalPert(0.001, 5.0), lam)
    assert not check_hypotheses(far, 0.1)["analytic_off_disk"]
