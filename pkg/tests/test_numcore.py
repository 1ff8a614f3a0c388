import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from freeconv.numcore import (Arc, Contour, NoRootError, QuadratureConfig, RefinementError, Segment, TraceError,
                              integrate_contour, newton_array, newton_solve, trace_level_curve, winding_count)

finite = st.floats(-3, 3, allow_nan=False)


def test_circle_integral_of_inverse_is_two_pi_i():
    val = integrate_contour(lambda z: 1 / z, Contour.circle(0j, 1.0))
    assert abs(val - 2j * math.pi) < 1e-12


def test_clockwise_circle_flips_sign():
    val = integrate_contour(lambda z: 1 / z, Contour.circle(0j, 1.0, anticlockwise=False))
    assert abs(val + 2j * math.pi) < 1e-12


def test_annulus_excludes_inner_pole():
    path = Contour.annulus(0j, 0.5, 2.0)
    assert path.closed
    assert abs(integrate_contour(lambda z: 1 / z, path)) < 1e-10
    assert abs(integrate_contour(lambda z: 1 / (z - 1.2j), path) - 2j * math.pi) < 1e-10


def test_pieces_must_join():
    with pytest.raises(ValueError):
        Contour((Segment(0j, 1 + 0j), Segment(2 + 0j, 3 + 0j)))


def test_arc_endpoints_and_reverse():
    a = Arc(1 + 0j, 2.0, 0.0, math.pi / 2)
    assert abs(a.start - 3) < 1e-15 and abs(a.end - (1 + 2j)) < 1e-15
    assert abs(a.reversed().start - a.end) < 1e-15


def test_polyline_square_encloses_pole():
    sq = Contour.polyline([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j, 1 + 1j])
    assert abs(integrate_contour(lambda z: 1 / z, sq) - 2j * math.pi) < 1e-10


@given(st.integers(1, 6), st.floats(0.1, 0.9))
def test_winding_count_of_polynomial(n, r):
    # z**n - r**n has all n roots on |z| = r, inside the unit circle
    f = lambda z: n * z ** (n - 1) / (z**n - r**n)
    count, raw = winding_count(f, Contour.circle(0j, 1.0))
    assert count == n and abs(raw - n) < 1e-8


def test_refinement_error_reports_estimate():
    cfg = QuadratureConfig(panels=4, abs_tol=1e-14, max_refinements=1)
    with pytest.raises(RefinementError) as info:
        integrate_contour(lambda z: 1 / (z - 0.999), Contour.circle(0j, 1.0), cfg)
    assert np.isfinite(info.value.error)


def test_nonfinite_integrand_raises():
    with pytest.raises(FloatingPointError):
        integrate_contour(lambda z: np.full_like(z, np.nan), Contour.circle(0j, 1.0))


def test_quadrature_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(panels=2)
    with pytest.raises(ValueError):
        QuadratureConfig(abs_tol=0.0)


def test_newton_solve_cube_root():
    z = newton_solve(lambda z: z**3 - 8, lambda z: 3 * z**2, 1.5 + 0.1j)
    assert abs(z - 2) < 1e-12


def test_newton_solve_reports_trace():
    with pytest.raises(NoRootError) as info:
        newton_solve(lambda z: z**2 + 1, lambda z: 2 * z, 0.5 + 0j, max_iter=5)
    assert len(info.value.trace) >= 1


@given(st.lists(st.complex_numbers(min_magnitude=0.5, max_magnitude=3), min_size=1, max_size=8))
def test_newton_array_square_roots(targets):
    t = np.array(targets)
    seed = np.sqrt(t) * 1.05
    w, res, ok = newton_array(lambda w, t: w**2 - t, lambda w, t: 2 * w, seed, args=(t,))
    assert ok.all()
    assert np.allclose(w**2, t, atol=1e-10)


def test_newton_array_callable_tolerance_and_veto():
    t = np.array([4.0 + 0j, 9.0 + 0j])
    w, res, ok = newton_array(lambda w, t: w**2 - t, lambda w, t: 2 * w, np.array([1.0 + 0j, 2.0 + 0j]), args=(t,),
                              tol=lambda w, t: 1e-12 * np.abs(t), accept=lambda w: w.real > 0)
    assert ok.all() and np.allclose(w, [2, 3])


def test_trace_level_curve_on_quadratic():
    # Re(z**2) vanishes on the diagonals; start at (1+i)/sqrt(2) and walk outward
    field = lambda z: (z * z).real
    start = (1 + 1j) / math.sqrt(2)
    curve = trace_level_curve(field, start, lambda z: abs(z) > 2, 0.05)
    pts = curve.as_array()
    assert np.max(np.abs(pts.real - pts.imag)) < 1e-6
    assert abs(pts[-1]) > 2


def test_trace_from_saddle_with_direction():
    # Im(z**2) = 2xy has a saddle at 0; leaving along -i follows the imaginary axis
    field = lambda z: (z * z).imag
    curve = trace_level_curve(field, 0j, lambda z: z.imag < -1, 0.05, direction=-1j, end=-1.2j)
    pts = curve.as_array()
    assert np.max(np.abs(pts.real)) < 1e-6
    assert curve.end_anchor == -1.2j


def test_trace_region_violation():
    field = lambda z: (z * z).real
    with pytest.raises(TraceError):
        trace_level_curve(field, (1 + 1j) / math.sqrt(2), lambda z: abs(z) > 3, 0.05, inside=lambda z: abs(z) < 2)


def test_trace_conjugate():
    field = lambda z: (z * z).real
    c = trace_level_curve(field, (1 + 1j) / math.sqrt(2), lambda z: abs(z) > 2, 0.05)
    cc = c.conjugate()
    assert np.allclose(cc.as_array(), np.conj(c.as_array()))
