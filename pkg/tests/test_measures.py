import math
from math import comb

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from freeconv.transforms.measures import (MassError, SpectralMeasure, continuous_support, edge_grid, measure_from_r,
                                          measure_moments, mp_closed_form, mp_density, mp_edges, point_mass,
                                          real_critical_points)
from freeconv.transforms.rexpr import FreePoisson, RationalPert, Translate


def narayana_moment(lam, n):
    return sum(comb(n, k) * comb(n, k - 1) / n * lam**k for k in range(1, n + 1))


@pytest.mark.parametrize("lam", [0.25, 1.0, 4.0])
def test_closed_form_mass_and_moments(lam):
    m = mp_closed_form(lam)
    assert abs(m.total_mass() - 1) < 1e-6
    mom = measure_moments(m, 6)
    for n in range(1, 7):
        assert abs(mom[n - 1] - narayana_moment(lam, n)) < 1e-5 * narayana_moment(lam, n)


def test_closed_form_support_and_atom():
    m = mp_closed_form(0.25)
    assert m.atoms == [(0.0, 0.75)]
    assert mp_edges(0.25) == pytest.approx((0.25, 2.25))
    assert mp_closed_form(4.0).atoms == []


def test_density_value_at_center():
    assert abs(mp_density(2.0, 1.0) - 1 / (2 * math.pi)) < 1e-15


@given(st.floats(0.01, 1), st.floats(1.01, 5), st.integers(3, 200))
def test_edge_grid_is_increasing_and_spans(a, b, n):
    g = edge_grid(a, b, n)
    assert g[0] == a and g[-1] == b
    assert np.all(np.diff(g) > 0)


def test_spectral_measure_validation():
    x = np.linspace(0, 1, 11)
    with pytest.raises(ValueError):
        SpectralMeasure([], (0, 1), x, -np.ones(11))
    with pytest.raises(ValueError):
        SpectralMeasure([], (0, 1), x[::-1], np.ones(11))
    with pytest.raises(MassError):
        SpectralMeasure([], (0, 1), x, 2 * np.ones(11))
    SpectralMeasure([], (0, 1), x, np.ones(11))


def test_cdf_with_atom():
    m = mp_closed_form(0.25)
    assert m.cdf(np.array([-1.0]))[0] == 0
    assert abs(m.cdf(np.array([0.0]))[0] - 0.75) < 1e-12
    assert m.cdf_left(np.array([0.0]))[0] == 0
    assert abs(m.cdf(np.array([10.0]))[0] - 1) < 1e-6


@given(st.lists(st.floats(-1, 10), min_size=2, max_size=20))
def test_cdf_is_monotone(pts):
    pts = np.sort(np.array(pts))
    c = mp_closed_form(1.0).cdf(pts)
    assert np.all(np.diff(c) >= -1e-15)


def test_point_mass():
    m = point_mass(2.0)
    assert m.total_mass() == 1
    assert measure_moments(m, 3) == [2.0, 4.0, 8.0]


def test_save_load_round_trip(tmp_path):
    m = mp_closed_form(0.5)
    m.save(tmp_path / "m.csv")
    back = SpectralMeasure.load(tmp_path / "m.csv")
    assert np.array_equal(back.x, m.x) and np.array_equal(back.density, m.density)
    assert back.atoms == m.atoms
    raw = (tmp_path / "m.csv").read_bytes()
    assert raw.startswith(b"x,density\n") and b"\r" not in raw


def test_critical_points_of_free_poisson():
    # K' = -1/w^2 + lam/(1-w)^2 vanishes at w = 1/(1 -+ sqrt(lam))
    lam = 0.5
    cps = real_critical_points(FreePoisson(lam))
    want = sorted([1 / (1 - math.sqrt(lam)), 1 / (1 + math.sqrt(lam))])
    assert cps == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("lam", [0.25, 1.0, 4.0])
def test_support_intervals(lam):
    iv = continuous_support(FreePoisson(lam))
    a, b = mp_edges(lam)
    assert len(iv) == 1
    assert iv[0] == pytest.approx((a, b), abs=1e-12)


@pytest.mark.parametrize("lam", [0.25, 1.0, 4.0])
def test_measure_from_r_matches_closed_form(lam):
    m = measure_from_r(FreePoisson(lam))
    assert abs(m.total_mass() - 1) < 1e-6
    assert np.max(np.abs(m.density - mp_density(m.x, lam))[m.x > 0.05]) < 1e-6
    mom = measure_moments(m, 4)
    assert mom == pytest.approx([narayana_moment(lam, n) for n in range(1, 5)], rel=1e-5)


def test_shifted_measure_moves_support():
    m = measure_from_r(FreePoisson(4.0) + Translate(-1.0))
    assert m.support == pytest.approx((0.0, 8.0), abs=1e-10)
    assert abs(measure_moments(m, 1)[0] - 3.0) < 1e-6


def test_invalid_r_transform_fails_mass_gate():
    # kappa_2 = -eps/c**2 < 0: no probability measure has these cumulants
    with pytest.raises((MassError, ValueError)):
        measure_from_r(RationalPert(1.0, 0.5, 1), n_grid=2001)
