import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from freeconv.theorem.regions import RegionConfig, RegionSpec, in_A, in_B, in_C, in_D, in_E


@given(st.floats(0.02, 0.95))
def test_default_config_satisfies_constraints(lam):
    cfg = RegionConfig.for_lambda(lam)
    s = math.sqrt(lam)
    assert 0 < cfg.alpha < 0.1 and 0 < cfg.eta < cfg.alpha / 2
    assert 1 - 2 * cfg.alpha > max(cfg.r, s) and 1 + 2 * cfg.alpha < 1 / s


def test_invalid_configs():
    with pytest.raises(ValueError):
        RegionConfig(1.5, 0.1, 0.05, 0.01)
    with pytest.raises(ValueError):
        RegionConfig(0.5, 0.1, 0.2, 0.01)
    with pytest.raises(ValueError):
        RegionConfig(0.5, 0.1, 0.05, 0.03)
    with pytest.raises(ValueError):
        RegionConfig(0.81, 0.05, 0.09, 0.01)


@pytest.mark.parametrize("lam", [0.1, 0.5, 0.9])
def test_samples_lie_in_regions(lam):
    spec = RegionSpec.build(RegionConfig.for_lambda(lam))
    assert spec.membership_ok()
    assert spec.B_closed.size == 5 * 720 and spec.D.size > 1000


def test_closed_and_open_angles():
    cfg = RegionConfig.for_lambda(0.5)
    spec = RegionSpec.build(cfg)
    ang = np.angle(spec.B_closed)
    assert ang.min() >= -math.pi + cfg.eta - 1e-12 and ang.max() <= -cfg.eta + 1e-12
    ang = np.angle(spec.C_open)
    assert ang.min() > -math.pi and ang.max() < 0


def test_predicates():
    assert in_A(-1j, 0.03) and not in_A(1j, 0.03) and not in_A(1 + 0j, 0.03)
    assert in_B(0.95, 0.03) and in_C(1.05, 0.03)
    assert in_D(-1.05, 0.09) and in_E(1.05, 0.09) and not in_E(-1.0, 0.09)
