"""Free cumulants: Taylor coefficients of R and the moment-cumulant recursion."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..numcore import Contour, QuadratureConfig, integrate_contour
from .rexpr import PoleError, RExpr


class SymmetryError(ValueError):
    """Extracted cumulants have an imaginary part: parameters are not real."""


@dataclass(frozen=True)
class CumulantSeq:
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def __getitem__(self, m: int) -> float:
        """1-based access: ``seq[1]`` is the first cumulant."""
        if m < 1:
            raise IndexError("cumulants are indexed from 1")
        return self.values[m - 1]

    def __len__(self):
        return len(self.values)


def cumulants_to_moments(kappa: Sequence[float] | CumulantSeq) -> list:
    """Moments m_1..m_N from free cumulants kappa_1..kappa_N.

    m_n = sum_k kappa_k * [x^(n-k)] M(x)^k, where M(x) = sum_j m_j x^j and m_0 = 1.
    """
    kappa = list(kappa.values if isinstance(kappa, CumulantSeq) else kappa)
    n_max = len(kappa)
    m = np.zeros(n_max + 1)
    m[0] = 1.0
    for n in range(1, n_max + 1):
        series = m[:n]
        power = np.array([1.0])
        total = 0.0
        for k in range(1, n + 1):
            power = np.convolve(power, series)[:n]
            if n - k < power.size:
                total += kappa[k - 1] * power[n - k]
        m[n] = total
    return m[1:].tolist()


def default_radius(expr: RExpr) -> float:
    """Half the distance from 0 to the nearest pole of R (0.5 when R has none)."""
    poles = [abs(p) for p in expr.poles()]
    if any(p == 0 for p in poles):
        raise PoleError("R has a pole at 0; no Taylor expansion there")
    return 0.5 * min(poles) if poles else 0.5


def laurent_coefficient(expr: RExpr, index: int, radius: float,
                        cfg: QuadratureConfig = QuadratureConfig(abs_tol=1e-13)) -> complex:
    """Coefficient of z**index in the Laurent expansion of R on |z| = radius."""
    path = Contour.circle(0j, radius)
    # roundoff in the integral grows like radius**-index
    tol = cfg.abs_tol * max(1.0, radius ** -index)
    q = QuadratureConfig(cfg.panels, tol, cfg.max_refinements)
    val = integrate_contour(lambda z: expr.deriv(z, 0) / z ** (index + 1), path, q)
    return val / (2j * math.pi)


def r_taylor_coefficients(expr: RExpr, n_max: int, cfg: QuadratureConfig = QuadratureConfig(abs_tol=1e-13),
                          radius: float | None = None) -> CumulantSeq:
    """Free cumulants kappa_1..kappa_{n_max} via Cauchy integrals of R on a circle."""
    rho = default_radius(expr) if radius is None else radius
    out = []
    for m in range(n_max):
        c = laurent_coefficient(expr, m, rho, cfg)
        scale = 1.0 + abs(c.real)
        if abs(c.imag) > 1e-8 * scale:
            raise SymmetryError(f"cumulant {m + 1} has imaginary part {c.imag:.3e}")
        out.append(c.real)
    return CumulantSeq(tuple(out))
