"""Region parameters and sample sets for the perturbation argument (psi coordinates)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .psi import affine


@dataclass(frozen=True)
class RegionConfig:
    lam: float
    r: float
    alpha: float
    eta: float
    samples: int = 720
    disk_samples: int = 40

    def __post_init__(self):
        lam, r, a, e = self.lam, self.r, self.alpha, self.eta
        if not 0 < lam < 1:
            raise ValueError("lam must lie in (0, 1)")
        if not 0 < r < affine(lam)[0]:
            raise ValueError("r must lie in (0, sqrt(lam)/(1-lam))")
        if not 0 < a < 0.1:
            raise ValueError("alpha must lie in (0, 1/10)")
        if not (1 - 2 * a > max(r, math.sqrt(lam)) and 1 + 2 * a < 1 / math.sqrt(lam)):
            raise ValueError("alpha too large for lam and r")
        if not 0 < e < a / 2:
            raise ValueError("eta must lie in (0, alpha/2)")

    @classmethod
    def for_lambda(cls, lam: float, r: float | None = None, **kw) -> "RegionConfig":
        s = math.sqrt(lam)
        if r is None:
            r = 0.5 * min(affine(lam)[0], 1 - s)
        alpha = 0.9 * min(0.1, (1 - max(r, s)) / 2, (1 / s - 1) / 2)
        return cls(lam, r, alpha, alpha / 3, **kw)


def in_A(z, eta, slack=0.0):
    z = np.asarray(z)
    m = np.abs(z)
    return ((m >= 1 - eta - slack) & (m <= 1 + eta + slack) & (np.abs(z - 1) >= eta - slack)
            & (np.abs(z + 1) >= eta - slack) & (z.imag <= slack))


def in_B(z, eta, slack=1e-12):
    m = np.abs(np.asarray(z))
    return (m >= 1 - 2 * eta - slack) & (m <= 1 - eta + slack)


def in_C(z, eta, slack=1e-12):
    m = np.abs(np.asarray(z))
    return (m >= 1 + eta - slack) & (m <= 1 + 2 * eta + slack)


def in_D(z, alpha, slack=0.0):
    return np.abs(np.asarray(z) + 1) <= alpha + slack


def in_E(z, alpha, slack=0.0):
    return np.abs(np.asarray(z) - 1) <= alpha + slack


def _polar(r_lo, r_hi, thetas, n_r=5):
    radii = np.linspace(r_lo, r_hi, n_r)
    return (radii[:, None] * np.exp(1j * thetas[None, :])).ravel()


@dataclass
class RegionSpec:
    """Sample sets. ``*_closed`` use angles in [-pi+eta, -eta]; ``*_open`` cover ]-pi, 0[."""

    cfg: RegionConfig
    A: np.ndarray
    B_closed: np.ndarray
    B_open: np.ndarray
    C_closed: np.ndarray
    C_open: np.ndarray
    D: np.ndarray
    E: np.ndarray

    @classmethod
    def build(cls, cfg: RegionConfig) -> "RegionSpec":
        e, a, n = cfg.eta, cfg.alpha, cfg.samples
        closed = np.linspace(-math.pi + e, -e, n)
        opened = -math.pi + math.pi * (np.arange(n) + 0.5) / n
        A = _polar(1 - e, 1 + e, closed)
        A = A[in_A(A, e)]
        g = np.linspace(-a, a, cfg.disk_samples)
        sq = (g[:, None] + 1j * g[None, :]).ravel()
        disk = sq[np.abs(sq) <= a]
        return cls(cfg, A, _polar(1 - 2 * e, 1 - e, closed), _polar(1 - 2 * e, 1 - e, opened),
                   _polar(1 + e, 1 + 2 * e, closed), _polar(1 + e, 1 + 2 * e, opened), disk - 1, disk + 1)

    def membership_ok(self) -> bool:
        c = self.cfg
        return bool(in_A(self.A, c.eta).all() and in_B(self.B_closed, c.eta).all() and in_B(self.B_open, c.eta).all()
                    and in_C(self.C_closed, c.eta).all() and in_C(self.C_open, c.eta).all()
                    and in_D(self.D, c.alpha).all() and in_E(self.E, c.alpha).all())
