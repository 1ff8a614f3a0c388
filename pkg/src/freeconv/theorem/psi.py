"""The rescaled map psi(z) = K(s*z + 1/(1-lam)), s = sqrt(lam)/(1-lam), and its closed forms."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..transforms.rexpr import (FreePoisson, POLE_TOL, PoleError, RationalPert, RExpr, Sum, Translate,
                                eval_k_deriv)


class HypothesisError(ValueError):
    """The expression is not of the form FreePoisson(lam) + admissible perturbation."""


def affine(lam: float) -> tuple:
    """(scale, shift) of the map z -> scale*z + shift."""
    return math.sqrt(lam) / (1 - lam), 1 / (1 - lam)


def _guard(lam, z):
    s = math.sqrt(lam)
    for p in (-s, -1 / s):
        if np.any(np.abs(np.asarray(z) - p) < POLE_TOL):
            raise PoleError(f"psi has a pole at {p}")


def psi_closed_form(lam: float, z):
    _guard(lam, z)
    s = math.sqrt(lam)
    return z * (1 - lam) ** 2 / ((s * z + 1) * (z + s))


def psi_prime_closed_form(lam: float, z):
    _guard(lam, z)
    s = math.sqrt(lam)
    return (1 - lam) ** 2 * s * (1 - z**2) / ((s * z + 1) ** 2 * (z + s) ** 2)


def im_psi_factored(lam: float, z):
    """Im psi(z) written as a positive factor times (1 - |z|^2) * Im z."""
    s = math.sqrt(lam)
    z = np.asarray(z, dtype=complex)
    return (1 - lam) ** 2 * s / (np.abs(s * z + 1) ** 2 * np.abs(z + s) ** 2) * (1 - np.abs(z) ** 2) * z.imag


def preimage_roots(lam: float, target: complex) -> np.ndarray:
    """Both preimages of a non-zero ``target`` under psi (roots of a monic quadratic with unit product)."""
    s = math.sqrt(lam)
    b = 1 / s + s - (1 - lam) ** 2 / (target * s)
    disc = np.sqrt(b * b - 4 + 0j)
    return np.array([(-b + disc) / 2, (-b - disc) / 2])


@dataclass(frozen=True)
class TheoremSplit:
    """``expr`` = FreePoisson(lam) + perturbation + remainder.

    The remainder holds extra free Poisson weight and shifts: both are
    R-transforms of known measures, so they are certified without the
    perturbation argument.
    """

    lam: float
    perturbation: tuple
    remainder: tuple

    @property
    def theorem_expr(self) -> Sum:
        return Sum((FreePoisson(self.lam),) + self.perturbation)

    @property
    def remainder_expr(self) -> Sum:
        return Sum(self.remainder)


def split_expr(expr: RExpr, lam: float) -> TheoremSplit:
    if not 0 < lam < 1:
        raise HypothesisError("the perturbation argument needs 0 < lam < 1")
    total = 0.0
    perts, shifts = [], []
    for t in expr.terms():
        if isinstance(t, FreePoisson):
            total += t.lam
        elif isinstance(t, RationalPert):
            perts.append(t)
        elif isinstance(t, Translate):
            shifts.append(t)
        else:
            raise HypothesisError(f"unsupported term {t!r}")
    extra = total - lam
    if extra < -1e-12:
        raise HypothesisError(f"free Poisson weight {total} is below lam={lam}")
    remainder = ([FreePoisson(extra)] if extra > 1e-15 else []) + shifts
    return TheoremSplit(lam, tuple(perts), tuple(remainder))


class PsiMap:
    """psi_n for a theorem-form expression, with analytic derivatives.

    With ``reflect=True`` every evaluation goes through z -> conj(f(conj z)),
    which equals f itself exactly when the perturbation is conjugate symmetric.
    """

    def __init__(self, expr: RExpr, lam: float, reflect: bool = False):
        self.split = split_expr(expr, lam)
        self.lam = lam
        self.expr = self.split.theorem_expr
        self.scale, self.shift = affine(lam)
        self.reflect = reflect

    def _k(self, z, k):
        if self.reflect:
            z = np.conj(z)
        out = self.scale**k * eval_k_deriv(self.expr, self.scale * z + self.shift, k)
        return np.conj(out) if self.reflect else out

    def __call__(self, z):
        return self._k(z, 0)

    def d1(self, z):
        return self._k(z, 1)

    def d2(self, z):
        return self._k(z, 2)

    def im(self, z):
        return float(np.imag(self._k(complex(z), 0)))

    def to_w(self, z):
        return self.scale * z + self.shift

    def poles(self) -> list:
        ws = [0.0, 1.0] + [p for t in self.split.perturbation for p in t.poles()]
        return [(w - self.shift) / self.scale for w in ws]

    def perturbation(self, w):
        out = 0j
        for t in self.split.perturbation:
            out = out + t.deriv(w, 0)
        return out


def check_hypotheses(split: TheoremSplit, r: float, seed: int = 0) -> dict:
    """Hypotheses on the perturbation: conjugate symmetry, decay at infinity, analyticity off the disk."""
    scale, shift = affine(split.lam)
    rng = np.random.default_rng(seed)
    z = rng.normal(size=200) * 3 + 1j * rng.normal(size=200) * 3
    z = z[np.abs(z - shift) > r]
    pert = Sum(split.perturbation)
    sym = float(np.max(np.abs(pert.deriv(np.conj(z), 0) - np.conj(pert.deriv(z, 0))))) if split.perturbation else 0.0
    big = 1e6 * np.exp(1j * np.linspace(0, 2 * np.pi, 16))
    decay = float(np.max(np.abs(pert.deriv(big, 0)) + np.abs(big * pert.deriv(big, 1)))) if split.perturbation else 0.0
    dist = max((abs(t.center - shift) for t in split.perturbation), default=0.0)
    return {
        "conjugate_symmetric": sym <= 1e-12,
        "vanishes_at_infinity": decay <= 1e-5,
        "analytic_off_disk": dist < r,
        "radius_ok": 0 < r < scale,
        "max_symmetry_defect": sym,
        "decay_at_1e6": decay,
        "pole_offset": dist,
    }
