"""R-transform expression trees.

Nodes evaluate on scalars or numpy arrays and carry analytic derivatives of
any order, so K = 1/z + R and its derivatives never need finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

POLE_TOL = 1e-14


class PoleError(ValueError):
    """Evaluation point sits on (or within 1e-14 of) a pole."""


def _check_real(name, value):
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite")
    return value


def _pole_guard(z, pole):
    if np.any(np.abs(np.asarray(z) - pole) < POLE_TOL):
        raise PoleError(f"evaluation at pole {pole}")


def _falling(order, k):
    """order*(order+1)*...*(order+k-1)."""
    out = 1.0
    for j in range(k):
        out *= order + j
    return out


class RExpr:
    """Base node. Subclasses implement :meth:`deriv`."""

    def deriv(self, z, k: int = 0):
        raise NotImplementedError

    def __call__(self, z):
        return self.deriv(z, 0)

    def poles(self) -> list:
        return []

    def terms(self) -> tuple:
        return (self,)

    def at_infinity(self) -> float:
        """Limit of R(z) as |z| grows."""
        return 0.0

    def __add__(self, other: "RExpr") -> "Sum":
        return free_convolve(self, other)


@dataclass(frozen=True)
class FreePoisson(RExpr):
    """lam / (1 - z): the free Poisson (Marchenko-Pastur) law with mean ``lam``."""

    lam: float

    def __post_init__(self):
        object.__setattr__(self, "lam", _check_real("lam", self.lam))
        if self.lam < 0:
            raise ValueError("lam must be non-negative")

    def deriv(self, z, k=0):
        _pole_guard(z, 1.0)
        return math.factorial(k) * self.lam / (1.0 - z) ** (k + 1)

    def poles(self):
        return [1.0] if self.lam else []


@dataclass(frozen=True)
class Translate(RExpr):
    """Constant R-transform ``c``: a shift of the measure by ``c``."""

    c: float

    def __post_init__(self):
        object.__setattr__(self, "c", _check_real("c", self.c))

    def deriv(self, z, k=0):
        zero = np.zeros_like(np.asarray(z, dtype=complex))
        if k:
            return zero if zero.ndim else 0j
        return zero + self.c if zero.ndim else complex(self.c)

    def at_infinity(self):
        return self.c


@dataclass(frozen=True)
class RationalPert(RExpr):
    """``eps * scale / (z - center)**order``."""

    eps: float
    center: float
    order: int = 2
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "eps", _check_real("eps", self.eps))
        object.__setattr__(self, "center", _check_real("center", self.center))
        object.__setattr__(self, "scale", _check_real("scale", self.scale))
        if int(self.order) != self.order or self.order < 1:
            raise ValueError("order must be an integer >= 1")
        object.__setattr__(self, "order", int(self.order))

    @property
    def coefficient(self) -> float:
        return self.eps * self.scale

    def deriv(self, z, k=0):
        _pole_guard(z, self.center)
        sign = -1.0 if k % 2 else 1.0
        return sign * _falling(self.order, k) * self.coefficient / (z - self.center) ** (self.order + k)

    def poles(self):
        return [self.center] if self.coefficient else []


@dataclass(frozen=True)
class Sum(RExpr):
    children: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))

    def deriv(self, z, k=0):
        if not self.children:
            zero = np.zeros_like(np.asarray(z, dtype=complex))
            return zero if zero.ndim else 0j
        out = self.children[0].deriv(z, k)
        for child in self.children[1:]:
            out = out + child.deriv(z, k)
        return out

    def poles(self):
        seen = []
        for child in self.children:
            for p in child.poles():
                if p not in seen:
                    seen.append(p)
        return seen

    def terms(self):
        out = []
        for child in self.children:
            out.extend(child.terms())
        return tuple(out)

    def at_infinity(self):
        return sum(child.at_infinity() for child in self.children)


# ---------------------------------------------------------------------------


def flatten(expr: RExpr) -> Sum:
    return Sum(expr.terms())


def free_convolve(e1: RExpr, e2: RExpr) -> Sum:
    """R-transform of the free convolution: the flattened sum of the operands."""
    return Sum(e1.terms() + e2.terms())


def simplify(expr: RExpr) -> RExpr:
    """Collect like terms: free Poisson weights, shifts, and perturbations sharing a pole.

    Terms that cancel are dropped, so the two halves of a cancelling pair of
    perturbations disappear exactly.
    """
    lam = 0.0
    shift = 0.0
    perts: dict = {}
    order_seen = []
    for t in expr.terms():
        if isinstance(t, FreePoisson):
            lam += t.lam
        elif isinstance(t, Translate):
            shift += t.c
        elif isinstance(t, RationalPert):
            key = (t.center, t.order)
            if key not in perts:
                order_seen.append(key)
                perts[key] = 0.0
            perts[key] += t.coefficient
        else:
            raise TypeError(f"unknown node {t!r}")
    out = []
    if lam:
        out.append(FreePoisson(lam))
    if shift:
        out.append(Translate(shift))
    for key in order_seen:
        if perts[key]:
            out.append(RationalPert(perts[key], key[0], key[1]))
    if len(out) == 1:
        return out[0]
    return Sum(tuple(out))


def eval_r(expr: RExpr, z):
    return expr.deriv(z, 0)


def eval_k(expr: RExpr, z):
    """K(z) = 1/z + R(z)."""
    _pole_guard(z, 0.0)
    return 1.0 / z + expr.deriv(z, 0)


def eval_k_prime(expr: RExpr, z):
    _pole_guard(z, 0.0)
    return -1.0 / z**2 + expr.deriv(z, 1)


def eval_k_deriv(expr: RExpr, z, k: int):
    _pole_guard(z, 0.0)
    sign = -1.0 if k % 2 else 1.0
    return sign * math.factorial(k) / z ** (k + 1) + expr.deriv(z, k)


def k_poles(expr: RExpr) -> list:
    return sorted(set([0.0] + list(expr.poles())))


def support_scale(expr: RExpr) -> float:
    """Crude bound on the spread of the measure, used to start continuations far away."""
    scale = 1.0
    for t in expr.terms():
        if isinstance(t, FreePoisson):
            scale += (1.0 + math.sqrt(t.lam)) ** 2
        elif isinstance(t, Translate):
            scale += abs(t.c)
        elif isinstance(t, RationalPert):
            scale += abs(t.coefficient) * t.order / max(abs(t.center), 1e-3) ** t.order
    return scale


def atom_location(expr: RExpr) -> float:
    """The only point that can carry an atom: the limit of K at infinity."""
    return float(expr.at_infinity())


# ---------------------------------------------------------------------------
# compact text form used by the CLI:  fp:0.5+tr:1+pert:0.01,2,2,1
# ---------------------------------------------------------------------------


def parse_spec(text: str) -> RExpr:
    terms = []
    for chunk in text.replace(" ", "").split("+"):
        if not chunk:
            continue
        kind, _, args = chunk.partition(":")
        vals = [float(a) for a in args.split(",")] if args else []
        if kind == "fp" and len(vals) == 1:
            terms.append(FreePoisson(vals[0]))
        elif kind == "tr" and len(vals) == 1:
            terms.append(Translate(vals[0]))
        elif kind == "pert" and 2 <= len(vals) <= 4:
            eps, c = vals[0], vals[1]
            order = int(vals[2]) if len(vals) > 2 else 2
            scale = vals[3] if len(vals) > 3 else 1.0
            terms.append(RationalPert(eps, c, order, scale))
        else:
            raise ValueError(f"cannot parse term {chunk!r}")
    if not terms:
        raise ValueError("empty expression")
    return Sum(tuple(terms))


def to_spec(expr: RExpr) -> str:
    parts = []
    for t in expr.terms():
        if isinstance(t, FreePoisson):
            parts.append(f"fp:{t.lam!r}")
        elif isinstance(t, Translate):
            parts.append(f"tr:{t.c!r}")
        elif isinstance(t, RationalPert):
            parts.append(f"pert:{t.eps!r},{t.center!r},{t.order},{t.scale!r}")
    return "+".join(parts) if parts else "tr:0.0"


def from_terms(terms: Iterable[RExpr]) -> Sum:
    return Sum(tuple(terms))
