"""Cauchy transform by inverting K, Stieltjes inversion and atom extraction."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..numcore import newton_array
from .rexpr import RExpr, Sum, Translate, eval_k, eval_k_prime, simplify, support_scale


class InversionError(RuntimeError):
    pass


class WrongBranchError(InversionError):
    pass


class NegativeDensityError(ValueError):
    """Stieltjes inversion produced a clearly negative density."""


NEGATIVE_TOL = 1e-9
ATOM_THRESHOLD = 1e-6


@dataclass(frozen=True)
class InversionConfig:
    tol: float = 1e-12
    max_iter: int = 80
    ladder: tuple = (1e-2, 5e-3, 2.5e-3, 1.25e-3)
    order: int = 3
    atom_ladder: tuple = (1e-7, 5e-8, 2.5e-8, 1.25e-8)
    continuation_ratio: float = 0.6
    polish: bool = True

    def __post_init__(self):
        for lad in (self.ladder, self.atom_ladder):
            if any(y <= 0 for y in lad) or any(b >= a for a, b in zip(lad, lad[1:])):
                raise ValueError("ladders must be strictly decreasing and positive")
        if self.order + 1 > len(self.ladder):
            raise ValueError("extrapolation order needs order+1 ladder points")


def _kf(expr):
    def f(w, z):
        return eval_k(expr, w) - z

    def fp(w, z):
        return eval_k_prime(expr, w)

    return f, fp


def _newton_to(expr, w, z, cfg, accept):
    f, fp = _kf(expr)

    def tol(w_, z_):
        # |1/w| bounds the size of the cancelling terms in K at large |w|
        return cfg.tol * (np.abs(z_) + np.abs(1.0 / w_))

    return newton_array(f, fp, w, args=(z,), tol=tol, max_iter=cfg.max_iter, accept=accept)


def _refine(expr, w, z, n_steps: int = 60):
    """Extra plain Newton steps, kept while the residual does not grow.

    A residual test alone is too loose next to a double root of K - z (soft
    spectral edges), where the error in w is the square root of the residual.
    """
    f, fp = _kf(expr)
    w = np.array(w, dtype=complex)
    res = np.abs(f(w, z))
    active = np.isfinite(res)
    for _ in range(n_steps):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        with np.errstate(divide="ignore", invalid="ignore"):
            cand = w[idx] - f(w[idx], z[idx]) / fp(w[idx], z[idx])
            r_c = np.abs(f(cand, z[idx]))
        good = np.isfinite(r_c) & (r_c <= res[idx]) & (cand.imag <= 0) & (cand != w[idx])
        w[idx[good]] = cand[good]
        res[idx[good]] = r_c[good]
        active[idx[~good]] = False
    return w


def _lower(w):
    return w.imag < 0


def _closed_lower(w):
    return w.imag <= 0


def cauchy_transform(expr: RExpr, z, cfg: InversionConfig = InversionConfig()) -> np.ndarray:
    """G(z) for ``Im z > 0``: the root of K(w) = z with ``Im w < 0`` on the 1/z branch.

    Newton is seeded with 1/z far from the support, where that seed is
    reliable, and the solution is continued down a vertical path to the
    target. Targets already far away need no continuation.
    """
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    z = z.ravel()
    if np.any(z.imag <= 0):
        raise ValueError("Cauchy transform needs Im z > 0")
    top = 20.0 * support_scale(expr)
    y_start = np.maximum(top, z.imag)
    n_steps = int(np.ceil(np.max(np.log(y_start / z.imag)) / math.log(1 / cfg.continuation_ratio)))
    n_steps = max(n_steps, 0)
    z0 = z.real + 1j * y_start
    w = 1.0 / z0
    for k in range(n_steps + 1):
        frac = 1.0 - k / n_steps if n_steps else 0.0
        zk = z.real + 1j * z.imag * (y_start / z.imag) ** frac
        w, res, ok = _newton_to(expr, w, zk, cfg, _lower)
        if not ok.all():
            bad = np.nonzero(~ok)[0][0]
            raise InversionError(f"Newton failed at z={zk[bad]} (residual {res[bad]:.3e})")
    if np.any(w.imag >= 0):
        raise WrongBranchError("inversion landed outside the lower half plane")
    return w.reshape(shape)


def invert_k(expr: RExpr, z: complex, cfg: InversionConfig = InversionConfig()) -> complex:
    """Scalar G(z) = K^{-1}(z) on the physical branch (``Im G < 0``)."""
    if not complex(z).imag > 0:
        raise ValueError("invert_k needs Im z > 0")
    return complex(cauchy_transform(expr, np.array([z]), cfg)[0])


def _lagrange_at_zero(nodes) -> np.ndarray:
    nodes = np.asarray(nodes, dtype=float)
    w = np.ones_like(nodes)
    for j, yj in enumerate(nodes):
        for m, ym in enumerate(nodes):
            if m != j:
                w[j] *= (0.0 - ym) / (yj - ym)
    return w


def extrapolated_g(expr: RExpr, x, cfg: InversionConfig = InversionConfig()) -> np.ndarray:
    """G(x + i0) by polynomial extrapolation along the y-ladder."""
    x = np.asarray(x, dtype=float).ravel()
    ys = np.asarray(cfg.ladder[-(cfg.order + 1):])
    pts = x[None, :] + 1j * ys[:, None]
    vals = cauchy_transform(expr, pts, cfg)
    return _lagrange_at_zero(ys) @ vals


def boundary_g(expr: RExpr, x, cfg: InversionConfig = InversionConfig()) -> np.ndarray:
    """G(x + i0) on the real axis.

    The ladder extrapolation is refined by continuing the solution further
    down towards the axis and finishing with Newton at y = 0. Points where
    that refinement fails keep the extrapolated value.
    """
    x = np.asarray(x, dtype=float).ravel()
    g_ext = extrapolated_g(expr, x, cfg)
    if not cfg.polish:
        return g_ext
    y = cfg.ladder[-1]
    w = cauchy_transform(expr, x + 1j * y, cfg)
    # ten-fold steps keep each Newton start inside its basin, including at
    # hard edges where G grows like y**-0.5
    for k in range(1, 21):
        w_next, _, ok = _newton_to(expr, w, x + 1j * y * 10.0**-k, cfg, _closed_lower)
        w = np.where(ok, w_next, w)
    w_axis, _, ok = _newton_to(expr, w, x + 0j, cfg, _closed_lower)
    w_axis = _refine(expr, w_axis, x + 0j)
    return np.where(ok, w_axis, g_ext)


def density_grid(expr: RExpr, grid, cfg: InversionConfig = InversionConfig()) -> np.ndarray:
    """Density -Im G(x + i0)/pi at the grid points."""
    grid = np.asarray(grid, dtype=float)
    if grid.size > 1 and np.any(np.diff(grid) < 0):
        raise ValueError("grid must be sorted")
    if grid.size == 0:
        return np.zeros(0)
    dens = -boundary_g(expr, grid, cfg).imag / math.pi
    worst = dens.min()
    if worst < -NEGATIVE_TOL:
        at = grid[int(np.argmin(dens))]
        raise NegativeDensityError(f"density {worst:.3e} at x={at}: not a valid R-transform here")
    return np.maximum(dens, 0.0)


def extract_atom(expr: RExpr, x0: float, cfg: InversionConfig = InversionConfig()) -> float:
    """Mass of the atom at ``x0``: limit of -y Im G(x0 + iy) as y -> 0.

    Extrapolation runs in sqrt(y) so that hard spectral edges at ``x0``
    (where the limit is approached like sqrt(y)) are handled as well as the
    analytic case.
    """
    ys = np.asarray(cfg.atom_ladder, dtype=float)
    # shifting the measure by -x0 is exact in R and avoids the cancellation
    # in (x0 + iy) - x0 at the tiny ladder heights
    centred = simplify(Sum(expr.terms() + (Translate(-float(x0)),)))
    g = cauchy_transform(centred, 1j * ys, cfg)
    vals = -ys * g.imag
    mass = float(_lagrange_at_zero(np.sqrt(ys)) @ vals)
    return mass if mass >= ATOM_THRESHOLD else 0.0
