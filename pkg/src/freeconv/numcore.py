"""Numerical kernels: contours and quadrature, Newton iteration, level-curve tracing.

Every complex-valued callable handed to these kernels must accept numpy
arrays of complex points and return an array of the same shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np
from numpy.polynomial.legendre import leggauss

ComplexFn = Callable[[np.ndarray], np.ndarray]

_GL_NODES, _GL_WEIGHTS = leggauss(10)
JOIN_TOL = 1e-12
TRACE_TOL = 1e-9


class RefinementError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, estimate: complex, error: float):
        super().__init__(f"{message} (estimate={estimate!r}, error={error:.3e})")
        self.estimate = estimate
        self.error = error


class NoRootError(RuntimeError):
    """Newton iteration failed; ``trace`` holds the iterates."""

    def __init__(self, message: str, trace: Sequence[complex]):
        super().__init__(message)
        self.trace = list(trace)


class TraceError(RuntimeError):
    """Level-curve tracing failed; ``partial`` holds the points traced so far."""

    def __init__(self, message: str, partial: Sequence[complex]):
        super().__init__(message)
        self.partial = list(partial)


# ---------------------------------------------------------------------------
# contours
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Segment:
    start: complex
    end: complex

    def point(self, t):
        return self.start + (self.end - self.start) * t

    def tangent(self, t):
        return np.full_like(np.asarray(t, dtype=complex), self.end - self.start)

    def reversed(self) -> "Segment":
        return Segment(self.end, self.start)


@dataclass(frozen=True)
class Arc:
    """Circular arc ``center + radius*exp(i*theta)`` for theta from ``theta0`` to ``theta1``.

    ``theta1 > theta0`` runs anticlockwise, ``theta1 < theta0`` clockwise.
    """

    center: complex
    radius: float
    theta0: float
    theta1: float

    def point(self, t):
        theta = self.theta0 + (self.theta1 - self.theta0) * t
        return self.center + self.radius * np.exp(1j * theta)

    def tangent(self, t):
        theta = self.theta0 + (self.theta1 - self.theta0) * t
        return 1j * self.radius * (self.theta1 - self.theta0) * np.exp(1j * theta)

    @property
    def start(self) -> complex:
        return complex(self.center + self.radius * np.exp(1j * self.theta0))

    @property
    def end(self) -> complex:
        return complex(self.center + self.radius * np.exp(1j * self.theta1))

    def reversed(self) -> "Arc":
        return Arc(self.center, self.radius, self.theta1, self.theta0)


Piece = Union[Segment, Arc]


@dataclass(frozen=True)
class Contour:
    pieces: tuple
    anticlockwise: bool = True

    def __post_init__(self):
        pieces = tuple(self.pieces)
        if not pieces:
            raise ValueError("contour needs at least one piece")
        object.__setattr__(self, "pieces", pieces)
        for a, b in zip(pieces, pieces[1:]):
            if abs(a.end - b.start) > JOIN_TOL * max(1.0, abs(a.end)):
                raise ValueError(f"pieces do not join: {a.end} != {b.start}")

    @property
    def closed(self) -> bool:
        a, b = self.pieces[-1].end, self.pieces[0].start
        return abs(a - b) <= JOIN_TOL * max(1.0, abs(a))

    def reversed(self) -> "Contour":
        return Contour(tuple(p.reversed() for p in reversed(self.pieces)), not self.anticlockwise)

    @classmethod
    def circle(cls, center: complex, radius: float, anticlockwise: bool = True) -> "Contour":
        th1 = 2 * math.pi if anticlockwise else -2 * math.pi
        # two half arcs keep each piece smooth and well resolved
        half = th1 / 2
        return cls((Arc(center, radius, 0.0, half), Arc(center, radius, half, th1)), anticlockwise)

    @classmethod
    def annulus(cls, center: complex, r_inner: float, r_outer: float) -> "Contour":
        """Positively oriented boundary of an annulus, joined by a slit along angle 0."""
        c = complex(center)
        pieces = (
            Arc(c, r_outer, 0.0, math.pi),
            Arc(c, r_outer, math.pi, 2 * math.pi),
            Segment(c + r_outer * np.exp(2j * math.pi), c + r_inner),
            Arc(c, r_inner, 2 * math.pi, math.pi),
            Arc(c, r_inner, math.pi, 0.0),
            Segment(c + r_inner, c + r_outer),
        )
        # exp(2i*pi) is not exactly 1; snap the slit so the pieces join
        pieces = (
            pieces[0],
            pieces[1],
            Segment(pieces[1].end, pieces[3].start),
            pieces[3],
            pieces[4],
            Segment(pieces[4].end, pieces[0].start),
        )
        return cls(pieces, True)

    @classmethod
    def polyline(cls, points: Sequence[complex], anticlockwise: bool = True) -> "Contour":
        pts = [complex(p) for p in points]
        return cls(tuple(Segment(a, b) for a, b in zip(pts, pts[1:])), anticlockwise)


@dataclass(frozen=True)
class QuadratureConfig:
    panels: int = 4
    abs_tol: float = 1e-10
    max_refinements: int = 12

    def __post_init__(self):
        if self.panels < 4:
            raise ValueError("panels must be >= 4")
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")


def _panel_sum(f: ComplexFn, piece: Piece, n: int) -> complex:
    edges = np.linspace(0.0, 1.0, n + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    t = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    vals = np.asarray(f(piece.point(t)), dtype=complex) * piece.tangent(t)
    if not np.all(np.isfinite(vals)):
        raise FloatingPointError("integrand is not finite on the path")
    # numpy reduces pairwise, so the result is fixed for a fixed panel count
    return complex(np.sum(vals * w))


def _integrate_piece(f: ComplexFn, piece: Piece, cfg: QuadratureConfig, tol: float):
    n = cfg.panels
    coarse = _panel_sum(f, piece, n)
    err = math.inf
    for _ in range(cfg.max_refinements):
        n *= 2
        fine = _panel_sum(f, piece, n)
        err = abs(fine - coarse)
        if err <= tol:
            return fine, err
        coarse = fine
    raise RefinementError("contour quadrature did not converge", coarse, err)


def integrate_contour(f: ComplexFn, path: Contour, cfg: QuadratureConfig = QuadratureConfig()) -> complex:
    """Adaptive composite 10-point Gauss-Legendre quadrature of ``f(z) dz`` along ``path``.

    Each piece is refined by panel doubling until successive estimates agree
    within its share of ``cfg.abs_tol``.
    """
    share = cfg.abs_tol / len(path.pieces)
    parts = [_integrate_piece(f, p, cfg, share)[0] for p in path.pieces]
    return complex(math.fsum(p.real for p in parts), math.fsum(p.imag for p in parts))


def winding_count(fprime_over_f: ComplexFn, path: Contour, cfg: QuadratureConfig = QuadratureConfig()):
    """Argument-principle count ``(1/2 pi i) * integral``; returns (rounded count, raw value)."""
    raw = integrate_contour(fprime_over_f, path, cfg) / (2j * math.pi)
    return int(round(raw.real)), raw


# ---------------------------------------------------------------------------
# Newton iteration
# ---------------------------------------------------------------------------


def newton_solve(f, fprime, seed: complex, tol: float = 1e-12, max_iter: int = 60,
                 max_halvings: int = 40) -> complex:
    """Damped Newton iteration for a scalar complex equation ``f(w) = 0``.

    The step is halved while it fails to reduce ``|f|``. Returns ``w`` with
    ``|f(w)| <= tol``; raises :class:`NoRootError` otherwise.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    w = complex(seed)
    fw = complex(f(w))
    trace = [w]
    for _ in range(max_iter):
        if not math.isfinite(abs(fw)):
            raise NoRootError("non-finite residual", trace)
        if abs(fw) <= tol:
            return w
        d = complex(fprime(w))
        if d == 0 or not math.isfinite(abs(d)):
            raise NoRootError("derivative vanished", trace)
        step = fw / d
        for _ in range(max_halvings):
            cand = w - step
            fc = complex(f(cand))
            if math.isfinite(abs(fc)) and abs(fc) < abs(fw):
                break
            step *= 0.5
        else:
            raise NoRootError("damping could not reduce the residual", trace)
        w, fw = cand, fc
        trace.append(w)
    if abs(fw) <= tol:
        return w
    raise NoRootError(f"no convergence in {max_iter} iterations (|f|={abs(fw):.3e})", trace)


def newton_array(f, fprime, seed, args=(), tol=1e-13, max_iter: int = 60, max_halvings: int = 30,
                 accept=None):
    """Elementwise damped Newton on arrays.

    ``f(w, *args)`` and ``fprime(w, *args)`` receive the active subset of
    ``w`` together with the matching slices of each array in ``args``.
    ``tol`` is a scalar, a per-element array, or a callable ``tol(w, *args)``
    for tolerances that depend on the iterate. ``accept(w)`` may veto
    candidate iterates; vetoed steps are halved like non-decreasing ones.
    Returns ``(w, residual, converged)``.
    """
    w = np.array(seed, dtype=complex, copy=True).ravel()
    args = tuple(np.asarray(a).ravel() for a in args)
    if callable(tol):
        tol_fn = tol
    else:
        args = args + (np.broadcast_to(np.asarray(tol, dtype=float), w.shape).copy(),)
        f_, fp_ = f, fprime
        f = lambda w_, *a: f_(w_, *a[:-1])  # noqa: E731
        fprime = lambda w_, *a: fp_(w_, *a[:-1])  # noqa: E731
        tol_fn = lambda w_, *a: a[-1]  # noqa: E731
    with np.errstate(all="ignore"):
        fw = f(w, *args)
    res = np.abs(fw)
    active = ~(res <= tol_fn(w, *args))
    for _ in range(max_iter):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        sub = tuple(a[idx] for a in args)
        wa, fa, ra = w[idx], fw[idx], res[idx]
        with np.errstate(all="ignore"):
            step = fa / fprime(wa, *sub)
        pending = np.ones(idx.size, dtype=bool)
        new_w, new_f, new_r = wa.copy(), fa.copy(), ra.copy()
        for _ in range(max_halvings):
            pos = np.nonzero(pending)[0]
            cand = wa[pos] - step[pos]
            with np.errstate(all="ignore"):
                fc = f(cand, *(a[pos] for a in sub))
            rc = np.abs(fc)
            ok = np.isfinite(rc) & (rc < ra[pos])
            if accept is not None:
                ok &= accept(cand)
            good = pos[ok]
            new_w[good], new_f[good], new_r[good] = cand[ok], fc[ok], rc[ok]
            pending[good] = False
            if not pending.any():
                break
            step[pending] *= 0.5
        w[idx], fw[idx], res[idx] = new_w, new_f, new_r
        active[idx[pending]] = False
        with np.errstate(all="ignore"):
            active[idx] &= ~(new_r <= tol_fn(new_w, *sub))
    with np.errstate(all="ignore"):
        done = res <= tol_fn(w, *args)
    return w, res, done


# ---------------------------------------------------------------------------
# level-curve tracing
# ---------------------------------------------------------------------------


@dataclass
class TracedCurve:
    points: list
    start_anchor: complex
    end_anchor: complex | None
    step: float
    tol: float = TRACE_TOL

    def as_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=complex)

    def conjugate(self) -> "TracedCurve":
        end = None if self.end_anchor is None else self.end_anchor.conjugate()
        return TracedCurve([p.conjugate() for p in self.points], self.start_anchor.conjugate(), end,
                           self.step, self.tol)


def _gradient(field, z: complex) -> complex:
    h = 1e-6 * (1.0 + abs(z))
    gx = (field(z + h) - field(z - h)) / (2 * h)
    gy = (field(z + 1j * h) - field(z - 1j * h)) / (2 * h)
    return complex(gx, gy)


def _correct(field, z: complex, tol: float, max_iter: int = 25):
    """Project ``z`` onto ``field == 0`` along the gradient."""
    for _ in range(max_iter):
        v = field(z)
        if abs(v) <= tol:
            return z
        g = _gradient(field, z)
        gg = abs(g) ** 2
        if gg == 0 or not math.isfinite(gg):
            return None
        z = z - v * g / gg
    return z if abs(field(z)) <= tol else None


def trace_level_curve(field: Callable[[complex], float], start: complex, stop_pred: Callable[[complex], bool],
                      step: float, *, direction: complex | None = None, end: complex | None = None,
                      tol: float = TRACE_TOL, max_points: int = 200_000, max_turn: float = 0.35,
                      inside: Callable[[complex], bool] | None = None) -> TracedCurve:
    """Trace the zero set of a real field by tangent prediction and gradient projection.

    ``start`` is either on the level set or an anchor (e.g. a saddle) from
    which the curve leaves along ``direction``. Tracing stops once
    ``stop_pred`` holds; ``end`` (if given) is then appended as end anchor.
    ``inside`` optionally restricts the curve to a region.
    """
    start = complex(start)
    pts = [start]
    # an explicit direction also leaves saddles, where the gradient vanishes
    anchored = abs(field(start)) > tol or direction is not None
    if anchored and direction is None:
        raise TraceError("start is off the level set and no direction was given", pts)
    if direction is None:
        g = _gradient(field, start)
        direction = complex(-g.imag, g.real)
    if direction == 0:
        raise TraceError("degenerate start direction", pts)
    tangent = direction / abs(direction)
    h = step
    z = start
    while True:
        if len(pts) >= max_points:
            raise TraceError("point budget exhausted", pts)
        if h < step / 1024:
            raise TraceError("step collapsed", pts)
        if len(pts) == 1 and anchored:
            t_new = tangent
        else:
            g = _gradient(field, z)
            if g == 0:
                raise TraceError("vanishing gradient on the curve", pts)
            t_new = complex(-g.imag, g.real) / abs(g)
            if (t_new * tangent.conjugate()).real < 0:
                t_new = -t_new
        cand = _correct(field, z + h * t_new, tol)
        ok = cand is not None and abs(cand - z) <= 2 * step and abs(cand - z) > 0.25 * h
        if ok:
            chord = (cand - z) / abs(cand - z)
            ok = abs(np.angle(chord * tangent.conjugate())) <= max_turn or (len(pts) == 1 and anchored)
        if ok and inside is not None and not inside(cand):
            raise TraceError(f"curve left the admissible region at {cand}", pts + [cand])
        if not ok:
            h *= 0.5
            continue
        tangent = (cand - z) / abs(cand - z)
        z = cand
        pts.append(z)
        h = min(step, 1.5 * h)
        if stop_pred(z):
            break
    if end is not None:
        pts.append(complex(end))
    return TracedCurve(pts, start, None if end is None else complex(end), step, tol)
