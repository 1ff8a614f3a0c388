"""Sampled and argument-principle checks of the perturbation argument, in psi coordinates."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..numcore import (Arc, Contour, NoRootError, QuadratureConfig, RefinementError, Segment, TraceError,
                       TracedCurve, integrate_contour, newton_solve, trace_level_curve)
from ..transforms.cauchy import InversionConfig, InversionError, cauchy_transform
from ..transforms.cumulants import laurent_coefficient
from ..transforms.rexpr import PoleError, RExpr
from .psi import PsiMap
from .regions import RegionConfig, RegionSpec, in_A, in_D, in_E

CONDITION_KEYS = ("a", "b", "c", "d", "e", "f", "g", "c_prime", "d_prime")
COUNT_QUAD = QuadratureConfig(panels=4, abs_tol=1e-8, max_refinements=14)
N_TARGETS = 6


class CriticalPointError(RuntimeError):
    pass


class DomainViolation(TraceError):
    pass


class InconclusiveCount(RuntimeError):
    def __init__(self, message, count, residual):
        super().__init__(message)
        self.count = count
        self.residual = residual


@dataclass
class Verdict:
    passed: bool | None
    z: complex = 0j
    value: complex = 0j
    detail: str = ""

    def to_json(self) -> dict:
        return {
            "pass": self.passed,
            "witness": {"z_re": self.z.real, "z_im": self.z.imag,
                        "value_re": complex(self.value).real, "value_im": complex(self.value).imag},
        }


@dataclass
class ConditionReport:
    verdicts: dict
    seed: int = 0

    @property
    def passed(self) -> bool:
        return all(v.passed is True for v in self.verdicts.values())

    def failures(self) -> list:
        return [k for k in CONDITION_KEYS if self.verdicts[k].passed is not True]

    def to_json(self) -> dict:
        return {k: self.verdicts[k].to_json() for k in CONDITION_KEYS}


# ---------------------------------------------------------------------------
# contours in psi coordinates
# ---------------------------------------------------------------------------


def neighbourhood_of_A(eta: float, delta: float) -> Contour:
    """Positively oriented boundary of A inflated by ``delta`` (still clear of +-1)."""
    ro, ri, rd = 1 + eta + delta, 1 - eta - delta, eta - delta
    pieces = [Arc(0j, ro, -math.pi, 0.0)]
    pieces.append(Segment(pieces[-1].end, 1 + rd))
    pieces.append(Arc(1 + 0j, rd, 0.0, -math.pi))
    pieces.append(Segment(pieces[-1].end, ri))
    pieces.append(Arc(0j, ri, 0.0, -math.pi))
    pieces.append(Segment(pieces[-1].end, -1 + rd))
    pieces.append(Arc(-1 + 0j, rd, 0.0, -math.pi))
    pieces.append(Segment(pieces[-1].end, pieces[0].start))
    return Contour(tuple(pieces))


def argument_count(f, fprime, omega: complex, path: Contour, cfg: QuadratureConfig = COUNT_QUAD):
    """Number of solutions of f(z) = omega inside ``path``; returns (count, raw complex count)."""
    raw = integrate_contour(lambda z: fprime(z) / (f(z) - omega), path, cfg) / (2j * math.pi)
    return int(round(raw.real)), raw


def _zero_count(psi: PsiMap, path: Contour):
    return argument_count(psi.d1, psi.d2, 0.0, path)


# ---------------------------------------------------------------------------
# conditions
# ---------------------------------------------------------------------------


def _sign_verdict(values, pts, want_negative: bool) -> Verdict:
    im = np.imag(values)
    i = int(np.argmax(im) if want_negative else np.argmin(im))
    ok = im[i] < 0 if want_negative else im[i] > 0
    return Verdict(bool(ok), complex(pts[i]), complex(values[i]))


def _count_verdict(psi, targets, path, allowed) -> Verdict:
    worst = None
    for z0 in targets:
        try:
            n, raw = argument_count(psi, psi.d1, psi(z0), path)
        except (RefinementError, FloatingPointError, PoleError) as exc:
            return Verdict(None, complex(z0), 0j, f"indeterminate: {exc}")
        bad = n not in allowed or abs(raw - n) > 1e-3
        err = abs(raw - 1)
        if bad:
            return Verdict(False, complex(z0), raw, f"{n} preimages")
        if worst is None or err > worst[0]:
            worst = (err, z0, raw)
    return Verdict(True, complex(worst[1]), worst[2])


def _pick(rng, pts, k):
    return pts[rng.choice(pts.size, size=min(k, pts.size), replace=False)]


def check_conditions(expr: RExpr, cfg: RegionConfig, seed: int = 0, reflect: bool = False) -> ConditionReport:
    """Evaluate the region conditions for psi_n built from ``expr``.

    Sign conditions use dense angular sampling; injectivity and zero counts
    use the argument principle on region boundaries. A check that cannot be
    computed is reported as indeterminate (``pass: None``), never as passed.
    """
    psi = PsiMap(expr, cfg.lam, reflect=reflect)
    spec = RegionSpec.build(cfg)
    rng = np.random.default_rng(seed)
    e, a = cfg.eta, cfg.alpha
    delta = e / 4
    out = {}

    def sampled(key, fn):
        try:
            out[key] = fn()
        except (PoleError, FloatingPointError, ZeroDivisionError) as exc:
            out[key] = Verdict(None, detail=f"indeterminate: {exc}")

    # (a) injective near A
    targets_a = spec.A[(np.abs(spec.A - 1) >= 3 * e) & (np.abs(spec.A + 1) >= 3 * e)]
    out["a"] = _count_verdict(psi, _pick(rng, targets_a, N_TARGETS), neighbourhood_of_A(e, delta), {1})

    # (b) injective near the coronas B and C
    def corona_targets(lo, hi):
        r = rng.uniform(lo, hi, N_TARGETS)
        return r * np.exp(1j * rng.uniform(-math.pi, math.pi, N_TARGETS))

    vb = _count_verdict(psi, corona_targets(1 - 2 * e, 1 - e), Contour.annulus(0j, 1 - 2 * e - delta, 1 - e + delta), {1})
    vc = _count_verdict(psi, corona_targets(1 + e, 1 + 2 * e), Contour.annulus(0j, 1 + e - delta, 1 + 2 * e + delta), {1})
    out["b"] = vb if vb.passed is not True else vc

    # (c), (d), (c'), (d') sign patterns of Im psi
    sampled("c", lambda: _sign_verdict(psi(spec.B_closed), spec.B_closed, True))
    sampled("d", lambda: _sign_verdict(psi(spec.C_closed), spec.C_closed, False))
    sampled("c_prime", lambda: _sign_verdict(psi(spec.B_open), spec.B_open, True))
    sampled("d_prime", lambda: _sign_verdict(psi(spec.C_open), spec.C_open, False))

    # (e) radial growth of Im psi across A, by central differences
    def radial():
        pts = spec.A
        pts = pts[(np.angle(pts) >= -math.pi + e) & (np.angle(pts) <= -e)]
        h = 1e-6
        unit = pts / np.abs(pts)
        der = (np.imag(psi(pts + h * unit)) - np.imag(psi(pts - h * unit))) / (2 * h)
        i = int(np.argmin(der))
        return Verdict(bool(der[i] > 0), complex(pts[i]), complex(der[i]))

    sampled("e", radial)

    # (f) psi' has one zero in D and in E; psi is at most two-to-one there
    counts = {}
    verdict_f = None
    for name, centre, disk in (("D", -1.0, spec.D), ("E", 1.0, spec.E)):
        try:
            n, raw = _zero_count(psi, Contour.circle(complex(centre), a))
            n_in, raw_in = _zero_count(psi, Contour.circle(complex(centre), e))
        except (RefinementError, FloatingPointError, PoleError) as exc:
            verdict_f = Verdict(None, complex(centre), 0j, f"indeterminate: {exc}")
            counts[name] = None
            continue
        counts[name] = (n, raw, n_in, raw_in)
        if n != 1 and verdict_f is None:
            verdict_f = Verdict(False, complex(centre), raw, f"psi' has {n} zeros in {name}")
        inner = disk[np.abs(disk - centre) <= a / 2]
        v = _count_verdict(psi, _pick(rng, inner, N_TARGETS), Contour.circle(complex(centre), a), {0, 1, 2})
        if v.passed is not True and verdict_f is None:
            verdict_f = v
    out["f"] = verdict_f or Verdict(True, -1 + 0j, counts["D"][1])

    # (g) the zeros of psi' in D and E sit within eta of -1 and +1
    verdict_g = None
    for name, centre in (("D", -1.0), ("E", 1.0)):
        c = counts[name]
        if c is None:
            verdict_g = verdict_g or Verdict(None, complex(centre), 0j, "indeterminate")
        elif c[2] != c[0]:
            verdict_g = verdict_g or Verdict(False, complex(centre), c[3], f"{c[0] - c[2]} zeros of psi' between eta and alpha")
    out["g"] = verdict_g or Verdict(True, 1 + 0j, counts["E"][3])
    return ConditionReport(out, seed)


# ---------------------------------------------------------------------------
# critical points, the curve, preimage counts
# ---------------------------------------------------------------------------


@dataclass
class CriticalPoints:
    u: complex
    v: complex
    count_D: float = float("nan")
    count_E: float = float("nan")
    im_u: float = 0.0
    im_v: float = 0.0


def find_critical_points(expr: RExpr, cfg: RegionConfig, tol: float = 1e-13) -> CriticalPoints:
    """Zeros of psi_n' in D and E by Newton from -1 and +1; both must be real.

    ``tol`` is relative to the size of the cancelling terms of psi', so the
    test stays meaningful when the affine scale is large.
    """
    psi = PsiMap(expr, cfg.lam)
    found = []
    for seed, inside in ((-1.0, in_D), (1.0, in_E)):
        w = psi.to_w(seed)
        noise = psi.scale * (1 / abs(w) ** 2 + cfg.lam / abs(1 - w) ** 2)
        try:
            z = newton_solve(psi.d1, psi.d2, seed, tol=tol * noise, max_iter=80)
        except NoRootError as exc:
            raise CriticalPointError(f"no zero of psi' near {seed}: {exc}") from exc
        for _ in range(2):
            # a couple of plain steps settle the iterate at the roundoff floor
            step = psi.d1(z) / psi.d2(z)
            if abs(psi.d1(z - step)) <= abs(psi.d1(z)):
                z = z - step
        if not inside(z, cfg.alpha):
            raise CriticalPointError(f"zero {z} of psi' escaped its disk")
        if abs(z.imag) > 1e-10:
            raise CriticalPointError(f"zero {z} of psi' is not real: symmetry violated")
        found.append(z)
    u, v = found
    n_d = _zero_count(psi, Contour.circle(-1 + 0j, cfg.alpha))[1]
    n_e = _zero_count(psi, Contour.circle(1 + 0j, cfg.alpha))[1]
    return CriticalPoints(complex(u.real), complex(v.real), n_d.real, n_e.real, abs(u.imag), abs(v.imag))


def trace_gamma(expr: RExpr, cp: CriticalPoints, cfg: RegionConfig, step: float = 0.01) -> TracedCurve:
    """Curve in the closed lower half plane on which psi_n is real, from u to v."""
    psi = PsiMap(expr, cfg.lam)
    slack = 1e-9

    def inside(z):
        return bool(z.imag <= slack and (in_A(z, cfg.eta, slack) or in_D(z, cfg.alpha, slack)
                                         or in_E(z, cfg.alpha, slack)))

    try:
        curve = trace_level_curve(psi.im, cp.u, lambda z: abs(z - cp.v) < 1.5 * step, step,
                                  direction=-1j, end=cp.v, inside=inside)
    except TraceError as exc:
        if "left the admissible region" in str(exc):
            raise DomainViolation(str(exc), exc.partial) from exc
        raise
    interior = curve.as_array()[1:-1]
    if interior.size and np.max(interior.imag) >= 0:
        raise DomainViolation("curve touches the real axis between its endpoints", curve.points)
    return curve


def gamma_contour(lam: float, cp: CriticalPoints, curve: TracedCurve, R: float) -> Contour:
    """Boundary of the region below (-inf, u], the curve, and [v, inf), truncated at radius R."""
    p = -1 / math.sqrt(lam)
    pts = [complex(z) for z in reversed(curve.points)]
    pieces = [Segment(complex(R), pts[0])]
    pieces += [Segment(a, b) for a, b in zip(pts, pts[1:])]
    pieces.append(Segment(pts[-1], complex(p + 1 / R)))
    pieces.append(Arc(complex(p), 1 / R, 0.0, -math.pi))
    big = Arc(0j, R, -math.pi, 0.0)
    pieces.append(Segment(pieces[-1].end, big.start))
    pieces.append(big)
    return Contour(tuple(pieces))


def count_preimages(expr: RExpr, omega: complex, cp: CriticalPoints, curve: TracedCurve, R: float = 200.0,
                    cfg: RegionConfig | None = None, lam: float | None = None,
                    quad: QuadratureConfig = COUNT_QUAD, max_residual: float = 1e-3):
    """Preimages of ``omega`` under psi_n in the truncated region below the curve.

    Returns ``(count, residual)`` where the residual is the distance of the
    raw integral from ``2*pi*i*count``.
    """
    if R <= 100:
        raise ValueError("R must exceed 100")
    if not complex(omega).imag > 0:
        raise ValueError("omega must lie in the upper half plane")
    lam = cfg.lam if cfg is not None else lam
    psi = PsiMap(expr, lam)
    path = gamma_contour(lam, cp, curve, R)
    total = integrate_contour(lambda z: psi.d1(z) / (psi(z) - omega), path, quad)
    count = int(round((total / (2j * math.pi)).real))
    residual = abs(total - 2j * math.pi * count)
    if residual > max_residual:
        raise InconclusiveCount(f"integral {total} is not close to a multiple of 2*pi*i", count, residual)
    return count, residual


def sample_omegas(n: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.uniform(-3, 3, n) + 1j * rng.uniform(0.05, 3, n)


# ---------------------------------------------------------------------------
# existence criteria for the inverse of K
# ---------------------------------------------------------------------------


@dataclass
class LemmaReport:
    asymptotic_pass: bool
    analytic_pass: bool
    fit_constant: float
    deviations: list = field(default_factory=list)
    negative_coefficients: list = field(default_factory=list)
    coefficient_drift: float = 0.0
    radii: tuple = ()
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.asymptotic_pass and self.analytic_pass

    def to_json(self) -> dict:
        d = asdict(self)
        d["pass"] = self.passed
        return d


def verify_lemma(expr: RExpr, cfg: InversionConfig = InversionConfig(), n_coeff: int = 6) -> LemmaReport:
    """Check that z*G(z) -> 1 at rate 1/|z| and that K(z) - 1/z extends analytically to 0."""
    # (i) decay of z G(z) - 1 along three rays in the upper half plane
    mods = np.array([1e2, 1e3, 1e4])
    detail = []
    devs = []
    asym_ok = True
    for ang in (math.pi / 4, math.pi / 2, 3 * math.pi / 4):
        z = mods * np.exp(1j * ang)
        try:
            g = cauchy_transform(expr, z, cfg)
        except (InversionError, PoleError) as exc:
            asym_ok = False
            detail.append(f"inversion failed on ray {ang:.3f}: {exc}")
            continue
        dev = np.abs(z * g - 1)
        devs.append(dev.tolist())
        floor = 1e-11
        decaying = all(b <= a * 0.5 or b <= floor for a, b in zip(dev, dev[1:]))
        asym_ok &= bool(decaying and np.all(np.isfinite(dev)))
    fit = float(max((max(np.array(d) * mods) for d in devs), default=float("inf")))

    # (ii) Laurent coefficients of R around 0: no negative powers, radius-independent Taylor part
    poles = [abs(p) for p in expr.poles() if p != 0]
    r2 = 0.5 * min(poles) if poles else 0.5
    r1 = r2 / 2
    neg, drift = [], 0.0
    try:
        for k in (1, 2, 3):
            neg.append(abs(laurent_coefficient(expr, -k, r1)))
        for m in range(n_coeff):
            c1 = laurent_coefficient(expr, m, r1)
            c2 = laurent_coefficient(expr, m, r2)
            drift = max(drift, abs(c1 - c2) / (1 + abs(c1)))
        analytic_ok = max(neg) <= 1e-9 and drift <= 1e-8
    except (RefinementError, FloatingPointError) as exc:
        analytic_ok = False
        detail.append(f"Laurent extraction failed: {exc}")
    return LemmaReport(bool(asym_ok), bool(analytic_ok), fit, devs, neg, drift, (r1, r2), "; ".join(detail))
