"""Build and certify the counterexample pair.

plus  = FreePoisson(lam')   + eps/(z - c)**2
minus = FreePoisson(lam')   - eps/(z - c)**2 + FreePoisson(lam - 2 lam')

The perturbations cancel in the R-sum, which is therefore lam/(1 - z).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..theorem.construct import ConstructionError, ConstructionLog, construct_measure
from ..theorem.regions import RegionConfig
from ..transforms.cauchy import InversionConfig
from ..transforms.cumulants import CumulantSeq, r_taylor_coefficients
from ..transforms.measures import DEFAULT_GRID as MEASURE_GRID
from ..transforms.measures import SpectralMeasure, measure_from_r, mp_closed_form, mp_density
from ..transforms.rexpr import FreePoisson, RationalPert, RExpr, Sum, eval_r, simplify, to_spec

DEFAULT_GRID = (0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001, 5e-4, 2e-4, 1e-4)
CERT_TOL = 1e-6
N_CUMULANTS = 8


class SearchExhausted(RuntimeError):
    def __init__(self, message, failures):
        super().__init__(message)
        self.failures = failures


@dataclass(frozen=True)
class CounterexampleConfig:
    lam: float
    lam_prime: float
    eps: float | None = None
    c: float | None = None
    r: float | None = None

    def __post_init__(self):
        lp = self.lam_prime
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if not 0 < lp < min(1.0, self.lam / 2):
            raise ValueError("lam_prime must lie in (0, min(1, lam/2))")
        scale = math.sqrt(lp) / (1 - lp)
        if self.r is None:
            object.__setattr__(self, "r", RegionConfig.for_lambda(lp).r)
        if not 0 < self.r < scale:
            raise ValueError("r must lie in (0, sqrt(lam')/(1-lam'))")
        if self.c is None:
            object.__setattr__(self, "c", 1 / (1 - lp))
        if abs(self.c - 1 / (1 - lp)) > self.r:
            raise ValueError("pole centre must lie in the excluded disk around 1/(1-lam')")
        if self.eps is not None and not self.eps >= 0:
            raise ValueError("eps must be non-negative")

    @property
    def region(self) -> RegionConfig:
        return RegionConfig.for_lambda(self.lam_prime, self.r)

    def with_eps(self, eps: float) -> "CounterexampleConfig":
        return CounterexampleConfig(self.lam, self.lam_prime, eps, self.c, self.r)


def build_pair(cfg: CounterexampleConfig) -> tuple:
    if cfg.eps is None:
        raise ValueError("eps is not set")
    lp = cfg.lam_prime
    plus = simplify(FreePoisson(lp) + RationalPert(cfg.eps, cfg.c, 2))
    minus = Sum((FreePoisson(lp), RationalPert(-cfg.eps, cfg.c, 2), FreePoisson(cfg.lam - 2 * lp)))
    return plus, simplify(minus)


@dataclass
class PoissonVerdict:
    is_translated_free_poisson: bool
    witness: tuple | None = None

    def to_json(self) -> dict:
        w = None
        if self.witness is not None:
            m, mp, km, kmp = self.witness
            w = {"m": m, "m_prime": mp, "kappa_m": km, "kappa_m_prime": kmp}
        return {"is_translated_free_poisson": self.is_translated_free_poisson, "witness": w}


def poisson_translate_certificate(kappa, tol: float = CERT_TOL) -> PoissonVerdict:
    """Shifts change only the first free cumulant, so a shifted free Poisson law has kappa_m constant for m >= 2."""
    seq = kappa if isinstance(kappa, CumulantSeq) else CumulantSeq(list(kappa))
    if len(seq) < 3:
        raise ValueError("need at least three cumulants")
    for m2 in range(3, len(seq) + 1):
        if abs(seq[m2] - seq[2]) > tol:
            return PoissonVerdict(False, (2, m2, seq[2], seq[m2]))
    return PoissonVerdict(True, None)


def sum_check(m: SpectralMeasure, lam: float) -> float:
    """Largest deviation of a measure's density samples from the free Poisson density."""
    return float(np.max(np.abs(m.density - mp_density(m.x, lam)))) if m.x.size else 0.0


def _attempt(cfg, seed, inv, n_grid):
    plus, minus = build_pair(cfg)
    out = []
    for e in (plus, minus):
        log = ConstructionLog()
        out.append((construct_measure(e, cfg.region, seed=seed, inv=inv, n_grid=n_grid, log=log), log))
    return out


def _search(cfg, grid, seed, inv, n_grid):
    if not grid:
        raise ValueError("empty epsilon grid")
    failures = {}
    for eps in grid:
        if not eps > 0:
            raise ValueError("grid entries must be positive")
        try:
            return eps, _attempt(cfg.with_eps(eps), seed, inv, n_grid)
        except ConstructionError as exc:
            failures[eps] = exc
    raise SearchExhausted("no epsilon in the grid gives two valid measures", failures)


def search_epsilon(cfg: CounterexampleConfig, grid=DEFAULT_GRID, seed: int = 0,
                   inv: InversionConfig = InversionConfig(), n_grid: int = MEASURE_GRID) -> float:
    """Largest grid value (in grid order) for which both components construct."""
    return _search(cfg, tuple(grid), seed, inv, n_grid)[0]


@dataclass
class RaikovReport:
    lam: float
    lam_prime: float
    c: float
    epsilon: float
    plus_spec: str = ""
    minus_spec: str = ""
    plus_measure: SpectralMeasure | None = None
    minus_measure: SpectralMeasure | None = None
    sum_measure: SpectralMeasure | None = None
    r_sum_error: float = float("nan")
    sum_check: float = float("nan")
    certificates: dict = field(default_factory=dict)
    cumulants: dict = field(default_factory=dict)
    cumulant_gap: float = float("nan")
    masses: dict = field(default_factory=dict)
    moment_errors: dict = field(default_factory=dict)
    failed_stage: str | None = None
    detail: str = ""
    sum_tol: float = 1e-6

    @property
    def affirmative(self) -> bool:
        return self.failed_stage is None

    def save(self, json_path) -> dict:
        """Write the report JSON, with the three measures as CSV files beside it."""
        json_path = Path(json_path)
        stem = json_path.with_suffix("")
        refs = {}
        for name in ("plus", "minus", "sum"):
            m = getattr(self, f"{name}_measure")
            if m is not None:
                path = Path(f"{stem}_{name}.csv")
                m.save(path)
                refs[name] = path.name
        doc = self.to_json(refs)
        json_path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n")
        return doc

    def to_json(self, refs: dict | None = None) -> dict:
        return {
            "affirmative": self.affirmative,
            "failed_stage": self.failed_stage,
            "detail": self.detail,
            "lambda": self.lam,
            "lambda_prime": self.lam_prime,
            "pole_center": self.c,
            "epsilon": self.epsilon,
            "plus": self.plus_spec,
            "minus": self.minus_spec,
            "r_sum_error": self.r_sum_error,
            "sum_check": self.sum_check,
            "sum_tol": self.sum_tol,
            "cumulant_gap": self.cumulant_gap,
            "cumulants": self.cumulants,
            "certificates": {k: v.to_json() for k, v in self.certificates.items()},
            "masses": self.masses,
            "moment_errors": self.moment_errors,
            "measures": refs or {},
        }


def r_sum_error(plus: RExpr, minus: RExpr, lam: float, n: int = 1000, seed: int = 0) -> float:
    """Pointwise gap between R_plus + R_minus and lam/(1-z), at random points kept 1/2 away from the poles."""
    rng = np.random.default_rng(seed)
    poles = np.array(Sum((plus, minus)).poles() or [1.0])
    z = np.zeros(0, dtype=complex)
    while z.size < n:
        cand = rng.uniform(-3, 3, n) + 1j * rng.uniform(-3, 3, n)
        keep = np.min(np.abs(cand[:, None] - poles[None, :]), axis=1) > 0.5
        z = np.concatenate([z, cand[keep]])
    z = z[:n]
    return float(np.max(np.abs(eval_r(plus, z) + eval_r(minus, z) - lam / (1 - z))))


def verify_raikov_failure(cfg: CounterexampleConfig, grid=DEFAULT_GRID, seed: int = 0,
                          inv: InversionConfig = InversionConfig(), n_grid: int = MEASURE_GRID,
                          sum_tol: float = 1e-6, cert_tol: float = CERT_TOL) -> RaikovReport:
    """Run the counterexample pipeline; ``cfg.eps=None`` searches ``grid``.

    Stages: cumulant certificates (cheap, so a degenerate pair fails fast),
    construction of both components, the symbolic R-sum, and the density of
    the sum against the closed form.
    """
    search = cfg.eps is None
    rep = RaikovReport(cfg.lam, cfg.lam_prime, cfg.c, float("nan") if search else cfg.eps, sum_tol=sum_tol)
    try:
        if search:
            eps, built = _search(cfg, tuple(grid), seed, inv, n_grid)
            cfg = cfg.with_eps(eps)
            rep.epsilon = eps
        else:
            built = None
    except SearchExhausted as exc:
        rep.failed_stage = "search"
        rep.detail = "; ".join(f"eps={e}: {f}" for e, f in exc.failures.items())
        return rep

    plus, minus = build_pair(cfg)
    rep.plus_spec, rep.minus_spec = to_spec(plus), to_spec(minus)
    for name, e in (("plus", plus), ("minus", minus)):
        kappa = r_taylor_coefficients(e, N_CUMULANTS)
        rep.cumulants[name] = list(kappa.values)
        rep.certificates[name] = poisson_translate_certificate(kappa, cert_tol)
    rep.cumulant_gap = abs(rep.cumulants["plus"][1] - rep.cumulants["plus"][2])
    poisson = [k for k, v in rep.certificates.items() if v.is_translated_free_poisson]
    if poisson:
        rep.failed_stage = "certificate"
        rep.detail = f"{', '.join(poisson)} is a shifted free Poisson law"
        return rep

    if built is None:
        try:
            built = _attempt(cfg, seed, inv, n_grid)
        except ConstructionError as exc:
            rep.failed_stage = f"construct:{exc.stage}"
            rep.detail = str(exc)
            return rep
    (rep.plus_measure, log_p), (rep.minus_measure, log_m) = built
    rep.masses = {"plus": rep.plus_measure.total_mass(), "minus": rep.minus_measure.total_mass()}
    rep.moment_errors = {"plus": log_p.moment_error, "minus": log_m.moment_error}

    rep.r_sum_error = r_sum_error(plus, minus, cfg.lam, seed=seed)
    total = simplify(plus + minus)
    exact = isinstance(total, FreePoisson) and abs(total.lam - cfg.lam) <= 1e-14
    if rep.r_sum_error > 1e-14 or not exact:
        rep.failed_stage = "r_sum"
        rep.detail = f"R-sum is {to_spec(total)}"
        return rep
    rep.sum_measure = measure_from_r(total, inv, n_grid)
    rep.sum_check = sum_check(rep.sum_measure, cfg.lam)
    ref = mp_closed_form(cfg.lam)
    atoms_ok = len(ref.atoms) == len(rep.sum_measure.atoms) and all(
        abs(a[0] - b[0]) <= sum_tol and abs(a[1] - b[1]) <= sum_tol for a, b in zip(ref.atoms, rep.sum_measure.atoms))
    if rep.sum_check > sum_tol or not atoms_ok:
        rep.failed_stage = "sum_check"
        rep.detail = f"density deviation {rep.sum_check:.3g}"
    return rep
