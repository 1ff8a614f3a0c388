"""Gated construction of a measure from a perturbed free Poisson R-transform."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..numcore import RefinementError, TraceError
from ..transforms.cauchy import InversionConfig, InversionError, NegativeDensityError
from ..transforms.cumulants import cumulants_to_moments, r_taylor_coefficients
from ..transforms.measures import DEFAULT_GRID, MassError, SpectralMeasure, measure_from_r, measure_moments
from ..transforms.rexpr import RExpr
from .checks import (CriticalPointError, InconclusiveCount, check_conditions, count_preimages,
                     find_critical_points, sample_omegas, trace_gamma, verify_lemma)
from .psi import check_hypotheses, split_expr
from .regions import RegionConfig

MOMENT_RTOL = 1e-4
N_MOMENTS = 8


class ConstructionError(RuntimeError):
    """A gate of the construction failed; ``stage`` names it and ``report`` carries the evidence."""

    def __init__(self, stage: str, report, message: str = ""):
        super().__init__(f"{stage}: {message}" if message else stage)
        self.stage = stage
        self.report = report


@dataclass
class ConstructionLog:
    hypotheses: dict = field(default_factory=dict)
    conditions: object = None
    critical_points: object = None
    curve: object = None
    counts: list = field(default_factory=list)
    lemma: object = None
    moment_error: float = 0.0


def moment_check(expr: RExpr, m: SpectralMeasure, n: int = N_MOMENTS) -> float:
    """Largest relative gap between grid moments and moments from the free cumulants."""
    kappa = r_taylor_coefficients(expr, n)
    want = cumulants_to_moments(kappa)
    got = measure_moments(m, n)
    return float(max(abs(g - w) / max(1.0, abs(w)) for g, w in zip(got, want)))


def construct_measure(expr: RExpr, cfg: RegionConfig, n_omega: int = 20, seed: int = 0, R: float = 200.0,
                      inv: InversionConfig = InversionConfig(), n_grid: int = DEFAULT_GRID,
                      log: ConstructionLog | None = None) -> SpectralMeasure:
    log = log if log is not None else ConstructionLog()
    split = split_expr(expr, cfg.lam)
    log.hypotheses = check_hypotheses(split, cfg.r, seed)
    bad = [k for k in ("conjugate_symmetric", "vanishes_at_infinity", "analytic_off_disk", "radius_ok")
           if not log.hypotheses[k]]
    if bad:
        raise ConstructionError("hypotheses", log.hypotheses, ", ".join(bad))

    log.conditions = check_conditions(expr, cfg, seed)
    if not log.conditions.passed:
        raise ConstructionError("conditions", log.conditions, ", ".join(log.conditions.failures()))
    try:
        log.critical_points = find_critical_points(expr, cfg)
        log.curve = trace_gamma(expr, log.critical_points, cfg)
    except CriticalPointError as exc:
        raise ConstructionError("critical_points", log, str(exc)) from exc
    except TraceError as exc:
        raise ConstructionError("trace", log, str(exc)) from exc

    for omega in sample_omegas(n_omega, seed):
        try:
            n, res = count_preimages(expr, omega, log.critical_points, log.curve, R, cfg)
        except (InconclusiveCount, RefinementError, FloatingPointError) as exc:
            raise ConstructionError("counts", log, f"omega={omega}: {exc}") from exc
        log.counts.append((complex(omega), n, res))
        if n != 1:
            raise ConstructionError("counts", log, f"{n} preimages of {omega}")

    log.lemma = verify_lemma(expr, inv)
    if not log.lemma.passed:
        raise ConstructionError("lemma", log.lemma)

    try:
        m = measure_from_r(expr, inv, n_grid)
    except (MassError, NegativeDensityError, InversionError) as exc:
        raise ConstructionError("measure", log, str(exc)) from exc
    log.moment_error = moment_check(expr, m)
    if not np.isfinite(log.moment_error) or log.moment_error > MOMENT_RTOL:
        raise ConstructionError("moments", log, f"relative moment error {log.moment_error:.3g}")
    return m
