"""Wishart ensembles as an empirical oracle for free Poisson laws and their free sums."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..transforms.measures import SpectralMeasure

THREADS_ENV = "FREECONV_THREADS"


@dataclass(frozen=True)
class EnsembleSpec:
    p: int
    lam: float
    lam2: float | None = None
    seed: int = 0
    trials: int = 1

    def __post_init__(self):
        if self.p < 50:
            raise ValueError("dimension p must be at least 50")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        for lam in (self.lam,) if self.lam2 is None else (self.lam, self.lam2):
            if not lam > 0 or round(lam * self.p) < 1:
                raise ValueError(f"lambda={lam} gives no columns at p={self.p}")

    def columns(self) -> tuple:
        lams = (self.lam,) if self.lam2 is None else (self.lam, self.lam2)
        return tuple(int(round(lam * self.p)) for lam in lams)


@dataclass(frozen=True)
class EmpiricalSpectrum:
    eigenvalues: np.ndarray
    p: int
    trials: int
    seed: int

    def __post_init__(self):
        ev = np.sort(np.asarray(self.eigenvalues, dtype=float))
        object.__setattr__(self, "eigenvalues", ev)
        if ev.size != self.p * self.trials:
            raise ValueError("spectrum length must equal p * trials")


def _workers() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _trial(p, cols, seed):
    rng = np.random.default_rng(seed)
    m = np.zeros((p, p))
    for n in cols:
        x = rng.standard_normal((p, n))
        m += x @ x.T / p
    return np.linalg.eigvalsh(m)


def _run(spec: EnsembleSpec) -> EmpiricalSpectrum:
    cols = spec.columns()
    seeds = [(spec.seed + t) % 2**64 for t in range(spec.trials)]
    with ThreadPoolExecutor(max_workers=_workers()) as pool:
        parts = list(pool.map(lambda s: _trial(spec.p, cols, s), seeds))
    return EmpiricalSpectrum(np.concatenate(parts), spec.p, spec.trials, spec.seed)


def sample_wishart_spectrum(spec: EnsembleSpec) -> EmpiricalSpectrum:
    """Eigenvalues of X X^T / p, X p-by-round(lam p) standard Gaussian; trials pooled."""
    if spec.lam2 is not None:
        raise ValueError("use sample_free_sum_spectrum for two blocks")
    return _run(spec)


def sample_free_sum_spectrum(spec: EnsembleSpec) -> EmpiricalSpectrum:
    """Eigenvalues of X1 X1^T / p + X2 X2^T / p with independent Gaussian blocks."""
    if spec.lam2 is None:
        raise ValueError("free sum needs lam2")
    return _run(spec)


def kolmogorov_distance(emp: EmpiricalSpectrum, m: SpectralMeasure) -> float:
    """sup |F_emp - F| over the eigenvalues, checking both one-sided limits at each jump."""
    if abs(m.total_mass() - 1) > 1e-6:
        raise ValueError("model measure must have unit mass")
    ev = emp.eigenvalues
    n = ev.size
    right = np.searchsorted(ev, ev, side="right") / n
    left = np.searchsorted(ev, ev, side="left") / n
    return float(max(np.max(np.abs(right - m.cdf(ev))), np.max(np.abs(left - m.cdf_left(ev)))))
