"""Compactly supported spectral measures: atoms plus a sampled density."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .cauchy import InversionConfig, boundary_g, extract_atom
from .rexpr import RExpr, atom_location, eval_k, eval_k_prime, k_poles

DEFAULT_GRID = 16001
EDGE_POWER = 4


class MassError(ValueError):
    pass


@dataclass
class SpectralMeasure:
    """Atoms ``[(location, mass), ...]`` plus density samples on an increasing grid.

    Mass of the continuous part is the trapezoid integral of the samples.
    Grids produced here cluster nodes at the support edges so that the
    trapezoid rule stays accurate next to square-root and inverse-square-root
    edge behaviour.
    """

    atoms: list
    support: tuple
    x: np.ndarray
    density: np.ndarray
    mass_tol: float = 1e-6

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.density = np.asarray(self.density, dtype=float)
        self.atoms = [(float(a), float(m)) for a, m in self.atoms]
        self.support = (float(self.support[0]), float(self.support[1]))
        if self.x.shape != self.density.shape:
            raise ValueError("grid and density differ in length")
        if self.x.size > 1 and np.any(np.diff(self.x) < 0):
            raise ValueError("grid must be increasing")
        if not np.all(np.isfinite(self.density)) or np.any(self.density < 0):
            raise ValueError("density must be finite and non-negative")
        for loc, m in self.atoms:
            if not 0 < m <= 1 + self.mass_tol:
                raise ValueError(f"atom mass {m} out of range")
        if abs(self.total_mass() - 1.0) > self.mass_tol:
            raise MassError(f"total mass {self.total_mass():.12f} differs from 1 by more than {self.mass_tol}")

    def continuous_mass(self) -> float:
        return float(np.trapezoid(self.density, self.x)) if self.x.size > 1 else 0.0

    def total_mass(self) -> float:
        return self.continuous_mass() + sum(m for _, m in self.atoms)

    def moments(self, n_max: int) -> list:
        return measure_moments(self, n_max)

    def density_at(self, pts) -> np.ndarray:
        return np.interp(pts, self.x, self.density, left=0.0, right=0.0)

    def cdf(self, pts) -> np.ndarray:
        """Right-continuous distribution function."""
        pts = np.asarray(pts, dtype=float)
        out = np.zeros_like(pts)
        if self.x.size > 1:
            seg = 0.5 * (self.density[1:] + self.density[:-1]) * np.diff(self.x)
            cum = np.concatenate([[0.0], np.cumsum(seg)])
            out += np.interp(pts, self.x, cum, left=0.0, right=cum[-1])
        for loc, m in self.atoms:
            out += m * (pts >= loc)
        return out

    def cdf_left(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        out = self.cdf(pts)
        for loc, m in self.atoms:
            out -= m * (pts == loc)
        return out

    # -- serialization --------------------------------------------------

    def sidecar(self) -> dict:
        return {
            "atoms": [{"x": loc, "mass": m} for loc, m in self.atoms],
            "support": list(self.support),
            "mass_tol": self.mass_tol,
        }

    def save(self, csv_path) -> Path:
        """Write ``x,density`` CSV plus a ``.json`` sidecar next to it."""
        csv_path = Path(csv_path)
        lines = ["x,density"] + [f"{a!r},{d!r}" for a, d in zip(self.x.tolist(), self.density.tolist())]
        csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
        side = csv_path.with_suffix(".json")
        side.write_text(json.dumps(self.sidecar(), indent=2) + "\n", encoding="utf-8", newline="\n")
        return side

    @classmethod
    def load(cls, csv_path) -> "SpectralMeasure":
        csv_path = Path(csv_path)
        rows = csv_path.read_text(encoding="utf-8").strip().splitlines()
        if rows[0].strip() != "x,density":
            raise ValueError("unexpected CSV header")
        data = np.array([[float(v) for v in r.split(",")] for r in rows[1:]]).reshape(-1, 2)
        side = json.loads(csv_path.with_suffix(".json").read_text(encoding="utf-8"))
        atoms = [(a["x"], a["mass"]) for a in side["atoms"]]
        return cls(atoms, tuple(side["support"]), data[:, 0], data[:, 1], side["mass_tol"])


def point_mass(c: float) -> SpectralMeasure:
    return SpectralMeasure([(c, 1.0)], (c, c), np.zeros(0), np.zeros(0))


def edge_grid(a: float, b: float, n: int = DEFAULT_GRID, power: int = EDGE_POWER) -> np.ndarray:
    """Nodes on [a, b] clustered like t**power at both ends."""
    t = np.linspace(0.0, 1.0, n)
    g = t**power / (t**power + (1.0 - t) ** power)
    x = a + (b - a) * g
    # pin the endpoints: a + (b - a) can differ from b in the last bit
    x[0], x[-1] = a, b
    return np.unique(x)


def measure_moments(m: SpectralMeasure, n_max: int) -> list:
    """Raw moments m_1..m_{n_max}."""
    if n_max > 12:
        raise ValueError("n_max is limited to 12")
    out = []
    for k in range(1, n_max + 1):
        val = sum(mass * loc**k for loc, mass in m.atoms)
        if m.x.size > 1:
            val += float(np.trapezoid(m.density * m.x**k, m.x))
        out.append(val)
    return out


# ---------------------------------------------------------------------------
# Marchenko-Pastur closed form
# ---------------------------------------------------------------------------


def mp_edges(lam: float) -> tuple:
    s = math.sqrt(lam)
    return (1 - s) ** 2, (1 + s) ** 2


def mp_density(x, lam: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    a, b = mp_edges(lam)
    out = np.zeros_like(x)
    inside = (x > a) & (x < b) & (x != 0)
    xi = x[inside]
    # factored form keeps precision next to the edges
    out[inside] = np.sqrt((xi - a) * (b - xi)) / (2 * math.pi * xi)
    return out


def mp_closed_form(lam: float, n_grid: int = DEFAULT_GRID) -> SpectralMeasure:
    """Free Poisson law with mean ``lam``: density on [(1-sqrt lam)^2, (1+sqrt lam)^2], atom 1-lam at 0 if lam<1."""
    if not lam > 0:
        raise ValueError("lam must be positive")
    a, b = mp_edges(lam)
    x = edge_grid(a, b, n_grid)
    dens = mp_density(x, lam)
    dens[0] = dens[-1] = 0.0
    atoms = [(0.0, 1.0 - lam)] if lam < 1 else []
    return SpectralMeasure(atoms, (min(a, 0.0) if atoms else a, b), x, dens)


# ---------------------------------------------------------------------------
# measures from R-transforms
# ---------------------------------------------------------------------------


def real_critical_points(expr: RExpr) -> list:
    """Real zeros of K' (K is real on the real axis for real parameters)."""
    poles = k_poles(expr)
    pieces = [np.linspace(-60.0, 60.0, 24001), np.geomspace(60.0, 1e7, 3000), -np.geomspace(60.0, 1e7, 3000)]
    for p in poles:
        off = np.geomspace(1e-9, 1.0, 600)
        pieces += [p + off, p - off]
    w = np.unique(np.concatenate(pieces))
    for p in poles:
        w = w[np.abs(w - p) > 5e-10]
    with np.errstate(all="ignore"):
        d = eval_k_prime(expr, w + 0j).real
    sign = np.sign(d)
    out = []
    for i in np.nonzero(sign[:-1] * sign[1:] < 0)[0]:
        lo, hi = w[i], w[i + 1]
        if any(lo < p < hi for p in poles):
            continue
        out.append(brentq(lambda t: eval_k_prime(expr, complex(t)).real, lo, hi, xtol=1e-15, rtol=1e-15))
    out += [float(t) for t in w[sign == 0]]
    return sorted(out)


def continuous_support(expr: RExpr, cfg: InversionConfig = InversionConfig(), threshold: float = 1e-10) -> list:
    """Support intervals of the absolutely continuous part.

    Edges are critical values of K at real critical points, or the atom
    location (a hard edge, where the critical point sits at infinity).
    Candidates are tested by the density at the midpoint of each gap between
    consecutive candidates.
    """
    cands = [float(eval_k(expr, complex(c)).real) for c in real_critical_points(expr)]
    cands.append(atom_location(expr))
    cands = np.unique(np.round(np.asarray(cands), 13))
    if cands.size < 2:
        return []
    mids = 0.5 * (cands[1:] + cands[:-1])
    dens = -boundary_g(expr, mids, cfg).imag / math.pi
    intervals = []
    for (lo, hi), d in zip(zip(cands[:-1], cands[1:]), dens):
        if d > threshold:
            if intervals and intervals[-1][1] == lo:
                intervals[-1] = (intervals[-1][0], hi)
            else:
                intervals.append((lo, hi))
    return intervals


def measure_from_r(expr: RExpr, cfg: InversionConfig = InversionConfig(), n_grid: int = DEFAULT_GRID,
                   mass_tol: float = 1e-6) -> SpectralMeasure:
    """Recover the measure whose R-transform is ``expr`` by Stieltjes inversion."""
    from .cauchy import density_grid

    intervals = continuous_support(expr, cfg)
    xs, ds = [], []
    for lo, hi in intervals:
        x = edge_grid(lo, hi, n_grid)
        d = density_grid(expr, x[1:-1], cfg)
        xs.append(x)
        ds.append(np.concatenate([[0.0], d, [0.0]]))
    x = np.concatenate(xs) if xs else np.zeros(0)
    dens = np.concatenate(ds) if ds else np.zeros(0)
    loc = atom_location(expr)
    mass = extract_atom(expr, loc, cfg)
    atoms = [(loc, mass)] if mass > 0 else []
    pts = [lo for lo, _ in intervals] + [hi for _, hi in intervals] + [a for a, _ in atoms]
    support = (min(pts), max(pts)) if pts else (loc, loc)
    return SpectralMeasure(atoms, support, x, dens, mass_tol)
