"""Command line entry point: ``freeconv <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ..counterexample import DEFAULT_GRID, CounterexampleConfig, verify_raikov_failure
from ..theorem import ConstructionError, ConstructionLog, RegionConfig, construct_measure
from ..theorem.psi import HypothesisError
from ..transforms.cauchy import InversionError, NegativeDensityError, density_grid, extract_atom
from ..transforms.cumulants import cumulants_to_moments, r_taylor_coefficients
from ..transforms.measures import MassError, measure_from_r, mp_closed_form
from ..transforms.rexpr import FreePoisson, RationalPert, Sum, atom_location, parse_spec, to_spec
from .matrix import EnsembleSpec, kolmogorov_distance, sample_free_sum_spectrum, sample_wishart_spectrum

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _write_json(path, doc):
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n")


def _write_csv(path, header, rows):
    lines = [header] + [",".join(repr(float(v)) for v in r) for r in rows]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _grid(text):
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError("grid must look like a:b:n") from None
    if n < 2 or not b > a:
        raise argparse.ArgumentTypeError("grid needs b > a and n >= 2")
    return np.linspace(a, b, n)


def _perturb(text):
    try:
        vals = [float(v) for v in text.split(",")]
        if not 2 <= len(vals) <= 4:
            raise ValueError
        return RationalPert(vals[0], vals[1], int(vals[2]) if len(vals) > 2 else 2, vals[3] if len(vals) > 3 else 1.0)
    except ValueError:
        raise argparse.ArgumentTypeError("perturbation must look like eps,c[,order[,scale]]") from None


def _spec(text):
    try:
        return parse_spec(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _expr(lam, pert):
    return Sum((FreePoisson(lam),) + ((pert,) if pert is not None else ()))


def cmd_density(a):
    expr = _expr(a.lam, a.perturb)
    dens = density_grid(expr, a.grid)
    _write_csv(a.out, "x,density", zip(a.grid, dens))
    loc = atom_location(expr)
    print(json.dumps({"expr": to_spec(expr), "atom": {"x": loc, "mass": extract_atom(expr, loc)}}, sort_keys=True))
    return EXIT_OK


def cmd_convolve(a):
    total = a.lhs + a.rhs
    m = measure_from_r(total)
    m.save(a.out)
    print(json.dumps({"expr": to_spec(total), "mass": m.total_mass(), "atoms": m.sidecar()["atoms"]}, sort_keys=True))
    return EXIT_OK


def cmd_verify(a):
    expr = _expr(a.lam, a.perturb)
    cfg = RegionConfig.for_lambda(a.lam)
    log = ConstructionLog()
    doc = {"expr": to_spec(expr), "lambda": a.lam, "r": cfg.r, "alpha": cfg.alpha, "eta": cfg.eta, "seed": a.seed}
    try:
        m = construct_measure(expr, cfg, n_omega=a.omegas, seed=a.seed, log=log)
        doc.update(passed=True, failed_stage=None, mass=m.total_mass(), moment_error=log.moment_error)
    except ConstructionError as exc:
        doc.update(passed=False, failed_stage=exc.stage, detail=str(exc))
    doc["hypotheses"] = log.hypotheses
    doc["conditions"] = log.conditions.to_json() if log.conditions is not None else None
    cp = log.critical_points
    doc["critical_points"] = None if cp is None else {"u": cp.u.real, "v": cp.v.real, "im_u": cp.im_u, "im_v": cp.im_v}
    doc["counts"] = [{"omega_re": w.real, "omega_im": w.imag, "count": n, "residual": r} for w, n, r in log.counts]
    doc["lemma"] = log.lemma.to_json() if log.lemma is not None else None
    _write_json(a.report, doc)
    print(f"verify-theorem: {'pass' if doc['passed'] else 'FAIL at ' + doc['failed_stage']}")
    return EXIT_OK if doc["passed"] else EXIT_FAIL


def cmd_counterexample(a):
    cfg = CounterexampleConfig(a.lam, a.lam_prime, None if a.search else a.eps, a.c)
    rep = verify_raikov_failure(cfg, grid=tuple(a.grid), seed=a.seed)
    rep.save(a.report)
    print(f"counterexample: {'affirmative' if rep.affirmative else 'REJECTED at ' + rep.failed_stage}"
          + (f" (eps={rep.epsilon})" if rep.affirmative else ""))
    return EXIT_OK if rep.affirmative else EXIT_FAIL


def cmd_moments(a):
    kappa = r_taylor_coefficients(a.spec, a.n)
    print(json.dumps({"expr": to_spec(a.spec), "cumulants": list(kappa.values),
                      "moments": cumulants_to_moments(kappa)}, sort_keys=True))
    return EXIT_OK


def cmd_matrix(a):
    spec = EnsembleSpec(a.p, a.lam, a.lam2, a.seed, a.trials)
    emp = sample_wishart_spectrum(spec) if a.lam2 is None else sample_free_sum_spectrum(spec)
    _write_csv(a.out, "eigenvalue", ([v] for v in emp.eigenvalues))
    model = mp_closed_form(a.lam) if a.lam2 is None else measure_from_r(FreePoisson(a.lam) + FreePoisson(a.lam2))
    print(json.dumps({"n": int(emp.eigenvalues.size), "kolmogorov": kolmogorov_distance(emp, model)}, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="freeconv", description="Free convolution via R-transforms, with certified checks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("density", help="density of FreePoisson(lambda) + perturbation on a grid")
    d.add_argument("--lambda", dest="lam", type=float, required=True)
    d.add_argument("--perturb", type=_perturb, default=None, help="eps,c,order,scale")
    d.add_argument("--grid", type=_grid, required=True, help="a:b:n")
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_density)

    c = sub.add_parser("convolve", help="measure of the free convolution of two R-expressions")
    c.add_argument("--lhs", type=_spec, required=True, help="e.g. fp:0.3+tr:1")
    c.add_argument("--rhs", type=_spec, required=True)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_convolve)

    v = sub.add_parser("verify-theorem", help="run all gates of the perturbation argument")
    v.add_argument("--lambda", dest="lam", type=float, required=True)
    v.add_argument("--perturb", type=_perturb, default=None)
    v.add_argument("--report", required=True)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--omegas", type=int, default=20)
    v.set_defaults(func=cmd_verify)

    x = sub.add_parser("counterexample", help="build and certify the counterexample pair")
    x.add_argument("--lambda", dest="lam", type=float, required=True)
    x.add_argument("--lambda-prime", dest="lam_prime", type=float, required=True)
    g = x.add_mutually_exclusive_group(required=True)
    g.add_argument("--eps", type=float)
    g.add_argument("--search", action="store_true")
    x.add_argument("--grid", type=lambda s: [float(v) for v in s.split(",")], default=list(DEFAULT_GRID))
    x.add_argument("--c", type=float, default=None, help="pole centre (default 1/(1-lambda'))")
    x.add_argument("--report", required=True)
    x.add_argument("--seed", type=int, default=0)
    x.set_defaults(func=cmd_counterexample)

    m = sub.add_parser("moments", help="free cumulants and moments of an R-expression")
    m.add_argument("--spec", type=_spec, required=True)
    m.add_argument("-n", type=int, required=True)
    m.set_defaults(func=cmd_moments)

    w = sub.add_parser("matrix-oracle", help="Wishart eigenvalues and their distance to the free Poisson law")
    w.add_argument("--lambda", dest="lam", type=float, required=True)
    w.add_argument("--lambda2", dest="lam2", type=float, default=None, help="second block for a free sum")
    w.add_argument("-p", type=int, required=True)
    w.add_argument("--seed", type=int, required=True)
    w.add_argument("--trials", type=int, default=1)
    w.add_argument("--out", required=True)
    w.set_defaults(func=cmd_matrix)
    return p


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, HypothesisError) as exc:
        if isinstance(exc, (NegativeDensityError, MassError)):
            print(f"freeconv: verification failed: {exc}", file=sys.stderr)
            return EXIT_FAIL
        print(f"freeconv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InversionError as exc:
        print(f"freeconv: verification failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


def main() -> None:
    sys.exit(run_cli())
