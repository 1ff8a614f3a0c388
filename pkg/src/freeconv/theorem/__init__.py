"""Numerical verification of the perturbation theorem for free Poisson R-transforms."""

from .checks import (CONDITION_KEYS, ConditionReport, CriticalPointError, CriticalPoints, DomainViolation,
                     InconclusiveCount, LemmaReport, Verdict, argument_count, check_conditions, count_preimages,
                     find_critical_points, gamma_contour, neighbourhood_of_A, sample_omegas, trace_gamma,
                     verify_lemma)
from .construct import ConstructionError, ConstructionLog, construct_measure, moment_check
from .psi import (HypothesisError, PsiMap, TheoremSplit, affine, check_hypotheses, im_psi_factored,
                  preimage_roots, psi_closed_form, psi_prime_closed_form, split_expr)
from .regions import RegionConfig, RegionSpec, in_A, in_B, in_C, in_D, in_E
