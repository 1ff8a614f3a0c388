"""Random-matrix oracle, distribution distances, and the command line interface."""

from .cli import build_parser, main, run_cli
from .matrix import (EmpiricalSpectrum, EnsembleSpec, kolmogorov_distance, sample_free_sum_spectrum,
                     sample_wishart_spectrum)
