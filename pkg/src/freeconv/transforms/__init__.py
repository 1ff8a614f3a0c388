"""R-transform expressions, Cauchy-transform inversion, measures and free cumulants."""

from .rexpr import (FreePoisson, PoleError, RationalPert, RExpr, Sum, Translate, atom_location, eval_k,
                    eval_k_deriv, eval_k_prime, eval_r, free_convolve, parse_spec, simplify, to_spec)
from .cauchy import (InversionConfig, InversionError, NegativeDensityError, WrongBranchError, boundary_g,
                     cauchy_transform, density_grid, extract_atom, extrapolated_g, invert_k)
from .measures import (MassError, SpectralMeasure, continuous_support, edge_grid, measure_from_r, measure_moments,
                       mp_closed_form, mp_density, mp_edges, point_mass, real_critical_points)
from .cumulants import (CumulantSeq, SymmetryError, cumulants_to_moments, default_radius, laurent_coefficient,
                        r_taylor_coefficients)
