"""Two measures, neither a shifted free Poisson law, whose free convolution is free Poisson."""

from .raikov import (DEFAULT_GRID, CounterexampleConfig, PoissonVerdict, RaikovReport, SearchExhausted,
                     build_pair, poisson_translate_certificate, search_epsilon, sum_check, verify_raikov_failure)
