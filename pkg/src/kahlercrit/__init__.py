"""Calabi's criterion for Kähler immersions into complex space forms, mechanized.

Potentials are expanded as truncated bidegree power series around a point,
reduced to the diastasis, transformed for the target curvature and tested for
positive semidefiniteness of their coefficient matrix.
"""

from .backend import Backend
from .calabi import (AmbientSpace, CoefficientMatrix, DiastasisExpansion,
                     ambient_series, coefficient_matrix, diastasis,
                     monomial_ordering)
from .potentials import (CenterSpec, ParamBinding, ale_mass, expand_at_center,
                         format_potential, parse_potential,
                         taubnut_slice_series)
from .psdcert import (NO_OBSTRUCTION, OBSTRUCTED, NegativityWitness, Verdict,
                      psd_check, rank_lower_bound, validate_certificate)
from .series import (BidegreeSeries, UnivariateTaylor, binomial_series,
                     coefficient, compose_analytic, evaluate_polarized,
                     reversion, series_add, series_mul)

__version__ = "0.1.0"
