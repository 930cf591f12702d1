"""Numerical toolkit for weighted Caffarelli-Kohn-Nirenberg type inequalities."""

from .constants import (
    beta,
    compute_constants,
    critical_radial_constant,
    log_gamma,
    radial_best_constant,
)
from .exponents import ExponentSet
from .transform import H_limit_rate, build_profile, f_eta, ndc_check
from .weights import Weight, classify, doubling_profile, make_example33, order_detect, parse_weight

__version__ = "0.1.0"
