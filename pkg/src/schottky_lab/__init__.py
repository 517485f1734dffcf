"""Numerical laboratory for Schottky groups with a tunable cusp.

The compiled kernels are used when available; see ``kernels.BACKEND``.
"""
from .config import RunConfig
from .critical import (calibrate_h, classify, classify_bracket, find_a_star, find_delta,
                       monotonicity_certificate, rho)
from .geodesic import clairaut_distance, deviation_scan
from .kernels import BACKEND
from .profiles import (CuspMetric, UProfile, calibrate_epsilon, curvature, height,
                       invert_u, t_profile)
from .schottky import BoundaryPoint, SchottkyModel, Word
from .series import (exponent_estimate, group_series, one_letter_sum, parabolic_series,
                     ps_finiteness)
from .transfer import (build_level0, build_level1, divergence_diagnostic, holder_diagnostic,
                       power_iterate)

__version__ = "0.1.0"
