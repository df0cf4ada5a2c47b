"""Orthogonal polynomials for a Gaussian weight with two jump discontinuities.

Finite-n recurrences and identities in multiprecision, coupled Painleve IV
and II checks, soft-edge extraction, and GUE Monte Carlo gap probabilities.
"""

from .errors import (ConfigInvalid, DegenerateResidue, JumpGUEError, NotPositiveDefinite, OrderViolation,
                     PoleHit, PrecisionExhausted, QuadratureNotConverged, RateMismatch, StepCollapse,
                     StepUnderflow)
from .identities import ResidualReport, finite_n_suite
from .montecarlo import MCConfig, gap_probability_det, gap_probability_mc
from .numerics import PrecisionContext, eval_erfc
from .ortho import OrthoSystem, build_ortho_system, sigma_n, stieltjes_oracle
from .painleve2 import PIIState, integrate_pii
from .painleve4 import PIVState, piv_state, piv_suite
from .softedge import EdgeExtract, extract_edge, softedge_suite
from .weight import WeightParams, moment, moment_list

__version__ = "0.1.0"
