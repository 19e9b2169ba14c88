"""Poincare and Cheeger constants of one-dimensional log-concave measures.

Grid measures with exact exponential-spline densities, numerical oracles for
the constants and profiles, probability metrics, a catalog of explicit bounds
and the Ornstein-Uhlenbeck flow.
"""
from .errors import (ConfigError, EmptyRestriction, GridMismatch, InvalidParameter, LogConcaveError,
                     LPFailure, MissingInput, NoApplicableFormula, NonConverged, NonNormalizable,
                     NotAbsolutelyContinuous, NotLogConcave, PreconditionError, UnknownFormula,
                     WitnessNotFound)
from .measure1d import (AffineMap1D, GridMeasure, MeasureSpec, apply_affine, convolve_gaussian,
                        convolve_uniform, exponential_symmetric, gaussian, gaussian_mixture,
                        log_concave_family, potential, radial, realize, scale_mix, truncate, uniform)
from .oracle import (ProfileTable, cheeger_constant, concentration_profile, isoperimetric_profile, moments,
                     spectral_poincare, weak_beta_from_profile)
from .metrics import distance, levy_prokhorov, tv, w1, w_lp
from .bounds import (BoundCertificate, BoundContext, CATALOG, best_bound, evaluate, validity_sweep,
                     verify_against_oracle)
from .semigroup import (check_tv_w1_contraction, check_w1_contraction, non_contraction_witness,
                        ou_evolve)
from .kernels import BACKEND_NAME

__version__ = "0.1.0"
