"""Joint spectral radius brackets, flag-adapted norms and Hoelder certificates.

Quick start::

    import numpy as np
    from jsrholder import MatrixSet, bracket

    M = MatrixSet([np.array([[0, 1], [0, 0]]), np.array([[0, 0], [1, 0]])])
    bracket(M, 6)          # BoundsBracket(lower=1.0, upper=1.0, ...)
"""

__version__ = "0.1.0"

from .errors import (BudgetExceededError, InconclusiveError, InvalidInputError, JSRError,
                     PreconditionError)
from .core import (Ball, InflatedSet, MatrixSet, balanced_hull, conjugate, enumerate_products,
                   hausdorff_distance, operator_norm, scale, spectral_radius, word_product)
from .bounds import BoundsBracket, bracket, lambda_empirical, lower_bound, upper_bound
from .reducibility import (Flag, block_decompose, coordinate_flag, diagonal_blocks,
                           maximal_flag, minimal_invariant_subspace)
from .norms import (BlockNorm, EccentricityEstimate, ExtremalNormApprox, QuadraticNorm,
                    WeightedEuclidean, WeightedMax, block_operator_bound, diagonal_rescale,
                    eccentricity, extremal_norm_approx, q_matrix, refined_bracket)
from .inflation import (HolderFit, InflationCurve, check_inflation_inequality, default_grid,
                        fit_holder_at_zero, inflation_curve, parse_grid)
from .perturbation import (ResolventCertificate, elsner_gap, perturbed_product_gap,
                           resolvent_cert)
from .certify import (HolderCertificate, build_certificate, dim2_growth_check,
                      distance_subspace, holder_constant_from_integers, n0_search,
                      theta_estimate, verify_certificate)
from .ct import LiftedSet, lift_continuous, matrix_exponential, max_lyapunov_estimate

__all__ = [name for name in dir() if not name.startswith("_")]
