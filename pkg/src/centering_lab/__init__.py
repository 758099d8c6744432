"""Sharp constants for centered and conditionally centered L^p moments."""

from .constants import (Exponent, TwoPointDistribution, as_exponent, cp_alpha, extremal_two_point,
                        max_cp, riesz_thorin_bound, uniform_n_constant)
from .errors import DomainError, EigenSolverError, SchemaError
from .prob_core import (FiniteProbSpace, Partition, RandVar, centering_ratio, cond_exp_matrix,
                        cond_expectation, expectation, lp_norm)
from .opnorm import OptimizerOptions, cp_of_space, lower_norm, operator_norm, two_value_oracle
from .mixture import DiscreteDistribution, decompose_zero_mean, strip_zero_atoms, verify_ratio_via_mixture
from .interval import (BetaAlgebra, GridFunction, beta_for_target, discretize_check, gbeta_cond_exp,
                       gbeta_extremal, gbeta_norm)
from .bcap import (build_bcap_approximant, eigen_lower_bound_check, gamma_inequality_experiment,
                   gamma_refinement_sweep, nu_estimate)

__version__ = "0.1.0"
