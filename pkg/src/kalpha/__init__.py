"""Stochastic integral mappings Phi_alpha^(m+1) on Levy-Khintchine triplets, the K_alpha
classes they produce, and Monte Carlo checks of both."""
from ._config import Tolerances, get_tolerances, tolerances
from .errors import (DomainViolation, InvalidCutoff, InvalidTriplet, KalphaError,
                     LimitNonConvergence, NotInClass, QuadratureNonConvergence)
from .ell import (Composite, ExpTail, LogFactor, PowerLogSpline, PowerTail, Pushforward,
                  StepDown, TabulatedEll)
from .kernels import KernelTable, MappingParams, epsilon, epsilon_star, g_kernel
from .radial import (DilationResidual, DiracAtom, KClass, PowerLaw, Tabulated,
                     TiltedPowerLaw)
from .triplet import (LevyTriplet, PolarLevyMeasure, SphericalAtom, char_exponent,
                      char_exponents, log_moment, measure_of_annulus, radial_moment,
                      validate_triplet)
from .membership import (factor_decomposition, h_convexity_diagnostic, is_k_alpha,
                         monotone_order_check, verify_decomposition)
from .phi import (apply_phi, check_domain, map_gamma, map_gaussian, map_radial,
                  mean_vector, range_check)
from .simulate import (SimConfig, empirical_cf, mc_compare, sample_levy_increment,
                       simulate_phi_integral)
from .serialization import triplet_from_dict, triplet_to_dict

__version__ = "0.1.0"
