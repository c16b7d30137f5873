"""Near-field range estimation with multi-antenna radars.

Ambiguity functions, Cramer-Rao bounds and a Monte Carlo estimator harness
for point and extended targets observed by SIMO or MIMO line arrays.
"""

__version__ = "0.1.0"

from .ambiguity import (AmbiguityMethod, AmbiguitySample, ambiguity_surface,
                        beta_param, chi_analytic, chi_exact, chi_mismatch,
                        chi_phase, chi_phase_analytic, chi_product,
                        gamma_param)
from .crb import (CrbBreakdown, CrbMethod, alpha_factor, crb_range,
                  crb_taylor, effective_nf_range, eta_beta_analytic,
                  eta_beta_exact, fim_oracle, scenario_nf_range,
                  taylor_nf_term)
from .errors import (AssumptionWarning, DegenerateScenarioError,
                     InvalidParameterError, NFRangeError,
                     NumericalAccuracyError, UnsupportedConfigurationError,
                     UnsupportedModeError, WindowCoverageError)
from .estimator import (EstimationResult, MatchedFilterBank, ReceivedBatch,
                        SearchGrid, estimate_range, ml_statistic,
                        monte_carlo, synthesize)
from .geometry import (SPEED_OF_LIGHT, ArrayConfig, ArrayTag, DistanceMode,
                       TargetKind, TargetModel, distance, distance_derivative,
                       load_layout, make_ula, rayleigh_distance)
from .scenario import Config, Scenario
from .special import fresnel, sinc
from .waveform import (Waveform, central_frequency, load_spectrum,
                       make_cardinal_sine, make_custom, rms_bandwidth)
