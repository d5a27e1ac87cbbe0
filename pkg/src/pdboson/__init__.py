"""Exact and truncated simulation of boson sampling with partially distinguishable photons."""
__version__ = "0.1.0"

from .combinatorics import (FOCK, GBS, MODEL_KINDS, SBS, PartialPermutation, SourceConfiguration,
                            check_pairing_rules, count_covariance_gbs, count_covariance_sbs,
                            enumerate_configurations, fixed_points, rencontres)
from .ensemble import (MomentReport, estimate_moments, predicted_var_cj, sawtooth_check,
                       var_cj_bound_fock, var_r_analytic)
from .errors import (DivergenceError, InitializationError, InvalidArgument, PdbosonError,
                     SizeLimitError, UnsupportedError)
from .exact import (CoefficientSeries, coefficient_series, exact_prob_fock, exact_prob_general,
                    fock_space_oracle)
from .linalg import (RngStream, extract_submatrix, haar_random_unitary,
                     product_with_permuted_conjugate)
from .models import (ConfigurationAmplitude, DistinguishabilityModel, FockProduct, GaussianWeak,
                     Superposition, configuration_amplitudes, overlap)
from .permanents import permanent_definition, permanent_fast, permanent_positive
from .sampler import (empirical_distribution, exact_distribution, mcmc_sample, total_variation,
                      truncated_distribution)
from .truncated import (build_m_fp, build_m_gfp, error_bound, gbs_classical_bruteforce,
                        gbs_truncated_prob, sbs_grouped_prob, truncated_prob, truncated_prob_fock)
