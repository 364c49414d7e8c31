"""Secret-key rate bounds for channel-based key generation with antenna reflections."""

from .antenna import AntennaCircuit, PowerBreakdown, matched_load, power_breakdown, suggest_alpha
from .bounds import (BoundEstimate, bounds_full_csie, bounds_no_csie, bounds_no_eve, sweep)
from .estimators import (EntropyEstimate, estimate_joint_entropy, estimate_mi, kde_entropy,
                         knn_entropy)
from .gauss import (CovarianceMatrix, build_conditional_covariance, gaussian_conditional_mi,
                    gaussian_entropy, gaussian_mi, sk_capacity_no_eve)
from .model import (ModelParams, SampleBatch, derived_snrs, sample_channels,
                    sample_observations, sample_observations_given_eve_csi)

__version__ = "0.1.0"
