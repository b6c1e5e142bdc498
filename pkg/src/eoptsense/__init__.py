"""E-optimal sensor selection and reliability-driven compressive spectrum sensing."""

from .dynamic import (OnlineConfig, ReliabilityState, TimeBlockRecord, low_rate_schedule,
                      predict_measurement, reliable_greedy_select, run_online, update_reliability)
from .matrixdiag import (RipReport, SubsetSpectrum, best_rank_k_error, mean_min_eig,
                         projection_residual, rip_constants, row_gram_min_eig, spark)
from .metrics import (ReliabilityMap, mean_reliability, normalized_error, recovery_success,
                      reliability_raster, spurious_power, support_of)
from .recovery import LassoConfig, RecoveryResult, irls_lasso, ml_covariance, ml_estimate
from .scenario import GridSpec, MeasurementSet, Scenario, build_scenario, gain_between, sample_measurements
from .selection import (SelectionResult, SubsetDistribution, eoptimal_distribution,
                        expected_projection_error, greedy_doptimal, greedy_eoptimal,
                        oracle_best_subset, random_selection, volume_distribution)

__version__ = "0.1.0"
