"""Drift estimation for diffusion ensembles driven by correlated Brownian
motions: simulation, projection least squares fitting, penalized model
selection and a Monte-Carlo benchmarking harness."""

from .bases import BasisSpec, cosine_basis, hermite_basis
from .bench import (BenchRow, ExperimentConfig, RateCheck, mise,
                    parametric_rate_check, run_study, tab0_stats)
from .config import ConfigError, parse_config, serialize_config
from .correlation import (CholeskyFactor, CorrelationMatrix, NotPositiveDefinite,
                          block_diagonal, cholesky, dependence_stats,
                          equicorrelated, identity, toeplitz, tridiagonal_factor)
from .estimator import (DriftEstimate, GateSpec, GramMatrices, SingularGram,
                        empirical_gram, empirical_norm_sq, empirical_norm_sq_fn,
                        empirical_target, fit_fixed_m)
from .models import ModelSpec, custom_model, get_model, model_drift_sigma
from .selection import (EmptyCollection, SelectionResult, admissible_models,
                        penalty_empirical, penalty_theoretical, select)
from .simulate import (PathEnsemble, SimulationExploded, correlated_increments,
                       read_ensemble, simulate_ensemble, write_ensemble)

__version__ = "0.1.0"
