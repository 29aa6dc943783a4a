"""Chromatic-number toolkit for the stochastic block model.

Core objects: edge-probability matrices and their log-space transform Q,
the box-ratio functional w(x, Q) and its decomposition infimum w*(x, Q),
graph samplers, exact and heuristic colouring, weighted independence, and
closed-form chromatic predictions with a seeded experiment harness.
"""

from .chromatic import (BudgetExceededError, Colouring, WeightedIndepResult,
                        alpha_h, balanced_extraction_colouring,
                        dsatur_colouring, exact_chromatic, exact_colouring,
                        find_balanced_independent_set,
                        independent_set_probability, max_avg_degree,
                        partition_objective)
from .experiment import ExperimentConfig, emit_plotdata, run_experiment
from .functionals import (CornerSolution, Decomposition, GuardError,
                          is_pseudodefinite, near_optimal_integer_system,
                          w_ell, w_star_bounds, w_star_bruteforce,
                          w_star_solve, w_value, w_value_sampled)
from .graphs import (BlowUpSpec, SbmGraph, blow_up, blow_up_as_model,
                     chung_lu_model, percolate, sample_chung_lu, sample_sbm,
                     union_graphs)
from .kernels import BACKEND as KERNEL_BACKEND
from .model import (BlockVector, ModelError, ModelInstance, ProbMatrix,
                    QMatrix, build_q, q_hat, q_star, quadratic_form)
from .predictions import (Prediction, TwoBlockThresholds, predict_chung_lu,
                          predict_gnp, predict_percolation, predict_sbm,
                          predict_two_block, sigma_estimate,
                          two_block_thresholds)

__version__ = "0.1.0"
