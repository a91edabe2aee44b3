"""Randomized iterative solvers for factorized linear systems A B x = b,
including regularized variants that recover sparse (least squares)
solutions without ever forming the product C = A B.
"""

from .dense import (
    DenseMatrix,
    RankDeficientError,
    RngStream,
    WeightedSampler,
    householder_qr,
    least_squares_solve,
    min_norm_solve,
    sigma_min,
)
from .metrics import (
    AveragedHistory,
    IterationHistory,
    rel_error,
    rel_residual,
    rel_residual_consistent,
    rel_residual_normal,
)
from .problems import (
    FactorizedProblem,
    gen_gaussian,
    load_csv_dataset,
    load_problem,
    nmf,
    save_problem,
    wine_target,
)
from .regularizers import Regularizer, bregman_distance, soft_shrinkage
from .solvers import (
    ALGORITHM_TAGS,
    SolverConfig,
    SolverState,
    gerk_step,
    rgs_rrk_step,
    rgs_step,
    rk_rrk_step,
    rk_step,
    rrk_step,
    rsegs_step,
    run,
)
from .theory import (
    RateConstants,
    alpha_of,
    beta_of,
    default_delta,
    nu_quadratic,
    simplified_bound,
    theorem_bound,
)
from .experiments import reproduce, run_trials

__version__ = "0.1.0"
