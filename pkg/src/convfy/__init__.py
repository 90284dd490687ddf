"""Convolutional Fenchel-Young losses.

Convex, smooth surrogate losses for discrete prediction problems whose
surrogate regret bounds the target regret linearly.
"""

from .conv_conjugate import (
    PiSolution,
    caratheodory_sparsify,
    conv_conjugate_grad,
    conv_conjugate_value,
    solve_box_hamming,
    solve_pi,
    solve_pi_generic,
    solve_pi_multiclass_shannon,
)
from .exceptions import ConvergenceError, DomainError, ResourceLimitError
from .fy_loss import ConvFYLoss
from .links import (
    LinkResult,
    ProbabilityEstimate,
    fast_multiclass_link,
    hamming_threshold_link,
    pi_argmax_link,
    probability_estimate,
    randomized_link,
    sparsified_link,
)
from .negentropy import Negentropy, Shannon, SquaredNorm, make_negentropy, simplex_project
from .target_loss import (
    DecomposedTargetLoss,
    affine_dimension,
    from_matrix,
    load_matrix_csv,
    make_hamming,
    make_top_k,
    make_zero_one,
    mean_embedding,
    target_regret,
    target_regrets,
    transformed_bayes_negative,
)

__version__ = "0.1.0"
