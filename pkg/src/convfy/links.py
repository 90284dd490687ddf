"""Prediction links and the probability estimator.

Every deterministic link breaks ties toward the lowest index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conv_conjugate import PiSolution, caratheodory_sparsify, product_pi
from .fy_loss import ConvFYLoss
from .target_loss import DecomposedTargetLoss

__all__ = [
    "LinkResult",
    "ProbabilityEstimate",
    "pi_argmax_link",
    "fast_multiclass_link",
    "sparsified_link",
    "randomized_link",
    "hamming_threshold_link",
    "bits_to_index",
    "probability_estimate",
]


@dataclass(frozen=True)
class LinkResult:
    prediction: int
    pi_used: np.ndarray
    link_kind: str


@dataclass(frozen=True)
class ProbabilityEstimate:
    """Estimate of the mean label encoding.

    ``decoded`` holds class probabilities for one-hot encodings and per-label
    marginals ``(1 - estimate) / 2`` for the Hamming encoding.
    """

    mean_rho_estimate: np.ndarray
    decoded: np.ndarray | None = None


def _argmax(x) -> int:
    return int(np.argmax(x))  # numpy returns the first maximizer


def pi_argmax_link(pi_solution: PiSolution) -> LinkResult:
    pi = np.asarray(pi_solution.pi)
    return LinkResult(_argmax(pi), pi, "pi_argmax")


def fast_multiclass_link(theta) -> LinkResult:
    """Argmax of the score, valid for the 0-1 loss with Shannon negentropy.

    The score argmax set coincides with the argmax set of the exact mixture,
    so the mixture never has to be computed at prediction time.
    ``pi_used`` is the uniform mixture over the score argmax set.
    """
    theta = np.asarray(theta, dtype=float)
    top = theta == theta.max()
    return LinkResult(_argmax(theta), top / top.sum(), "fast_multiclass")


def sparsified_link(loss: DecomposedTargetLoss, pi_solution: PiSolution) -> LinkResult:
    """Argmax of a Caratheodory-sparsified mixture with the same perturbed point.

    The sparsified mixture has at most ``affdim + 1`` atoms, so its largest
    weight exceeds ``1 / (affdim + 1)``.
    """
    sparse = caratheodory_sparsify(loss, pi_solution.pi)
    return LinkResult(_argmax(sparse), sparse, "sparsified")


def randomized_link(pi_solution: PiSolution, seed: int) -> LinkResult:
    """Sample a prediction with probability ``pi_t``; reproducible per seed."""
    pi = np.clip(np.asarray(pi_solution.pi, dtype=float), 0.0, None)
    rng = np.random.default_rng(seed)
    t = int(rng.choice(pi.size, p=pi / pi.sum()))
    return LinkResult(t, pi, "randomized")


def bits_to_index(bits) -> int:
    """Lexicographic index of a bit-vector (first bit most significant)."""
    idx = 0
    for b in bits:
        idx = 2 * idx + int(b)
    return idx


def hamming_threshold_link(nu_star) -> LinkResult:
    """Coordinate-wise threshold of the box-form solution.

    Bit ``i`` is set iff ``nu_star[i] > 0.5``.  This is the argmax of the
    product mixture built from ``nu_star`` whenever no coordinate equals 0.5;
    at 0.5 the bit is cleared, matching the lowest-index tie rule.
    """
    nu = np.asarray(nu_star, dtype=float)
    if np.any(nu < 0) or np.any(nu > 1):
        raise ValueError("nu_star must lie in [0, 1]")
    bits = (nu > 0.5).astype(int)
    codes = [tuple((t >> (nu.size - 1 - i)) & 1 for i in range(nu.size))
             for t in range(2**nu.size)]
    return LinkResult(bits_to_index(bits), product_pi(nu, codes), "hamming_threshold")


def probability_estimate(fy: ConvFYLoss, theta) -> ProbabilityEstimate:
    """Plug-in estimate ``grad omega*(theta + L pi)`` of ``E[rho(y)]``."""
    est = fy.conjugate_grad(theta)
    if fy.loss.is_one_hot:
        decoded = est.copy()
    elif fy.loss.kind == "hamming":
        decoded = (1.0 - est) / 2.0
    else:
        decoded = None
    return ProbabilityEstimate(est, decoded)
