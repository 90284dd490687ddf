"""Solvers for the conjugate of the convolutional negentropy.

The conjugate is an infimal convolution over mixtures of prediction columns,

    conj(theta) = min_{pi in simplex(N)} omega.conjugate(theta + L @ pi),

where ``L`` is the loss matrix of a :class:`DecomposedTargetLoss`.  Three
routes are offered:

* :func:`solve_pi_multiclass_shannon`, the exact sort-and-threshold solution
  for the 0-1 loss with the Shannon negentropy;
* :func:`solve_pi_generic`, projected gradient over the simplex, certified by
  the Frank-Wolfe gap;
* :func:`solve_box_hamming`, the same problem posed over ``[0, 1]^rho_dim``
  for the Hamming loss.

The minimizer ``pi`` need not be unique; the gradient of the conjugate is the
same for every minimizer (:func:`conv_conjugate_grad`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConvergenceError
from .negentropy import Negentropy, simplex_project
from .target_loss import DecomposedTargetLoss, affine_dimension

__all__ = [
    "PiSolution",
    "DEFAULT_TOL",
    "solve_pi",
    "solve_pi_multiclass_shannon",
    "solve_pi_generic",
    "solve_box_hamming",
    "product_pi",
    "conv_conjugate_value",
    "conv_conjugate_grad",
    "vertex_objectives",
    "stationarity_gap",
    "caratheodory_sparsify",
]

DEFAULT_TOL = 1e-9
MAX_ITER = 100_000


@dataclass(frozen=True)
class PiSolution:
    """A minimizing mixture ``pi`` and the solver's diagnostics.

    ``stationarity_gap`` is the Frank-Wolfe gap
    ``<grad, pi> - min_t grad_t`` of the mixture objective at ``pi``; it
    upper-bounds the suboptimality of ``objective``.
    """

    pi: np.ndarray
    perturbed_point: np.ndarray
    objective: float
    method: str
    iterations: int
    stationarity_gap: float
    tau: float | None = None
    nu: np.ndarray | None = None


def _as_score(theta, dim):
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (dim,):
        raise ValueError(f"score must have shape ({dim},), got {theta.shape}")
    if not np.all(np.isfinite(theta)):
        raise ValueError("score has non-finite entries")
    return theta


def stationarity_gap(loss: DecomposedTargetLoss, omega: Negentropy, theta, pi) -> float:
    z = theta + loss.loss_matrix @ pi
    g = omega.conjugate_grad(z) @ loss.loss_matrix
    return max(float(g @ pi - g.min()), 0.0)


def vertex_objectives(loss: DecomposedTargetLoss, omega: Negentropy, theta) -> np.ndarray:
    """``omega.conjugate(theta + L[:, t])`` for every prediction ``t``."""
    theta = _as_score(theta, loss.rho_dim)
    return np.array([omega.conjugate(theta + col) for col in loss.loss_matrix.T])


def solve_pi_multiclass_shannon(theta) -> PiSolution:
    """Exact minimizer for the 0-1 loss with the Shannon negentropy.

    The objective is ``logsumexp(theta + 1 - pi)``.  Sorting ``theta`` in
    decreasing order, ``n`` is the largest ``k`` with
    ``1 + k * theta_[k] > sum_{i<=k} theta_[i]``, the threshold is
    ``tau = (sum_{i<=n} theta_[i] - 1) / n`` and ``pi = max(theta - tau, 0)``.
    The minimizer is unique.  Runs in ``O(K log K)``.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 1 or theta.size < 1 or not np.all(np.isfinite(theta)):
        raise ValueError("score must be a finite 1-d array")
    K = theta.size
    order = np.argsort(-theta, kind="stable")
    s = theta[order]
    cs = np.cumsum(s)
    k = np.arange(1, K + 1)
    n = int(k[1.0 + k * s > cs].max())
    tau = (cs[n - 1] - 1.0) / n
    pi = np.maximum(theta - tau, 0.0)
    z = theta + 1.0 - pi
    zmax = z.max()
    e = np.exp(z - zmax)
    objective = float(zmax + np.log(e.sum()))
    # loss matrix is 11^T - I, so grad_t = 1 - softmax(z)_t
    grad = 1.0 - e / e.sum()
    gap = max(float(grad @ pi - grad.min()), 0.0)
    return PiSolution(
        pi=pi,
        perturbed_point=z,
        objective=objective,
        method="sort_threshold",
        iterations=0,
        stationarity_gap=gap,
        tau=float(tau),
    )


def _projected_gradient(f_and_grad, project, fw_gap, x0, lipschitz, tol, max_iter):
    """Projected gradient with backtracking; stops on the Frank-Wolfe gap.

    A step ``s`` is accepted when ``<g(x+) - g(x), d> <= |d|^2 / (2 s)``.  For
    convex ``f`` this implies the usual sufficient-decrease bound
    ``f(x+) <= f(x) + <g, d> + |d|^2 / (2 s)`` but, unlike comparing function
    values, stays meaningful when ``|d|`` is near machine precision.  Steps at
    or below ``1 / lipschitz`` always pass, which bounds the halvings per
    iteration.

    Returns ``(x, f, gap, iterations)``.
    """
    x = x0
    f, g = f_and_grad(x)
    gap = fw_gap(x, g)
    min_step = 1.0 / lipschitz if lipschitz > 0 else 1.0
    step = min_step
    it = 0
    while gap > tol:
        if it >= max_iter:
            raise ConvergenceError(
                f"projected gradient stopped after {it} iterations with "
                f"Frank-Wolfe gap {gap:.3e} > {tol:.1e}",
                iterate=x,
                gap=gap,
                iterations=it,
            )
        step *= 2.0
        while True:
            x_new = project(x - step * g)
            d = x_new - x
            f_new, g_new = f_and_grad(x_new)
            if step <= min_step:
                break
            if (g_new - g) @ d <= (d @ d) / (2.0 * step):
                break
            step = max(step / 2.0, min_step)
        it += 1
        if not np.any(d):
            # fixed point of the projected step: x is stationary up to rounding
            x, f, g = x_new, f_new, g_new
            gap = fw_gap(x, g)
            break
        x, f, g = x_new, f_new, g_new
        gap = fw_gap(x, g)
    return x, f, gap, it


def solve_pi_generic(
    loss: DecomposedTargetLoss,
    omega: Negentropy,
    theta,
    tol: float = DEFAULT_TOL,
    max_iter: int = MAX_ITER,
) -> PiSolution:
    """Minimize ``omega.conjugate(theta + L @ pi)`` over the simplex.

    Projected gradient with Euclidean simplex projection and backtracking,
    started from the uniform mixture; terminates once the Frank-Wolfe gap is
    at most ``tol``.

    Raises
    ------
    ConvergenceError
        If ``max_iter`` iterations do not bring the gap below ``tol``.
    """
    _check_compatible(loss, omega)
    theta = _as_score(theta, loss.rho_dim)
    L = loss.loss_matrix
    N = loss.N

    def f_and_grad(pi):
        z = theta + L @ pi
        return omega.conjugate(z), omega.conjugate_grad(z) @ L

    def fw_gap(pi, g):
        return max(float(g @ pi - g.min()), 0.0)

    lip = omega.strong_convexity_modulus**-1 * np.linalg.norm(L, 2) ** 2
    pi, f, gap, it = _projected_gradient(
        f_and_grad, simplex_project, fw_gap, np.full(N, 1.0 / N), lip, tol, max_iter
    )
    return PiSolution(
        pi=pi,
        perturbed_point=theta + L @ pi,
        objective=float(f),
        method="projected_gradient",
        iterations=it,
        stationarity_gap=gap,
    )


def product_pi(nu, codes) -> np.ndarray:
    """Mixture over bit-vectors whose coordinate-wise marginals are ``nu``.

    ``pi[t] = prod_i nu_i if bit i of t is set else (1 - nu_i)``, so that
    ``sum_t pi[t] * bits(t) == nu``.
    """
    nu = np.asarray(nu, dtype=float)
    bits = np.asarray(codes, dtype=bool)  # (N, rho_dim)
    factors = np.where(bits, nu[None, :], 1.0 - nu[None, :])
    return np.prod(factors, axis=1)


def solve_box_hamming(
    loss: DecomposedTargetLoss,
    omega: Negentropy,
    theta,
    tol: float = DEFAULT_TOL,
    max_iter: int = MAX_ITER,
) -> tuple[np.ndarray, PiSolution]:
    """Solve the Hamming mixture problem over the box ``[0, 1]^rho_dim``.

    For the Hamming loss the convex hull of the loss columns is the unit
    cube, so it suffices to minimize ``omega.conjugate(theta + nu)`` over the
    cube and lift ``nu*`` back to the product mixture of :func:`product_pi`.

    Returns ``(nu_star, solution)``.
    """
    if loss.kind != "hamming":
        raise ValueError(f"box form needs a Hamming loss, got {loss.name}")
    _check_compatible(loss, omega)
    theta = _as_score(theta, loss.rho_dim)

    def f_and_grad(nu):
        z = theta + nu
        return omega.conjugate(z), omega.conjugate_grad(z)

    def fw_gap(nu, g):
        return max(float(g @ nu - np.minimum(g, 0.0).sum()), 0.0)

    def project(nu):
        return np.clip(nu, 0.0, 1.0)

    lip = 1.0 / omega.strong_convexity_modulus
    nu, f, gap, it = _projected_gradient(
        f_and_grad, project, fw_gap, np.full(loss.rho_dim, 0.5), lip, tol, max_iter
    )
    pi = product_pi(nu, loss.codes)
    sol = PiSolution(
        pi=pi,
        perturbed_point=theta + nu,
        objective=float(f),
        method="box_form",
        iterations=it,
        stationarity_gap=gap,
        nu=nu,
    )
    return nu, sol


def _check_compatible(loss, omega):
    if omega.dim != loss.rho_dim:
        raise ValueError(
            f"negentropy dimension {omega.dim} does not match encoding "
            f"dimension {loss.rho_dim}"
        )
    if omega.domain_descriptor == "probability_simplex" and not loss.is_one_hot:
        raise ValueError(
            f"{omega.kind} negentropy is finite only on the simplex; "
            f"{loss.name} needs a one-hot label encoding"
        )


def solve_pi(
    loss: DecomposedTargetLoss, omega: Negentropy, theta, tol: float = DEFAULT_TOL
) -> PiSolution:
    """Dispatch to the cheapest applicable solver."""
    _check_compatible(loss, omega)
    if loss.kind == "zero_one" and omega.kind == "shannon":
        return solve_pi_multiclass_shannon(_as_score(theta, loss.rho_dim))
    if loss.kind == "hamming" and omega.kind == "squared_norm":
        return solve_box_hamming(loss, omega, theta, tol)[1]
    return solve_pi_generic(loss, omega, theta, tol)


def conv_conjugate_value(loss, omega, theta, tol: float = DEFAULT_TOL) -> float:
    return solve_pi(loss, omega, theta, tol).objective


def conv_conjugate_grad(loss, omega, theta, pi_solution: PiSolution | None = None):
    """Gradient of the convolutional conjugate at ``theta``.

    Equals ``omega.conjugate_grad`` at the perturbed point of any minimizer,
    so no differentiation through the solver is needed.
    """
    if pi_solution is None:
        pi_solution = solve_pi(loss, omega, theta)
    return omega.conjugate_grad(pi_solution.perturbed_point)


def caratheodory_sparsify(
    loss: DecomposedTargetLoss, pi, affdim: int | None = None
) -> np.ndarray:
    """Reduce the support of ``pi`` to at most ``affdim + 1`` atoms.

    ``L @ pi`` and ``sum(pi)`` are preserved.  While the support is too
    large, a kernel vector ``d`` of the loss columns on the support stacked
    over a row of ones is found, and ``pi`` moves along ``d`` until the first
    coordinate (lowest index on ties) hits zero.
    """
    pi = np.array(pi, dtype=float)
    if pi.shape != (loss.N,):
        raise ValueError(f"pi must have shape ({loss.N},)")
    if np.any(pi < -1e-12) or abs(pi.sum() - 1.0) > 1e-9:
        raise ValueError("pi is not in the simplex")
    pi = np.clip(pi, 0.0, None)
    if affdim is None:
        affdim = affine_dimension(loss)
    L = loss.loss_matrix
    while True:
        support = np.flatnonzero(pi > 0)
        if support.size <= affdim + 1:
            break
        A = np.vstack([L[:, support], np.ones(support.size)])
        _, s, vt = np.linalg.svd(A)
        if support.size <= A.shape[0] and s[-1] > 1e-8 * s[0]:
            raise RuntimeError(
                "no kernel direction found although the support exceeds the "
                "Caratheodory bound"
            )
        d = vt[-1]
        d[np.abs(d) < 1e-15] = 0.0
        lead = np.flatnonzero(d)[0]
        if d[lead] > 0:
            d = -d
        neg = d < 0
        ratios = np.full(support.size, np.inf)
        ratios[neg] = pi[support][neg] / -d[neg]
        j = int(np.argmin(ratios))  # first index attaining the minimum
        gamma = ratios[j]
        new = pi[support] + gamma * d
        new[j] = 0.0
        new[new < 0] = 0.0
        pi[support] = new
    return pi / pi.sum()
