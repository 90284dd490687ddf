"""The convolutional Fenchel-Young loss.

Given a decomposed target loss and a base negentropy ``omega``, the
convolutional negentropy is ``omega_T(p) = omega(p) + T(p)`` with
``T(p) = -min_t <p, L[:, t]>``.  Its Fenchel-Young loss is

    loss(theta, y) = min_pi omega*(theta + L pi) + omega_T(rho(y)) - <theta, rho(y)>

Surrogate Bayes risks and regrets are evaluated in closed form through the
mean embedding ``mu = E_{y~eta}[rho(y)]``; no minimization over ``theta`` is
involved.
"""

from __future__ import annotations

import numpy as np

from .conv_conjugate import DEFAULT_TOL, PiSolution, _check_compatible, solve_pi
from .exceptions import DomainError
from .negentropy import Negentropy, make_negentropy
from .target_loss import (
    DecomposedTargetLoss,
    check_distribution,
    mean_embedding,
    target_regrets,
    transformed_bayes_negative,
)

__all__ = ["ConvFYLoss"]


class ConvFYLoss:
    """Convolutional Fenchel-Young loss for one target loss and negentropy.

    Parameters
    ----------
    loss : DecomposedTargetLoss
    omega : Negentropy or str
        Base negentropy, or its name (``"shannon"``, ``"sqnorm"``).
    solver_tol : float
        Frank-Wolfe gap tolerance passed to iterative solvers.

    Examples
    --------
    >>> from convfy import ConvFYLoss, make_zero_one
    >>> fy = ConvFYLoss(make_zero_one(2), "shannon")
    >>> round(fy.loss_value([0.0, 0.0], 0), 6)
    1.193147
    """

    def __init__(self, loss: DecomposedTargetLoss, omega, solver_tol: float = DEFAULT_TOL):
        if isinstance(omega, str):
            omega = make_negentropy(omega, loss.rho_dim)
        _check_compatible(loss, omega)
        if solver_tol <= 0:
            raise ValueError("solver_tol must be positive")
        self.loss = loss
        self.omega: Negentropy = omega
        self.solver_tol = float(solver_tol)
        self._omega_T_labels = np.array(
            [self.omega_T_value(loss.rho[:, y]) for y in range(loss.K)]
        )
        self._omega_T_labels.setflags(write=False)

    def __repr__(self):
        return (
            f"ConvFYLoss({self.loss.name}, {self.omega.kind}, "
            f"solver_tol={self.solver_tol:g})"
        )

    @property
    def smoothness(self) -> float:
        """Lipschitz constant of the loss gradient, ``1 / modulus``."""
        return 1.0 / self.omega.strong_convexity_modulus

    # -- conjugate ---------------------------------------------------------

    def solve(self, theta) -> PiSolution:
        return solve_pi(self.loss, self.omega, theta, self.solver_tol)

    def conjugate_value(self, theta) -> float:
        return self.solve(theta).objective

    def conjugate_grad(self, theta, pi_solution: PiSolution | None = None):
        if pi_solution is None:
            pi_solution = self.solve(theta)
        return self.omega.conjugate_grad(pi_solution.perturbed_point)

    def omega_T_value(self, p) -> float:
        p = np.asarray(p, dtype=float)
        if not self.omega.in_domain(p):
            raise DomainError(f"{p!r} is outside the domain of {self.omega.kind}")
        return self.omega.value(p) + transformed_bayes_negative(self.loss, p)

    # -- per-label loss ----------------------------------------------------

    def _check_label(self, y):
        if not (isinstance(y, (int, np.integer)) and 0 <= y < self.loss.K):
            raise ValueError(f"label {y!r} out of range [0, {self.loss.K})")

    def loss_value(self, theta, y: int, pi_solution: PiSolution | None = None) -> float:
        self._check_label(y)
        theta = np.asarray(theta, dtype=float)
        if pi_solution is None:
            pi_solution = self.solve(theta)
        rho_y = self.loss.rho[:, y]
        return float(pi_solution.objective + self._omega_T_labels[y] - theta @ rho_y)

    def loss_grad(self, theta, y: int, pi_solution: PiSolution | None = None):
        self._check_label(y)
        return self.conjugate_grad(theta, pi_solution) - self.loss.rho[:, y]

    def value_and_grad(self, theta, y: int):
        sol = self.solve(theta)
        return self.loss_value(theta, y, sol), self.loss_grad(theta, y, sol)

    # -- risks and regrets -------------------------------------------------

    def _mean(self, eta):
        eta = check_distribution(eta, self.loss.K)
        mu = mean_embedding(self.loss, eta)
        if not self.omega.in_domain(mu):
            raise DomainError("mean embedding lies outside the negentropy domain")
        return eta, mu

    def surrogate_risk(self, theta, eta, pi_solution: PiSolution | None = None) -> float:
        eta, mu = self._mean(eta)
        theta = np.asarray(theta, dtype=float)
        if pi_solution is None:
            pi_solution = self.solve(theta)
        return float(pi_solution.objective + eta @ self._omega_T_labels - theta @ mu)

    def surrogate_risk_grad(self, theta, eta, pi_solution: PiSolution | None = None):
        _, mu = self._mean(eta)
        return self.conjugate_grad(theta, pi_solution) - mu

    def surrogate_bayes_risk(self, eta) -> float:
        """``E[omega_T(rho(y))] - omega_T(E[rho(y)])``."""
        eta, mu = self._mean(eta)
        return float(eta @ self._omega_T_labels) - self.omega_T_value(mu)

    def surrogate_regret(self, theta, eta, pi_solution: PiSolution | None = None) -> float:
        """``omega_T*(theta) - <theta, mu> + omega_T(mu)``."""
        _, mu = self._mean(eta)
        theta = np.asarray(theta, dtype=float)
        if pi_solution is None:
            pi_solution = self.solve(theta)
        return pi_solution.objective - float(theta @ mu) + self.omega_T_value(mu)

    def regret_decomposition(self, theta, eta, pi_solution: PiSolution | None = None):
        """Split the surrogate regret into two nonnegative parts.

        Returns ``(fy_term, mixture_term)`` where ``fy_term`` is the base
        Fenchel-Young loss between the perturbed point and the mean embedding
        and ``mixture_term = sum_t pi_t * target_regret(t)``.  They add up to
        :meth:`surrogate_regret`.
        """
        eta, mu = self._mean(eta)
        if pi_solution is None:
            pi_solution = self.solve(theta)
        z = pi_solution.perturbed_point
        fy_term = float(self.omega.conjugate(z) - z @ mu + self.omega.value(mu))
        mixture = float(pi_solution.pi @ target_regrets(self.loss, eta))
        return fy_term, mixture
