"""Base negentropies and their conjugates.

Two generators are provided: the Shannon negentropy restricted to the
probability simplex (conjugate: log-sum-exp) and the self-conjugate squared
norm on the whole space.  Both are 1-strongly convex in the 2-norm on their
domains, so their conjugates have 1-Lipschitz gradients.
"""

from __future__ import annotations

import numpy as np

from .exceptions import DomainError

__all__ = [
    "Negentropy",
    "Shannon",
    "SquaredNorm",
    "make_negentropy",
    "shannon_value",
    "shannon_conjugate",
    "shannon_conjugate_grad",
    "squared_norm_value",
    "squared_norm_conjugate",
    "squared_norm_conjugate_grad",
    "simplex_project",
]

SIMPLEX_ATOL = 1e-9


def _finite(x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("input has non-finite entries")
    return x


def shannon_value(p) -> float:
    """``sum_i p_i log p_i`` on the simplex, with ``0 log 0 = 0``."""
    p = _finite(p)
    if np.any(p < -SIMPLEX_ATOL) or abs(p.sum() - 1.0) > SIMPLEX_ATOL:
        raise DomainError("Shannon negentropy is only finite on the probability simplex")
    p = np.clip(p, 0.0, None)
    nz = p > 0
    return float(np.sum(p[nz] * np.log(p[nz])))


def shannon_conjugate(theta) -> float:
    """Log-sum-exp, shifted by the max so large scores do not overflow."""
    theta = _finite(theta)
    m = theta.max()
    return float(m + np.log(np.exp(theta - m).sum()))


def shannon_conjugate_grad(theta) -> np.ndarray:
    """Softmax along the last axis, shifted by the max."""
    theta = _finite(theta)
    e = np.exp(theta - theta.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def squared_norm_value(p) -> float:
    p = _finite(p)
    return 0.5 * float(p @ p)


squared_norm_conjugate = squared_norm_value


def squared_norm_conjugate_grad(theta) -> np.ndarray:
    return _finite(theta).copy()


def simplex_project(v) -> np.ndarray:
    """Euclidean projection onto the probability simplex.

    Sort-and-threshold: find the unique ``tau`` with
    ``sum(max(v - tau, 0)) == 1`` and return ``max(v - tau, 0)``.
    """
    v = _finite(v)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, v.size + 1)
    rho = np.count_nonzero(u - css / ind > 0)
    tau = css[rho - 1] / rho
    return np.maximum(v - tau, 0.0)


class Negentropy:
    """A base negentropy on ``R^dim`` with a full-domain conjugate.

    Subclasses set ``kind``, ``strong_convexity_modulus`` and
    ``domain_descriptor`` and implement ``value``, ``conjugate`` and
    ``conjugate_grad``.
    """

    kind: str
    strong_convexity_modulus: float = 1.0
    domain_descriptor: str

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError("dim must be positive")
        self.dim = int(dim)

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"

    def in_domain(self, p) -> bool:
        raise NotImplementedError

    def value(self, p) -> float:
        raise NotImplementedError

    def conjugate(self, theta) -> float:
        raise NotImplementedError

    def conjugate_grad(self, theta) -> np.ndarray:
        raise NotImplementedError

    def fenchel_young_gap(self, p, theta) -> float:
        """``value(p) + conjugate(theta) - <theta, p>``; nonnegative."""
        return self.value(p) + self.conjugate(theta) - float(np.dot(theta, p))


class Shannon(Negentropy):
    kind = "shannon"
    domain_descriptor = "probability_simplex"

    def in_domain(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(
            np.all(p >= -SIMPLEX_ATOL) and abs(p.sum() - 1.0) <= SIMPLEX_ATOL
        )

    def value(self, p):
        return shannon_value(p)

    def conjugate(self, theta):
        return shannon_conjugate(theta)

    def conjugate_grad(self, theta):
        return shannon_conjugate_grad(theta)


class SquaredNorm(Negentropy):
    kind = "squared_norm"
    domain_descriptor = "full_space"

    def in_domain(self, p) -> bool:
        return bool(np.all(np.isfinite(p)))

    def value(self, p):
        return squared_norm_value(p)

    def conjugate(self, theta):
        return squared_norm_conjugate(theta)

    def conjugate_grad(self, theta):
        return squared_norm_conjugate_grad(theta)


_ALIASES = {
    "shannon": Shannon,
    "squared_norm": SquaredNorm,
    "sqnorm": SquaredNorm,
}


def make_negentropy(kind: str, dim: int) -> Negentropy:
    """Build a negentropy from its name (``shannon`` or ``sqnorm``)."""
    try:
        cls = _ALIASES[kind]
    except KeyError:
        raise ValueError(
            f"unknown negentropy {kind!r}; choose from {sorted(_ALIASES)}"
        ) from None
    return cls(dim)
