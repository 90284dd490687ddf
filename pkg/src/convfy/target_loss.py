"""Discrete target losses in decomposed form.

A target loss ``ell(t, y)`` over ``N`` predictions and ``K`` labels is stored
as

    ell(t, y) = <rho[:, y], loss_matrix[:, t]> + c[y]

with ``rho`` of shape ``(rho_dim, K)`` and ``loss_matrix`` of shape
``(rho_dim, N)``.  Labels and predictions are 0-based column indices into an
enumeration fixed by each constructor (lexicographic for bit-vectors and
subsets).

All quantities here (risks, Bayes risks, regrets) are computed by exact
enumeration over the ``N`` prediction columns.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .exceptions import ResourceLimitError

__all__ = [
    "DecomposedTargetLoss",
    "make_zero_one",
    "make_hamming",
    "make_top_k",
    "from_matrix",
    "load_matrix_csv",
    "check_distribution",
    "target_risks",
    "target_regret",
    "target_regrets",
    "transformed_bayes_negative",
    "mean_embedding",
    "affine_dimension",
]

MAX_HAMMING_DIM = 16
MAX_PREDICTIONS = 10**6
RANK_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class DecomposedTargetLoss:
    """A discrete target loss with its label and loss encodings.

    Attributes
    ----------
    rho : ndarray, shape (rho_dim, K)
        Column ``y`` is the label encoding of label ``y``.
    loss_matrix : ndarray, shape (rho_dim, N)
        Column ``t`` is the loss encoding of prediction ``t``.
    c : ndarray, shape (K,)
        Remainder term independent of the prediction.
    name : str
        Human-readable identifier, e.g. ``"hamming:3"``.
    kind : str
        Family tag used for solver dispatch: ``zero_one``, ``hamming``,
        ``top_k`` or ``matrix``.
    codes : tuple, optional
        Combinatorial object behind each index (bit tuples for Hamming,
        subsets for top-k).
    """

    rho: np.ndarray
    loss_matrix: np.ndarray
    c: np.ndarray
    name: str
    kind: str = "matrix"
    codes: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        rho = np.array(self.rho, dtype=float)
        lm = np.array(self.loss_matrix, dtype=float)
        c = np.array(self.c, dtype=float).reshape(-1)
        if rho.ndim != 2 or lm.ndim != 2:
            raise ValueError("rho and loss_matrix must be 2-d")
        if rho.shape[0] != lm.shape[0]:
            raise ValueError(
                f"encoding dimensions differ: rho has {rho.shape[0]} rows, "
                f"loss_matrix has {lm.shape[0]}"
            )
        if c.shape[0] != rho.shape[1]:
            raise ValueError("c must have one entry per label")
        for arr, label in ((rho, "rho"), (lm, "loss_matrix"), (c, "c")):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{label} has non-finite entries")
            arr.setflags(write=False)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "loss_matrix", lm)
        object.__setattr__(self, "c", c)

    @property
    def K(self) -> int:
        return self.rho.shape[1]

    @property
    def N(self) -> int:
        return self.loss_matrix.shape[1]

    @property
    def rho_dim(self) -> int:
        return self.rho.shape[0]

    @property
    def is_one_hot(self) -> bool:
        """True when the label encoding is the canonical basis."""
        return self.rho.shape[0] == self.rho.shape[1] and np.array_equal(
            self.rho, np.eye(self.K)
        )

    @cached_property
    def table(self) -> np.ndarray:
        """Reconstructed loss table of shape ``(N, K)``; entry ``[t, y]``."""
        tab = self.loss_matrix.T @ self.rho + self.c[None, :]
        tab.setflags(write=False)
        return tab

    def __call__(self, t: int, y: int) -> float:
        _check_index(t, self.N, "prediction")
        _check_index(y, self.K, "label")
        return float(self.loss_matrix[:, t] @ self.rho[:, y] + self.c[y])


def _check_index(i, n, what):
    if not (isinstance(i, (int, np.integer)) and 0 <= i < n):
        raise ValueError(f"{what} index {i!r} out of range [0, {n})")


def make_zero_one(K: int) -> DecomposedTargetLoss:
    """Multiclass 0-1 loss with one-hot encoding; loss matrix ``11^T - I``."""
    if not isinstance(K, (int, np.integer)) or K < 2:
        raise ValueError(f"need at least two classes, got K={K!r}")
    eye = np.eye(K)
    return DecomposedTargetLoss(
        rho=eye,
        loss_matrix=np.ones((K, K)) - eye,
        c=np.zeros(K),
        name=f"zero_one:{K}",
        kind="zero_one",
    )


def make_hamming(rho_dim: int) -> DecomposedTargetLoss:
    """Hamming loss over ``rho_dim`` binary labels.

    Labels and predictions are the ``2**rho_dim`` bit-vectors ``nu`` in
    lexicographic order, so index 0 is all zeros.  The encodings are
    ``rho(y) = 1 - 2 nu(y)``, ``loss_matrix[:, t] = nu(t)`` and
    ``c(y) = sum(nu(y))``.
    """
    if not isinstance(rho_dim, (int, np.integer)) or rho_dim < 1:
        raise ValueError(f"rho_dim must be a positive integer, got {rho_dim!r}")
    if rho_dim > MAX_HAMMING_DIM:
        raise ResourceLimitError(
            f"hamming:{rho_dim} enumerates 2**{rho_dim} labels; "
            f"limit is rho_dim <= {MAX_HAMMING_DIM}"
        )
    codes = tuple(itertools.product((0, 1), repeat=rho_dim))
    nu = np.array(codes, dtype=float).T  # (rho_dim, 2**rho_dim)
    return DecomposedTargetLoss(
        rho=1.0 - 2.0 * nu,
        loss_matrix=nu,
        c=nu.sum(axis=0),
        name=f"hamming:{rho_dim}",
        kind="hamming",
        codes=codes,
    )


def make_top_k(K: int, k: int) -> DecomposedTargetLoss:
    """Top-k loss: predict a size-``k`` subset, pay 1 when the label misses it.

    Predictions are the ``C(K, k)`` subsets in lexicographic order.
    """
    if not isinstance(K, (int, np.integer)) or not isinstance(k, (int, np.integer)):
        raise ValueError("K and k must be integers")
    if k < 1 or k >= K:
        raise ValueError(f"need 1 <= k < K, got K={K}, k={k}")
    if math.comb(K, k) > MAX_PREDICTIONS:
        raise ResourceLimitError(f"C({K}, {k}) subsets exceed {MAX_PREDICTIONS}")
    subsets = tuple(itertools.combinations(range(K), k))
    lm = np.ones((K, len(subsets)))
    for t, s in enumerate(subsets):
        lm[list(s), t] = 0.0
    return DecomposedTargetLoss(
        rho=np.eye(K),
        loss_matrix=lm,
        c=np.zeros(K),
        name=f"top_k:{K}:{k}",
        kind="top_k",
        codes=subsets,
    )


def from_matrix(raw, name: str = "matrix") -> DecomposedTargetLoss:
    """Trivial decomposition of a raw loss table.

    ``raw`` has shape ``(K, N)`` with ``raw[y, t] = ell(t, y)``; the encoding
    is one-hot and ``loss_matrix = raw`` (so ``rho_dim = K``).
    """
    raw = np.asarray(raw, dtype=float)
    if raw.ndim != 2:
        raise ValueError("raw loss table must be 2-d (K rows, N columns)")
    if not np.all(np.isfinite(raw)):
        raise ValueError("raw loss table has non-finite entries")
    K = raw.shape[0]
    return DecomposedTargetLoss(
        rho=np.eye(K), loss_matrix=raw, c=np.zeros(K), name=name, kind="matrix"
    )


def load_matrix_csv(path) -> DecomposedTargetLoss:
    """Read a ``K x N`` loss table from CSV; a non-numeric first row is a header."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(x.strip() for x in r)]
    if not rows:
        raise ValueError(f"{path}: empty loss table")
    try:
        [float(x) for x in rows[0]]
    except ValueError:
        rows = rows[1:]
    try:
        raw = np.array([[float(x) for x in r] for r in rows])
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None
    return from_matrix(raw, name=f"matrix:{path.name}")


def check_distribution(eta, K: int | None = None, atol: float = 1e-12) -> np.ndarray:
    """Validate a class distribution and return it as a float array."""
    eta = np.asarray(eta, dtype=float)
    if eta.ndim != 1:
        raise ValueError("class distribution must be 1-d")
    if K is not None and eta.shape[0] != K:
        raise ValueError(f"class distribution has {eta.shape[0]} entries, expected {K}")
    if not np.all(np.isfinite(eta)) or np.any(eta < 0):
        raise ValueError("class distribution must be finite and nonnegative")
    if abs(eta.sum() - 1.0) > atol:
        raise ValueError(f"class distribution sums to {eta.sum()!r}, not 1")
    return eta


def target_risks(loss: DecomposedTargetLoss, eta) -> np.ndarray:
    """Risk of every prediction under ``eta``, shape ``(N,)``."""
    eta = check_distribution(eta, loss.K)
    return loss.table @ eta


def target_regrets(loss: DecomposedTargetLoss, eta) -> np.ndarray:
    """Regret of every prediction under ``eta``; the minimum entry is 0."""
    r = target_risks(loss, eta)
    return np.maximum(r - r.min(), 0.0)


def target_regret(loss: DecomposedTargetLoss, t: int, eta) -> float:
    _check_index(t, loss.N, "prediction")
    return float(target_regrets(loss, eta)[t])


def transformed_bayes_negative(loss: DecomposedTargetLoss, p) -> float:
    """``T(p) = -min_t <p, loss_matrix[:, t]>``."""
    p = np.asarray(p, dtype=float)
    if p.shape != (loss.rho_dim,):
        raise ValueError(f"p must have shape ({loss.rho_dim},), got {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("p has non-finite entries")
    return -float(np.min(p @ loss.loss_matrix))


def mean_embedding(loss: DecomposedTargetLoss, eta) -> np.ndarray:
    """Expected label encoding ``sum_y eta_y rho(y)``."""
    eta = np.asarray(eta, dtype=float)
    if eta.shape != (loss.K,):
        raise ValueError(f"eta must have shape ({loss.K},), got {eta.shape}")
    return loss.rho @ eta


def affine_dimension(loss: DecomposedTargetLoss) -> int:
    """Dimension of the affine hull of the loss-matrix columns.

    Numerical rank of the column differences, with singular values below
    ``1e-9`` times the largest treated as zero.
    """
    lm = loss.loss_matrix
    if lm.shape[1] <= 1:
        return 0
    diffs = lm[:, 1:] - lm[:, :1]
    s = np.linalg.svd(diffs, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > RANK_RTOL * s[0]))
