"""Verification campaigns and a synthetic training demo.

Each campaign is a pure function of its arguments (including ``seed``) and
returns a report dataclass with a ``to_dict`` method giving a stable field
order for JSON output.

Tasks are named by strings: ``multiclass:K``, ``hamming:R``, ``topk:K:k``
and ``matrix:PATH`` (a CSV loss table with ``K`` rows and ``N`` columns).
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .conv_conjugate import vertex_objectives
from .exceptions import ConvergenceError
from .fy_loss import ConvFYLoss
from .links import pi_argmax_link, probability_estimate, sparsified_link
from .target_loss import (
    DecomposedTargetLoss,
    affine_dimension,
    load_matrix_csv,
    make_hamming,
    make_top_k,
    make_zero_one,
    mean_embedding,
)

__all__ = [
    "parse_task",
    "make_fy",
    "sample_scores",
    "sample_simplex",
    "RegretRecord",
    "RegretReport",
    "verify_bounds",
    "GradCheckReport",
    "grad_check",
    "PropertyReport",
    "property_check",
    "FisherReport",
    "fisher_check",
    "minimize_risk",
    "TrainTrace",
    "train_synthetic",
    "TRACE_HEADER",
]

log = logging.getLogger(__name__)

BOUND_ATOL = 1e-9
ZERO_REGRET = 1e-12
SCORE_RANGE = 5.0
TRACE_HEADER = ("epoch", "mean_surrogate_regret", "mean_target_regret", "grad_norm")
LINK_KINDS = ("argmax", "sparse", "random")


def parse_task(task: str) -> DecomposedTargetLoss:
    """Build the target loss named by ``task``."""
    head, _, rest = task.partition(":")
    try:
        if head == "multiclass":
            return make_zero_one(int(rest))
        if head == "hamming":
            return make_hamming(int(rest))
        if head == "topk":
            K, k = rest.split(":")
            return make_top_k(int(K), int(k))
        if head == "matrix" and rest:
            return load_matrix_csv(rest)
    except (ValueError, OSError) as exc:
        raise ValueError(f"bad task {task!r}: {exc}") from None
    raise ValueError(
        f"unknown task {task!r}; expected multiclass:K, hamming:R, topk:K:k or matrix:FILE"
    )


def make_fy(task, entropy: str, tol: float) -> ConvFYLoss:
    loss = parse_task(task) if isinstance(task, str) else task
    return ConvFYLoss(loss, entropy, solver_tol=tol)


def sample_scores(rng, dim, size=None):
    shape = (dim,) if size is None else (size, dim)
    return rng.uniform(-SCORE_RANGE, SCORE_RANGE, size=shape)


def sample_simplex(rng, K, floor: float = 0.0):
    """Uniform draw from the simplex via normalized exponentials.

    With ``floor > 0`` the draw is mixed as ``floor + (1 - K floor) * eta``
    so every entry is at least ``floor``.
    """
    e = rng.exponential(size=K)
    eta = e / e.sum()
    if floor:
        eta = floor + (1.0 - K * floor) * eta
    return eta


# -- regret bounds -----------------------------------------------------------


@dataclass
class RegretRecord:
    surrogate_regret: float
    target_regret: float
    bound_constant: float
    ratio: float | None
    violated: bool
    support: int | None = None


@dataclass
class RegretReport:
    task: str
    entropy: str
    link: str
    trials: int
    seed: int
    records: list = field(default_factory=list)

    @property
    def violations(self) -> int:
        return sum(r.violated for r in self.records)

    @property
    def max_ratio(self) -> float | None:
        ratios = [r.ratio for r in self.records if r.ratio is not None]
        return max(ratios) if ratios else None

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self, include_records: bool = False) -> dict:
        out = {
            "task": self.task,
            "entropy": self.entropy,
            "link": self.link,
            "trials": self.trials,
            "seed": self.seed,
            "violations": self.violations,
            "max_ratio": self.max_ratio,
        }
        if include_records:
            out["records"] = [asdict(r) for r in self.records]
        return out


def _ratio(target, surrogate, constant):
    # 0/0 is left undefined rather than set to 0 so it cannot hide violations
    if target <= ZERO_REGRET and constant * surrogate <= ZERO_REGRET:
        return None
    if constant * surrogate <= 0:
        return math.inf
    return target / (constant * surrogate)


def bound_record(fy: ConvFYLoss, theta, eta, link: str = "argmax", affdim=None):
    """Check one regret bound at ``(theta, eta)``.

    ``argmax`` uses constant ``N``; ``sparse`` the Caratheodory-sparsified
    mixture with constant ``affdim + 1``; ``random`` the expected regret of
    the randomized link with constant 1.
    """
    loss = fy.loss
    sol = fy.solve(theta)
    surrogate = fy.surrogate_regret(theta, eta, sol)
    risks = loss.table @ eta
    regrets = np.maximum(risks - risks.min(), 0.0)
    support = None
    if link == "argmax":
        constant = float(loss.N)
        target = float(regrets[pi_argmax_link(sol).prediction])
    elif link == "sparse":
        if affdim is None:
            affdim = affine_dimension(loss)
        constant = float(affdim + 1)
        res = sparsified_link(loss, sol)
        target = float(regrets[res.prediction])
        support = int(np.count_nonzero(res.pi_used))
    elif link == "random":
        constant = 1.0
        target = float(sol.pi @ regrets)
    else:
        raise ValueError(f"unknown link {link!r}; choose from {LINK_KINDS}")
    violated = target > constant * surrogate + BOUND_ATOL
    if support is not None and support > affdim + 1:
        violated = True
    return RegretRecord(
        surrogate_regret=surrogate,
        target_regret=target,
        bound_constant=constant,
        ratio=_ratio(target, surrogate, constant),
        violated=bool(violated),
        support=support,
    )


def verify_bounds(
    task, entropy: str, trials: int, seed: int, link: str = "argmax", tol: float = 1e-9
) -> RegretReport:
    """Check a surrogate regret bound on random ``(theta, eta)`` pairs.

    Scores are i.i.d. uniform on ``[-5, 5]``; class distributions are uniform
    on the simplex.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    if link not in LINK_KINDS:
        raise ValueError(f"unknown link {link!r}; choose from {LINK_KINDS}")
    fy = make_fy(task, entropy, tol)
    loss = fy.loss
    affdim = affine_dimension(loss) if link == "sparse" else None
    rng = np.random.default_rng(seed)
    report = RegretReport(str(task if isinstance(task, str) else loss.name), entropy, link, trials, seed)
    for _ in range(trials):
        theta = sample_scores(rng, loss.rho_dim)
        eta = sample_simplex(rng, loss.K)
        report.records.append(bound_record(fy, theta, eta, link, affdim))
    return report


# -- gradient check ----------------------------------------------------------


@dataclass
class GradCheckReport:
    task: str
    entropy: str
    samples: int
    seed: int
    step: float
    max_rel_error: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= self.threshold

    def to_dict(self) -> dict:
        return {**asdict(self), "passed": self.passed}


def central_difference(f, x, step):
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        g[i] = (f(x + e) - f(x - e)) / (2.0 * step)
    return g


def relative_error(a, b, floor: float = 1e-6) -> float:
    """``|a - b| / max(|a|, |b|, floor)`` in the 2-norm."""
    a, b = np.asarray(a), np.asarray(b)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(a), np.linalg.norm(b), floor))


def grad_check(
    task,
    entropy: str,
    samples: int = 100,
    seed: int = 0,
    step: float = 1e-5,
    tol: float = 1e-12,
    threshold: float = 1e-4,
) -> GradCheckReport:
    """Compare the envelope gradient with central finite differences."""
    if step <= 0:
        raise ValueError("step must be positive")
    fy = make_fy(task, entropy, tol)
    loss = fy.loss
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        theta = sample_scores(rng, loss.rho_dim)
        y = int(rng.integers(loss.K))
        fd = central_difference(lambda th: fy.loss_value(th, y), theta, step)
        worst = max(worst, relative_error(fy.loss_grad(theta, y), fd))
    name = task if isinstance(task, str) else loss.name
    return GradCheckReport(name, entropy, samples, seed, step, worst, threshold)


# -- convexity / smoothness / identities -------------------------------------


@dataclass
class PropertyReport:
    task: str
    entropy: str
    samples: int
    seed: int
    suites: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(s["passed"] for s in self.suites.values())

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "entropy": self.entropy,
            "samples": self.samples,
            "seed": self.seed,
            "passed": self.passed,
            "suites": self.suites,
        }


def property_check(
    task, entropy: str, samples: int = 1000, seed: int = 0, tol: float = 1e-12
) -> PropertyReport:
    """Run the convexity and regret-identity suites on random score pairs.

    Each suite records its worst slack (positive means violated).
    """
    fy = make_fy(task, entropy, tol)
    loss = fy.loss
    rng = np.random.default_rng(seed)
    lip = fy.smoothness
    worst = {k: -math.inf for k in (
        "convexity", "lipschitz", "nonnegativity", "decomposition",
        "lower_bound", "vertex_dominance",
    )}
    for i in range(samples):
        if samples == 1 and i == 0:
            t1 = t2 = np.zeros(loss.rho_dim)
        else:
            t1 = sample_scores(rng, loss.rho_dim)
            t2 = sample_scores(rng, loss.rho_dim)
        y = int(rng.integers(loss.K))
        eta = sample_simplex(rng, loss.K)
        s1, s2, sm = fy.solve(t1), fy.solve(t2), fy.solve(0.5 * (t1 + t2))
        l1, l2 = fy.loss_value(t1, y, s1), fy.loss_value(t2, y, s2)
        lm = fy.loss_value(0.5 * (t1 + t2), y, sm)
        worst["convexity"] = max(worst["convexity"], lm - 0.5 * (l1 + l2) - 1e-9)
        g1, g2 = fy.loss_grad(t1, y, s1), fy.loss_grad(t2, y, s2)
        worst["lipschitz"] = max(
            worst["lipschitz"],
            np.linalg.norm(g1 - g2) - lip * np.linalg.norm(t1 - t2) - 1e-8,
        )
        worst["nonnegativity"] = max(worst["nonnegativity"], -min(l1, l2, lm) - 1e-10)
        regret = fy.surrogate_regret(t1, eta, s1)
        fy_term, mixture = fy.regret_decomposition(t1, eta, s1)
        worst["decomposition"] = max(
            worst["decomposition"],
            abs(fy_term + mixture - regret) - 1e-8,
            -fy_term - 1e-10,
            -mixture,
        )
        worst["lower_bound"] = max(worst["lower_bound"], mixture - regret - 1e-9)
        vmin = vertex_objectives(loss, fy.omega, t1).min()
        worst["vertex_dominance"] = max(worst["vertex_dominance"], s1.objective - vmin - 1e-8)
    name = task if isinstance(task, str) else loss.name
    report = PropertyReport(name, entropy, samples, seed)
    for k, v in worst.items():
        report.suites[k] = {"passed": bool(v <= 0), "worst_slack": float(v)}
    return report


# -- Fisher consistency ------------------------------------------------------


def minimize_risk(fy: ConvFYLoss, eta, theta0=None, max_steps: int = 20000,
                  lr: float = 1.0, grad_tol: float = 1e-8):
    """Full-batch gradient descent on the surrogate risk under ``eta``.

    Backtracks from a doubled step each iteration, accepting a step ``s``
    once ``<g(x+) - g(x), d> <= |d|^2 / (2 s)``; steps at or below the
    inverse smoothness constant always pass.

    Returns ``(theta, grad_norm, steps)``; raises :class:`ConvergenceError`
    when ``max_steps`` is exhausted.
    """
    theta = np.zeros(fy.loss.rho_dim) if theta0 is None else np.array(theta0, dtype=float)
    g = fy.surrogate_risk_grad(theta, eta)
    min_step = 1.0 / fy.smoothness
    step = max(lr, min_step) / 2.0
    for it in range(max_steps + 1):
        gn = float(np.linalg.norm(g))
        if gn <= grad_tol:
            return theta, gn, it
        if it == max_steps:
            break
        step *= 2.0
        while True:
            d = -step * g
            g_new = fy.surrogate_risk_grad(theta + d, eta)
            if step <= min_step or (g_new - g) @ d <= (d @ d) / (2.0 * step):
                break
            step = max(step / 2.0, min_step)
        theta, g = theta + d, g_new
    raise ConvergenceError(
        f"risk minimization stopped after {max_steps} steps with gradient norm {gn:.3e}",
        iterate=theta, gap=gn, iterations=max_steps,
    )


@dataclass
class FisherReport:
    task: str
    entropy: str
    eta_samples: int
    seed: int
    errors: list = field(default_factory=list)
    failures: int = 0
    threshold: float = 1e-3

    @property
    def max_error(self) -> float:
        return max(self.errors) if self.errors else math.inf

    @property
    def passed(self) -> bool:
        return self.failures == 0 and self.max_error <= self.threshold

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "entropy": self.entropy,
            "eta_samples": self.eta_samples,
            "seed": self.seed,
            "max_error": self.max_error,
            "failures": self.failures,
            "passed": self.passed,
        }


def fisher_check(
    task,
    entropy: str,
    eta_samples: int = 20,
    seed: int = 0,
    gd_steps: int = 20000,
    gd_lr: float = 1.0,
    tol: float = 1e-13,
    floor: float = 0.01,
) -> FisherReport:
    """Recover the mean label encoding from the numerical risk minimizer.

    For Hamming tasks the comparison is on the decoded per-label marginals.
    """
    fy = make_fy(task, entropy, tol)
    loss = fy.loss
    rng = np.random.default_rng(seed)
    name = task if isinstance(task, str) else loss.name
    report = FisherReport(name, entropy, eta_samples, seed)
    for _ in range(eta_samples):
        eta = sample_simplex(rng, loss.K, floor)
        try:
            theta, _, _ = minimize_risk(fy, eta, max_steps=gd_steps, lr=gd_lr)
        except ConvergenceError as exc:
            log.warning("eta=%s: %s", eta, exc)
            report.failures += 1
            continue
        est = probability_estimate(fy, theta)
        mu = mean_embedding(loss, eta)
        if loss.kind == "hamming":
            err = np.abs(est.decoded - (1.0 - mu) / 2.0).max()
        else:
            err = np.abs(est.mean_rho_estimate - mu).max()
        report.errors.append(float(err))
    return report


# -- synthetic training ------------------------------------------------------


@dataclass
class TrainTrace:
    epoch: int
    mean_surrogate_regret: float
    mean_target_regret: float
    grad_norm: float


def _synthetic_data(rng, K, n_samples, n_features, scale):
    W_true = scale * rng.standard_normal((K, n_features))
    X = rng.standard_normal((n_samples, n_features))
    S = X @ W_true.T
    S -= S.max(axis=1, keepdims=True)
    eta = np.exp(S)
    eta /= eta.sum(axis=1, keepdims=True)
    y = np.array([rng.choice(K, p=e) for e in eta])
    return X, eta, y


def train_synthetic(
    task,
    entropy: str,
    n_samples: int = 500,
    n_features: int = 5,
    epochs: int = 200,
    lr: float = 0.5,
    seed: int = 0,
    out_path=None,
    tol: float = 1e-9,
    scale: float = 1.0,
) -> list[TrainTrace]:
    """Fit a linear score model by full-batch gradient descent.

    Features are standard normal; the class distribution at ``x`` is
    ``softmax(W_true x)`` for a random ``W_true``, and one label is drawn per
    sample.  The model ``theta = W x`` starts at ``W = 0`` and takes ``epochs``
    fixed-size steps on the empirical loss.  Row ``e`` of the trace is
    measured before update ``e + 1``, using the true class distributions.
    When ``out_path`` is given the trace is written there as CSV.
    """
    if n_samples < 1 or n_features < 1 or epochs < 0:
        raise ValueError("sizes must be positive")
    fy = make_fy(task, entropy, tol)
    loss = fy.loss
    rng = np.random.default_rng(seed)
    X, etas, ys = _synthetic_data(rng, loss.K, n_samples, n_features, scale)
    W = np.zeros((loss.rho_dim, n_features))
    regret_table = loss.table @ etas.T  # (N, n)
    regret_table = regret_table - regret_table.min(axis=0, keepdims=True)
    mus = etas @ loss.rho.T
    omega_T_mus = np.array([fy.omega_T_value(mu) for mu in mus])
    rho_ys = loss.rho[:, ys].T
    idx = np.arange(n_samples)
    trace = []
    for epoch in range(epochs + 1):
        thetas = X @ W.T
        sols = [fy.solve(theta) for theta in thetas]
        objective = np.array([s.objective for s in sols])
        Z = np.array([s.perturbed_point for s in sols])
        preds = [pi_argmax_link(s).prediction for s in sols]
        surr = objective - np.sum(thetas * mus, axis=1) + omega_T_mus
        targ = regret_table[preds, idx]
        grad = (fy.omega.conjugate_grad(Z) - rho_ys).T @ X / n_samples
        trace.append(TrainTrace(epoch, float(surr.mean()), float(targ.mean()),
                                float(np.linalg.norm(grad))))
        if epoch < epochs:
            W = W - lr * grad
    if out_path is not None:
        write_trace(trace, out_path)
    return trace


def write_trace(trace, dest) -> None:
    """Write a trace as CSV to a path or an open text stream."""
    if hasattr(dest, "write"):
        _write_rows(trace, dest)
        return
    with Path(dest).open("w", newline="") as fh:
        _write_rows(trace, fh)


def _write_rows(trace, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for row in trace:
        w.writerow([row.epoch, repr(row.mean_surrogate_regret),
                    repr(row.mean_target_regret), repr(row.grad_norm)])
