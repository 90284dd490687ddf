"""End-to-end acceptance checks.

Each test prints one ``PASS`` or ``FAIL`` line with the measured quantity,
whether or not output capture is enabled.  Run on its own with

    pytest tests/test_acceptance.py -v
"""

import time

import numpy as np
import pytest

from convfy import ConvFYLoss, make_hamming, make_zero_one
from convfy.conv_conjugate import solve_box_hamming, solve_pi_generic, solve_pi_multiclass_shannon
from convfy.harness import (
    fisher_check,
    grad_check,
    make_fy,
    property_check,
    sample_scores,
    sample_simplex,
    train_synthetic,
    verify_bounds,
)
from convfy.negentropy import Shannon, SquaredNorm

GRID = (
    [(f"multiclass:{K}", e) for K in range(2, 7) for e in ("shannon", "sqnorm")]
    + [(f"hamming:{r}", "sqnorm") for r in (2, 3, 4)]
    + [("topk:5:2", "sqnorm")]
)
TRIALS = 1000


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n:>2} {'PASS' if ok else 'FAIL'}: {detail}")
        return ok

    return emit


def argmax_set(x):
    return set(np.flatnonzero(x == x.max()).tolist())


def test_01_closed_form_exactness(report):
    rng = np.random.default_rng(1)
    worst_obj = worst_kkt = 0.0
    start = time.perf_counter()
    for K in range(2, 9):
        loss, omega = make_zero_one(K), Shannon(K)
        for _ in range(200):
            theta = rng.uniform(-3, 3, K)
            exact = solve_pi_multiclass_shannon(theta)
            pg = solve_pi_generic(loss, omega, theta, tol=1e-9)
            worst_obj = max(worst_obj, abs(exact.objective - pg.objective))
            worst_kkt = max(worst_kkt, abs(np.maximum(theta - exact.tau, 0).sum() - 1))
    elapsed = time.perf_counter() - start
    ok = worst_obj <= 1e-7 and worst_kkt <= 1e-10 and elapsed < 10
    report(1, ok, f"max |obj diff| {worst_obj:.2e}, max KKT residual {worst_kkt:.2e}, "
                  f"{elapsed:.1f}s")
    assert ok


def _bound_campaign(link):
    worst, violations, supports = 0.0, 0, []
    start = time.perf_counter()
    for task, entropy in GRID:
        rep = verify_bounds(task, entropy, TRIALS, seed=0, link=link)
        violations += rep.violations
        if rep.max_ratio is not None:
            worst = max(worst, rep.max_ratio)
        if link == "sparse":
            supports.append(max(r.support for r in rep.records) - rep.records[0].bound_constant)
    return violations, worst, supports, time.perf_counter() - start


def test_02_linear_regret_bound(report):
    violations, worst, _, elapsed = _bound_campaign("argmax")
    ok = violations == 0 and elapsed < 120
    report(2, ok, f"{violations} violations over {len(GRID)} tasks x {TRIALS} trials, "
                  f"max ratio {worst:.3f}, {elapsed:.1f}s")
    assert ok


def test_03_improved_bound(report):
    violations, worst, supports, _ = _bound_campaign("sparse")
    # support minus (affdim + 1); must never be positive
    ok = violations == 0 and max(supports) <= 0
    report(3, ok, f"{violations} violations, max ratio {worst:.3f}, "
                  f"max support excess {max(supports):+.0f}")
    assert ok


def test_04_regret_decomposition(report):
    worst_id = 0.0
    min_fy = np.inf
    for task, entropy in GRID:
        fy = make_fy(task, entropy, 1e-9)
        rng = np.random.default_rng(4)
        for _ in range(TRIALS):
            theta = sample_scores(rng, fy.loss.rho_dim)
            eta = sample_simplex(rng, fy.loss.K)
            sol = fy.solve(theta)
            fy_term, mixture = fy.regret_decomposition(theta, eta, sol)
            regret = fy.surrogate_regret(theta, eta, sol)
            worst_id = max(worst_id, abs(fy_term + mixture - regret))
            min_fy = min(min_fy, fy_term)
    ok = worst_id <= 1e-8 and min_fy >= -1e-10
    report(4, ok, f"max identity residual {worst_id:.2e}, min fy_term {min_fy:.2e}")
    assert ok


def test_05_gradient_correctness(report):
    worst = max(grad_check(task, entropy, samples=100, seed=5, step=1e-5).max_rel_error
                for task, entropy in GRID)
    ok = worst <= 1e-4
    report(5, ok, f"max relative error {worst:.2e}")
    assert ok


def test_06_convexity_and_smoothness(report):
    conv = lip = -np.inf
    for task, entropy in GRID:
        rep = property_check(task, entropy, samples=TRIALS, seed=6)
        # worst_slack already subtracts the allowed tolerance
        conv = max(conv, rep.suites["convexity"]["worst_slack"])
        lip = max(lip, rep.suites["lipschitz"]["worst_slack"])
    ok = conv <= 0 and lip <= 0
    report(6, ok, f"worst convexity slack {conv:.2e}, worst Lipschitz slack {lip:.2e}")
    assert ok


def test_07_argmax_sets(report):
    rng = np.random.default_rng(7)
    mismatches = 0
    for i in range(1000):
        K = int(rng.integers(2, 9))
        theta = rng.uniform(-3, 3, K)
        if i < 100:
            # exact ties among the top entries
            m = int(rng.integers(2, K + 1))
            theta[rng.choice(K, m, replace=False)] = theta.max()
        pi = solve_pi_multiclass_shannon(theta).pi
        mismatches += argmax_set(theta) != argmax_set(pi)
    ok = mismatches == 0
    report(7, ok, f"{mismatches} argmax-set mismatches in 1000 scores (100 with ties)")
    assert ok


def test_08_fisher_consistency(report):
    worst, failures = 0.0, 0
    for task, entropy in GRID:
        rep = fisher_check(task, entropy, eta_samples=20, seed=8)
        failures += rep.failures
        worst = max(worst, rep.max_error)
    ok = failures == 0 and worst <= 1e-3
    report(8, ok, f"max estimation error {worst:.2e}, {failures} non-converged")
    assert ok


def test_09_box_form(report):
    rng = np.random.default_rng(9)
    worst = 0.0
    for r in (2, 3):
        loss, omega = make_hamming(r), SquaredNorm(r)
        for _ in range(200):
            theta = rng.uniform(-5, 5, r)
            _, box = solve_box_hamming(loss, omega, theta)
            full = solve_pi_generic(loss, omega, theta)
            worst = max(worst, abs(box.objective - full.objective))
    ok = worst <= 1e-6
    report(9, ok, f"max |box - simplex objective| {worst:.2e}")
    assert ok


def test_10_randomized_bound(report):
    violations, worst, _, _ = _bound_campaign("random")
    ok = violations == 0
    report(10, ok, f"{violations} violations, max ratio {worst:.3f}")
    assert ok


def test_11_training_demo(report):
    start = time.perf_counter()
    trace = train_synthetic("multiclass:3", "shannon", n_samples=500, n_features=5,
                            epochs=200, lr=0.5, seed=0)
    elapsed = time.perf_counter() - start
    N = ConvFYLoss(make_zero_one(3), "shannon").loss.N
    bound_ok = all(r.mean_target_regret <= N * r.mean_surrogate_regret + 1e-9 for r in trace)
    first, last = trace[0].mean_surrogate_regret, trace[-1].mean_surrogate_regret
    ok = bound_ok and last < 0.5 * first and elapsed < 30
    report(11, ok, f"per-epoch bound {'holds' if bound_ok else 'fails'}, surrogate regret "
                   f"{first:.4f} -> {last:.4f}, {elapsed:.1f}s")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
