"""Randomized invariants checked with hypothesis."""

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from convfy import ConvFYLoss, make_hamming, make_top_k, make_zero_one
from convfy.negentropy import simplex_project
from convfy.target_loss import (
    affine_dimension,
    from_matrix,
    target_regrets,
    transformed_bayes_negative,
)

finite = st.floats(-5, 5, allow_nan=False)
FYS = {
    "zo-sh": ConvFYLoss(make_zero_one(3), "shannon"),
    "zo-sq": ConvFYLoss(make_zero_one(3), "sqnorm"),
    "ham-sq": ConvFYLoss(make_hamming(2), "sqnorm"),
    "topk-sq": ConvFYLoss(make_top_k(4, 2), "sqnorm"),
}


@settings(max_examples=100, deadline=None)
@given(arrays(float, st.integers(1, 10), elements=st.floats(-1e3, 1e3)))
def test_projection_lands_in_simplex_and_is_idempotent(v):
    p = simplex_project(v)
    assert np.all(p >= 0)
    assert abs(p.sum() - 1) <= 1e-9
    np.testing.assert_allclose(simplex_project(p), p, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(
    st.integers(1, 4),
    st.integers(2, 6),
    st.data(),
)
def test_affine_dimension_bounds(rows, cols, data):
    raw = data.draw(arrays(float, (rows, cols), elements=st.integers(0, 3).map(float)))
    loss = from_matrix(raw)
    assert 0 <= affine_dimension(loss) <= min(loss.N - 1, loss.rho_dim)


@settings(max_examples=100, deadline=None)
@given(arrays(float, 3, elements=finite), arrays(float, 3, elements=finite),
       st.floats(0, 1))
def test_transformed_bayes_negative_is_convex(p, q, a):
    loss = make_hamming(3)
    mid = transformed_bayes_negative(loss, a * p + (1 - a) * q)
    ends = a * transformed_bayes_negative(loss, p) + (1 - a) * transformed_bayes_negative(loss, q)
    assert mid <= ends + 1e-9


@settings(max_examples=100, deadline=None)
@given(arrays(float, 6, elements=st.floats(0.001, 1)))
def test_target_regrets_nonnegative(w):
    r = target_regrets(make_top_k(6, 3), w / w.sum())
    assert np.all(r >= 0) and r.min() == 0


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(sorted(FYS)), st.data())
def test_loss_convex_along_segments(key, data):
    fy = FYS[key]
    d = fy.loss.rho_dim
    a = data.draw(arrays(float, d, elements=finite))
    b = data.draw(arrays(float, d, elements=finite))
    y = data.draw(st.integers(0, fy.loss.K - 1))
    mid = fy.loss_value((a + b) / 2, y)
    assert mid <= (fy.loss_value(a, y) + fy.loss_value(b, y)) / 2 + 1e-9


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(sorted(FYS)), st.data())
def test_regret_lower_bounds(key, data):
    fy = FYS[key]
    theta = data.draw(arrays(float, fy.loss.rho_dim, elements=finite))
    w = data.draw(arrays(float, fy.loss.K, elements=st.floats(0.0, 1.0)))
    assume(w.sum() > 1e-3)
    eta = w / w.sum()
    sol = fy.solve(theta)
    surr = fy.surrogate_regret(theta, eta, sol)
    _, mixture = fy.regret_decomposition(theta, eta, sol)
    assert surr >= -1e-9
    assert mixture <= surr + 1e-9
