"""
Recovering class probabilities
==============================

At a minimizer of the expected surrogate loss, the gradient of the base
conjugate at the perturbed point equals the mean label encoding.  For
one-hot labels this is the class distribution itself; for Hamming labels
it gives the per-bit marginals.
"""

import numpy as np

from convfy import ConvFYLoss, make_hamming, make_zero_one
from convfy.conv_conjugate import product_pi
from convfy.harness import minimize_risk
from convfy.links import probability_estimate

eta = np.array([0.6, 0.3, 0.1])
fy = ConvFYLoss(make_zero_one(3), "shannon", solver_tol=1e-13)
theta, grad_norm, steps = minimize_risk(fy, eta)
print(f"{steps} gradient steps, final gradient norm {grad_norm:.1e}")
print("estimate:", probability_estimate(fy, theta).decoded)

##############################################################################
# Independent bits with marginals 0.8 and 0.4.
loss = make_hamming(2)
fy = ConvFYLoss(loss, "sqnorm", solver_tol=1e-13)
eta = product_pi([0.8, 0.4], loss.codes)
theta, _, _ = minimize_risk(fy, eta)
print("marginals:", probability_estimate(fy, theta).decoded)
