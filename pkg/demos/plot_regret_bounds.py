"""
Surrogate regret bounds for three links
=======================================

The target regret of the prediction is bounded by a constant times the
surrogate regret.  The constant depends on the link: the number of
predictions for the plain argmax, the affine dimension plus one after
sparsifying the mixture, and one for the randomized link in expectation.
"""

import numpy as np

from convfy import ConvFYLoss, make_hamming
from convfy.harness import verify_bounds

for link in ("argmax", "sparse", "random"):
    rep = verify_bounds("hamming:3", "sqnorm", trials=300, seed=0, link=link)
    const = rep.records[0].bound_constant
    print(f"{link:>7}: constant {const:4.0f}, violations {rep.violations}, "
          f"largest ratio to the bound {rep.max_ratio:.3f}")

##############################################################################
# The surrogate regret splits into a Fenchel-Young term and the expected
# target regret of the mixture, and both parts are nonnegative.
fy = ConvFYLoss(make_hamming(3), "sqnorm")
rng = np.random.default_rng(1)
theta = rng.uniform(-2, 2, 3)
eta = rng.dirichlet(np.ones(8))
fy_term, mixture = fy.regret_decomposition(theta, eta)
print(f"regret {fy.surrogate_regret(theta, eta):.6f} = "
      f"{fy_term:.6f} + {mixture:.6f}")
