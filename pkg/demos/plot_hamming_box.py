"""
Hamming loss on the unit cube
=============================

For the Hamming loss the loss encodings are the corners of the unit cube,
so the mixture problem can be solved over the cube in dimension ``r``
instead of the simplex over ``2**r`` corners.  Thresholding the cube
solution at one half gives the prediction.
"""

import numpy as np

from convfy import make_hamming, solve_box_hamming, solve_pi_generic
from convfy.links import hamming_threshold_link, pi_argmax_link
from convfy.negentropy import SquaredNorm

r = 3
loss, omega = make_hamming(r), SquaredNorm(r)
theta = np.array([-0.8, 0.4, -0.2])

nu, box = solve_box_hamming(loss, omega, theta)
full = solve_pi_generic(loss, omega, theta)
print("nu*:", nu)
print(f"objective on the cube {box.objective:.10f}, on the simplex {full.objective:.10f}")

##############################################################################
# The prediction is the bit pattern of nu* > 0.5; it is also the most
# likely corner under the product mixture built from nu*.
link = hamming_threshold_link(nu)
print("predicted bits:", loss.codes[link.prediction])
print("argmax of the product mixture:", loss.codes[pi_argmax_link(box).prediction])
