"""
Target losses in decomposed form
================================

Every discrete loss here is stored as an inner product between a label
encoding and a loss encoding, plus a label-only offset.  The size of the
loss encodings' affine hull controls how tight the regret bounds can be.
"""

import numpy as np

from convfy import affine_dimension, from_matrix, make_hamming, make_top_k, make_zero_one

# The 0-1 loss uses one-hot labels and the matrix 11^T - I.
zero_one = make_zero_one(4)
print(zero_one.loss_matrix)

# Hamming labels are bit-vectors, enumerated lexicographically.
hamming = make_hamming(3)
print(hamming.codes[:4], "...")
print("loss between 000 and 111:", hamming(0, 7))

# Top-k predicts a subset and pays 1 when the label falls outside it.
topk = make_top_k(5, 2)
print("subsets:", topk.codes)

##############################################################################
# The reconstructed table ``[t, y]`` is what the regret computations use.
print(hamming.table.astype(int))

##############################################################################
# Affine dimension versus number of predictions.  The gap between the two
# is the room the sparsified link has to tighten the bound.
for loss in (zero_one, hamming, topk, make_hamming(6)):
    print(f"{loss.name:>12}: N = {loss.N:3d}, affine dimension = {affine_dimension(loss)}")

##############################################################################
# Any table of costs can be used directly.  Here the absolute error on an
# ordinal scale of four grades.
grades = np.arange(4)
ordinal = from_matrix(np.abs(grades[:, None] - grades[None, :]), name="ordinal")
print("ordinal affine dimension:", affine_dimension(ordinal))
