#!/usr/bin/env python3
"""Graded scales: one vector, a ladder of norms.

A scale stores a nested family of norms indexed by a regularity level. The
finite-dimensional backend is constant across levels; the grid backend
measures ever more derivatives under ever stronger exponential weights, so
climbing levels is a statement about smoothness and decay.
"""

import numpy as np

from scfold.sc_core import (
    FiniteDimScale,
    PartialQuadrant,
    WeightedGridScale,
    degeneracy_index,
    direct_sum,
    embedding_report,
)

# constant scale: every level is plain Euclidean space
plane = FiniteDimScale(2, max_level=3)
v = plane.vector([3.0, 4.0])
print("finite-dimensional norms:", [v.norm(m) for m in range(4)])

# grid scale on [-8, 8]: level m sees m derivatives, each weighted by
# exp(delta_m |s|)
scale = WeightedGridScale(8.0, 1 / 64, deltas=(0.0, 0.1, 0.2, 0.3))
gaussian = np.exp(-scale.grid ** 2)
print("gaussian norms by level:",
      [round(scale.norm(gaussian, m), 4) for m in range(4)])

# the level ladder is monotone: lower norms are controlled by higher ones
# times a measured constant
small = WeightedGridScale(4.0, 1 / 16, deltas=(0.0, 0.1, 0.2))
rep = embedding_report(small, m=0, sample_count=48, seed=1)
print(f"embedding constant c_0 = {rep.constant:.4f}, "
      f"max sampled ratio = {rep.max_ratio:.4f}, pass = {rep.passed}")
print("tail energy profile (fraction beyond half window):",
      round(rep.tail_profile[0.5], 6))

# sums of scales combine norms in quadrature, which the parallelogram
# relation pins down exactly
both = direct_sum(small, FiniteDimScale(3, max_level=2))
joint = np.concatenate([np.exp(-small.grid ** 2), [1.0, 2.0, 2.0]])
lhs = both.norm(joint, 1) ** 2
rhs = small.norm(np.exp(-small.grid ** 2), 1) ** 2 + 9.0
print("parallelogram check:", np.isclose(lhs, rhs))

# partial quadrants count vanishing constrained coordinates: the boundary
# detector of everything downstream
quadrant = PartialQuadrant(FiniteDimScale(3), (0, 1, 2))
for point in ([1.0, 2.0, 3.0], [0.0, 2.0, 0.0], [0.0, 0.0, 0.0]):
    print(f"degeneracy of {point}: {degeneracy_index(quadrant, np.array(point))}")
