#!/usr/bin/env python3
"""A smooth idempotent map whose image changes dimension.

The projection family sends a parameter s to the rank-one projection onto a
bump translated out to -exp(1/s); for s <= 0 it is the zero projection. Its
fixed-point set is a line for s <= 0 and a plane for s > 0, glued smoothly:
the local model behind spaces with jumping dimensions.
"""

import numpy as np

from scfold.retracts import (
    LocalScModel,
    bump_splicing,
    neatness_check,
    retract_tangent_basis,
    retraction_check,
    splicing_to_retraction,
)
from scfold.sc_core import WeightedGridScale

scale = WeightedGridScale(64.0, 1 / 16, deltas=(0.0, 0.01, 0.02, 0.03))
splicing = bump_splicing(scale)
r = splicing_to_retraction(splicing, name="bump")


def point(s, t):
    fiber = t * splicing.f_s(s) if s > 0 else np.zeros(scale.n)
    return np.concatenate([[s], fiber])


# idempotence across all levels, the defining property
samples = [point(1.0, 0.7), point(0.25, -0.4), point(-1.0, 0.0)]
print("idempotence residual (levels 0..3):",
      f"{retraction_check(r, samples, levels=range(4)):.2e}")

# the dimension profile: 1 on the closed half-line, 2 on the open half-plane
print("\nlocal dimension along the parameter axis:")
for s in (-1.0, -0.5, -0.25, 0.25, 0.5, 1.0):
    x = point(s, 0.6 if s > 0 else 0.0)
    tb = retract_tangent_basis(r, x)
    print(f"  s={s:6.2f}: dimension {tb.dimension}")

# projections are honest: the family kills the orthogonal complement
f1 = splicing.f_s(1.0)
stray = np.exp(-(scale.grid + 3.0) ** 2)
stray -= f1 * (scale.inner0(f1, stray) / scale.inner0(f1, f1))
killed = splicing.project(np.array([1.0]), stray)
print("\northogonal direction after projection:",
      f"{scale.norm(killed, 0):.2e}")

# at the jump parameter the retract is still neatly placed
model = LocalScModel(r)
rep = neatness_check(model, point(0.0, 0.0))
print("neatness at the jump: complement ok =", rep.complement_ok,
      "| sequence:", rep.sequence_status)

# the translated support leaves the window for small positive s, loudly
from scfold.errors import WindowExitError

try:
    splicing.f_s(0.2)
except WindowExitError as exc:
    print("\nwindow exit detected:", str(exc)[:60], "...")
print("smallest representable parameter:",
      round(splicing.min_parameter, 4))
