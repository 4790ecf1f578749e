#!/usr/bin/env python3
"""Paths that may break once in the middle: a boundary made of broken pairs.

The chart is a quadrant [0, infinity) x shape space. Positive glue parameter
means one unbroken path from the first anchor to the third; glue zero means a
pair of paths meeting at the middle anchor. The degeneracy index tells the
strata apart, and shrinking the glue parameter visibly parks the path at the
middle point: breaking is reaching the quadrant wall.
"""

import numpy as np

from scfold.retracts import broken_path_demo

a = np.array([0.0, 0.0])
b = np.array([1.0, 1.0])
c = np.array([2.0, 0.0])

demo = broken_path_demo(a, b, c, glue_values=(0.0, 0.05, 0.1, 0.3, 1.0),
                        shape_amplitude=0.1)

print("degeneracy by glue parameter:")
for sample in demo.samples:
    print(f"  glue={sample.glue:5.2f}  kind={sample.kind:9s}  "
          f"d={sample.degeneracy}  local dim={sample.local_dimension}")

print("\nhow close the visible path sits to the middle anchor:")
for sample in demo.samples:
    if sample.kind != "unbroken":
        continue
    curve = sample.curve[0]
    dist = np.min(np.linalg.norm(curve - b[None, :], axis=1))
    print(f"  glue={sample.glue:5.2f}  min distance to b = {dist:.2e}")

rows = demo.rows()
print("\nreport rows carry:", sorted(rows[0].keys()))
broken = [r for r in rows if r["sample"]["kind"] == "broken"]
print("broken stratum degeneracies:",
      sorted({r["degeneracy_index"] for r in broken}))
