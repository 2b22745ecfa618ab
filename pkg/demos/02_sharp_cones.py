"""Admissible cones and sharpness against the block copy of SL(3) in SL(4).

Run: python3 demos/02_sharp_cones.py
"""

import math

import numpy as np

from limitcones import SampledCone, construct_admissible_cone, folded_plane_sl3_in_sl4, sharpness_test
from limitcones.errors import InfeasibleError

sym3 = np.array([3.0, 1.0, -1.0, -3.0]) / math.sqrt(20)

# The image of SL(2) under the irreducible 4-dimensional representation has a
# one-ray limit cone. It is far from every wall, so it has an admissible cone.
cone = construct_admissible_cone(SampledCone([sym3]), (1, 2, 3), eps=0.05)
rep = cone.report
print(f"admissible cone: {len(cone.forms)} forms, interior margin {rep.interior_margin:.3f}, "
      f"i-invariant {rep.i_invariant}, orbit convex {rep.orbit_convex}, walls avoided {rep.walls_avoided}")

# A direction on a wall of the chamber cannot be separated from that wall.
try:
    construct_admissible_cone(SampledCone([[1.0, 1.0, -1.0, -1.0]]), (1, 2, 3), eps=0.05)
except InfeasibleError as exc:
    print("wall direction rejected at root", exc.root)

# The block SL(3) folds its Weyl chamber onto two planar pieces glued along (1,0,0,-1).
plane = folded_plane_sl3_in_sl4()
rep = sharpness_test(SampledCone([sym3]), plane)
print(f"Sym3 ray: min angle to the folded plane {rep.min_angle:.4f} rad, sharp = {rep.sharp}")
rep = sharpness_test(SampledCone([sym3, [1.0, 0.0, 0.0, -1.0]]), plane)
print(f"adding (1,0,0,-1): min angle {rep.min_angle:.4f}, sharp = {rep.sharp}")
