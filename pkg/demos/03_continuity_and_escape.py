"""Limit cones under deformation: a continuous family and one that jumps.

Takes about a minute. Run: python3 demos/03_continuity_and_escape.py
"""

from limitcones import FoldedNeighbourhood, build_section7_family, build_sym3_family, run_continuity_experiment
from limitcones.deformation import anchor_direction

# Deforming the Sym3 Schottky group: Hausdorff distance to the t = 0 cone shrinks with t.
fam = build_sym3_family(schedule=(0.1, 0.05, 0.02, 0.01, 0.0))
rep = run_continuity_experiment(fam, ladder=(8,), cutoff=5.0)
for t, d in rep.distances(8).items():
    print(f"sym3  t = {t:<5g} distance to t=0 cone: {d:.4f}")

# The block group sits inside the neighbourhood C of the folded plane. After a
# small perturbation its estimated cone leaves C, however small t is.
fam = build_section7_family(schedule=(0.01, 0.0))
nbhd = FoldedNeighbourhood()
rep = run_continuity_experiment(fam, (6, 8, 10), cutoff=1.0, neighbourhood=nbhd, anchor=anchor_direction(fam))
for t in fam.schedule:
    for n in (6, 8, 10):
        h = rep.row(t, n).hull
        print(f"block t = {t:<5g} N = {n:2d}: directions outside C = {h['raw_outside']:5d}, "
              f"max angle outside = {h['raw_outside_max_angle']:.4f}")
