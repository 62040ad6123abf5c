"""
Greedy coloring under different visit orders
============================================

Sequential first-fit greedy on the three RMAT classes, visited in natural,
largest-first and smallest-last order, next to Random-X selection.
"""

import numpy as np

from distcolor import (RMAT_BAD, RMAT_ER, RMAT_GOOD, FirstFit, Ordering, RandomX,
                       RmatParams, generate_rmat, greedy_color, order_vertices)

graphs = {name: generate_rmat(RmatParams(12, 8, probs, seed=1))
          for name, probs in [("ER", RMAT_ER), ("Good", RMAT_GOOD), ("Bad", RMAT_BAD)]}

###############################################################################
# Smallest-last usually wins on skewed degree distributions.

print(f"{'graph':<6}{'max deg':>8}{'natural':>9}{'LF':>5}{'SL':>5}")
for name, g in graphs.items():
    k = [greedy_color(g, order_vertices(g, kind)).max()
         for kind in (Ordering.NATURAL, Ordering.LARGEST_FIRST, Ordering.SMALLEST_LAST)]
    print(f"{name:<6}{g.max_degree:>8}{k[0]:>9}{k[1]:>5}{k[2]:>5}")

###############################################################################
# Random-X trades colors for fewer collisions later on; X=1 is first fit.

g = graphs["Good"]
for x in (1, 2, 5, 10):
    k = [greedy_color(g, selection=RandomX(x), seed=s).max() for s in range(5)]
    print(f"Random-{x:<3} mean colors {np.mean(k):.1f}")
assert greedy_color(g, selection=RandomX(1)).max() == greedy_color(g, selection=FirstFit()).max()
