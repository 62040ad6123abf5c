"""
Recoloring color classes, with and without piggybacking
=======================================================

A recoloring pass recolors whole color classes in a permuted order, one
class per step. Ranks never conflict, and first fit never adds a color.
Piggybacking holds boundary colors back until a neighbor rank needs them.
"""

from distcolor import (RMAT_GOOD, Ordering, ProtocolConfig, RmatParams, block_partition,
                       build_rank_views, generate_rmat, run_protocol)
from distcolor.recolor import PermutationSchedule, recolor_iterations

g = generate_rmat(RmatParams(12, 8, RMAT_GOOD, seed=1))
part = block_partition(g, 8)
views = build_rank_views(g, part)
colors, m = run_protocol(g, part, ProtocolConfig(ordering=Ordering.SMALLEST_LAST))
print("initial colors:", m.num_colors)

###############################################################################
# Color-count trajectories for the four class orders and two hybrids.

for perm in ("rv", "ni", "nd", "rand", "nd-rand:5", "nd-rand-pow2"):
    _, traj, _ = recolor_iterations(views, colors, PermutationSchedule.parse(perm, 10), seed=3)
    print(f"{perm:<13}", traj)

###############################################################################
# Same colors either way; only the traffic changes.

sched = PermutationSchedule.parse("nd", 3)
a, _, base = recolor_iterations(views, colors, sched, piggyback=False)
b, _, pig = recolor_iterations(views, colors, sched, piggyback=True)
assert (a == b).all()
print(f"baseline:  {base.msgs} messages, {base.nonempty_msgs} non-empty")
print(f"piggyback: {pig.msgs} messages, {pig.empty_msgs} empty, {pig.precomm_msgs} pre-communication")
