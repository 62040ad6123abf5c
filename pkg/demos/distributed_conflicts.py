"""
Speculative coloring on a simulated cluster
===========================================

Eight simulated ranks color an RMAT graph in supersteps, trading boundary
colors after each one. Equal colors across a rank boundary are conflicts,
resolved by a random total order and recolored in the next round.
"""

import numpy as np

from distcolor import (RMAT_GOOD, FirstFit, Mode, ProtocolConfig, RandomX,
                       RmatParams, block_partition, generate_rmat, run_protocol)

g = generate_rmat(RmatParams(13, 8, RMAT_GOOD, seed=1))
part = block_partition(g, 8)

###############################################################################
# Bigger supersteps mean fewer messages but staler ghost colors.

for s in (50, 500, 5000):
    for mode in Mode:
        _, m = run_protocol(g, part, ProtocolConfig(superstep=s, mode=mode))
        print(f"s={s:<5} {mode.value:<5} colors={m.num_colors:<3} rounds={m.rounds} "
              f"conflicts={m.conflicts:<6} messages={m.msgs}")

###############################################################################
# Random-X spreads simultaneous choices over X candidates.

for sel in (FirstFit(), RandomX(2), RandomX(5), RandomX(10)):
    ms = [run_protocol(g, part, ProtocolConfig(superstep=500, selection=sel, seed=s))[1] for s in range(5)]
    print(f"{sel!s:<14} conflicts {np.mean([m.conflicts for m in ms]):8.1f}  "
          f"colors {np.mean([m.num_colors for m in ms]):.1f}")
