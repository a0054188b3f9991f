"""
Theoretical and simulated comparison curves
===========================================

For a few model pairs, the curves of the population distributions are set
next to the average of their empirical counterparts over repeated samples.
"""

import numpy as np

from compcurves.alternatives import make_alternative
from compcurves.curves import mc_estimated_curves, theoretical_curves
from compcurves.grid import DyadicGrid

grid = DyadicGrid(3)
for alt_id in ("A7", "A8", "A9"):
    spec = make_alternative(alt_id)
    tc = theoretical_curves(spec.F, spec.G, 0.5, grid.points)
    cc_mc, ccc_mc = mc_estimated_curves(spec.F, spec.G, 2000, 2000, grid, 200, seed=0)
    print(f"{alt_id}: {spec.description}")
    print("   p      CC   CC(MC)     CCC  CCC(MC)")
    for row in zip(grid.points, tc.cc, cc_mc, tc.ccc, ccc_mc):
        print("  " + " ".join(f"{v:7.3f}" for v in row))

# A sign change of CCC tells that neither distribution dominates the other.
spec = make_alternative("A9")
p = np.linspace(0.05, 0.95, 19)
ccc = theoretical_curves(spec.F, spec.G, 0.5, p).ccc
print("A9 CCC changes sign near p =", p[np.nonzero(np.diff(np.sign(ccc)))[0] + 1])
