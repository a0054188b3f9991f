"""
Barriers on a coarse and a fine grid
====================================

Per-decile barriers of both processes at m = 160, n = 628 for D = 127
and D = 511. Compare the first decile of U across the two grids with
the same decile of P.
"""

from compcurves.grid import DyadicGrid
from compcurves.montecarlo import barriers

m, n = 160, 628
for s in (6, 8):
    grid = DyadicGrid(s)
    for process in ("U", "P"):
        row = barriers(process, m, n, grid, 0.05, 20_000, seed=0)
        print(f"D={grid.d:4d} {process}: " + " ".join(f"{b:6.3f}" for b in row))
