"""Averaging a weighted norm over phase space gives a multiple of the L2 norm."""
import math

import numpy as np

from tfinv import averaging, spaces
from tfinv.families import sample_family
from tfinv.hermite import Grid

space = spaces.WeightedL2("2+sin")          # 1 <= w <= 3, so C0 = sqrt 3
specs = ["hermite:0", "hermite:3", "gabor:0.8,1.0,0", "random:1,6"]
fam = sample_family(specs, Grid(1, 1 / 16, 12))

rep = averaging.run_schedule(space, fam, ids=specs, x_probes=[np.array([1.0])])
for r in rep.rows:
    if r.f_id == "gabor:0.8,1.0,0":
        print(f"R = {r.R:6.1f}  ||f||_[R] = {r.avg_norm:.6f}  translation defect {r.defect_t:.2e}")
print("extracted C =", rep.C, " sqrt 2 =", math.sqrt(2))
for fid, (lo, ratio, hi) in rep.brackets.items():
    print(f"{fid:>18s}: {lo:.4f} < ||f||_H / ||f||_L2 = {ratio:.4f} < {hi:.4f}")

# a Sobolev norm is not uniformly bounded under modulation, and v0 shows it
xs, xis = spaces.phase_grid([0.0], np.arange(0, 16.01, 0.5))
est = spaces.estimate_v0(spaces.SobolevHs(1.0), sample_family(["gaussian:4"], Grid(1, 1 / 16, 32)), xs, xis)
print("Sobolev v0 growth exponent:", round(est.poly_fit["N"], 3),
      "->", spaces.admissibility(spaces.SobolevHs(1.0), est).verdict)
