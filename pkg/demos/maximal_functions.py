"""Fractional maximal functions of atomic measures, exact versus grid.

Run: python3 demos/maximal_functions.py
"""
import numpy as np

from soblab import GridField, PointMeasure
from soblab.operators import frac_maximal_grid_field, frac_maximal_point, riesz_potential

# three atoms in the plane
mu = PointMeasure([(0.0, 0.0), (1.0, 0.5), (-0.5, 1.0)], [1.0, 0.5, 2.0])
for alpha in (0.5, 1.0, 1.5):
    vals = [frac_maximal_point(mu, alpha, (x, 0.0)) for x in (0.25, 1.0, 3.0)]
    print(f"M_{alpha} mu at x = 0.25, 1, 3:", ", ".join(f"{v:.4f}" for v in vals))

# the Dirac mass: M_1 delta(x) = 1 / (pi |x|)
delta = PointMeasure.dirac((0.0, 0.0))
print("M_1 delta(2, 0) * 2 pi =", frac_maximal_point(delta, 1.0, (2.0, 0.0)) * 2 * np.pi)

# grid maximal of a disk density, and the Riesz potential of the unit disk at its center
disk = GridField.sample(lambda X: (np.linalg.norm(X, axis=-1) < 1).astype(float), 1.5, 1 / 32,
                        role="density")
M = frac_maximal_grid_field(disk, 1.0)
print(f"grid M_1 of the unit disk: max {M.max():.4f}")
print(f"I_1(1_B)(0) ~ {riesz_potential(disk, 1.0, (1 / 64, 1 / 64)):.4f} (closed form 1)")
