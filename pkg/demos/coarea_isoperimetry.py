"""Coarea identity on a grid function and isoperimetric ratios of polygons.

Run: python3 demos/coarea_isoperimetry.py
"""
import numpy as np

from soblab import GridField, PointMeasure
from soblab.geometry import PolygonSet, coarea_check, isoperimetric_ratio
from soblab.measures import LebesgueMeasure


def cone(X):
    return np.maximum(1 - np.linalg.norm(X, axis=-1), 0.0)


for h in (1 / 32, 1 / 64, 1 / 128):
    res = coarea_check(GridField.sample(cone, 1.5, h))
    print(f"h = 1/{round(1 / h)}: int |grad u| = {res.lhs:.5f}, "
          f"int Per = {res.rhs:.5f}, rel err {res.rel_err:.1e}")

disk = PolygonSet.regular(256)
lam = isoperimetric_ratio(LebesgueMeasure(), disk, 0.0, 2.0)
print(f"\nLebesgue, disk: ratio {lam.ratio:.5f} (optimal 1/(2 sqrt(pi)) = "
      f"{1 / (2 * np.sqrt(np.pi)):.5f})")
square = PolygonSet(([(-1, -1), (1, -1), (1, 1), (-1, 1)],))
print(f"Lebesgue, square: ratio {isoperimetric_ratio(LebesgueMeasure(), square, 0.0, 2.0).ratio:.5f}")
delta = PointMeasure.dirac((0.0, 0.0))
print(f"Dirac at the center, alpha 1, q 1: ratio "
      f"{isoperimetric_ratio(delta, disk, 1.0, 1.0).ratio:.5f}")
