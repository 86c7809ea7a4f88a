"""Default tolerances and quadrature settings shared across the package.

Every numerical knob that a caller may want to tune lives here so that
reports can record the values they were produced with.
"""

# Luxemburg bisection: stop when the bracket is this tight (relative, in log-space).
ORLICZ_BISECTION_RTOL = 1e-14
ORLICZ_RESIDUAL_TOL = 1e-8
ORLICZ_MAX_ITER = 400

# Young inverse via brentq.
YOUNG_INVERSE_XTOL = 1e-15
YOUNG_INVERSE_RTOL = 4 * 2.220446049250313e-16

# Golden-section search for the associate (Legendre) transform.
GOLDEN_ITERATIONS = 200

# B_{p,q} classifier.
BPQ_T_MAX = 1e12
BPQ_NODES_PER_DECADE = 64
BPQ_SLOPE_MARGIN = 1e-3

# Gauss-Legendre nodes per edge piece for boundary integrals.
PERIMETER_GAUSS_NODES = 4

# Number of level sets for the coarea check (midpoint rule in t).
COAREA_LEVELS = 64

# Weak-type (L^{q,infty}) sup is taken over this many log-spaced thresholds.
WEAK_THRESHOLDS = 64

# Radii used by grid maximal operators when none are given.
GRID_MAXIMAL_RADII = 40

# Number of centered enlargements added to default cube families.
CUBE_ENLARGEMENTS = 12

# Angular resolution of exterior-of-box integrals in the plane.
EXTERIOR_ANGLES = 512
EXTERIOR_LAGUERRE_NODES = 24
