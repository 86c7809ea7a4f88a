import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from soblab import Ball, GridField, PointMeasure
from soblab.dyadic import (DyadicCube, containing_cube, dyadic_domination_check,
                           dyadic_frac_maximal, grid_dyadic_maximal, hausdorff_content_bound,
                           shifts, sparse_family, stopping_cubes)
from soblab.errors import ParameterError

from conftest import point_measures, random_measure


def brute_dyadic(mu, alpha, x, t, levels=range(-40, 12)):
    """Enumerate cube levels directly."""
    n = mu.dim
    best = 0.0
    for k in levels:
        Q = DyadicCube.containing(x, k, t)
        m = mu.masses[Q.contains(mu.locations)].sum()
        best = max(best, Q.side ** alpha * m / Q.volume)
    return best


# geometry of the shifted grids ------------------------------------------------

def test_cube_side_and_shift_geometry():
    Q = DyadicCube.containing((0.5, 0.5), 0, (0.0, 0.0))
    assert Q.side == 1.0
    np.testing.assert_array_equal(Q.lower, [0, 0])
    R = DyadicCube.containing((0.5,), 1, (1 / 3,))
    # odd levels flip the sign of the shift
    assert R.lower[0] == pytest.approx(2 * (R.m[0] - 1 / 3))
    assert R.contains(np.array([[0.5]]))[0]


def test_nesting_random_pairs(rng):
    for t in shifts(2):
        for _ in range(10_000 // 4):
            x, y = rng.uniform(-50, 50, (2, 2))
            k1, k2 = sorted(rng.integers(-6, 6, 2))
            Q, P = DyadicCube.containing(x, int(k1), t), DyadicCube.containing(y, int(k2), t)
            # P is the coarser cube: either disjoint or P contains Q
            overlap = np.all(np.maximum(Q.lower, P.lower) < np.minimum(Q.upper, P.upper) - 1e-9)
            if overlap:
                assert np.all(P.lower <= Q.lower + 1e-9) and np.all(Q.upper <= P.upper + 1e-9)


def test_parent_contains_child():
    Q = DyadicCube.containing((0.3, -0.7), -3, (1 / 3, 0.0))
    P = Q.parent()
    assert P.k == Q.k + 1
    assert np.all(P.lower <= Q.lower + 1e-12) and np.all(Q.upper <= P.upper + 1e-12)


# 1/3 trick ------------------------------------------------------------------------

def test_containing_cube_examples():
    t, Q = containing_cube(Ball((0.5,), 0.1))
    assert Q.lower[0] <= 0.4 and 0.6 < Q.upper[0] and Q.side <= 1.2
    t, Q = containing_cube(Ball((0.0, 0.0), 1.0))
    assert Q.side <= 12 and np.all(Q.lower <= -1) and np.all(Q.upper > 1)


def test_containing_cube_scaling():
    b = Ball((0.3, 0.1), 0.05)
    _, Q1 = containing_cube(b)
    _, Q2 = containing_cube(Ball(b.center, 2 * b.radius))
    assert Q2.side <= 24 * b.radius and Q2.side >= Q1.side


@given(st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)), st.floats(-3, 3))
def test_one_third_trick_property(c, logr):
    r = 10.0 ** logr
    _, Q = containing_cube(Ball(c, r))
    assert np.all(Q.lower <= np.array(c) - r) and np.all(np.array(c) + r < Q.upper)
    assert Q.side <= 12 * r


# dyadic maximal function -------------------------------------------------------------

def test_dyadic_maximal_examples():
    d = PointMeasure.dirac((0.0,))
    assert dyadic_frac_maximal(d, 0.5, (0.0,)) == math.inf
    assert dyadic_frac_maximal(d, 0.0, (0.75,), (0.0,)) == 1.0
    assert dyadic_frac_maximal(PointMeasure.zero(1), 0.0, (0.3,)) == 0.0


def test_dyadic_maximal_alpha_range():
    with pytest.raises(ParameterError):
        dyadic_frac_maximal(PointMeasure.dirac((0, 0)), 2.0, (1, 1))


def test_dyadic_maximal_matches_level_enumeration(rng):
    for _ in range(40):
        n = int(rng.integers(1, 3))
        mu = random_measure(rng, n)
        x = rng.uniform(-3, 3, n)
        alpha = float(rng.uniform(0, n - 0.01))
        t = shifts(n)[int(rng.integers(0, 2 ** n))]
        assert dyadic_frac_maximal(mu, alpha, x, t) == pytest.approx(
            brute_dyadic(mu, alpha, x, t), rel=1e-12)


# stopping cubes and Hausdorff content ---------------------------------------------------

def test_stopping_cubes_single_atom():
    cubes = stopping_cubes(PointMeasure.dirac((0.0,)), 0.0, 1.0, (0.0,))
    assert len(cubes) == 1
    Q = cubes[0]
    assert Q.k == -1 and Q.lower[0] == 0.0 and Q.side == 0.5


def test_stopping_cubes_empty_for_zero_measure():
    assert stopping_cubes(PointMeasure.zero(1), 0.5, 1.0) == []


def test_stopping_cubes_shrink_for_huge_lambda():
    # atoms make the dyadic sup infinite, so the family is never empty; it shrinks instead
    mu = PointMeasure([[0.1], [0.9]], [1, 1])
    cubes = stopping_cubes(mu, 0.5, 1e12)
    assert len(cubes) == 2 and all(Q.side < 1e-20 for Q in cubes)


def test_stopping_cubes_two_far_atoms():
    mu = PointMeasure([[0.0], [10.0]], [1, 1])
    cubes = stopping_cubes(mu, 0.0, 0.9, (0.0,))
    assert len(cubes) == 2
    assert cubes[0].contains(np.array([[0.0]]))[0] != cubes[1].contains(np.array([[0.0]]))[0]


def test_hausdorff_examples():
    s, b = hausdorff_content_bound(PointMeasure.dirac((0.0,)), 0.0, 1.0, (0.0,))
    assert s == 0.5 and b == 1.0
    s, _ = hausdorff_content_bound(PointMeasure.dirac((0.0,)), 0.0, 1e9)
    assert s <= 1e-9
    mu = PointMeasure([[0.2, 0.1], [-0.4, 0.3]], [1, 2])
    s2, b2 = hausdorff_content_bound(mu.scaled(2), 0.5, 0.7)
    assert s2 <= b2 == pytest.approx(2 * mu.total_mass / 0.7)


def test_stopping_cubes_partition_superlevel_set(rng):
    for _ in range(10):
        n = int(rng.integers(1, 3))
        mu = random_measure(rng, n, spread=1.0)
        alpha = float(rng.uniform(0, n - 0.1))
        lam = float(rng.uniform(0.2, 3.0))
        t = shifts(n)[-1]
        cubes = stopping_cubes(mu, alpha, lam, t)
        for i, P in enumerate(cubes):
            for Q in cubes[i + 1:]:
                assert not np.all(np.maximum(P.lower, Q.lower) < np.minimum(P.upper, Q.upper))
            assert P.side ** alpha * mu.masses[P.contains(mu.locations)].sum() / P.volume > lam
        pts = rng.uniform(-1.5, 1.5, (200, n))
        for x in pts:
            in_union = any(Q.contains(x[None, :])[0] for Q in cubes)
            assert in_union == (dyadic_frac_maximal(mu, alpha, x, t) > lam)


@given(point_measures(dim=2), st.floats(0.0, 1.9), st.floats(0.05, 20))
def test_hausdorff_bound_property(mu, alpha, lam):
    s, b = hausdorff_content_bound(mu, alpha, lam)
    assert s <= b


# sparse families ----------------------------------------------------------------------

def field_from(values, h=1 / 8):
    return GridField(np.zeros(values.ndim), h, values, "weight")


def test_sparse_family_zero_field_is_empty():
    assert len(sparse_family(field_from(np.zeros((8, 8))), 0.0)) == 0


def test_sparse_family_one_cell():
    v = np.zeros((16, 16))
    v[5, 9] = 1.0
    fam = sparse_family(field_from(v), 0.0)
    M = grid_dyadic_maximal(field_from(v), 0.0)
    assert np.all(M <= fam.dominating_sum() * (1 + 1e-12))
    # every chosen cube is a dyadic ancestor of the cell
    for k, m in fam.cubes:
        assert (5 >> k, 9 >> k) == tuple(m)


def test_sparse_family_constant_on_dyadic_cube():
    v = np.ones((8, 8))
    fam = sparse_family(field_from(v), 0.0)
    assert len(fam) == 1
    np.testing.assert_allclose(grid_dyadic_maximal(field_from(v), 0.0), 1.0)
    np.testing.assert_allclose(fam.values[0], 1.0)


def test_sparse_family_rejects_negative():
    with pytest.raises(ParameterError):
        sparse_family(GridField(np.zeros(2), 0.1, -np.ones((4, 4))), 0.0)


def check_sparse(v, alpha):
    f = field_from(v)
    fam = sparse_family(f, alpha)
    M = grid_dyadic_maximal(f, alpha)
    assert np.all(M <= fam.dominating_sum() * (1 + 1e-12) + 1e-15)
    n = v.ndim
    own = fam.owner()
    for i in range(len(fam)):
        assert fam.major_count(i) >= 0.5 * fam.cell_count(i)
    # disjointness: ownership is a function, and counts agree with the cube bookkeeping
    side = 2 ** fam.top_level
    full = np.zeros((side,) * n, dtype=np.int64)
    for i in range(len(fam)):
        k, m = fam.cubes[i]
        sl = tuple(slice(mi << k, (mi + 1) << k) for mi in m)
        full[sl] += 1
    assert np.all((own >= 0) <= (full[tuple(slice(0, s) for s in v.shape)] >= 1))
    return fam


def test_sparse_domination_random_fields(rng):
    for _ in range(20):
        v = rng.random((24, 24)) ** 4 * (rng.random((24, 24)) < 0.3)
        check_sparse(v, float(rng.choice([0.0, 0.5, 1.0])))


def test_sparse_family_json_shape():
    v = np.zeros((8, 8))
    v[1, 1] = 3.0
    js = sparse_family(field_from(v), 0.0).to_json()
    assert {"t", "k", "m", "cells_of_E_Q"} <= set(js["cubes"][0])


# domination lemma --------------------------------------------------------------------

def test_domination_delta_one_dimension():
    res = dyadic_domination_check(PointMeasure.dirac((0.0,)), 0.0,
                                  np.linspace(0.05, 5, 60)[:, None])
    assert res.max_ratio <= 12.0


def test_domination_zero_measure():
    res = dyadic_domination_check(PointMeasure.zero(2), 0.5, [[0.1, 0.2]])
    assert res.max_ratio == 0.0


def test_domination_random_ten_atoms(rng):
    mu = random_measure(rng, 2, atoms=10)
    pts = rng.uniform(-3, 3, (100, 2))
    a = dyadic_domination_check(mu, 1.0, pts)
    b = dyadic_domination_check(mu, 1.0, pts)
    assert math.isfinite(a.max_ratio) and a.max_ratio == b.max_ratio
    assert a.max_ratio <= a.geometric_bound


def test_domination_excludes_atoms():
    res = dyadic_domination_check(PointMeasure.dirac((0.0, 0.0)), 1.0, [[0, 0], [1, 1]])
    assert res.excluded == [[0.0, 0.0]] and res.ratios.size == 1
