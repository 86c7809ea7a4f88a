"""Shifted dyadic grids, dyadic fractional maximal functions, and CZ constructions.

The grid with shift ``t`` in ``{0, 1/3}^n`` consists of the cubes
``2^k([0,1)^n + m + (-1)^k t)``. For every ball at least one of the ``2^n``
shifted grids has a cube containing it whose side is at most twelve times the
radius.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, UnsupportedInputError
from .measures import Ball, GridField, PointMeasure, _as_point


def shifts(dim: int) -> list:
    """All ``2^n`` shift vectors ``t`` in ``{0, 1/3}^n``."""
    return [tuple(s) for s in itertools.product((0.0, 1.0 / 3.0), repeat=dim)]


def _signed_shift(t, k):
    return np.asarray(t, dtype=float) * (1.0 if k % 2 == 0 else -1.0)


@dataclass(frozen=True)
class DyadicCube:
    t: tuple
    k: int
    m: tuple

    @property
    def dim(self) -> int:
        return len(self.m)

    @property
    def side(self) -> float:
        return math.ldexp(1.0, self.k)

    @property
    def lower(self) -> np.ndarray:
        return self.side * (np.asarray(self.m, dtype=float) + _signed_shift(self.t, self.k))

    @property
    def upper(self) -> np.ndarray:
        return self.lower + self.side

    @property
    def volume(self) -> float:
        return self.side ** self.dim

    @classmethod
    def containing(cls, x, k: int, t) -> "DyadicCube":
        p = _as_point(x)
        if not -1000 <= k <= 1000:
            raise UnsupportedInputError(f"dyadic level {k} is outside the float range")
        m = np.floor(p / math.ldexp(1.0, k) - _signed_shift(t, k))
        # Python ints: fine levels overflow int64
        return cls(tuple(float(s) for s in t), int(k), tuple(int(i) for i in m))

    def contains(self, points) -> np.ndarray:
        p = np.atleast_2d(points)
        return np.all((p >= self.lower) & (p < self.upper), axis=1)

    def parent(self) -> "DyadicCube":
        return DyadicCube.containing(self.lower + 0.5 * self.side, self.k + 1, self.t)

    def to_json(self) -> dict:
        return {"t": list(self.t), "k": self.k, "m": list(self.m)}


def _level_indices(points: np.ndarray, k: int, t) -> np.ndarray:
    # kept as floats (exact integers) so that very fine levels cannot overflow
    return np.floor(points / math.ldexp(1.0, k) - _signed_shift(t, k))


def _check_alpha(alpha, dim):
    if not (0 <= alpha < dim):
        raise ParameterError(f"alpha must lie in [0, {dim}), got {alpha}")


def _stable_level(points: np.ndarray) -> int:
    # Above this level the set of points sharing a cube with any given point
    # no longer changes: boundaries of the 1/3-shifted axes sit at distance
    # >= 2^k/3 from the origin, and the unshifted axes keep only the origin.
    radius = float(np.max(np.abs(points))) if points.size else 0.0
    return int(math.ceil(math.log2(3.0 * max(radius, 1e-300)))) + 1


def _merge_levels(x: np.ndarray, atoms: np.ndarray, t, k_lo: int, k_hi: int) -> np.ndarray:
    """Smallest level in ``[k_lo, k_hi]`` where each atom shares a cube with ``x``
    (``k_hi + 1`` if never)."""
    out = np.full(atoms.shape[0], k_hi + 1, dtype=np.int64)
    for k in range(k_hi, k_lo - 1, -1):
        same = np.all(_level_indices(atoms, k, t) == _level_indices(x[None, :], k, t), axis=1)
        out[same] = k
    return out


def containing_cube(ball: Ball) -> tuple:
    """A shift ``t`` and a cube of ``D_t`` containing ``ball`` with side at most ``12 r``.

    The smallest admissible level over all shifts is returned.
    """
    c, r = ball.center, ball.radius
    k = int(math.floor(math.log2(2.0 * r)))
    for _ in range(64):
        best = None
        for t in shifts(ball.dim):
            Q = DyadicCube.containing(c, k, t)
            lo_ok = np.all(Q.lower <= c - r)
            hi_ok = np.all(c + r < Q.upper) if ball.closed else np.all(c + r <= Q.upper)
            if lo_ok and hi_ok:
                best = (Q.t, Q)
                break
        if best is not None:
            return best
        k += 1
    raise RuntimeError("no containing cube found")  # pragma: no cover


def dyadic_frac_maximal(mu: PointMeasure, alpha: float, x, t=None) -> float:
    """Exact ``sup_{Q in D_t, Q ∋ x} l(Q)^alpha mu(Q)/|Q|`` for atomic ``mu``."""
    n = mu.dim
    _check_alpha(alpha, n)
    x = _as_point(x, n)
    t = tuple(shifts(n)[0] if t is None else t)
    keep = mu.masses > 0
    atoms, masses = mu.locations[keep], mu.masses[keep]
    if atoms.shape[0] == 0:
        return 0.0
    d = np.max(np.abs(atoms - x), axis=1)
    if np.any(d == 0):
        return math.inf
    k_lo = int(math.floor(math.log2(d.min()))) - 1
    k_hi = max(_stable_level(np.vstack([atoms, x])), k_lo)
    levels = _merge_levels(x, atoms, t, k_lo, k_hi)
    inside = levels <= k_hi
    if not np.any(inside):
        return 0.0
    order = np.argsort(levels[inside], kind="stable")
    lv, ms = levels[inside][order], np.cumsum(masses[inside][order])
    # cumulative mass at each distinct merge level
    last = np.r_[lv[1:] != lv[:-1], True]
    lv, ms = lv[last], ms[last]
    vals = np.exp2(lv * (alpha - n)) * ms
    return float(vals.max())


def _last_level_above(mass: float, lam: float, alpha: float, n: int) -> int:
    """Largest ``k`` with ``2^{k(alpha-n)} mass > lam``."""
    bound = math.log2(mass / lam) / (n - alpha)
    return int(math.ceil(bound)) - 1


def stopping_cubes(mu: PointMeasure, alpha: float, lam: float, t=None) -> list:
    """Maximal cubes of ``D_t`` with ``l(Q)^alpha mu(Q)/|Q| > lam``."""
    n = mu.dim
    _check_alpha(alpha, n)
    if not lam > 0:
        raise ParameterError("lambda must be positive")
    if not math.isfinite(mu.total_mass):
        raise UnsupportedInputError("measure must have finite total mass")
    t = tuple(shifts(n)[0] if t is None else t)
    keep = mu.masses > 0
    atoms, masses = mu.locations[keep], mu.masses[keep]
    N = atoms.shape[0]
    if N == 0:
        return []
    k_hi = _stable_level(atoms)
    if N > 1:
        diff = np.max(np.abs(atoms[:, None, :] - atoms[None, :, :]), axis=2)
        diff[diff == 0] = np.inf
        sep = diff.min()
        k_lo = min(k_hi, int(math.floor(math.log2(sep))) - 1) if math.isfinite(sep) else k_hi
    else:
        k_lo = k_hi
    # cube mass at each level for each atom
    K = np.arange(k_lo, k_hi + 1)
    mass_at = np.empty((N, K.size))
    for j, k in enumerate(K):
        idx = _level_indices(atoms, int(k), t)
        _, inv = np.unique(idx, axis=0, return_inverse=True)
        inv = inv.reshape(-1)
        mass_at[:, j] = np.bincount(inv, weights=masses)[inv]
    with np.errstate(over="ignore"):
        vals = np.exp2(K * (alpha - n))[None, :] * mass_at
    found = {}
    for i in range(N):
        above = np.nonzero(vals[i] > lam)[0]
        if above.size and above.max() < K.size - 1:
            k = int(K[above.max()])
        elif above.size:
            # the cluster is frozen above k_hi: 2^{k(alpha-n)} m > lam
            k = max(_last_level_above(mass_at[i, -1], lam, alpha, n), k_hi)
        else:
            # below k_lo the atom is alone
            k = min(_last_level_above(masses[i], lam, alpha, n), k_lo - 1)
        Q = DyadicCube.containing(atoms[i], k, t)
        found[(Q.k, Q.m)] = Q
    cubes = sorted(found.values(), key=lambda Q: (Q.k, Q.m))
    return cubes


def hausdorff_content_bound(mu: PointMeasure, alpha: float, lam: float, t=None) -> tuple:
    """``(sum_j l(Q_j)^{n-alpha}, mu(R^n)/lam)`` over the stopping cubes at ``lam``."""
    cubes = stopping_cubes(mu, alpha, lam, t)
    total = math.fsum(Q.side ** (mu.dim - alpha) for Q in cubes)
    return total, mu.total_mass / lam


# Sparse families on the grid-aligned dyadic lattice ---------------------


@dataclass
class SparseFamily:
    """Stopping cubes on the dyadic lattice of a grid, with major subsets.

    Cubes are addressed in cell units: level ``k`` means side ``2^k`` cells and
    ``m`` is the block index, anchored at the grid origin. ``E_Q`` is ``Q``
    minus its stopping children, so the sets are disjoint by construction.
    """

    cubes: list
    children: list
    values: np.ndarray
    constant: float
    h: float
    origin: np.ndarray
    grid_shape: tuple
    top_level: int
    alpha: float

    def __len__(self):
        return len(self.cubes)

    def cell_count(self, i: int) -> int:
        n = len(self.grid_shape)
        return 2 ** (self.cubes[i][0] * n)

    def major_count(self, i: int) -> int:
        n = len(self.grid_shape)
        return self.cell_count(i) - sum(2 ** (self.cubes[c][0] * n) for c in self.children[i])

    def owner(self) -> np.ndarray:
        """Index of the cube whose major subset holds each grid cell (-1 if none)."""
        n = len(self.grid_shape)
        side = 2 ** self.top_level
        own = np.full((side,) * n, -1, dtype=np.int64)
        for i in np.argsort([c[0] for c in self.cubes])[::-1]:
            k, m = self.cubes[i]
            sl = tuple(slice(mi << k, (mi + 1) << k) for mi in m)
            own[sl] = i
        return own[tuple(slice(0, s) for s in self.grid_shape)]

    def major_cells(self, i: int) -> np.ndarray:
        """Grid-cell indices of ``E_Q`` that lie inside the grid."""
        return np.argwhere(self.owner() == i)

    def dominating_sum(self) -> np.ndarray:
        """``c * sum_Q l(Q)^alpha <f>_Q 1_{E_Q}`` at every grid cell."""
        own = self.owner()
        vals = np.where(own >= 0, self.values[np.maximum(own, 0)], 0.0)
        return self.constant * vals

    def to_json(self) -> dict:
        own = self.owner()
        cells = {i: [] for i in range(len(self.cubes))}
        for idx in np.argwhere(own >= 0):
            cells[int(own[tuple(idx)])].append([int(v) for v in idx])
        return {
            "h": self.h, "origin": self.origin.tolist(), "alpha": self.alpha,
            "constant": self.constant,
            "cubes": [{"t": [0.0] * len(m), "k": k, "m": list(m),
                       "value": float(self.values[i]), "cells_of_E_Q": cells[i]}
                      for i, (k, m) in enumerate(self.cubes)],
        }


def _block_sums(values: np.ndarray, top: int) -> list:
    """Sums over aligned blocks of side ``2^j`` cells, ``j = 0..top``."""
    n = values.ndim
    side = 2 ** top
    pad = [(0, side - s) for s in values.shape]
    a = np.pad(values, pad)
    out = [a]
    for _ in range(top):
        s = a.shape[0] // 2
        a = a.reshape(sum(((s, 2) for _ in range(n)), ())).sum(axis=tuple(range(1, 2 * n, 2)))
        out.append(a)
    return out


def grid_dyadic_levels(f: GridField, alpha: float) -> tuple:
    """Per-level arrays of ``l(Q)^alpha <f>_Q`` on the grid-aligned dyadic lattice."""
    n = f.dim
    top = int(math.ceil(math.log2(max(f.shape)))) if max(f.shape) > 1 else 0
    sums = _block_sums(np.asarray(f.values, dtype=float), top)
    vals = []
    for j, s in enumerate(sums):
        side = math.ldexp(f.h, j)
        vals.append(side ** alpha * s * f.cell_volume / side ** n)
    return vals, top


def grid_dyadic_maximal(f: GridField, alpha: float) -> np.ndarray:
    """Dyadic fractional maximal function at every cell center of ``f``."""
    vals, top = grid_dyadic_levels(f, alpha)
    n = f.dim
    out = np.zeros(f.shape)
    mesh = np.indices(f.shape)
    for j, v in enumerate(vals):
        out = np.maximum(out, v[tuple(mesh[i] >> j for i in range(n))])
    return out


def sparse_family(f: GridField, alpha: float) -> SparseFamily:
    """Calderón–Zygmund sparse family for ``f >= 0`` on the grid's dyadic lattice.

    A cube is a stopping child of ``Q`` when it is maximal with
    ``l^alpha <f> > 2^{n+1} l(Q)^alpha <f>_Q``.
    """
    n = f.dim
    _check_alpha(alpha, n)
    if np.any(f.values < 0):
        raise ParameterError("sparse_family needs a nonnegative field")
    vals, top = grid_dyadic_levels(f, alpha)
    factor = 2.0 ** (n + 1)
    cubes, children, values = [], [], []
    if vals[top].max() <= 0:
        return SparseFamily([], [], np.zeros(0), factor, f.h, f.origin, f.shape, top, alpha)

    root = (top, (0,) * n)
    stack = [(root, -1)]
    while stack:
        (k, m), parent = stack.pop()
        idx = len(cubes)
        cubes.append((k, m))
        children.append([])
        a_Q = float(vals[k][m])
        values.append(a_Q)
        if parent >= 0:
            children[parent].append(idx)
        thr = factor * a_Q
        taken = None
        found = []
        for j in range(k - 1, -1, -1):
            w = 2 ** (k - j)
            sl = tuple(slice(mi * w, (mi + 1) * w) for mi in m)
            block = vals[j][sl]
            cand = block > thr
            if taken is not None:
                # cells of level j inside an already chosen coarser child
                taken = _upsample(taken, n)
                cand &= ~taken
            else:
                taken = np.zeros(block.shape, dtype=bool)
            for loc in np.argwhere(cand):
                found.append((j, tuple(int(mi * w + li) for mi, li in zip(m, loc))))
            taken = taken | cand
        for child in reversed(found):
            stack.append((child, idx))
    return SparseFamily(cubes, children, np.array(values), factor, f.h, f.origin,
                        f.shape, top, alpha)


def _upsample(a: np.ndarray, n: int) -> np.ndarray:
    for ax in range(n):
        a = np.repeat(a, 2, axis=ax)
    return a


@dataclass
class DominationResult:
    max_ratio: float
    ratios: np.ndarray
    excluded: list = field(default_factory=list)
    geometric_bound: float = math.nan


def dyadic_domination_check(mu: PointMeasure, alpha: float, samples) -> DominationResult:
    """Ratios ``M_alpha mu(x) / sum_t M_alpha^{D_t} mu(x)`` at the sample points.

    Points carrying an atom are excluded and listed. ``0/0`` counts as ``0``.
    The geometric bound ``12^{n-alpha}/v_n`` follows from the 1/3-trick.
    """
    from .operators import KernelConstants, frac_maximal_point

    n = mu.dim
    _check_alpha(alpha, n)
    pts = np.atleast_2d(np.asarray(samples, dtype=float))
    ratios, excluded = [], []
    for x in pts:
        m = frac_maximal_point(mu, alpha, x)
        if math.isinf(m):
            excluded.append(x.tolist())
            continue
        d = sum(dyadic_frac_maximal(mu, alpha, x, t) for t in shifts(n))
        ratios.append(0.0 if m == 0 and d == 0 else m / d)
    ratios = np.asarray(ratios)
    bound = 12.0 ** (n - alpha) / KernelConstants(n).v_n
    return DominationResult(float(ratios.max()) if ratios.size else 0.0, ratios, excluded, bound)
