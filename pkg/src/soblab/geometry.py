"""Polygonal sets, weighted perimeters, level sets and the coarea identity.

The plane is the main case. A set is a union of closed polygonal loops with
outer boundaries counterclockwise and holes clockwise, so signed areas add up.
Boundary integrals use Gauss-Legendre nodes on edge pieces no longer than a
given length. On the line a set is a finite union of intervals and its
perimeter counts endpoints.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from shapely.geometry import LinearRing, Point, Polygon
from skimage import measure as skmeasure

from . import constants as C
from .errors import ConfigurationError, ParameterError
from .measures import Ball, GridField, LebesgueMeasure, PointMeasure, _as_point
from .operators import KernelConstants, frac_maximal_grid_field, frac_maximal_points


def _signed_area(loop: np.ndarray) -> float:
    x, y = loop[:, 0], loop[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


@dataclass(frozen=True)
class PolygonSet:
    """Union of simple closed polygonal loops in the plane."""

    loops: tuple = ()

    def __post_init__(self):
        clean = []
        for loop in self.loops:
            L = np.asarray(loop, dtype=float)
            if L.ndim != 2 or L.shape[1] != 2:
                raise ConfigurationError("loops must be (k, 2) vertex arrays")
            if len(L) > 1 and np.allclose(L[0], L[-1]):
                L = L[:-1]
            if len(L) < 3:
                continue
            clean.append(L)
        clean = _orient(clean)
        for L in clean:
            L.setflags(write=False)
        object.__setattr__(self, "loops", tuple(clean))

    @classmethod
    def regular(cls, k: int, radius: float = 1.0, center=(0.0, 0.0), phase: float = 0.0):
        """Regular ``k``-gon inscribed in a circle."""
        th = phase + 2 * math.pi * np.arange(k) / k
        c = np.asarray(center, float)
        return cls((c + radius * np.stack([np.cos(th), np.sin(th)], axis=1),))

    @classmethod
    def ellipse(cls, k: int, a: float, b: float, center=(0.0, 0.0), angle: float = 0.0):
        th = 2 * math.pi * np.arange(k) / k
        pts = np.stack([a * np.cos(th), b * np.sin(th)], axis=1)
        rot = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
        return cls((pts @ rot.T + np.asarray(center, float),))

    @classmethod
    def rectangle(cls, lower, upper):
        (x0, y0), (x1, y1) = lower, upper
        return cls((np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], float),))

    @property
    def empty(self) -> bool:
        return len(self.loops) == 0

    def is_simple(self) -> bool:
        return all(LinearRing(L).is_simple for L in self.loops)

    @property
    def area(self) -> float:
        return math.fsum(_signed_area(L) for L in self.loops)

    @property
    def perimeter(self) -> float:
        return math.fsum(float(np.linalg.norm(np.roll(L, -1, axis=0) - L, axis=1).sum())
                         for L in self.loops)

    def edges(self):
        """Iterate ``(a, b)`` vertex pairs of every loop, in loop orientation."""
        for L in self.loops:
            for a, b in zip(L, np.roll(L, -1, axis=0)):
                yield a, b

    def contains(self, points) -> np.ndarray:
        """Even-odd membership of points (boundary points count as outside)."""
        P = np.atleast_2d(np.asarray(points, float))
        inside = np.zeros(len(P), dtype=bool)
        for L in self.loops:
            x0, y0 = L[:, 0], L[:, 1]
            x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
            px, py = P[:, 0:1], P[:, 1:2]
            cross = ((y0 > py) != (y1 > py))
            with np.errstate(divide="ignore", invalid="ignore"):
                xint = x0 + (py - y0) * (x1 - x0) / (y1 - y0)
            inside ^= (np.sum(cross & (px < xint), axis=1) % 2).astype(bool)
        return inside

    def to_json(self) -> dict:
        return {"loops": [L.tolist() for L in self.loops]}

    @classmethod
    def from_json(cls, obj: dict) -> "PolygonSet":
        return cls(tuple(np.asarray(L, float) for L in obj["loops"]))


def _orient(loops: list) -> list:
    """Outer loops counterclockwise, holes (odd nesting depth) clockwise."""
    out = []
    polys = [Polygon(L) for L in loops]
    for i, L in enumerate(loops):
        probe = Point(L[0])
        depth = sum(1 for j, P in enumerate(polys) if j != i and P.contains(probe))
        want_ccw = depth % 2 == 0
        ccw = _signed_area(L) > 0
        out.append(L.copy() if ccw == want_ccw else L[::-1].copy())
    return out


@dataclass(frozen=True)
class IntervalSet:
    """Finite union of disjoint intervals ``[a_i, b_i]`` on the line."""

    intervals: tuple = ()

    @property
    def empty(self) -> bool:
        return len(self.intervals) == 0

    @property
    def area(self) -> float:
        return math.fsum(b - a for a, b in self.intervals)

    @property
    def endpoints(self) -> np.ndarray:
        return np.array([e for ab in self.intervals for e in ab], float)

    @property
    def perimeter(self) -> float:
        return float(len(self.endpoints))


# Boundary quadrature ---------------------------------------------------------


def edge_quadrature(E: PolygonSet, max_piece: float,
                    nodes: int = C.PERIMETER_GAUSS_NODES) -> tuple:
    """Gauss-Legendre nodes and weights along ``dE``, pieces of length ``<= max_piece``."""
    xg, wg = np.polynomial.legendre.leggauss(nodes)
    s, wts = 0.5 * (xg + 1), 0.5 * wg
    pts, ws = [], []
    skipped = 0
    for a, b in E.edges():
        length = float(np.linalg.norm(b - a))
        if length == 0:
            skipped += 1
            continue
        m = max(1, int(math.ceil(length / max_piece)))
        t0 = np.arange(m)[:, None] / m
        tt = (t0 + s[None, :] / m).ravel()
        pts.append(a + tt[:, None] * (b - a))
        ws.append(np.tile(wts * length / m, m))
    if skipped:
        warnings.warn(f"skipped {skipped} zero-length edges", RuntimeWarning, stacklevel=2)
    if not pts:
        return np.zeros((0, 2)), np.zeros(0)
    return np.vstack(pts), np.concatenate(ws)


def grid_interpolator(w: GridField):
    """Linear interpolation of cell-center values; zero outside the grid."""
    return RegularGridInterpolator(w.axes(), w.values, method="linear",
                                   bounds_error=False, fill_value=0.0)


def _weight_callable(w):
    if w is None:
        return lambda P: np.ones(len(P))
    if isinstance(w, GridField):
        return grid_interpolator(w)
    if callable(w):
        return w
    c = float(w)
    return lambda P: np.full(len(P), c)


def weighted_perimeter(E, w=None, max_piece: float | None = None) -> float:
    """``int_{dE} w dH^{n-1}``.

    ``w`` may be ``None`` (unweighted), a constant, a callable on ``(k, 2)``
    point arrays, or a :class:`GridField` read by linear interpolation.
    """
    f = _weight_callable(w)
    if isinstance(E, IntervalSet):
        if E.empty:
            return 0.0
        return math.fsum(np.asarray(f(E.endpoints[:, None]), float))
    if E.empty:
        return 0.0
    if max_piece is None:
        max_piece = w.h if isinstance(w, GridField) else E.perimeter / 4096
    pts, wts = edge_quadrature(E, max_piece)
    return math.fsum(np.asarray(f(pts), float) * wts)


# Level sets -----------------------------------------------------------------


def level_set_polygon(u: GridField, t: float):
    """Boundary of ``{u > t}`` by marching squares with linear interpolation."""
    if not t > 0:
        raise ParameterError("level must be positive")
    if u.dim == 1:
        return _level_intervals(u, t)
    if u.dim != 2:
        raise ConfigurationError("level sets are implemented for n = 1, 2")
    if t >= u.values.max():
        return PolygonSet(())
    vals = np.pad(u.values, 1) if not u.is_compact() else u.values
    off = 1 if not u.is_compact() else 0
    loops = []
    for c in skmeasure.find_contours(vals, t):
        pts = u.origin + (c - off + 0.5) * u.h
        loops.append(pts)
    return PolygonSet(tuple(loops))


def _level_intervals(u: GridField, t: float) -> IntervalSet:
    v = np.pad(u.values, 1)
    x = u.origin[0] + (np.arange(v.size) - 1 + 0.5) * u.h
    above = v > t
    out = []
    start = None
    for i in range(1, v.size):
        if above[i] and not above[i - 1]:
            start = x[i - 1] + (t - v[i - 1]) / (v[i] - v[i - 1]) * u.h
        if not above[i] and above[i - 1]:
            end = x[i - 1] + (t - v[i - 1]) / (v[i] - v[i - 1]) * u.h
            out.append((float(start), float(end)))
    return IntervalSet(tuple(out))


@dataclass
class CoareaResult:
    lhs: float
    rhs: float
    rel_err: float
    levels: int
    inconsistent: bool = False


def coarea_check(u: GridField, w=None, levels: int = C.COAREA_LEVELS) -> CoareaResult:
    """Compare ``int |grad u| w`` with ``int_0^max Per({u > t}, w) dt``.

    Midpoint rule in ``t`` with ``levels`` uniform levels.
    """
    from .operators import gradient

    if np.any(u.values < 0):
        raise ParameterError("coarea_check expects u >= 0")
    top = float(u.values.max())
    if top <= 0:
        return CoareaResult(0.0, 0.0, 0.0, levels)
    g = np.linalg.norm(gradient(u), axis=0)
    if w is None:
        wv = 1.0
    elif isinstance(w, GridField):
        wv = w.values
    else:
        wv = np.asarray(w(u.mesh()), float)
    lhs = math.fsum((g * wv).ravel()) * u.cell_volume
    dt = top / levels
    ts = (np.arange(levels) + 0.5) * dt
    wf = w if w is not None else None
    rhs = math.fsum(weighted_perimeter(level_set_polygon(u, float(t)), wf, max_piece=u.h)
                    for t in ts) * dt
    if lhs == 0:
        return CoareaResult(lhs, rhs, 0.0 if rhs == 0 else math.inf, levels, rhs != 0)
    return CoareaResult(lhs, rhs, abs(lhs - rhs) / lhs, levels)


# Disk intersections -----------------------------------------------------------


def _segment_disk_params(a, b, c, r):
    """Parameters ``0 <= s0 <= s1 <= 1`` of the part of ``[a, b]`` inside the disk."""
    d = b - a
    f = a - c
    A = float(d @ d)
    B = 2 * float(f @ d)
    Cc = float(f @ f) - r * r
    disc = B * B - 4 * A * Cc
    if A == 0 or disc <= 0:
        return None
    sq = math.sqrt(disc)
    s0, s1 = (-B - sq) / (2 * A), (-B + sq) / (2 * A)
    s0, s1 = max(s0, 0.0), min(s1, 1.0)
    if s1 <= s0:
        return None
    return s0, s1


def _triangle_disk_area(a, b, r):
    """Signed area of the triangle (0, a, b) intersected with the disk of radius ``r``."""
    def sector(p, q):
        ang = math.atan2(p[0] * q[1] - p[1] * q[0], p[0] * q[0] + p[1] * q[1])
        return 0.5 * r * r * ang

    def tri(p, q):
        return 0.5 * (p[0] * q[1] - p[1] * q[0])

    seg = _segment_disk_params(a, b, np.zeros(2), r)
    if seg is None:
        return sector(a, b)
    s0, s1 = seg
    p0, p1 = a + s0 * (b - a), a + s1 * (b - a)
    return sector(a, p0) + tri(p0, p1) + sector(p1, b)


def disk_intersection_area(E: PolygonSet, ball: Ball) -> float:
    """Exact area of ``E`` intersected with a disk."""
    c, r = ball.center, ball.radius
    return math.fsum(_triangle_disk_area(a - c, b - c, r) for a, b in E.edges())


def boundary_length_in_disk(E: PolygonSet, ball: Ball) -> float:
    total = []
    for a, b in E.edges():
        seg = _segment_disk_params(a, b, ball.center, ball.radius)
        if seg is not None:
            total.append((seg[1] - seg[0]) * float(np.linalg.norm(b - a)))
    return math.fsum(total)


@dataclass
class RelIsoResult:
    lhs: float
    rhs: float
    ratio: float
    violation: bool = False


def relative_iso_check(E: PolygonSet, ball: Ball) -> RelIsoResult:
    """``min(|B ∩ E|, |B \\ E|)^{1/2}`` against the length of ``dE`` inside ``B``."""
    if ball.dim != 2:
        raise ConfigurationError("relative_iso_check is implemented for n = 2")
    disk = math.pi * ball.radius ** 2
    inside = min(max(disk_intersection_area(E, ball), 0.0), disk)
    small = min(inside, disk - inside)
    # roundoff when B lies inside or outside E
    lhs = 0.0 if small <= 1e-12 * disk else small ** 0.5
    rhs = boundary_length_in_disk(E, ball)
    if rhs == 0:
        return RelIsoResult(lhs, 0.0, 0.0 if lhs < 1e-12 else math.inf, lhs >= 1e-12)
    return RelIsoResult(lhs, rhs, lhs / rhs)


# Isoperimetric ratio ---------------------------------------------------------


@dataclass
class IsoResult:
    ratio: float
    mass: float
    perimeter: float
    perturbed_nodes: int = 0


def isoperimetric_ratio(mu, E: PolygonSet, alpha: float, q: float,
                        max_piece: float | None = None) -> IsoResult:
    """``mu(E)^{1/q} / int_{dE} (M_alpha mu)^{1/q} dH^1`` in the plane.

    ``mu`` is a :class:`PointMeasure` (exact maximal function at the nodes),
    :class:`LebesgueMeasure` (``M_0 L = 1``), or a density :class:`GridField`.
    """
    n = 2
    if not 1 <= q <= n / (n - 1):
        raise ParameterError(f"q must lie in [1, {n / (n - 1)}]")
    if abs(alpha - (n - q * (n - 1))) > 1e-12:
        raise ParameterError("alpha must equal n - q(n-1)")
    if E.empty:
        return IsoResult(0.0, 0.0, 0.0)
    max_piece = max_piece or E.perimeter / 4096
    pts, wts = edge_quadrature(E, max_piece)
    perturbed = 0
    if isinstance(mu, LebesgueMeasure):
        if alpha != 0:
            raise ParameterError("M_alpha of Lebesgue measure is infinite for alpha > 0")
        mass = E.area
        M = np.ones(len(pts))
    elif isinstance(mu, PointMeasure):
        mass = float(mu.masses[E.contains(mu.locations)].sum()) if len(mu) else 0.0
        if mass == 0:
            return IsoResult(0.0, 0.0, 0.0)
        M = frac_maximal_points(mu, alpha, pts)
        bad = ~np.isfinite(M)
        if np.any(bad):
            perturbed = int(bad.sum())
            normals = _node_normals(E, max_piece)
            pts = pts.copy()
            pts[bad] += normals[bad] * max_piece / 10
            M[bad] = frac_maximal_points(mu, alpha, pts[bad])
    elif isinstance(mu, GridField):
        mass = float(mu.values.ravel()[E.contains(mu.cell_centers())].sum() * mu.cell_volume)
        Mf = mu.with_values(frac_maximal_grid_field(mu, alpha), "weight")
        M = grid_interpolator(Mf)(pts)
    else:
        raise ConfigurationError(f"unsupported measure {type(mu).__name__}")
    per = math.fsum(M ** (1.0 / q) * wts)
    if per == 0:
        return IsoResult(0.0 if mass == 0 else math.inf, mass, per, perturbed)
    return IsoResult(mass ** (1.0 / q) / per, mass, per, perturbed)


def _node_normals(E: PolygonSet, max_piece: float) -> np.ndarray:
    out = []
    for a, b in E.edges():
        length = float(np.linalg.norm(b - a))
        if length == 0:
            continue
        m = max(1, int(math.ceil(length / max_piece)))
        nrm = np.array([b[1] - a[1], a[0] - b[0]]) / length
        out.append(np.tile(nrm, (m * C.PERIMETER_GAUSS_NODES, 1)))
    return np.vstack(out)
