"""Concrete measures: finite atomic measures, sampled densities on grids, Lebesgue.

Two representations cover everything the package evaluates:

* :class:`PointMeasure` -- finitely many atoms, evaluated exactly.
* :class:`GridField` -- values at the cell centers of a uniform grid. Depending
  on ``role`` it is read as a function, a weight, or the density of a measure.

Balls carry an explicit open/closed flag because the supremum defining the
fractional maximal function is attained only in the closed-ball limit.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, ParameterError

ROLES = ("weight", "function", "density")


def _as_point(x, dim=None) -> np.ndarray:
    p = np.atleast_1d(np.asarray(x, dtype=float))
    if p.ndim != 1:
        raise ConfigurationError(f"expected a point, got array of shape {p.shape}")
    if dim is not None and p.shape[0] != dim:
        raise ConfigurationError(f"point has dimension {p.shape[0]}, expected {dim}")
    return p


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float
    closed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "center", _as_point(self.center))
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ParameterError(f"ball radius must be positive and finite, got {self.radius}")

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Membership mask for an ``(N, n)`` array of points."""
        d = np.linalg.norm(np.atleast_2d(points) - self.center, axis=1)
        return d <= self.radius if self.closed else d < self.radius


@dataclass(frozen=True)
class Cube:
    """Half-open axis-parallel cube ``lower + [0, side)^n``."""

    lower: np.ndarray
    side: float

    def __post_init__(self):
        object.__setattr__(self, "lower", _as_point(self.lower))
        if not self.side > 0:
            raise ParameterError(f"cube side must be positive, got {self.side}")

    @classmethod
    def centered(cls, center, half_side: float) -> "Cube":
        c = _as_point(center)
        return cls(c - half_side, 2.0 * half_side)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    @property
    def volume(self) -> float:
        return self.side ** self.dim

    def contains(self, points: np.ndarray) -> np.ndarray:
        p = np.atleast_2d(points)
        return np.all((p >= self.lower) & (p < self.lower + self.side), axis=1)


@dataclass(frozen=True)
class PointMeasure:
    """Finite sum of weighted Dirac masses in R^n, n in {1, 2, 3}."""

    locations: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        loc = np.asarray(self.locations, dtype=float)
        m = np.asarray(self.masses, dtype=float).reshape(-1)
        if loc.ndim == 1:
            loc = loc.reshape(len(m), -1) if len(m) else loc.reshape(0, max(loc.size, 1))
        if loc.shape[0] != m.shape[0]:
            raise ConfigurationError("locations and masses disagree in length")
        if loc.shape[1] not in (1, 2, 3):
            raise ConfigurationError(f"dimension must be 1, 2 or 3, got {loc.shape[1]}")
        if not np.all(np.isfinite(loc)):
            raise ParameterError("atom locations must be finite")
        if np.any(m < 0) or not np.all(np.isfinite(m)):
            raise ParameterError("atom masses must be finite and nonnegative")
        loc.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "locations", loc)
        object.__setattr__(self, "masses", m)

    @classmethod
    def zero(cls, dim: int) -> "PointMeasure":
        return cls(np.zeros((0, dim)), np.zeros(0))

    @classmethod
    def dirac(cls, x, mass: float = 1.0) -> "PointMeasure":
        p = _as_point(x)
        return cls(p.reshape(1, -1), [mass])

    @property
    def dim(self) -> int:
        return self.locations.shape[1]

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    def __len__(self):
        return self.masses.shape[0]

    def __add__(self, other: "PointMeasure") -> "PointMeasure":
        if other.dim != self.dim:
            raise ConfigurationError("cannot add measures of different dimension")
        return PointMeasure(np.vstack([self.locations, other.locations]),
                            np.concatenate([self.masses, other.masses]))

    def scaled(self, c: float) -> "PointMeasure":
        return PointMeasure(self.locations, c * self.masses)


@dataclass(frozen=True)
class LebesgueMeasure:
    """Lebesgue measure on R^n. Only used where closed forms are available."""

    dim: int = 2


@dataclass(frozen=True)
class GridField:
    """Values at the cell centers of a uniform axis-aligned grid.

    ``origin`` is the lower corner of the grid; cell ``i`` has center
    ``origin + (i + 1/2) h``. Values outside the grid are zero. A field is
    *compact* when its outermost layer of cells vanishes.
    """

    origin: np.ndarray
    h: float
    values: np.ndarray
    role: str = "function"

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        org = _as_point(self.origin, vals.ndim)
        if vals.ndim not in (1, 2, 3):
            raise ConfigurationError(f"grid dimension must be 1, 2 or 3, got {vals.ndim}")
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ParameterError(f"grid spacing must be positive, got {self.h}")
        if self.role not in ROLES:
            raise ConfigurationError(f"unknown role {self.role!r}")
        if not np.all(np.isfinite(vals)):
            raise ParameterError("grid values must be finite")
        if self.role != "function" and np.any(vals < 0):
            raise ParameterError(f"a {self.role} must be nonnegative")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "origin", org)
        object.__setattr__(self, "h", float(self.h))

    # construction -----------------------------------------------------

    @classmethod
    def sample(cls, fn: Callable[[np.ndarray], np.ndarray], extent, h: float,
               dim: int = 2, role: str = "function", pad: bool = True) -> "GridField":
        """Sample ``fn`` on the box ``[-extent, extent]^dim`` (or per-axis ``(lo, hi)``).

        ``fn`` receives an array of shape ``(..., dim)``. With ``pad`` a zero
        layer is appended on every side so that the result is compact.
        """
        lo, hi = _box(extent, dim)
        counts = np.maximum(np.rint((hi - lo) / h).astype(int), 1)
        axes = [lo[i] + (np.arange(counts[i]) + 0.5) * h for i in range(dim)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        vals = np.asarray(fn(mesh), dtype=float)
        vals = np.broadcast_to(vals, tuple(counts)).copy()
        origin = lo.copy()
        if pad:
            vals = np.pad(vals, 1)
            origin = origin - h
        return cls(origin, h, vals, role)

    def with_values(self, values, role: str | None = None) -> "GridField":
        return GridField(self.origin, self.h, values, role or self.role)

    # geometry ---------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def shape(self) -> tuple:
        return self.values.shape

    @property
    def cell_volume(self) -> float:
        return self.h ** self.dim

    @property
    def upper(self) -> np.ndarray:
        return self.origin + self.h * np.array(self.shape)

    def axes(self) -> list:
        return [self.origin[i] + (np.arange(self.shape[i]) + 0.5) * self.h
                for i in range(self.dim)]

    def cell_centers(self) -> np.ndarray:
        """All cell centers as an ``(N, n)`` array in C order."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def mesh(self) -> np.ndarray:
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1)

    def is_compact(self) -> bool:
        v = self.values
        for ax in range(v.ndim):
            if np.any(np.take(v, 0, axis=ax)) or np.any(np.take(v, -1, axis=ax)):
                return False
        return True

    def contains_point(self, x) -> bool:
        p = _as_point(x, self.dim)
        return bool(np.all(p >= self.origin) and np.all(p < self.upper))

    def nearest_index(self, x) -> tuple:
        """Index of the cell whose center is nearest to ``x`` (clipped to the grid)."""
        p = _as_point(x, self.dim)
        idx = np.floor((p - self.origin) / self.h).astype(int)
        idx = np.clip(idx, 0, np.array(self.shape) - 1)
        return tuple(int(i) for i in idx)

    def center_of(self, index) -> np.ndarray:
        return self.origin + (np.asarray(index, dtype=float) + 0.5) * self.h

    def snap(self, x) -> np.ndarray:
        """Nearest cell center when ``x`` is inside the grid, else ``x`` itself."""
        if self.contains_point(x):
            return self.center_of(self.nearest_index(x))
        return _as_point(x, self.dim)

    def value_at(self, points: np.ndarray) -> np.ndarray:
        """Nearest-cell lookup; zero outside the grid."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        idx = np.floor((p - self.origin) / self.h).astype(int)
        inside = np.all((idx >= 0) & (idx < np.array(self.shape)), axis=1)
        out = np.zeros(p.shape[0])
        if np.any(inside):
            out[inside] = self.values[tuple(idx[inside].T)]
        return out

    def total(self) -> float:
        return float(self.values.sum() * self.cell_volume)

    def mask_in(self, region) -> np.ndarray:
        """Boolean array of cells whose center lies in ``region`` (Ball or Cube)."""
        return region.contains(self.cell_centers()).reshape(self.shape)


def _box(extent, dim):
    e = np.asarray(extent, dtype=float)
    if e.ndim == 0:
        return -np.full(dim, float(e)), np.full(dim, float(e))
    e = e.reshape(-1, 2) if e.size == 2 * dim else e
    if e.shape == (2,) and dim == 1:
        e = e.reshape(1, 2)
    if e.shape != (dim, 2):
        raise ConfigurationError(f"extent must be a scalar or {dim} (lo, hi) pairs")
    return e[:, 0].copy(), e[:, 1].copy()


def _check_dims(a: int, b: int):
    if a != b:
        raise ConfigurationError(f"dimension mismatch: {a} vs {b}")


def measure_ball(mu: PointMeasure, ball: Ball) -> float:
    """Mass of the atoms inside ``ball`` (open or closed as flagged)."""
    _check_dims(mu.dim, ball.dim)
    if len(mu) == 0:
        return 0.0
    return float(mu.masses[ball.contains(mu.locations)].sum())


def grid_mass_ball(w: GridField, ball: Ball) -> float:
    """Cell-center quadrature of the integral of ``w`` over ``ball``."""
    _check_dims(w.dim, ball.dim)
    if w.role == "function":
        raise ConfigurationError("grid_mass_ball expects a weight or density field")
    lo = np.floor((ball.center - ball.radius - w.origin) / w.h - 0.5).astype(int)
    hi = np.ceil((ball.center + ball.radius - w.origin) / w.h - 0.5).astype(int) + 1
    lo = np.clip(lo, 0, np.array(w.shape))
    hi = np.clip(hi, 0, np.array(w.shape))
    if np.any(hi <= lo):
        return 0.0
    sl = tuple(slice(a, b) for a, b in zip(lo, hi))
    axes = [w.origin[i] + (np.arange(lo[i], hi[i]) + 0.5) * w.h - ball.center[i]
            for i in range(w.dim)]
    r2 = sum(np.meshgrid(*[a ** 2 for a in axes], indexing="ij"))
    inside = r2 <= ball.radius ** 2 if ball.closed else r2 < ball.radius ** 2
    return float(w.values[sl][inside].sum() * w.cell_volume)


def restrict(mu, ball: Ball):
    """The measure (or field) agreeing with ``mu`` inside ``ball`` and zero outside."""
    if isinstance(mu, PointMeasure):
        _check_dims(mu.dim, ball.dim)
        keep = ball.contains(mu.locations) if len(mu) else np.zeros(0, bool)
        return PointMeasure(mu.locations[keep], mu.masses[keep])
    if isinstance(mu, GridField):
        _check_dims(mu.dim, ball.dim)
        return mu.with_values(np.where(mu.mask_in(ball), mu.values, 0.0))
    raise ConfigurationError(f"cannot restrict {type(mu).__name__}")


def complement_restrict(mu: PointMeasure, ball: Ball) -> PointMeasure:
    keep = ~ball.contains(mu.locations) if len(mu) else np.zeros(0, bool)
    return PointMeasure(mu.locations[keep], mu.masses[keep])


def measure_from_json(obj: dict, base_dir: str | Path = ".") -> PointMeasure | GridField:
    """Build a measure from its JSON descriptor.

    ``{"kind": "atoms", "dim": 2, "atoms": [[x, y, mass], ...]}`` or
    ``{"kind": "grid", "origin": [...], "h": 0.01, "shape": [...],
    "values_file": "<little-endian float64 file>"}``.
    """
    if isinstance(obj, (str, Path)):
        obj = json.loads(Path(obj).read_text())
    kind = obj.get("kind")
    if kind == "atoms":
        dim = int(obj["dim"])
        rows = np.asarray(obj.get("atoms", []), dtype=float).reshape(-1, dim + 1)
        return PointMeasure(rows[:, :dim], rows[:, dim])
    if kind == "grid":
        shape = tuple(int(s) for s in obj["shape"])
        path = Path(base_dir) / obj["values_file"]
        vals = np.fromfile(path, dtype="<f8")
        if vals.size != math.prod(shape):
            raise ConfigurationError(
                f"{path} holds {vals.size} values, shape {shape} needs {math.prod(shape)}")
        return GridField(obj["origin"], float(obj["h"]), vals.reshape(shape),
                         obj.get("role", "density"))
    raise ConfigurationError(f"unknown measure kind {kind!r}")


def measure_to_json(mu: PointMeasure) -> dict:
    rows = np.hstack([mu.locations, mu.masses[:, None]])
    return {"kind": "atoms", "dim": mu.dim, "atoms": rows.tolist()}
