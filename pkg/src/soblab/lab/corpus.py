"""The fixed, versioned test corpus: functions, measures, weights and regions.

Every function is supported strictly inside ``[-2, 2]^n`` so that sampling
with one padding layer gives a compact :class:`GridField`. Atoms sit on the
lattice ``(1/8) Z^n``, which consists of cell corners for every grid spacing
``h = 2^-k``, ``k >= 3``; grid maximal functions are therefore never
evaluated on an atom.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import ConfigurationError
from ..geometry import PolygonSet
from ..measures import GridField, LebesgueMeasure, PointMeasure

EXTENT = 2.0
CORPUS_VERSION = "1"


def bump(center, radius: float, amplitude: float = 1.0) -> Callable:
    """``amplitude * exp(1 - 1/(1 - |x-c|^2/r^2))`` inside the ball, zero outside."""
    c = np.asarray(center, float)

    def fn(X):
        s = np.sum((X - c) ** 2, axis=-1) / radius ** 2
        out = np.zeros(s.shape)
        inside = s < 1
        out[inside] = amplitude * np.exp(1.0 - 1.0 / (1.0 - s[inside]))
        return out
    return fn


def elliptic_bump(axes, amplitude: float = 1.0) -> Callable:
    a = np.asarray(axes, float)

    def fn(X):
        s = np.sum((X / a) ** 2, axis=-1)
        out = np.zeros(s.shape)
        inside = s < 1
        out[inside] = amplitude * np.exp(1.0 - 1.0 / (1.0 - s[inside]))
        return out
    return fn


def cone(center, radius: float, plateau: float = 0.0) -> Callable:
    """``min(1, (r - |x-c|) / (r - plateau))^+``: a cone, flat on ``B_plateau(c)``."""
    c = np.asarray(center, float)

    def fn(X):
        d = np.linalg.norm(X - c, axis=-1)
        return np.clip((radius - d) / (radius - plateau), 0.0, 1.0)
    return fn


def two_bumps(first, second) -> Callable:
    f, g = bump(*first), bump(*second)
    return lambda X: f(X) + g(X)


@dataclass(frozen=True)
class CorpusFunction:
    name: str
    kind: str          # "bump", "cone" or "two-bump"
    fn: Callable

    @property
    def smooth(self) -> bool:
        return self.kind != "cone"

    def sample(self, h: float, n: int = 2, extent: float = EXTENT) -> GridField:
        return GridField.sample(self.fn, extent, h, dim=n)


def _functions_2d() -> list:
    return [
        CorpusFunction("bump0", "bump", bump((0.0, 0.0), 1.0)),
        CorpusFunction("bump1", "bump", bump((0.3, -0.2), 0.7)),
        CorpusFunction("bump2", "bump", bump((-0.4, 0.3), 1.3)),
        CorpusFunction("bump3", "bump", bump((0.5, 0.5), 0.5, 2.0)),
        CorpusFunction("bump4", "bump", elliptic_bump((1.5, 0.8))),
        CorpusFunction("cone0", "cone", cone((0.0, 0.0), 1.0)),
        CorpusFunction("cone1", "cone", cone((-0.3, 0.2), 1.5)),
        CorpusFunction("cone2", "cone", cone((0.0, 0.0), 1.2, plateau=0.6)),
        CorpusFunction("twobump0", "two-bump", two_bumps(((-0.8, 0.0), 0.6), ((0.8, 0.0), 0.6))),
        CorpusFunction("twobump1", "two-bump",
                       two_bumps(((-0.6, -0.6), 0.5), ((0.7, 0.5), 0.8, 0.5))),
    ]


def _functions_1d() -> list:
    return [
        CorpusFunction("bump0", "bump", bump((0.0,), 1.0)),
        CorpusFunction("bump1", "bump", bump((0.3,), 0.7)),
        CorpusFunction("bump2", "bump", bump((-0.4,), 1.3)),
        CorpusFunction("bump3", "bump", bump((0.5,), 0.5, 2.0)),
        CorpusFunction("bump4", "bump", bump((-0.2,), 1.6, 0.5)),
        CorpusFunction("cone0", "cone", cone((0.0,), 1.0)),
        CorpusFunction("cone1", "cone", cone((-0.3,), 1.5)),
        CorpusFunction("cone2", "cone", cone((0.0,), 1.2, plateau=0.6)),
        CorpusFunction("twobump0", "two-bump", two_bumps(((-0.8,), 0.6), ((0.8,), 0.6))),
        CorpusFunction("twobump1", "two-bump", two_bumps(((-0.6,), 0.5), ((0.7,), 0.8, 0.5))),
    ]


def standard_functions(n: int = 2) -> list:
    """5 bumps, 3 cones and 2 two-bump functions."""
    if n == 2:
        return _functions_2d()
    if n == 1:
        return _functions_1d()
    raise ConfigurationError(f"the corpus is defined for n = 1, 2; got {n}")


# Measures and weights ------------------------------------------------------


@dataclass(frozen=True)
class CorpusMeasure:
    """A named measure; grid densities are sampled on demand at spacing ``h``."""

    name: str
    kind: str           # "atoms", "density" or "lebesgue"
    atoms: PointMeasure | None = None
    density: Callable | None = None

    def build(self, h: float, n: int = 2, extent: float = EXTENT):
        if self.kind == "atoms":
            return self.atoms
        if self.kind == "lebesgue":
            return LebesgueMeasure(n)
        return GridField.sample(self.density, extent, h, dim=n, role="density")


def disk_density(radius: float = 1.0) -> Callable:
    return lambda X: (np.linalg.norm(X, axis=-1) < radius).astype(float)


def annulus_power_density(inner: float, outer: float, power: float) -> Callable:
    """``|x|^{-power}`` on ``inner < |x| < outer``."""
    def fn(X):
        r = np.linalg.norm(X, axis=-1)
        out = np.zeros(r.shape)
        keep = (r > inner) & (r < outer)
        out[keep] = r[keep] ** -power
        return out
    return fn


def standard_measures(n: int = 2) -> list:
    """delta, two atoms, uniform disk density, ``|x|^{-1}`` annulus density."""
    if n == 2:
        delta = PointMeasure.dirac((0.25, 0.125))
        pair = PointMeasure([[-0.5, 0.25], [0.5, -0.25]], [1.0, 0.5])
    elif n == 1:
        delta = PointMeasure.dirac((0.25,))
        pair = PointMeasure([[-0.5], [0.5]], [1.0, 0.5])
    else:
        raise ConfigurationError(f"the corpus is defined for n = 1, 2; got {n}")
    return [
        CorpusMeasure("delta", "atoms", atoms=delta),
        CorpusMeasure("two_atom", "atoms", atoms=pair),
        CorpusMeasure("disk", "density", density=disk_density(1.0)),
        CorpusMeasure("annulus", "density",
                      density=annulus_power_density(0.25, 1.5, 1.0 if n > 1 else 0.5)),
    ]


def positive_weights(n: int = 2) -> list:
    """Weights that are positive at every cell center (for ``w^{1-p}`` terms)."""
    return [
        CorpusMeasure("unit", "density", density=lambda X: np.ones(X.shape[:-1])),
        CorpusMeasure("power_half", "density",
                      density=lambda X: np.linalg.norm(X, axis=-1) ** 0.5),
        CorpusMeasure("inverse_quadratic", "density",
                      density=lambda X: 1.0 / (1.0 + np.sum(X ** 2, axis=-1))),
    ]


def random_atomic_measures(count: int, seed: int = 0, n: int = 2,
                           max_atoms: int = 5) -> list:
    """Seeded atomic measures on the ``1/8`` lattice inside ``[-1.5, 1.5]^n``."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        k = int(rng.integers(1, max_atoms + 1))
        loc = rng.integers(-12, 13, size=(k, n)) / 8.0
        loc = np.unique(loc, axis=0)
        mass = rng.uniform(0.1, 2.0, size=loc.shape[0])
        out.append(CorpusMeasure(f"random{seed}_{i}", "atoms", atoms=PointMeasure(loc, mass)))
    return out


def standard_regions() -> list:
    """Polygons for the isoperimetric cases (plane only)."""
    return [
        ("disk256", PolygonSet.regular(256, 1.0)),
        ("ellipse", PolygonSet.ellipse(128, 1.2, 0.6)),
        ("square", PolygonSet.rectangle((-0.7, -0.7), (0.7, 0.7))),
    ]


@dataclass
class Corpus:
    """Functions, measures, positive weights and regions of one suite run."""

    n: int
    functions: list
    measures: list
    weights: list
    regions: list
    extent: float = EXTENT

    def function(self, name: str) -> CorpusFunction:
        for f in self.functions:
            if f.name == name:
                return f
        raise ConfigurationError(f"unknown corpus function {name!r}")

    def measure(self, name: str) -> CorpusMeasure:
        for m in self.measures + self.weights:
            if m.name == name:
                return m
        raise ConfigurationError(f"unknown corpus measure {name!r}")


def standard_corpus(n: int = 2, random_measures: int = 0, seed: int = 0) -> Corpus:
    measures = standard_measures(n)
    if random_measures:
        measures = measures + random_atomic_measures(random_measures, seed, n)
    regions = standard_regions() if n == 2 else []
    return Corpus(n, standard_functions(n), measures, positive_weights(n), regions)


def disk_cone(delta: float) -> Callable:
    """``min(1, (1-|x|)/delta)^+``: approximates the unit-disk indicator as ``delta -> 0``."""
    return cone((0.0, 0.0), 1.0, plateau=1.0 - delta)

