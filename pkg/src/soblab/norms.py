"""Lebesgue, Lorentz and Orlicz functionals, Young functions, bump conditions.

Lorentz norms use the normalization
``||f||_{L^{r,s}}^s = r int_0^inf t^{s-1} lambda_f(t)^{s/r} dt``
which is evaluated exactly for simple functions (every grid-sampled function is
one). Orlicz averages are Luxemburg functionals solved by root finding in
``log lambda``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import brentq

from . import constants as C
from .errors import ConfigurationError, ParameterError, UnsupportedInputError
from .measures import Cube, GridField, PointMeasure, _as_point
from .operators import KernelConstants, riesz_potential_field


# Young functions ----------------------------------------------------------


@dataclass(frozen=True)
class YoungFunction:
    """``Psi(t) = t^a log(e + t)^b``.

    ``b`` may be negative when ``a > 1`` and ``a + b > 0``; such functions stand
    in for associates like ``t^{a'} / log(e+t)^c``. They remain increasing.
    """

    a: float
    b: float = 0.0

    def __post_init__(self):
        if not self.a >= 1:
            raise ParameterError(f"Young exponent a must be >= 1, got {self.a}")
        if self.b < 0 and not (self.a > 1 and self.a + self.b > 0):
            raise ParameterError("negative log exponent needs a > 1 and a + b > 0")

    @classmethod
    def from_json(cls, obj: dict) -> "YoungFunction":
        extra = set(obj) - {"a", "b"}
        if extra:
            raise ConfigurationError(f"unknown Young function keys {sorted(extra)}")
        return cls(float(obj["a"]), float(obj.get("b", 0.0)))

    def to_json(self) -> dict:
        return {"a": self.a, "b": self.b}

    @property
    def is_power(self) -> bool:
        return self.b == 0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            out = t ** self.a * np.log(math.e + t) ** self.b
        return np.where(t > 0, out, 0.0)

    def log_value(self, t):
        """``log Psi(t)`` for ``t > 0``, safe for huge arguments."""
        t = np.asarray(t, dtype=float)
        return self.a * np.log(t) + self.b * np.log(np.log(math.e + t))

    def inverse(self, y):
        """Numeric inverse by Brent's method in ``log t``."""
        y = np.asarray(y, dtype=float)
        flat = np.atleast_1d(y).ravel()
        out = np.zeros_like(flat)
        for i, yi in enumerate(flat):
            if yi <= 0:
                continue
            target = math.log(yi)
            g = lambda u: float(self.log_value(math.exp(u))) - target
            lo, hi = target / self.a - 1.0, target / self.a + 1.0
            while g(lo) > 0:
                lo -= 2.0 * (1 + abs(lo))
            while g(hi) < 0:
                hi += 2.0 * (1 + abs(hi))
            u = brentq(g, lo, hi, xtol=C.YOUNG_INVERSE_XTOL, rtol=C.YOUNG_INVERSE_RTOL)
            out[i] = math.exp(u)
        return out.reshape(y.shape) if y.ndim else float(out[0])


def young_associate(Psi: YoungFunction, t, iterations: int = C.GOLDEN_ITERATIONS):
    """``sup_{s>0} (s t - Psi(s))`` by golden-section search in ``log s``.

    Vectorized over ``t``. Returns ``inf`` where the supremum is unbounded
    (only possible for ``Psi(t) = t`` with ``t > 1``).
    """
    t = np.asarray(t, dtype=float)
    flat = np.atleast_1d(t).ravel().astype(float)
    out = np.zeros_like(flat)
    pos = flat > 0
    if Psi.a == 1 and Psi.b == 0:
        out = np.where(flat > 1, np.inf, 0.0)
        return out.reshape(t.shape) if t.ndim else float(out[0])
    tt = flat[pos]
    if tt.size:
        # The maximizer solves Psi'(s) = t, so log s* is near log(t)/(a-1).
        guess = np.log(tt) / max(Psi.a - 1.0, 1e-3)
        lo = np.minimum(guess, 600.0) - 60.0
        hi = np.minimum(guess, 600.0) + 60.0
        obj = lambda u: np.exp(u) * tt - Psi(np.exp(u))
        invphi = (math.sqrt(5) - 1) / 2
        for _ in range(iterations):
            c = hi - invphi * (hi - lo)
            d = lo + invphi * (hi - lo)
            left = obj(c) > obj(d)
            hi = np.where(left, d, hi)
            lo = np.where(left, lo, c)
            if np.all(hi - lo < 1e-13 * np.maximum(1, np.abs(hi))):
                break
        u = 0.5 * (lo + hi)
        out[pos] = np.maximum(obj(u), 0.0)
    return out.reshape(t.shape) if t.ndim else float(out[0])


class AssociateFunction:
    """Callable numeric associate ``Psi_bar`` of a Young function."""

    def __init__(self, Psi: YoungFunction):
        self.Psi = Psi

    def __call__(self, t):
        return young_associate(self.Psi, t)


# Experiment parameters ------------------------------------------------------


@dataclass(frozen=True)
class ExperimentParams:
    n: int = 2
    p: float = 2.0
    q: float = 2.0
    alpha: float = 0.0
    beta: float = 0.0
    s: float = 0.5
    epsilon: float = 0.0
    lam: float = 0.0

    @property
    def p_prime(self) -> float:
        return math.inf if self.p == 1 else self.p / (self.p - 1)

    @property
    def q_prime(self) -> float:
        return math.inf if self.q == 1 else self.q / (self.q - 1)

    @property
    def p_star(self) -> float:
        if self.p >= self.n:
            raise ParameterError("p* needs p < n")
        return self.n * self.p / (self.n - self.p)

    @property
    def n_prime(self) -> float:
        return self.n / (self.n - 1) if self.n > 1 else math.inf

    def validate(self, *, p_gt_one=False, q_ge_p=False, alpha_range=True, s_range=False):
        if self.n not in (1, 2, 3):
            raise ConfigurationError("n must be 1, 2 or 3", )
        if not self.p >= 1 or (p_gt_one and not self.p > 1):
            raise ParameterError(f"params.p = {self.p} out of range")
        if not self.q >= 1:
            raise ParameterError(f"params.q = {self.q} out of range")
        if q_ge_p and self.q < self.p:
            raise ParameterError("params.q must be >= params.p")
        if alpha_range and not 0 <= self.alpha < self.n:
            raise ParameterError(f"params.alpha must lie in [0, n), got {self.alpha}")
        if s_range and not 0 < self.s < 1:
            raise ParameterError(f"params.s must lie in (0, 1), got {self.s}")
        if self.epsilon < 0:
            raise ParameterError("params.epsilon must be >= 0")
        return self

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in ("n", "p", "q", "alpha", "beta", "s", "epsilon", "lam")}


# Lebesgue and Lorentz --------------------------------------------------------


def _values_and_masses(f, weight=None, mu=None):
    """Flatten ``|f|`` and the measure of each sample (cell or atom)."""
    if isinstance(f, GridField):
        vals = np.abs(f.values).ravel()
        if weight is None:
            m = np.full(vals.size, f.cell_volume)
        else:
            wv = weight.values if isinstance(weight, GridField) else np.asarray(weight, float)
            m = np.broadcast_to(wv, f.shape).ravel() * f.cell_volume
        return vals, m
    if mu is not None:
        vals = np.abs(f(mu.locations) if callable(f) else np.asarray(f, float)).ravel()
        if vals.size != len(mu):
            raise ConfigurationError("one value per atom is required")
        return vals, mu.masses
    vals = np.abs(np.asarray(f, float)).ravel()
    m = np.ones(vals.size) if weight is None else np.asarray(weight, float).ravel()
    return vals, m


def lp_norm(f, p: float, weight=None, mu: PointMeasure | None = None) -> float:
    """``(int |f|^p w dx)^{1/p}`` on a grid, or ``(sum |f(x_i)|^p m_i)^{1/p}`` on atoms."""
    if not p >= 1:
        raise ParameterError(f"p must be >= 1, got {p}")
    vals, m = _values_and_masses(f, weight, mu)
    if math.isinf(p):
        return float(vals[m > 0].max()) if np.any(m > 0) else 0.0
    return math.fsum(vals ** p * m) ** (1.0 / p)


def distribution_steps(vals: np.ndarray, masses: np.ndarray) -> tuple:
    """Distinct positive values ``v_1 > ... > v_J`` and ``M_j = mu{|f| >= v_j}``."""
    keep = (vals > 0) & (masses > 0)
    v, m = vals[keep], masses[keep]
    if v.size == 0:
        return np.zeros(0), np.zeros(0)
    uniq, inv = np.unique(v, return_inverse=True)
    per = np.bincount(inv.ravel(), weights=m)
    uniq, per = uniq[::-1], per[::-1]
    return uniq, np.cumsum(per)


def lorentz_norm(f, r: float, s: float, weight=None, mu: PointMeasure | None = None) -> float:
    """``||f||_{L^{r,s}}`` evaluated exactly for a simple function.

    For ``s < inf`` the distribution-function integral over each step gives
    ``(r/s) M_j^{s/r} (v_j^s - v_{j+1}^s)``; for ``s = inf`` the norm is
    ``max_j v_j M_j^{1/r}``.
    """
    if not r >= 1:
        raise ParameterError(f"r must be >= 1, got {r}")
    if not s >= 1:
        raise ParameterError(f"s must be >= 1, got {s}")
    vals, m = _values_and_masses(f, weight, mu)
    v, M = distribution_steps(vals, m)
    if v.size == 0:
        return 0.0
    if math.isinf(s):
        return float(np.max(v * M ** (1.0 / r)))
    v_next = np.r_[v[1:], 0.0]
    terms = (r / s) * M ** (s / r) * (v ** s - v_next ** s)
    return math.fsum(terms) ** (1.0 / s)


def weak_norm_thresholds(f, q: float, weight=None, mu=None,
                         count: int = C.WEAK_THRESHOLDS) -> float:
    """``sup_t t mu{|f| > t}^{1/q}`` over log-spaced thresholds in ``[min+, max]``.

    Uses ``t mu{|f| >= t}``, the limit from below, so the value is exact for
    indicators and never exceeds the true weak norm.
    """
    vals, m = _values_and_masses(f, weight, mu)
    pos = vals[(vals > 0) & (m > 0)]
    if pos.size == 0:
        return 0.0
    ts = np.geomspace(pos.min(), pos.max(), count)
    best = 0.0
    for t in ts:
        best = max(best, t * float(m[vals >= t].sum()) ** (1.0 / q))
    return best


# Orlicz averages -----------------------------------------------------------


def luxemburg(values: np.ndarray, fractions: np.ndarray, Psi: YoungFunction) -> float:
    """Solve ``sum_i c_i Psi(v_i / lambda) = 1`` for ``lambda``; ``0`` if ``v = 0``."""
    v = np.abs(np.asarray(values, float)).ravel()
    c = np.asarray(fractions, float).ravel()
    keep = (v > 0) & (c > 0)
    v, c = v[keep], c[keep]
    if v.size == 0:
        return 0.0
    if not np.all(np.isfinite(v)):
        raise UnsupportedInputError("Orlicz average of an unbounded function")
    vmax = v.max()
    # lambda = vmax * e^u keeps the arguments of Psi of order one; F decreases in u
    F = lambda u: math.fsum(c * Psi(v / (vmax * math.exp(u)))) - 1.0
    lo = hi = 0.0
    for _ in range(C.ORLICZ_MAX_ITER):
        if F(lo) >= 0:
            break
        lo -= 2.0 * (1 + abs(lo))
    for _ in range(C.ORLICZ_MAX_ITER):
        if F(hi) <= 0:
            break
        hi += 2.0 * (1 + abs(hi))
    u = brentq(F, lo, hi, xtol=1e-15, rtol=C.ORLICZ_BISECTION_RTOL, maxiter=C.ORLICZ_MAX_ITER)
    return float(vmax * math.exp(u))


def luxemburg_residual(values, fractions, Psi: YoungFunction, lam: float) -> float:
    if lam == 0:
        return 0.0
    v = np.abs(np.asarray(values, float)).ravel()
    return abs(math.fsum(np.asarray(fractions, float).ravel() * Psi(v / lam)) - 1.0)


def _cube_cells(f: GridField, Q: Cube) -> tuple:
    """Values of ``f`` at cells whose center lies in ``Q``, and ``h^n/|Q|``."""
    lo = np.ceil((Q.lower - f.origin) / f.h - 0.5).astype(int)
    hi = np.ceil((Q.lower + Q.side - f.origin) / f.h - 0.5).astype(int)
    lo = np.clip(lo, 0, np.array(f.shape))
    hi = np.clip(hi, 0, np.array(f.shape))
    if np.any(hi <= lo):
        return np.zeros(0), 0.0
    sl = tuple(slice(a, b) for a, b in zip(lo, hi))
    return f.values[sl].ravel(), f.cell_volume / Q.volume


def cube_average(f: GridField, Q: Cube, power: float = 1.0) -> float:
    """``(1/|Q|) int_Q |f|^power``; cells outside the grid are zero."""
    vals, c = _cube_cells(f, Q)
    return math.fsum(np.abs(vals) ** power) * c


def orlicz_average(f: GridField, Q: Cube, Psi: YoungFunction) -> float:
    """Luxemburg average ``inf{lambda > 0 : avg_Q Psi(|f|/lambda) <= 1}``."""
    vals, c = _cube_cells(f, Q)
    return luxemburg(vals, np.full(vals.size, c), Psi)


def luxemburg_blocks(blocks: np.ndarray, frac: float, Psi: YoungFunction,
                     iterations: int = 60) -> np.ndarray:
    """Vectorized Luxemburg averages for rows of equally weighted samples.

    Bisection in ``log(lambda / max)``; each row's root lies in
    ``[log(1/Psi^{-1}(1/(N frac))) , log(1/Psi^{-1}(1))]`` relative to its maximum.
    """
    B = np.abs(blocks)
    vmax = B.max(axis=1)
    out = np.zeros(B.shape[0])
    live = vmax > 0
    if not np.any(live):
        return out
    B, vmax = B[live], vmax[live]
    scaled = B / vmax[:, None]
    N = B.shape[1]
    lo = np.full(B.shape[0], -math.log(float(Psi.inverse(1.0 / frac))) - 1e-9)
    hi = np.full(B.shape[0], -math.log(float(Psi.inverse(1.0 / (N * frac)))) + 1e-9)
    # Psi(0) = 0, so only the positive samples enter the sums
    rows, cols = np.nonzero(scaled)
    vals = scaled[rows, cols]
    nrows = scaled.shape[0]
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        F = frac * np.bincount(rows, Psi(vals * np.exp(-mid)[rows]), minlength=nrows) - 1.0
        above = F > 0
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    out[live] = vmax * np.exp(0.5 * (lo + hi))
    return out


# Orlicz fractional maximal functions ---------------------------------------


def _support_box(w: GridField):
    idx = np.argwhere(w.values != 0)
    if idx.size == 0:
        return None
    lo = w.origin + idx.min(axis=0) * w.h
    hi = w.origin + (idx.max(axis=0) + 1) * w.h
    return lo, hi


def default_cube_family(w: GridField, x, count: int = C.CUBE_ENLARGEMENTS) -> list:
    """Dyadic cubes of every shifted grid containing ``x``, plus centered cubes.

    Dyadic levels run from the cell size to the first level whose cubes can
    hold both ``x`` and the support of ``w``. The centered cubes have
    half-sides log-spaced between the sup-distances from ``x`` to the nearest
    and the farthest support cell.
    """
    from .dyadic import DyadicCube, shifts

    x = _as_point(x, w.dim)
    box = _support_box(w)
    if box is None:
        return []
    lo, hi = box
    reach = float(np.max(np.maximum(np.abs(hi - x), np.abs(x - lo))))
    near = float(np.max(np.maximum(np.maximum(lo - x, x - hi), 0.0)))
    k0 = int(math.floor(math.log2(w.h)))
    k1 = int(math.ceil(math.log2(max(3 * 2 * reach, w.h)))) + 1
    fam = []
    for t in shifts(w.dim):
        for k in range(k0, k1 + 1):
            Q = DyadicCube.containing(x, k, t)
            if np.all(Q.upper > lo) and np.all(Q.lower < hi):
                fam.append(Cube(Q.lower, Q.side))
    r0 = max(near, w.h)
    for r in np.geomspace(r0, max(reach, r0) * 1.0001, count):
        fam.append(Cube.centered(x, float(r)))
    return fam


def orlicz_frac_maximal(w: GridField, alpha: float, Theta: YoungFunction, x,
                        family=None) -> float:
    """``max_Q l(Q)^alpha ||w||_{Theta, Q}`` over a finite cube family (lower bound)."""
    if not 0 <= alpha < w.dim:
        raise ParameterError(f"alpha must lie in [0, {w.dim})")
    fam = default_cube_family(w, x) if family is None else family
    best = 0.0
    for Q in fam:
        val = orlicz_average(w, Q, Theta)
        if val > 0:
            best = max(best, Q.side ** alpha * val)
    return best


def orlicz_maximal_grid(w: GridField, alpha: float, Theta: YoungFunction,
                        extra_levels: int | None = None) -> np.ndarray:
    """Dyadic Orlicz fractional maximal function at every cell of ``w``.

    Uses the grid-aligned dyadic lattice and, per level, a copy shifted by
    ``floor(2^j/3)`` cells along every axis. Cubes may stick out of the grid
    (those cells count as zero).
    """
    n = w.dim
    if extra_levels is None:
        extra_levels = 0 if alpha == 0 else 2
    top = int(math.ceil(math.log2(max(w.shape)))) + extra_levels
    side = 2 ** top
    vals = np.abs(w.values)
    out = np.zeros(w.shape)
    idx = np.indices(w.shape)
    for j in range(top + 1):
        b = 2 ** j
        for shift in sorted({0, b // 3}):
            # place the grid at offset `pad` inside a padded array
            pad = shift if shift else 0
            total = side + b
            arr = np.zeros((total,) * n)
            arr[tuple(slice(pad, pad + s) for s in w.shape)] = vals
            nb = total // b
            arr = arr[(slice(0, nb * b),) * n]
            blocks = arr.reshape(sum(((nb, b) for _ in range(n)), ()))
            blocks = blocks.transpose(tuple(range(0, 2 * n, 2)) + tuple(range(1, 2 * n, 2)))
            blocks = blocks.reshape(nb ** n, b ** n)
            nonzero = np.any(blocks > 0, axis=1)
            lux = np.zeros(nb ** n)
            if np.any(nonzero):
                lux[nonzero] = luxemburg_blocks(blocks[nonzero], 1.0 / b ** n, Theta)
            lux = lux.reshape((nb,) * n) * (b * w.h) ** alpha
            cell_block = tuple((idx[i] + pad) // b for i in range(n))
            out = np.maximum(out, lux[cell_block])
    return out


# Two-weight conditions ------------------------------------------------------


def interior_cube_family(w: GridField, count_sides: int = 6, stride: int | None = None,
                         min_cells: int = 2) -> list:
    """Centered cubes lying inside the grid, sides log-spaced from a few cells to the grid."""
    n = w.dim
    L = w.h * min(w.shape)
    sides = np.geomspace(min_cells * w.h, L, count_sides)
    fam = []
    stride = stride or max(1, min(w.shape) // 8)
    centers_idx = [np.arange(0, s, stride) for s in w.shape]
    grids = np.stack(np.meshgrid(*centers_idx, indexing="ij"), axis=-1).reshape(-1, n)
    for side in sides:
        for ci in grids:
            c = w.center_of(ci)
            lower = c - side / 2
            if np.all(lower >= w.origin - 1e-12) and np.all(lower + side <= w.upper + 1e-12):
                fam.append(Cube(lower, float(side)))
    return fam


@dataclass
class BumpResult:
    sup: float
    sup_power: float
    argmax: Cube | None
    family_size: int
    family: list = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {"sup": self.sup, "sup_power": self.sup_power, "family_size": self.family_size,
                "family": [{"lower": Q.lower.tolist(), "side": Q.side} for Q in self.family]}


def bump_condition_sup(w: GridField, v: GridField, p: float, Psi: YoungFunction,
                       family=None, alpha: float = 1.0) -> BumpResult:
    """``sup_Q l(Q)^alpha ||w^{1/p}||_{Psi,Q} (avg_Q v^{1-p'})^{1/p'}``.

    ``sup_power`` is the plain two-weight form with power averages
    ``l(Q)^alpha (avg_Q w)^{1/p} (avg_Q v^{1-p'})^{1/p'}``.
    """
    if not p > 1:
        raise ParameterError(f"params.p must be > 1, got {p}")
    pp = p / (p - 1)
    fam = interior_cube_family(w) if family is None else list(family)
    root = w.with_values(w.values ** (1.0 / p), "weight")
    best, best_pow, arg = 0.0, 0.0, None
    for Q in fam:
        wa = orlicz_average(root, Q, Psi)
        if wa == 0:
            continue
        vvals, c = _cube_cells(v, Q)
        # v vanishes off its grid, so v^{1-p'} is not integrable there
        outside = np.any(Q.lower < v.origin - 1e-12) or np.any(Q.lower + Q.side > v.upper + 1e-12)
        if outside or vvals.size == 0 or np.any(vvals <= 0):
            return BumpResult(math.inf, math.inf, Q, len(fam), fam)
        vavg = (math.fsum(vvals ** (1 - pp)) * c) ** (1 / pp)
        val = Q.side ** alpha * wa * vavg
        pw = Q.side ** alpha * cube_average(w, Q) ** (1 / p) * vavg
        if val > best:
            best, arg = val, Q
        best_pow = max(best_pow, pw)
    return BumpResult(best, best_pow, arg, len(fam), fam)


def _restrict_to_cube(w: GridField, Q: Cube) -> GridField:
    mask = Q.contains(w.cell_centers()).reshape(w.shape)
    return w.with_values(np.where(mask, w.values, 0.0)), mask


@dataclass
class TestingResult:
    sup: float
    ratios: np.ndarray
    family_size: int


def sawyer_testing(w: GridField, v: GridField, p: float, q: float, alpha: float,
                   family=None) -> TestingResult:
    """``sup_Q (int_Q I_alpha(1_Q w)^{p'} v^{1-p'})^{1/p'} / w(Q)^{1/q'}``."""
    if not p > 1 or not q > 1:
        raise ParameterError("testing condition needs p, q > 1")
    pp, qp = p / (p - 1), q / (q - 1)
    fam = interior_cube_family(w) if family is None else list(family)
    ratios = []
    for Q in fam:
        wq, mask = _restrict_to_cube(w, Q)
        wQ = wq.total()
        if not np.any(wq.values):
            ratios.append(0.0)
            continue
        pot = riesz_potential_field(wq, alpha).values
        vv = v.values[mask]
        if np.any(vv <= 0):
            ratios.append(math.inf)
            continue
        num = math.fsum(np.clip(pot[mask], 0, None) ** pp * vv ** (1 - pp)) * w.cell_volume
        ratios.append(num ** (1 / pp) / wQ ** (1 / qp) if wQ > 0 else math.inf)
    ratios = np.asarray(ratios)
    return TestingResult(float(ratios.max()) if ratios.size else 0.0, ratios, len(fam))


# B_{p,q} ----------------------------------------------------------------------


@dataclass
class BpqResult:
    converges: bool | None
    slope: float
    log_slope: float
    integral: float
    method: str


def bpq_check(Psi, p: float, q: float, T_max: float = C.BPQ_T_MAX,
              nodes_per_decade: int = C.BPQ_NODES_PER_DECADE) -> BpqResult:
    """Classify ``int_1^inf Psi(t)^{q/p} t^{-q-1} dt`` as convergent or divergent.

    The integrand's logarithm is fitted on the last two decades below
    ``T_max`` against ``log t`` and ``log log(e+t)``. A power slope clearly
    below (above) ``-1`` decides; a slope of ``-1`` within the margin is a
    log-borderline case, decided by the log exponent (analytic for a
    :class:`YoungFunction`, fitted otherwise).
    """
    if not (p > 1 and q > 1):
        raise ParameterError("B_{p,q} needs p, q > 1")
    decades = math.log10(T_max)
    t = np.logspace(0, decades, int(decades * nodes_per_decade) + 1)
    if isinstance(Psi, YoungFunction):
        logpsi = Psi.log_value(t)
    else:
        logpsi = np.log(np.asarray(Psi(t), float))
    logphi = (q / p) * logpsi - (q + 1) * np.log(t)
    # integral in log t: int phi(t) t d(log t)
    integral = float(trapezoid(np.exp(logphi + np.log(t)), np.log(t)))
    tail = t >= T_max / 100
    A = np.stack([np.log(t[tail]), np.log(np.log(math.e + t[tail])), np.ones(tail.sum())], axis=1)
    coef, *_ = np.linalg.lstsq(A, logphi[tail], rcond=None)
    slope, log_slope = float(coef[0]), float(coef[1])
    if isinstance(Psi, YoungFunction):
        e = Psi.a * q / p - q - 1
        if abs(e + 1) < 1e-9:
            return BpqResult(Psi.b * q / p < -1, slope, Psi.b * q / p, integral, "analytic-borderline")
    if slope < -1 - C.BPQ_SLOPE_MARGIN:
        return BpqResult(True, slope, log_slope, integral, "slope")
    if slope > -1 + C.BPQ_SLOPE_MARGIN:
        return BpqResult(False, slope, log_slope, integral, "slope")
    return BpqResult(log_slope < -1, slope, log_slope, integral, "fitted-borderline")


def bpq_analytic(Psi: YoungFunction, p: float, q: float) -> bool:
    """Closed-form classification for ``t^a log(e+t)^b``."""
    e = Psi.a * q / p - q - 1
    if abs(e + 1) < 1e-12:
        return Psi.b * q / p < -1
    return e < -1
