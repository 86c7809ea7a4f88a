"""Executable versions of the proof constructions and the counterexample drivers."""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from ..errors import ConfigurationError, ParameterError, UnsupportedInputError
from ..measures import Ball, GridField, PointMeasure
from ..norms import ExperimentParams, YoungFunction, lorentz_norm, lp_norm
from ..operators import (KernelConstants, exterior_monopole, frac_maximal_grid_field,
                         frac_maximal_points, gradient, riesz_potential_field)
from .cases import CaseTag, InequalityCase, default_params
from .corpus import bump
from .evaluate import EvalContext, evaluate_case
from .report import InequalityReport, input_digest, ratio_of


# Counterexample: the strong M_alpha bound without M on the right ---------------


@dataclass
class GrowthRow:
    R: float
    lhs: float
    rhs: float
    increment: float | None = None


@dataclass
class GrowthTable:
    rows: list
    alpha: float
    bump_mass: float
    expected_increment: float

    def increments_ok(self, tol: float = 0.2) -> bool:
        inc = [r.increment for r in self.rows if r.increment is not None]
        return bool(inc) and all(abs(i / self.expected_increment - 1) <= tol for i in inc)

    def rhs_ok(self, tol: float = 0.05) -> bool:
        if len(self.rows) < 2:
            return True
        a, b = self.rows[-2].rhs, self.rows[-1].rhs
        return abs(b / a - 1) < tol

    @property
    def ok(self) -> bool:
        return self.increments_ok() and self.rhs_ok()

    def to_json(self) -> dict:
        return {"alpha": self.alpha, "bump_mass": self.bump_mass,
                "expected_increment": self.expected_increment,
                "rows": [asdict(r) for r in self.rows]}


def _power_primitive(top, alpha):
    """``2 pi int_1^top rho^{1-alpha} d rho`` (zero for ``top <= 1``)."""
    top = np.maximum(top, 1.0)
    if alpha == 2:
        return 2 * math.pi * np.log(top)
    return 2 * math.pi * (top ** (2 - alpha) - 1) / (2 - alpha)


def _annulus_ball_mass(d: float, r: np.ndarray, R: float, alpha: float,
                       nodes: int = 64) -> np.ndarray:
    """``int_{B_r(x) cap (B_R \\ B_1)} |y|^{-alpha} dy`` in the plane, ``|x| = d``, for each ``r``.

    Polar coordinates about the origin: circles of radius ``rho < r - d`` lie
    inside the ball, and for ``|r - d| < rho < r + d`` the circle meets it in an
    arc of length ``2 rho arccos((rho^2 + d^2 - r^2)/(2 rho d))``.
    """
    r = np.atleast_1d(np.asarray(r, float))
    full = _power_primitive(np.minimum(r - d, R), alpha) if d >= 0 else 0.0
    if d == 0:
        return full
    a = np.clip(np.abs(r - d), 1.0, R)
    b = np.clip(r + d, 1.0, R)
    x, w = np.polynomial.legendre.leggauss(nodes)
    half = 0.5 * (b - a)
    rho = half[:, None] * (x[None, :] + 1) + a[:, None]
    c = np.clip((rho ** 2 + d ** 2 - r[:, None] ** 2) / (2 * rho * d), -1.0, 1.0)
    arc = 2 * rho * np.arccos(c) * rho ** -alpha
    return full + half * (arc @ w)


def _annulus_maximal(d: float, R: float, alpha: float, samples: int = 256) -> float:
    """``M_alpha`` of the density ``|y|^{-alpha} 1_{1<|y|<R}`` at distance ``d < 1``."""
    n, vn = 2, math.pi
    val = lambda r: np.asarray(r, float) ** (alpha - n) * _annulus_ball_mass(d, r, R, alpha) / vn
    rs = np.geomspace(max(1 - d, 1e-9), R + d, samples)
    vals = val(rs)
    i = int(np.argmax(vals))
    lo, hi = rs[max(i - 1, 0)], rs[min(i + 1, rs.size - 1)]
    best = float(vals[i])
    if hi > lo:
        res = minimize_scalar(lambda r: -float(val(r)[0]), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-10 * hi})
        best = max(best, -float(res.fun))
    return best


def counterexample_growth(R_list=(4, 8, 16, 32), alpha: float = 1.0, h: float = 1 / 64,
                          nodes_per_doubling: int = 16, radial_nodes: int = 24) -> GrowthTable:
    """``||M_alpha f||_{L^1(mu_R)}`` and ``||f||_{L^1(M_alpha mu_R)}`` for growing ``R``.

    ``f`` is the unit bump on ``B_1`` and ``mu_R`` the density ``|x|^{-alpha}``
    on ``B_R \\ B_1`` (plane). The left side is a radial integral of the exact
    maximal function of the cell-discretized bump; the right side integrates
    the bump against ``M_alpha mu_R``, maximized over radii with polar
    quadrature of the ball masses.
    """
    n = 2
    if not 0 < alpha < n:
        raise ParameterError(f"alpha must lie in (0, {n})")
    R_list = sorted(float(R) for R in R_list)
    if not R_list or R_list[0] < 1:
        raise ParameterError("radii must be >= 1")
    kc = KernelConstants(n)
    fn = bump((0.0, 0.0), 1.0)
    f = GridField.sample(fn, 1.0, h, dim=n, pad=False)
    keep = f.values.ravel() > 0
    atoms = PointMeasure(f.cell_centers()[keep], f.values.ravel()[keep] * f.cell_volume)
    mass = atoms.total_mass

    # lhs: omega int_1^R M(rho) rho^{n-1-alpha} d rho, Gauss-Legendre in log rho per doubling
    x, w = np.polynomial.legendre.leggauss(nodes_per_doubling)
    Rmax = R_list[-1]
    edges = [1.0]
    while edges[-1] < Rmax:
        edges.append(min(2 * edges[-1], Rmax))
    edges = sorted(set(edges) | {R for R in R_list if R > 1})
    cum = {1.0: 0.0}
    acc = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        la, lb = math.log(a), math.log(b)
        t = 0.5 * (lb - la) * (x + 1) + la
        rho = np.exp(t)
        pts = np.stack([rho, np.zeros_like(rho)], axis=1)
        M = frac_maximal_points(atoms, alpha, pts)
        acc += 0.5 * (lb - la) * float(np.sum(w * kc.omega * M * rho ** (n - alpha)))
        cum[b] = acc

    # rhs: 2 pi int_0^1 f(d) M_alpha mu_R(d) d dd
    xd, wd = np.polynomial.legendre.leggauss(radial_nodes)
    d = 0.5 * (xd + 1)
    fd = fn(np.stack([d, np.zeros_like(d)], axis=1))
    rows = []
    for R in R_list:
        if R == 1:
            rows.append(GrowthRow(R, 0.0, 0.0))
            continue
        M = np.array([_annulus_maximal(float(di), R, alpha) for di in d])
        rhs = 0.5 * float(np.sum(wd * 2 * math.pi * fd * M * d))
        rows.append(GrowthRow(R, cum[R], rhs))
    for prev, row in zip(rows[:-1], rows[1:]):
        if row.R == 2 * prev.R:
            row.increment = row.lhs - prev.lhs
    expected = kc.omega * math.log(2) * mass / kc.v_n
    return GrowthTable(rows, alpha, mass, expected)


# Sharpness of the logarithmic bump ---------------------------------------


@dataclass
class SharpnessRow:
    x: float
    maximal: float
    normalized: float
    maximal_cmp: float
    normalized_cmp: float
    divergence: float
    divergence_cmp: float
    integrand: float
    integrand_bound: float


@dataclass
class SharpnessTable:
    rows: list
    p: float
    q: float
    alpha: float
    beta: float
    epsilon: float
    epsilon_cmp: float

    @property
    def spread(self) -> float:
        v = [r.normalized for r in self.rows]
        return max(v) / min(v)

    def integrand_ok(self) -> bool:
        return all(r.integrand >= r.integrand_bound * (1 - 1e-12) for r in self.rows)

    def comparison_ok(self) -> bool:
        last = self.rows[-1]
        return last.divergence_cmp < last.divergence and last.normalized_cmp > last.normalized

    @property
    def ok(self) -> bool:
        return self.spread <= 4 and self.integrand_ok() and self.comparison_ok()

    def to_json(self) -> dict:
        return {"p": self.p, "q": self.q, "alpha": self.alpha, "beta": self.beta,
                "epsilon": self.epsilon, "epsilon_cmp": self.epsilon_cmp,
                "spread": self.spread, "rows": [asdict(r) for r in self.rows]}


def _segment_area(c: float) -> float:
    """Area of ``{|y| < 1, y_1 > c}`` in the plane."""
    if c <= -1:
        return math.pi
    if c >= 1:
        return 0.0
    return math.acos(c) - c * math.sqrt(1 - c * c)


def orlicz_maximal_unit_disk(rho: float, alpha: float, Theta: YoungFunction,
                             samples: int = 512) -> float:
    """``M_{alpha,Theta}(1_{B_1})`` at ``(rho, 0)``, ``rho >= 2``, over axis-parallel squares.

    For a square of side ``l`` containing the point, the overlap with the disk
    is largest when the point sits on the right edge and the square is
    centered vertically; then ``||1_B||_{Theta,Q} = 1/Theta^{-1}(l^2/|B cap Q|)``.
    """
    if rho < 2:
        raise ParameterError("the closed form needs |x| >= 2")

    def val(l):
        A = _segment_area(rho - l)
        if A <= 0:
            return 0.0
        return l ** alpha / float(Theta.inverse(l * l / A))
    ls = np.linspace(rho - 1, 4 * (rho + 1), samples)[1:]
    vals = np.array([val(l) for l in ls])
    i = int(np.argmax(vals))
    a, b = ls[max(i - 1, 0)], ls[min(i + 1, ls.size - 1)]
    res = minimize_scalar(lambda l: -val(l), bounds=(a, b), method="bounded",
                          options={"xatol": 1e-12 * b})
    return float(max(vals[i], -res.fun))


def sharpness_scan(q: float = 2.0, p: float = 2.0, alpha: float = 0.0, xs=None,
                   epsilon: float = 0.0, epsilon_cmp: float = 1.0) -> SharpnessTable:
    """Asymptotics of ``M_{alpha,Theta}(1_B)`` for ``Theta = t log(e+t)^{q/p' + epsilon}``.

    ``normalized = M |x|^{n-alpha} / log|x|^{q/p'}`` should stay within a
    bounded factor for ``epsilon = 0``. ``divergence`` is the lower bound
    ``(v_n (1+|x|)^{beta-n})^{p'} M^{-p'/q}`` of the dual integrand, multiplied
    by ``|x|^n log|x|``: it stays bounded below when ``epsilon = 0`` (so the
    integral diverges) and decays for ``epsilon > 0``.
    """
    n = 2
    if not (p > 1 and q >= p):
        raise ParameterError("need p > 1 and q >= p")
    if not 0 <= alpha < n:
        raise ParameterError(f"alpha must lie in [0, {n})")
    pp = p / (p - 1)
    beta = n / p - (n - alpha) / q
    xs = np.geomspace(8, 512, 7) if xs is None else np.asarray(xs, float)
    if np.any(xs < 8) or np.any(xs > 512):
        raise ParameterError("|x| must lie in [8, 512]")
    kc = KernelConstants(n)
    Th0 = YoungFunction(1.0, q / pp + epsilon)
    Th1 = YoungFunction(1.0, q / pp + epsilon_cmp)
    e = (n - beta) * pp
    c = (xs.min() / (1 + xs.min())) ** e
    rows = []
    for x in xs:
        lg = math.log(x)
        M0 = orlicz_maximal_unit_disk(x, alpha, Th0)
        M1 = orlicz_maximal_unit_disk(x, alpha, Th1)
        norm = x ** (n - alpha) / lg ** (q / pp)
        kern = (kc.v_n / (1 + x) ** (n - beta)) ** pp
        D0 = kern * M0 ** (-pp / q) * x ** n * lg
        D1 = kern * M1 ** (-pp / q) * x ** n * lg
        integrand = x ** (e - n) / ((1 + x) ** e * lg)
        rows.append(SharpnessRow(float(x), M0, M0 * norm, M1, M1 * norm, D0, D1,
                                 integrand, c / (x ** n * lg)))
    return SharpnessTable(rows, p, q, alpha, beta, epsilon, epsilon_cmp)


# Weak implies strong: the truncation chain --------------------------------


def truncate(u: np.ndarray, k: int) -> np.ndarray:
    """``tau_k u``: 0 below ``2^k``, ``u - 2^k`` up to ``2^{k+1}``, then ``2^k``."""
    a = 2.0 ** k
    return np.clip(u - a, 0.0, a)


def _stencil_range(v: np.ndarray) -> tuple:
    """Min and max of ``v`` over each cell and its axial neighbors."""
    lo, hi = v.copy(), v.copy()
    for ax in range(v.ndim):
        for s in (1, -1):
            sh = np.roll(v, s, axis=ax)
            # no wrap-around: the outer layer of a compact field is zero anyway
            edge = [slice(None)] * v.ndim
            edge[ax] = 0 if s == 1 else -1
            sh[tuple(edge)] = v[tuple(edge)]
            lo, hi = np.minimum(lo, sh), np.maximum(hi, sh)
    return lo, hi


@dataclass
class TruncationRow:
    k: int
    level_mass: float
    term: float
    weak_ratio: float


@dataclass
class TruncationReport:
    p: float
    q: float
    lhs: float
    terms_sum: float
    tail: float
    constant: float
    rhs: float
    gradient_ok: bool
    inclusion_ok: bool
    rows: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs * (1 + 1e-12)

    @property
    def ok(self) -> bool:
        return self.holds and self.gradient_ok and self.inclusion_ok


def truncation_upgrade(u: GridField, w: GridField | None = None, v: GridField | None = None,
                       p: float = 2.0, q: float = 2.0) -> TruncationReport:
    """Check the truncation argument that upgrades weak type to ``L^{q,p}``.

    Verifies cellwise that ``|grad tau_k u| <= |grad u|`` on the cells whose
    difference stencil meets the band ``2^k < u <= 2^{k+1}`` (and vanishes
    elsewhere), that ``{u > 2^{k+1}}`` lies in ``{tau_k u > 2^{k-1}}``, and that
    ``||u||_{L^{q,p}(w)}^p <= (q/p) 2^{3p} sum_k 2^{kp} w(tau_k u > 2^{k-1})^{p/q}``.
    Levels below the smallest positive value of ``u`` all see the whole
    support and are summed as a geometric series.
    """
    if not (p >= 1 and q >= 1):
        raise ParameterError("need p, q >= 1")
    vals = np.asarray(u.values, float)
    if np.any(vals < 0):
        raise ParameterError("truncation_upgrade expects u >= 0")
    wv = np.ones(u.shape) if w is None else np.asarray(w.values, float)
    vv = np.ones(u.shape) if v is None else np.asarray(v.values, float)
    dV = u.cell_volume
    c = (q / p) * 2.0 ** (3 * p)
    if not np.any(vals > 0):
        return TruncationReport(p, q, 0.0, 0.0, 0.0, c, 0.0, True, True)
    lhs = lorentz_norm(vals.ravel(), q, p, weight=(wv * dV).ravel()) ** p
    umin, umax = float(vals[vals > 0].min()), float(vals.max())
    K = math.ceil(math.log2(umin / 1.5)) - 1
    kmax = math.ceil(math.log2(umax))
    W = math.fsum((wv * (vals > 0)).ravel()) * dV
    tail = W ** (p / q) * 2.0 ** (K * p) / (1 - 2.0 ** -p)
    uf = u.with_values(vals, "function")
    gu = np.linalg.norm(gradient(uf), axis=0)
    lo, hi = _stencil_range(vals)
    grad_ok = incl_ok = True
    rows = []
    for k in range(K + 1, kmax + 1):
        tk = truncate(vals, k)
        gt = np.linalg.norm(gradient(uf.with_values(tk)), axis=0)
        touch = (hi > 2.0 ** k) & (lo <= 2.0 ** (k + 1))
        scale = 1e-12 * max(1.0, float(gu.max()))
        grad_ok &= bool(np.all(gt <= gu * touch + scale))
        incl_ok &= bool(np.all(tk[vals > 2.0 ** (k + 1)] > 2.0 ** (k - 1)))
        level = math.fsum(wv[tk > 2.0 ** (k - 1)]) * dV
        term = 2.0 ** (k * p) * level ** (p / q)
        nz = gt > 0
        gnorm = lp_norm(gt[nz], p, weight=vv[nz] * dV)
        weak = 2.0 ** (k - 1) * level ** (1 / q)
        rows.append(TruncationRow(k, level, term, ratio_of(weak, gnorm)))
    s = math.fsum(r.term for r in rows)
    return TruncationReport(p, q, lhs, s, tail, c, c * (s + tail), grad_ok, incl_ok, rows)


# p = 1 implies p: the scaling chain -----------------------------------------


@dataclass
class ScalingReport:
    p: float
    q: float
    p_star: float
    endpoint_lhs: float = 0.0
    endpoint_rhs: float = 0.0
    chain_rhs: float = 0.0
    gradient_norm: float = 0.0
    power_norm: float = 0.0
    lhs: float = 0.0
    ratios: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        r = self.ratios
        if not r:
            return True
        finite = all(math.isfinite(x) for x in r.values())
        return (finite and r["chain_rule"] <= 1.01 and r["holder"] <= 1 + 1e-12
                and math.isclose(r["reconstructed_final"], r["final"], rel_tol=1e-9))


def scaling_p_experiment(u: GridField, w: GridField | None = None, p: float = 4 / 3) -> ScalingReport:
    """The chain behind ``p = 1 implies p``, with ``q = p*/n'``.

    ``endpoint`` compares ``|| |u|^q ||_{L^{n'}(w)}`` with
    ``int |grad |u|^q| w^{1-1/n}``; ``chain_rule`` compares that gradient
    integral with ``q int |u|^{q-1} |grad u| w^{1-1/n}``; ``holder`` checks the
    Holder split; ``final`` is the resulting Sobolev ratio, which equals the
    product ``q * endpoint * chain_rule * holder`` because ``(q-1)p' = p*``.
    """
    n = u.dim
    if not 1 < p < n:
        raise ParameterError(f"need 1 < p < n, got p = {p}")
    P = ExperimentParams(n=n, p=p)
    ps, nn, pp = P.p_star, P.n_prime, P.p_prime
    q = ps / nn
    out = ScalingReport(p, q, ps)
    vals = np.abs(np.asarray(u.values, float))
    if not np.any(vals):
        return out
    wv = np.ones(u.shape) if w is None else np.asarray(w.values, float)
    dV = u.cell_volume
    uq = u.with_values(vals ** q, "function")
    gq = np.linalg.norm(gradient(uq), axis=0)
    gu = np.linalg.norm(gradient(u.with_values(u.values, "function")), axis=0)
    A = (math.fsum((vals ** ps * wv).ravel()) * dV) ** (1 / nn)
    G1 = math.fsum((gq * wv ** (1 - 1 / n)).ravel()) * dV
    G2 = q * math.fsum((vals ** (q - 1) * gu * wv ** (1 - 1 / n)).ravel()) * dV
    H1 = (math.fsum((gu ** p * wv ** (1 - p / n)).ravel()) * dV) ** (1 / p)
    H2 = (math.fsum((vals ** ((q - 1) * pp) * wv).ravel()) * dV) ** (1 / pp)
    lhs = (math.fsum((vals ** ps * wv).ravel()) * dV) ** (1 / ps)
    r = {
        "endpoint": ratio_of(A, G1),
        "chain_rule": ratio_of(G1, G2),
        "holder": ratio_of(G2 / q, H1 * H2),
        "final": ratio_of(lhs, H1),
        "exponent_identity": (q - 1) * pp - ps,
    }
    r["reconstructed_final"] = q * r["endpoint"] * r["chain_rule"] * r["holder"]
    return ScalingReport(p, q, ps, A, G1, G2, H1, H2, lhs, r)


# Hardy atoms ---------------------------------------------------------------


@dataclass
class HardyReport:
    radius: float
    center: list
    alpha: float
    seed: int
    w_ball: float
    sup_atom: float
    mean: float
    near: float
    far: float

    @property
    def total(self) -> float:
        return self.near + self.far


def _random_profile(seed: int, n: int):
    """A seeded smooth profile supported in the unit ball (normalized coordinates)."""
    rng = np.random.default_rng(seed)
    parts = []
    for _ in range(3):
        rad = rng.uniform(0.2, 0.5)
        direction = rng.normal(size=n)
        direction /= np.linalg.norm(direction)
        center = direction * rng.uniform(0.0, 1.0 - rad)
        parts.append((bump(center, rad), rng.uniform(0.2, 1.0)))
    return lambda Y: sum(c * f(Y) for f, c in parts)


def _corner_index(mu: GridField, center: np.ndarray) -> np.ndarray:
    k = (center - mu.origin) / mu.h
    kr = np.rint(k)
    if np.any(np.abs(k - kr) > 1e-9):
        raise ConfigurationError("the ball center must be a cell corner of the grid")
    return kr.astype(int)


def make_atom(mu: GridField, ball: Ball, w_ball: float, seed: int = 0, profile=None) -> np.ndarray:
    """An atom on ``ball``: antisymmetric about the center, ``max |a| = 1/w(B)``.

    The profile is antisymmetrized by flipping the cell window around the
    center corner, so cell pairs cancel exactly and the mean is zero.
    """
    n = mu.dim
    c = np.asarray(ball.center, float)
    kc = _corner_index(mu, c)
    m = int(math.ceil(ball.radius / mu.h)) + 1
    lo, hi = kc - m, kc + m
    if np.any(lo < 0) or np.any(hi > np.array(mu.shape)):
        raise ConfigurationError("the ball must lie inside the grid")
    axes = [mu.origin[i] + (np.arange(lo[i], hi[i]) + 0.5) * mu.h for i in range(n)]
    X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    Y = (X - c) / ball.radius
    if profile == "step":
        g = (Y[..., 0] >= 0).astype(float) * (np.linalg.norm(Y, axis=-1) < 1)
    else:
        g = (profile or _random_profile(seed, n))(Y)
    g = np.where(np.linalg.norm(Y, axis=-1) < 1, g, 0.0)
    a = g - np.flip(g)
    a *= 1.0 / (w_ball * np.abs(a).max()) if np.any(a) else 0.0
    out = np.zeros(mu.shape)
    out[tuple(slice(l, h) for l, h in zip(lo, hi))] = a
    return out


def hardy_atom_test(ball: Ball, mu: GridField, alpha: float, seed: int = 0, profile=None,
                    w_field: np.ndarray | None = None) -> HardyReport:
    """``||I_alpha a||_{L^1(mu)}`` for one atom, split into ``3B`` and its complement.

    ``w = M_alpha mu`` is evaluated on the grid (pass ``w_field`` to reuse it).
    """
    if not isinstance(mu, GridField):
        raise ConfigurationError("hardy_atom_test needs a density on a grid")
    if not 0 < alpha < mu.dim:
        raise ParameterError(f"alpha must lie in (0, {mu.dim})")
    w = frac_maximal_grid_field(mu, alpha) if w_field is None else w_field
    inB = mu.mask_in(ball)
    w_ball = math.fsum(w[inB]) * mu.cell_volume
    if not w_ball > 0:
        raise UnsupportedInputError("w(B) = 0: no atom is supported on this ball")
    a = make_atom(mu, ball, w_ball, seed, profile)
    mean = math.fsum(a.ravel()) * mu.cell_volume
    pot = np.abs(riesz_potential_field(mu.with_values(a, "function"), alpha).values)
    near = mu.mask_in(Ball(ball.center, 3 * ball.radius))
    dens = pot * mu.values * mu.cell_volume
    return HardyReport(ball.radius, list(map(float, ball.center)), alpha, seed, w_ball,
                       float(np.abs(a).max()), mean, math.fsum(dens[near]),
                       math.fsum(dens[~near]))


def hardy_density(radius: float, alpha: float, n: int = 2, cells_per_radius: int = 8,
                  half_width: float = 8.0) -> GridField:
    """The density ``|x|^{-alpha}`` on ``[-half_width, half_width]^n`` at ``h = radius/cells``."""
    h = radius / cells_per_radius
    return GridField.sample(lambda X: np.linalg.norm(X, axis=-1) ** -alpha, half_width, h,
                            dim=n, role="density")


@dataclass
class HardySweep:
    radii: list
    reports: list          # reports[i][j]: radius i, atom j

    def totals(self) -> np.ndarray:
        return np.array([[r.total for r in row] for row in self.reports])

    @property
    def max_total(self) -> float:
        return float(self.totals().max())

    @property
    def scale_spread(self) -> float:
        """Largest max/min over scales, per atom."""
        t = self.totals()
        return float(np.max(t.max(axis=0) / t.min(axis=0)))


def hardy_sweep(radii=(0.25, 0.5, 1.0), atoms: int = 20, alpha: float | None = None, n: int = 2,
                seed: int = 0, center=None, half_width: float = 8.0,
                cells_per_radius: int = 8, profile=None) -> HardySweep:
    """Atoms with seeds ``seed .. seed+atoms-1`` at each radius, ``mu = |x|^{-alpha}``."""
    alpha = (1.0 if n > 1 else 0.5) if alpha is None else alpha
    if center is None:
        center = (0.0,) * n
    out = []
    for R in radii:
        mu = hardy_density(R, alpha, n, cells_per_radius, half_width)
        w = frac_maximal_grid_field(mu, alpha)
        B = Ball(center, R)
        out.append([hardy_atom_test(B, mu, alpha, seed + j, profile, w) for j in range(atoms)])
    return HardySweep(list(radii), out)


def hardy_suite_reports(case: InequalityCase, seeds, hs, radius: float = 0.5) -> list:
    """Suite rows for HARDY_ATOM: one atom per seed on a fixed ball, at each spacing."""
    P = case.params
    n = P.n
    center = (0.0,) * n
    reports = []
    for h in hs:
        t0 = time.perf_counter()
        mu = GridField.sample(lambda X: np.linalg.norm(X, axis=-1) ** -P.alpha, 4.0, h,
                              dim=n, role="density")
        w = frac_maximal_grid_field(mu, P.alpha)
        for s in seeds:
            rep = hardy_atom_test(Ball(center, radius), mu, P.alpha, int(s), None, w)
            reports.append(InequalityReport(
                case=case.tag.value, params=P.to_json(), lhs=rep.total, rhs=1.0,
                ratio=rep.total, h=float(h), levels=0,
                runtime_ms=1000 * (time.perf_counter() - t0),
                input_digest=input_digest(mu, f"seed{s}", radius),
                inputs={"function": f"atom{s}", "measure": "power", "region": None},
                extras={"near": rep.near, "far": rep.far, "w_ball": rep.w_ball}))
    return reports


# Riesz-Riesz and alpha > 1 ----------------------------------------------


def riesz_riesz_experiment(f: GridField, mu) -> InequalityReport:
    """``||I_1 f||_{L^1(mu)}`` against ``|| |R f| ||_{L^1(M_1 mu)}``.

    The report also carries the MZ ratio of ``u = I_1 f`` on the same grid as
    a cross-check (``|grad I_1 f| = |R f|`` up to discretization).
    """
    case = InequalityCase.standard(CaseTag.RIESZ_RIESZ, n=f.dim)
    rep = evaluate_case(case, f, mu)
    if np.any(f.values):
        u = riesz_potential_field(f, 1.0)
        mz = evaluate_case(InequalityCase.standard(CaseTag.MZ_GRADIENT, n=f.dim), u, mu)
        rep.extras["mz_cross_ratio"] = mz.ratio
    return rep


def al_gt1_experiment(f: GridField, w: GridField, alpha: float = 1.5, epsilon: float = 0.5,
                      a1: bool = False) -> InequalityReport:
    """``||I_alpha f||_{L^{n/(n-alpha)}(w)}`` two ways against the Riesz-transform side.

    The composed value ``I_{alpha-1}(I_1 f)`` includes the exterior monopole
    tail. With ``a1`` the right side uses ``w^{1-alpha/n}`` directly.
    """
    n = f.dim
    if not 1 < alpha < n:
        raise ParameterError(f"params.alpha = {alpha} must lie in (1, n)")
    P = default_params(CaseTag.AL_GT1, n, alpha=alpha, epsilon=epsilon)
    case = InequalityCase(CaseTag.AL_GT1, P)
    t0 = time.perf_counter()
    if not np.any(f.values):
        rep = evaluate_case(case, f, w, w)
        rep.extras.update({"lhs_composed": 0.0, "agreement": 0.0})
        return rep
    if a1:
        ctx = EvalContext(f, w, w)
        dV = f.cell_volume
        lhs = lp_norm(ctx.potential(alpha).ravel(), n / (n - alpha), weight=(w.values * dV).ravel())
        rhs = ctx.grid_integral(ctx.transform_norm() * w.values ** (1 - alpha / n))
        rep = InequalityReport(case.tag.value, P.to_json(), lhs, rhs, ratio_of(lhs, rhs), f.h,
                               input_digest=input_digest(f, w), extras={"a1": True})
    else:
        rep = evaluate_case(case, f, w, w)
    inner = riesz_potential_field(f, 1.0)
    comp = riesz_potential_field(inner, alpha - 1).values.copy()
    if n == 2:
        keep = w.values > 0
        comp[keep] += exterior_monopole(f, alpha - 1, 1.0, f.mesh()[keep])
    lhs2 = lp_norm(np.abs(comp).ravel(), n / (n - alpha), weight=(w.values * f.cell_volume).ravel())
    rep.extras["lhs_composed"] = lhs2
    rep.extras["agreement"] = abs(lhs2 - rep.lhs) / rep.lhs if rep.lhs else 0.0
    rep.runtime_ms = 1000 * (time.perf_counter() - t0)
    return rep

