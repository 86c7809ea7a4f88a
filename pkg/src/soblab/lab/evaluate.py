"""Evaluate catalog cases on grid functions and run suites over the corpus."""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import constants as C
from ..errors import ConfigurationError, SoblabError, UnsupportedInputError
from ..geometry import grid_interpolator, isoperimetric_ratio
from ..measures import GridField, LebesgueMeasure, PointMeasure
from ..norms import (lorentz_norm, lp_norm, orlicz_maximal_grid, weak_norm_thresholds)
from ..operators import (frac_maximal_grid_field, frac_maximal_points, gradient,
                         positive_frac_derivative_field, riesz_potential,
                         riesz_potential_field, riesz_transform_field)
from .cases import CaseTag, InequalityCase, bump_function
from .report import (FLAG_INFINITE_RHS, InequalityReport, input_digest, ratio_of)


def _same_grid(a: GridField, b: GridField) -> bool:
    return a.shape == b.shape and a.h == b.h and np.array_equal(a.origin, b.origin)


class EvalContext:
    """A test function and its measure/weight, with cached derived fields.

    All grid quantities live on the grid of ``u``; a density or weight must be
    sampled on the same grid.
    """

    def __init__(self, u: GridField, mu=None, weight: GridField | None = None):
        if u.role != "function":
            u = u.with_values(u.values, "function")
        for m in (mu, weight):
            if isinstance(m, GridField) and not _same_grid(m, u):
                raise ConfigurationError("measure and function must share one grid")
            if isinstance(m, PointMeasure) and len(m) and m.dim != u.dim:
                raise ConfigurationError(f"dimension mismatch: {m.dim} vs {u.dim}")
        self.u, self.mu, self.weight = u, mu, weight
        self._cache = {}

    def _cached(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @property
    def n(self) -> int:
        return self.u.dim

    @property
    def dV(self) -> float:
        return self.u.cell_volume

    @property
    def abs_u(self) -> np.ndarray:
        return np.abs(self.u.values)

    @property
    def grad_norm(self) -> np.ndarray:
        return self._cached("grad", lambda: np.linalg.norm(gradient(self.u), axis=0))

    def measure_maximal(self, alpha: float, mu=None) -> np.ndarray:
        """``M_alpha mu`` at the cell centers."""
        mu = self.mu if mu is None else mu
        key = ("Mmu", alpha, id(mu))

        def compute():
            if isinstance(mu, PointMeasure):
                return frac_maximal_points(mu, alpha, self.u.cell_centers()).reshape(self.u.shape)
            if isinstance(mu, GridField):
                return frac_maximal_grid_field(mu, alpha)
            if isinstance(mu, LebesgueMeasure):
                if alpha != 0:
                    raise UnsupportedInputError("M_alpha of Lebesgue measure is infinite")
                return np.ones(self.u.shape)
            raise ConfigurationError("this case needs a measure")
        return self._cached(key, compute)

    def function_maximal(self, alpha: float) -> np.ndarray:
        """``M_alpha |u|`` at the cell centers."""
        w = self.u.with_values(self.abs_u, "weight")
        return self._cached(("Mu", alpha), lambda: frac_maximal_grid_field(w, alpha))

    def potential(self, alpha: float) -> np.ndarray:
        return self._cached(("I", alpha), lambda: riesz_potential_field(self.u, alpha).values)

    def transform_norm(self) -> np.ndarray:
        return self._cached("R", lambda: np.linalg.norm(riesz_transform_field(self.u), axis=0))

    def frac_derivative(self, s: float) -> np.ndarray:
        return self._cached(("Ds", s), lambda: positive_frac_derivative_field(self.u, s).values)

    def orlicz_maximal(self, alpha: float, Theta) -> np.ndarray:
        key = ("MTheta", alpha, Theta.a, Theta.b)
        return self._cached(key, lambda: orlicz_maximal_grid(self._weight(), alpha, Theta))

    def _weight(self) -> GridField:
        w = self.weight if self.weight is not None else self.mu
        if not isinstance(w, GridField):
            raise ConfigurationError("this case needs a weight sampled on the grid")
        return w

    # integrals against the measure ------------------------------------

    def samples(self, values: np.ndarray, mu=None) -> tuple:
        """Values and masses of a grid quantity read against ``mu``."""
        mu = self.mu if mu is None else mu
        if isinstance(mu, PointMeasure):
            if len(mu) == 0:
                return np.zeros(0), np.zeros(0)
            f = self.u.with_values(values, "function")
            return np.abs(grid_interpolator(f)(mu.locations)), mu.masses
        if isinstance(mu, GridField):
            return np.abs(values).ravel(), mu.values.ravel() * self.dV
        if isinstance(mu, LebesgueMeasure):
            return np.abs(values).ravel(), np.full(values.size, self.dV)
        raise ConfigurationError("this case needs a measure")

    def mu_integral(self, values: np.ndarray, mu=None) -> float:
        v, m = self.samples(values, mu)
        return math.fsum(v * m)

    def grid_integral(self, values: np.ndarray) -> float:
        return math.fsum(np.ravel(values)) * self.dV


def _lp(values, p, weight, dV) -> float:
    m = np.broadcast_to(weight, np.shape(values)).ravel() * dV
    return lp_norm(np.ravel(values), p, weight=m)


_NO_GRADIENT = {CaseTag.FS_WEAK_MAX, CaseTag.SAWYER_WEAK_FRACMAX, CaseTag.STRONG_MALM,
                CaseTag.HARDY_ATOM, CaseTag.ISOPERIMETRIC_Q}


def _evaluate(case: InequalityCase, ctx: EvalContext, region=None) -> tuple:
    """Return ``(lhs, rhs, levels, extras)`` for one case."""
    tag, P = case.tag, case.params
    n, a = P.n, P.alpha
    dV = ctx.dV
    g = None if tag in _NO_GRADIENT else ctx.grad_norm
    if tag is CaseTag.MZ_GRADIENT:
        return ctx.mu_integral(ctx.u.values), ctx.grid_integral(g * ctx.measure_maximal(1.0)), 0, {}
    if tag in (CaseTag.LORENTZ_SOBOLEV, CaseTag.WEAK_SOBOLEV):
        rhs = ctx.grid_integral(g * ctx.measure_maximal(a) ** (1 / P.q))
        v, m = ctx.samples(ctx.u.values)
        if tag is CaseTag.WEAK_SOBOLEV:
            return weak_norm_thresholds(v, P.q, weight=m), rhs, C.WEAK_THRESHOLDS, {}
        return lorentz_norm(v, P.q, 1.0, weight=m), rhs, 0, {}
    if tag is CaseTag.GNS_MEASURE:
        q = n / (n - 1)
        v, m = ctx.samples(ctx.u.values)
        rhs = ctx.grid_integral(g * ctx.measure_maximal(0.0) ** (1 / q))
        return lp_norm(v, q, weight=m), rhs, 0, {"lorentz_lhs": lorentz_norm(v, q, 1.0, weight=m)}
    if tag is CaseTag.ISOPERIMETRIC_Q:
        if region is None:
            raise ConfigurationError("ISOPERIMETRIC_Q needs a region")
        res = isoperimetric_ratio(ctx.mu, region, a, P.q)
        return res.mass ** (1 / P.q), res.perimeter, 0, {"perturbed_nodes": res.perturbed_nodes}
    if tag in (CaseTag.FS_WEAK_MAX, CaseTag.SAWYER_WEAK_FRACMAX):
        Mf = ctx.function_maximal(a)
        v, m = ctx.samples(Mf)
        lhs = weak_norm_thresholds(v, 1.0, weight=m)
        return lhs, ctx.grid_integral(ctx.abs_u * ctx.measure_maximal(a)), C.WEAK_THRESHOLDS, {}
    if tag is CaseTag.STRONG_MALM:
        lhs = ctx.mu_integral(ctx.function_maximal(a))
        rhs = ctx.grid_integral(ctx.function_maximal(0.0) * ctx.measure_maximal(a))
        return lhs, rhs, 0, {}
    if tag is CaseTag.RIESZ_RIESZ:
        if isinstance(ctx.mu, PointMeasure):
            lhs = math.fsum(abs(riesz_potential(ctx.u, 1.0, x)) * m
                            for x, m in zip(ctx.mu.locations, ctx.mu.masses))
        else:
            lhs = ctx.mu_integral(ctx.potential(1.0))
        return lhs, ctx.grid_integral(ctx.transform_norm() * ctx.measure_maximal(1.0)), 0, {}
    if tag is CaseTag.HARDY_ATOM:
        return ctx.mu_integral(ctx.potential(a)), 1.0, 0, {}
    if tag in (CaseTag.BUMP_PP, CaseTag.BUMP_PQ):
        Theta = bump_function(tag, P)
        V = ctx.orlicz_maximal(a, Theta)
        w = ctx._weight().values
        lhs = _lp(ctx.u.values, P.q, w, dV)
        rhs = _lp(g, P.p, V ** (P.p / P.q), dV)
        return lhs, rhs, 0, {"theta": Theta.to_json()}
    if tag is CaseTag.AL_GT1:
        Psi = bump_function(tag, P)
        w = ctx._weight().values
        lhs = _lp(ctx.potential(a), n / (n - a), w, dV)
        rhs = ctx.grid_integral(ctx.transform_norm() * ctx.orlicz_maximal(0.0, Psi) ** (1 - a / n))
        return lhs, rhs, 0, {"psi": Psi.to_json()}
    if tag is CaseTag.POWER_WEIGHT:
        r = np.linalg.norm(ctx.u.mesh(), axis=-1)
        W = r ** P.lam
        lhs = _lp(ctx.u.values, P.p_star, W, dV)
        rhs = _lp(g, P.p, W ** (1 - P.p / n), dV)
        return lhs, rhs, 0, {}
    if tag is CaseTag.GNS_CLASSICAL:
        return _lp(ctx.u.values, P.p_star, 1.0, dV), _lp(g, P.p, 1.0, dV), 0, {}
    if tag is CaseTag.ALVINO:
        q = n / (n - 1)
        lhs = lorentz_norm(ctx.u.values.ravel(), q, 1.0, weight=np.full(ctx.u.values.size, dV))
        return lhs, ctx.grid_integral(g), 0, {}
    if tag is CaseTag.FRAC_MZ:
        lhs = ctx.mu_integral(ctx.u.values)
        rhs = (1 - P.s) * ctx.grid_integral(ctx.frac_derivative(P.s) * ctx.measure_maximal(P.s))
        return lhs, rhs, 0, {}
    if tag is CaseTag.P_STAR_LOCAL_AVG:
        w = ctx._weight().values
        Mw = ctx.measure_maximal(0.0, ctx._weight())
        lhs = _lp(ctx.u.values, P.p_star, w, dV)
        active = g > 0
        if np.any(active & (w <= 0)):
            return lhs, math.inf, 0, {}
        dens = np.zeros_like(g)
        dens[active] = g[active] ** P.p * Mw[active] ** (P.p / P.n_prime) / w[active] ** (P.p - 1)
        return lhs, ctx.grid_integral(dens) ** (1 / P.p), 0, {}
    raise ConfigurationError(f"no evaluator for {tag}")


def evaluate_case(case: InequalityCase, u: GridField, mu=None, weight: GridField | None = None,
                  region=None, inputs: dict | None = None,
                  context: EvalContext | None = None) -> InequalityReport:
    """Evaluate one catalog case.

    ``mu`` is a :class:`PointMeasure`, a density :class:`GridField` on the grid
    of ``u``, or :class:`LebesgueMeasure` (isoperimetric case). ``weight`` is
    used by cases with a weight that is not a measure argument; when omitted,
    a grid ``mu`` doubles as the weight.
    """
    t0 = time.perf_counter()
    if case.params.n != u.dim:
        raise ConfigurationError(f"params.n = {case.params.n} but the grid has dimension {u.dim}")
    ctx = context or EvalContext(u, mu, weight)
    zero = not np.any(u.values) and case.tag is not CaseTag.ISOPERIMETRIC_Q
    if zero:
        lhs, rhs, levels, extras = 0.0, 0.0, 0, {}
        if case.weak:
            levels = C.WEAK_THRESHOLDS
    else:
        try:
            lhs, rhs, levels, extras = _evaluate(case, ctx, region)
        except SoblabError as exc:
            raise type(exc)(f"{case.tag.value}: {exc}") from exc
    flag = FLAG_INFINITE_RHS if math.isinf(rhs) else ""
    h = u.h
    digest = input_digest(u, mu, weight, region)
    return InequalityReport(
        case=case.tag.value, params=case.params.to_json(), lhs=float(lhs), rhs=float(rhs),
        ratio=float(ratio_of(lhs, rhs)), h=float(h), levels=int(levels),
        runtime_ms=1000 * (time.perf_counter() - t0), input_digest=digest, flag=flag,
        inputs=dict(inputs or {}), extras=extras)


# Suites -----------------------------------------------------------------


@dataclass
class CaseSummary:
    case: str
    count: int
    max_ratio: float
    max_ratio_refined: float | None
    drift: float | None
    finite: bool

    @property
    def stable(self) -> bool:
        return self.finite and (self.drift is None or self.drift < 0.10)


@dataclass
class SuiteResult:
    reports: list
    summary: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(s.stable for s in self.summary.values())


def _measure_members(case: InequalityCase, corpus) -> list:
    kind = case.input_kind
    if kind == "none":
        members = [None]
    elif kind == "positive":
        members = list(corpus.weights)
    elif kind == "density":
        members = [m for m in corpus.measures if m.kind == "density"]
    else:
        members = [m for m in corpus.measures if m.kind != "lebesgue"]
    if case.measure is not None:
        members = [m for m in members if m is not None and m.name == case.measure]
        if not members:
            members = [corpus.measure(case.measure)]
    return members


def _tasks(cases, corpus, hs):
    """``(case index, function, measure, region, h)`` in case-then-input order."""
    out = []
    for ci, case in enumerate(cases):
        if case.tag is CaseTag.ISOPERIMETRIC_Q:
            regions = [r for r in corpus.regions
                       if case.regions is None or r[0] in case.regions]
            members = _measure_members(case, corpus)
            if case.params.alpha == 0 and case.measure is None:
                from .corpus import CorpusMeasure
                members = [CorpusMeasure("lebesgue", "lebesgue")] + members
            for reg in regions:
                for m in members:
                    for h in hs:
                        out.append((ci, None, m, reg, h))
            continue
        fns = [f for f in corpus.functions if case.functions is None or f.name in case.functions]
        for f in fns:
            for m in _measure_members(case, corpus):
                for h in hs:
                    out.append((ci, f, m, None, h))
    return out


def run_suite(cases, corpus, seeds=(0,), h: float = 1 / 16, refine: bool = True,
              threads: int = 1) -> SuiteResult:
    """Evaluate every case on every compatible corpus pair, at ``h`` and ``h/2``.

    Results come back in case-then-input order whatever the thread count.
    ``seeds`` drive the seeded members (atoms for the Hardy case).
    """
    cases = list(cases)
    if not cases:
        return SuiteResult([], {})
    if not corpus.functions:
        raise ConfigurationError("the corpus is empty")
    hs = (h, h / 2) if refine else (h,)
    tasks = _tasks([c for c in cases if c.tag is not CaseTag.HARDY_ATOM], corpus, hs)
    plain = [c for c in cases if c.tag is not CaseTag.HARDY_ATOM]

    # group tasks sharing (function, measure, h) so derived fields are computed once
    groups = {}
    for i, (ci, f, m, reg, hh) in enumerate(tasks):
        key = (f.name if f else None, m.name if m else None, reg[0] if reg else None, hh)
        groups.setdefault(key, []).append(i)

    def run_group(idx):
        ci0, f, m, reg, hh = tasks[idx[0]]
        n = corpus.n
        if f is not None:
            u = f.sample(hh, n, corpus.extent)
        else:
            u = GridField.sample(lambda X: np.zeros(X.shape[:-1]), corpus.extent, hh, dim=n)
        mu = m.build(hh, n, corpus.extent) if m is not None else None
        weight = mu if isinstance(mu, GridField) else None
        ctx = EvalContext(u, mu, weight)
        res = []
        for i in idx:
            ci, _, _, region, _ = tasks[i]
            inputs = {"function": f.name if f else None, "measure": m.name if m else None,
                      "region": region[0] if region else None}
            res.append((i, evaluate_case(plain[ci], u, mu, weight,
                                         region[1] if region else None, inputs, ctx)))
        return res

    results = [None] * len(tasks)
    groups_list = list(groups.values())
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            for chunk in ex.map(run_group, groups_list):
                for i, r in chunk:
                    results[i] = r
    else:
        for g in groups_list:
            for i, r in run_group(g):
                results[i] = r

    reports = list(results)
    for case in cases:
        if case.tag is CaseTag.HARDY_ATOM:
            from .experiments import hardy_suite_reports
            reports.extend(hardy_suite_reports(case, seeds, hs))
    reports.sort(key=lambda r: [c.tag.value for c in cases].index(r.case))
    return SuiteResult(reports, summarize(reports, h if refine else None))


def summarize(reports, coarse_h: float | None = None) -> dict:
    """Per-case max ratio at the coarse and the refined spacing."""
    out = {}
    by_case = {}
    for r in reports:
        by_case.setdefault(r.case, []).append(r)
    for case, rs in by_case.items():
        finite = all(r.ok for r in rs)
        ratios = [r.ratio for r in rs if math.isfinite(r.ratio)]
        if coarse_h is None:
            mx = max(ratios, default=0.0)
            out[case] = CaseSummary(case, len(rs), mx, None, None, finite)
            continue
        coarse = [r.ratio for r in rs if r.h == coarse_h and math.isfinite(r.ratio)]
        fine = [r.ratio for r in rs if r.h != coarse_h and math.isfinite(r.ratio)]
        m1, m2 = max(coarse, default=0.0), max(fine, default=0.0)
        drift = abs(m2 - m1) / m1 if m1 > 0 else (0.0 if m2 == 0 else math.inf)
        out[case] = CaseSummary(case, len(rs), m1, m2, drift, finite)
    return out

