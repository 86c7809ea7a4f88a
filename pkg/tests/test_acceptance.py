"""The fifteen acceptance criteria, one test each, at their stated tolerances.

Every test prints a single ``criterion N: PASS|FAIL ...`` line to the terminal
(outside pytest's capture) before asserting.
"""
import math
import time

import numpy as np
import pytest

from soblab import Ball, GridField, PointMeasure
from soblab.dyadic import containing_cube, grid_dyadic_maximal, hausdorff_content_bound, \
    sparse_family, stopping_cubes
from soblab.geometry import PolygonSet, coarea_check, isoperimetric_ratio
from soblab.lab import (CaseTag, InequalityCase, counterexample_growth, hardy_sweep, run_suite,
                        sharpness_scan, standard_corpus, truncation_upgrade)
from soblab.lab.corpus import Corpus
from soblab.measures import LebesgueMeasure, measure_ball
from soblab.norms import YoungFunction, bpq_analytic, bpq_check, lorentz_norm, lp_norm
from soblab.operators import (KernelConstants, frac_maximal_point, gradient, riesz_potential,
                              riesz_potential_field)


@pytest.fixture
def verdict(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, f"criterion {number}: {detail}"
    return emit


def sweep(mu, alpha, x, count=2000):
    """Dense log sweep of closed-ball radii, plus every atom distance."""
    d = np.linalg.norm(mu.locations - x, axis=1)
    d = d[d > 0]
    radii = np.unique(np.r_[np.geomspace(d.min() / 10, d.max() * 10, count), d])
    vn = KernelConstants(mu.dim).v_n
    return max(r ** (alpha - mu.dim) * measure_ball(mu, Ball(x, r)) / vn for r in radii)


def test_criterion_01_exactness_oracle(verdict):
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(100):
        n = 1 + i % 2
        k = int(rng.integers(1, 8))
        mu = PointMeasure(rng.uniform(-2, 2, (k, n)), rng.uniform(0.1, 2.0, k))
        x = rng.uniform(-3, 3, n)
        alpha = float(rng.uniform(0, n - 0.05))
        exact = frac_maximal_point(mu, alpha, x)
        worst = max(worst, abs(exact / sweep(mu, alpha, x) - 1))
    dt = time.perf_counter() - t0
    verdict(1, worst <= 1e-12 and dt < 10, f"max rel err {worst:.2e}, {dt:.1f} s")


def test_criterion_02_closed_form_pins(verdict):
    kc = KernelConstants(2)
    rng = np.random.default_rng(102)
    X = rng.uniform(-5, 5, (200, 2))
    delta = PointMeasure.dirac((0.0, 0.0))
    m_err = max(abs(frac_maximal_point(delta, 1.0, x) * math.pi * np.linalg.norm(x) - 1)
                for x in X)
    disk = GridField.sample(lambda Y: (np.linalg.norm(Y, axis=-1) < 1).astype(float), 1.25,
                            1 / 128, role="weight")
    # the origin is a cell corner; average the four adjacent centers
    pot = np.mean([riesz_potential(disk, 1.0, (sx / 256, sy / 256))
                   for sx in (-1, 1) for sy in (-1, 1)])
    g_err = abs(kc.gamma(1.0) / (2 * math.pi) - 1)
    c_err = abs(kc.talenti / (2 * math.sqrt(math.pi)) - 1)
    ok = m_err <= 1e-12 and abs(pot - 1) <= 0.01 and g_err <= 1e-12 and c_err <= 1e-12
    verdict(2, ok, f"M1 delta rel err {m_err:.1e}, I1(1_B)(0) = {pot:.5f}, "
                   f"gamma(1) err {g_err:.1e}, c2 err {c_err:.1e}")


def test_criterion_03_one_third_trick(verdict):
    rng = np.random.default_rng(103)
    t0 = time.perf_counter()
    failures = 0
    for _ in range(1000):
        n = int(rng.integers(1, 3))
        c = rng.uniform(-100, 100, n)
        r = 10.0 ** rng.uniform(-3, 3)
        _, Q = containing_cube(Ball(c, r))
        ok = np.all(Q.lower <= c - r) and np.all(c + r < Q.upper) and Q.side <= 12 * r
        failures += not ok
    dt = time.perf_counter() - t0
    verdict(3, failures == 0 and dt < 1, f"{failures} failures in 1000 balls, {dt:.2f} s")


def test_criterion_04_hausdorff_content(verdict):
    rng = np.random.default_rng(104)
    failures = checked = 0
    for i in range(50):
        n = 1 + i % 2
        k = int(rng.integers(1, 8))
        mu = PointMeasure(rng.uniform(-2, 2, (k, n)), rng.uniform(0.1, 2.0, k))
        alpha = float(rng.uniform(0, n - 0.05))
        for lam in np.geomspace(0.05, 20, 10):
            s, bound = hausdorff_content_bound(mu, alpha, float(lam))
            failures += not s <= bound
            checked += 1
    verdict(4, failures == 0, f"{failures} failures in {checked} (measure, lambda) pairs")


def test_criterion_05_sparse_domination(verdict):
    rng = np.random.default_rng(105)
    failures = []
    for i in range(20):
        v = rng.random((32, 32)) ** 3 * (rng.random((32, 32)) < 0.4)
        f = GridField(np.zeros(2), 1 / 16, v, "weight")
        alpha = [0.0, 0.5, 1.0][i % 3]
        fam = sparse_family(f, alpha)
        M = grid_dyadic_maximal(f, alpha)
        ok = bool(np.all(M <= fam.dominating_sum() * (1 + 1e-12)))
        ok &= all(fam.major_count(j) >= 0.5 * fam.cell_count(j) for j in range(len(fam)))
        own = fam.owner()
        counts = np.bincount(own[own >= 0], minlength=len(fam))
        ok &= all(counts[j] == fam.major_count(j) for j in range(len(fam)))
        if not ok:
            failures.append(i)
    verdict(5, not failures, f"20 fields, constant 2^(n+1) = {fam.constant:g}, "
                             f"failures {failures}")


def test_criterion_06_coarea(verdict):
    corpus = standard_corpus()
    t0 = time.perf_counter()
    rows = []
    for name in ("cone0", "cone1", "bump0", "bump1", "bump4"):
        f = corpus.function(name)
        errs = [coarea_check(f.sample(h)).rel_err for h in (1 / 32, 1 / 64, 1 / 128)]
        rows.append((name, errs))
    dt = time.perf_counter() - t0
    # below 1e-4 the level-set quadrature floor dominates, so the ordering is noise
    ok = all(e[-1] <= 0.02 and e[1] <= 1.1 * e[0] + 1e-4 and e[2] <= 1.1 * e[1] + 1e-4
             for _, e in rows)
    worst = max(e[-1] for _, e in rows)
    table = "; ".join(f"{n} " + "/".join(f"{x:.1e}" for x in e) for n, e in rows)
    verdict(6, ok and dt < 60, f"max rel err at h=1/128 {worst:.2e}, {dt:.1f} s [{table}]")


def test_criterion_07_isoperimetric_pin(verdict):
    E = PolygonSet.regular(256)
    ratio = isoperimetric_ratio(LebesgueMeasure(), E, 0.0, 2.0).ratio
    target = 1 / (2 * math.sqrt(math.pi))
    err = abs(ratio / target - 1)
    verdict(7, err <= 5e-3, f"ratio {ratio:.6f} vs {target:.6f}, rel err {err:.1e}")


def test_criterion_08_subrepresentation(verdict):
    corpus = standard_corpus()
    worst = -math.inf
    smooth = [f for f in corpus.functions if f.smooth]
    for f in smooth:
        u = f.sample(1 / 32)
        g = u.with_values(np.linalg.norm(gradient(u), axis=0), "weight")
        I = riesz_potential_field(g, 1.0).values
        excess = (np.abs(u.values) - I) / np.abs(u.values).max()
        worst = max(worst, float(excess.max()))
    verdict(8, worst <= 5e-3, f"{len(smooth)} smooth functions, max (|u| - I1|grad u|)/|u|_inf "
                              f"= {worst:.2e}")


def test_criterion_09_mz_suite(verdict):
    corpus = standard_corpus(random_measures=10, seed=9)
    corpus = Corpus(2, corpus.functions, corpus.measures[4:], [], [])
    t0 = time.perf_counter()
    res = run_suite([InequalityCase.standard(CaseTag.MZ_GRADIENT)], corpus, h=1 / 16, threads=2)
    dt = time.perf_counter() - t0
    s = res.summary["MZ_GRADIENT"]
    ok = s.count == 200 and s.finite and math.isfinite(s.max_ratio) and s.drift < 0.10
    verdict(9, ok and dt < 300, f"100 pairs at h and h/2, max ratio {s.max_ratio:.4f}, "
                                f"drift {s.drift:.3f}, {dt:.1f} s")


def test_criterion_10_counterexample(verdict):
    g = counterexample_growth((4, 8, 16, 32))
    inc = [r.increment / g.expected_increment for r in g.rows if r.increment is not None]
    rhs_var = abs(g.rows[-1].rhs / g.rows[-2].rhs - 1)
    ok = all(abs(i - 1) <= 0.2 for i in inc) and rhs_var < 0.05
    verdict(10, ok, "increment / expected = " + ", ".join(f"{i:.3f}" for i in inc)
            + f"; rhs variation {rhs_var:.3f}")


def test_criterion_11_sharpness(verdict):
    s = sharpness_scan(q=2.0, p=2.0, alpha=0.0, epsilon=0.0, epsilon_cmp=1.0)
    last = s.rows[-1]
    # the dual-integrand lower bound, normalized by the divergent rate 1/(|x|^n log|x|),
    # is what becomes strictly smaller once the bump carries the extra log power
    ok = s.spread <= 4 and last.x == 512 and last.divergence_cmp < last.divergence
    verdict(11, ok, f"spread {s.spread:.3f} over |x| in [8, 512]; at |x| = 512 normalized "
                    f"integrand {last.divergence_cmp:.4g} (eps=1) < {last.divergence:.4g} (eps=0)")


def test_criterion_12_truncation(verdict):
    corpus = standard_corpus()
    failures = []
    for f in corpus.functions:
        u = f.sample(1 / 32)
        for p, q in ((1, 2), (2, 2), (2, 3)):
            rep = truncation_upgrade(u, p=p, q=q)
            if not (rep.ok and rep.constant == (q / p) * 2.0 ** (3 * p)):
                failures.append((f.name, p, q))
    verdict(12, not failures, f"{len(corpus.functions)} functions x 3 (p, q), "
                              f"failures {failures}")


def _rearrangement(vals, m, r, s):
    order = np.argsort(-vals, kind="stable")
    v, w = vals[order], m[order]
    C = np.cumsum(w)
    Cp = np.r_[0.0, C[:-1]]
    if math.isinf(s):
        return float(np.max(v * C ** (1 / r)))
    return math.fsum(v ** s * (r / s) * (C ** (s / r) - Cp ** (s / r))) ** (1 / s)


def test_criterion_13_lorentz(verdict):
    rng = np.random.default_rng(113)
    worst_id = worst_oracle = 0.0
    nest_fail = 0
    for _ in range(200):
        vals = rng.choice(rng.uniform(0.1, 3.0, 5), 40) * (rng.random(40) < 0.8)
        m = rng.uniform(0.05, 1.0, 40)
        for r in (1.0, 1.5, 2.0, 3.0):
            strong = lp_norm(vals, r, weight=m)
            weak = lorentz_norm(vals, r, math.inf, weight=m)
            one = lorentz_norm(vals, r, 1.0, weight=m)
            worst_id = max(worst_id, abs(lorentz_norm(vals, r, r, weight=m) / strong - 1))
            for s, val in ((1.0, one), (math.inf, weak)):
                worst_oracle = max(worst_oracle, abs(val / _rearrangement(vals, m, r, s) - 1))
            nest_fail += not (weak <= strong * (1 + 1e-10) and strong <= one * (1 + 1e-10))
    ok = worst_id <= 1e-10 and worst_oracle <= 1e-10 and nest_fail == 0
    verdict(13, ok, f"layer cake err {worst_id:.1e}, rearrangement err {worst_oracle:.1e}, "
                    f"nesting failures {nest_fail}")


def test_criterion_14_hardy_atoms(verdict):
    t0 = time.perf_counter()
    sw = hardy_sweep(radii=(0.25, 0.5, 1.0), atoms=20)
    means = max(abs(r.mean) for row in sw.reports for r in row)
    ok = math.isfinite(sw.max_total) and sw.scale_spread <= 2 and means <= 1e-12
    verdict(14, ok, f"60 atoms, max |I_a a|_L1(mu) {sw.max_total:.4f}, scale spread "
                    f"{sw.scale_spread:.3f}, max |mean| {means:.1e}, "
                    f"{time.perf_counter() - t0:.1f} s")


BPQ_CASES = [
    (1.0, 0.0, 2.0, 2.0), (1.5, 0.0, 2.0, 2.0), (2.5, 0.0, 2.0, 2.0), (3.0, 1.0, 2.0, 2.0),
    (2.0, 1.0, 2.0, 2.0), (2.0, -1.5, 2.0, 2.0), (2.0, -0.5, 2.0, 2.0), (2.0, 0.0, 2.0, 2.0),
    (1.5, -1.2, 1.5, 1.5), (1.5, -0.4, 1.5, 1.5), (3.0, -2.0, 3.0, 4.0), (3.0, -0.5, 3.0, 4.0),
    (1.2, 0.5, 1.5, 3.0), (2.0, 0.5, 1.5, 3.0), (1.5, 2.0, 1.5, 3.0), (4.0, 0.0, 3.0, 1.5),
    (2.5, -1.0, 3.0, 2.0), (1.0, 3.0, 1.5, 2.0), (2.2, 0.0, 2.0, 5.0), (1.8, 0.0, 2.0, 5.0),
]


def test_criterion_15_bpq(verdict):
    wrong = []
    borderline = set()
    for a, b, p, q in BPQ_CASES:
        Psi = YoungFunction(a, b)
        expected = bpq_analytic(Psi, p, q)
        # classify both with the closed-form shortcut and with the plain fitted path
        typed = bpq_check(Psi, p, q).converges
        fitted = bpq_check(lambda t, P=Psi: P(t), p, q).converges
        if typed != expected or fitted != expected:
            wrong.append((a, b, p, q))
        if a == p and b != 0:
            borderline.add(expected)
    ok = not wrong and borderline == {True, False}
    verdict(15, ok, f"{len(BPQ_CASES)} combinations, both borderline log outcomes covered, "
                    f"misclassified {wrong}")
