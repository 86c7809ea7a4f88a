import json
import math

import numpy as np
import pytest

from soblab import Ball, GridField, PointMeasure
from soblab.errors import ConfigurationError, ParameterError, UnsupportedInputError
from soblab.lab import (CaseTag, InequalityCase, InequalityReport, al_gt1_experiment,
                        counterexample_growth, default_params, evaluate_case, hardy_atom_test,
                        hardy_sweep, reports_to_csv, reports_to_json, riesz_riesz_experiment,
                        run_suite, scaling_p_experiment, sharpness_scan, standard_corpus,
                        truncation_upgrade)
from soblab.lab.corpus import Corpus, bump, cone, disk_cone, standard_measures
from soblab.lab.report import CSV_COLUMNS, read_csv_rows, reports_from_json
from soblab.measures import LebesgueMeasure
from soblab.norms import ExperimentParams, lorentz_norm
from soblab.operators import KernelConstants, riesz_potential

BUMP = bump((0.0, 0.0), 1.0)


def small_corpus(functions=("bump0", "cone1"), measures=("delta", "disk")):
    full = standard_corpus()
    return Corpus(2, [f for f in full.functions if f.name in functions],
                  [m for m in full.measures if m.name in measures], full.weights[:1],
                  full.regions[:1])


# catalog ------------------------------------------------------------------------

def test_case_tags_parse():
    assert CaseTag.parse("mz_gradient") is CaseTag.MZ_GRADIENT
    assert CaseTag.parse(CaseTag.ALVINO) is CaseTag.ALVINO
    with pytest.raises(ConfigurationError):
        CaseTag.parse("NOPE")


def test_derived_alpha():
    assert default_params(CaseTag.LORENTZ_SOBOLEV, q=1.5).alpha == pytest.approx(0.5)
    assert default_params(CaseTag.ISOPERIMETRIC_Q).alpha == pytest.approx(0.0)
    assert default_params(CaseTag.MZ_GRADIENT).alpha == pytest.approx(1.0)


@pytest.mark.parametrize("tag,kw,field", [
    ("BUMP_PP", dict(p=1.0, q=1.0), "params.p"),
    ("BUMP_PQ", dict(p=1.5, q=1.2), "params.q"),
    ("LORENTZ_SOBOLEV", dict(q=2.5), "params.q"),
    ("LORENTZ_SOBOLEV", dict(q=1.5, alpha=1.0), "params.alpha"),
    ("POWER_WEIGHT", dict(p=1.5, lam=7.0), "params.lambda"),
    ("AL_GT1", dict(alpha=0.5), "params.alpha"),
    ("FRAC_MZ", dict(s=1.0), "params.s"),
    ("GNS_MEASURE", dict(q=1.5), "params.q"),
])
def test_exponent_relations_rejected(tag, kw, field):
    with pytest.raises(ParameterError, match=field):
        InequalityCase.standard(tag, **kw)


def test_every_standard_case_is_valid():
    for tag in CaseTag:
        assert InequalityCase.standard(tag).tag is tag


# reports ------------------------------------------------------------------------

def test_report_round_trip_and_csv():
    u = GridField.sample(BUMP, 1.5, 1 / 16)
    rep = evaluate_case(InequalityCase.standard("GNS_CLASSICAL"), u)
    back = reports_from_json(reports_to_json([rep]))[0]
    assert back == rep
    rows = read_csv_rows(reports_to_csv([rep]), runtime=True)
    assert tuple(rows[0]) == CSV_COLUMNS
    assert rows[1][0] == "GNS_CLASSICAL"
    assert float(rows[1][4]) == rep.ratio
    assert json.loads(rows[1][1]) == rep.params


def test_report_rejects_unknown_fields():
    u = GridField.sample(BUMP, 1.5, 1 / 16)
    d = evaluate_case(InequalityCase.standard("ALVINO"), u).to_json()
    d["bogus"] = 1
    with pytest.raises(ConfigurationError):
        InequalityReport.from_json(d)


ZERO_INPUTS = {
    "measure": PointMeasure.dirac((0.25, 0.125)),
    "density": None, "positive": None, "none": None,
}


@pytest.mark.parametrize("tag", [t for t in CaseTag
                                 if t not in (CaseTag.ISOPERIMETRIC_Q, CaseTag.HARDY_ATOM)])
def test_zero_function_gives_zero_report(tag):
    u = GridField.sample(lambda X: np.zeros(X.shape[:-1]), 1.5, 1 / 8)
    case = InequalityCase.standard(tag)
    kind = case.input_kind
    mu = ZERO_INPUTS[kind] if kind == "measure" else u.with_values(np.ones(u.shape), "density")
    rep = evaluate_case(case, u, mu if kind != "none" else None)
    assert (rep.lhs, rep.rhs, rep.ratio) == (0.0, 0.0, 0.0)


def test_dimension_mismatch():
    u = GridField.sample(lambda X: np.ones(X.shape[:-1]), 1.0, 1 / 8, dim=1)
    with pytest.raises(ConfigurationError):
        evaluate_case(InequalityCase.standard("GNS_CLASSICAL"), u)


# case values ------------------------------------------------------------------------

def test_gns_classical_cones_approach_sharp_constant():
    case = InequalityCase.standard("GNS_CLASSICAL")
    target = 1 / KernelConstants(2).talenti
    ratios = [evaluate_case(case, GridField.sample(disk_cone(d), 1.25, h)).ratio
              for d, h in ((0.2, 1 / 64), (0.1, 1 / 64), (0.05, 1 / 128))]
    assert np.all(np.diff(ratios) > 0)
    assert ratios[-1] <= target
    assert ratios[-1] == pytest.approx(target, rel=0.05)


def test_mz_gradient_delta_matches_direct_quadrature():
    x0 = np.array([0.25, 0.125])
    u = GridField.sample(BUMP, 1.5, 1 / 64)
    rep = evaluate_case(InequalityCase.standard("MZ_GRADIENT"), u, PointMeasure.dirac(x0))
    X = u.mesh()
    gx, gy = np.gradient(u.values, u.h)
    dist = np.linalg.norm(X - x0, axis=-1)
    rhs = np.sum(np.hypot(gx, gy) / (math.pi * dist)) * u.cell_volume
    # u is read at the atom by linear interpolation of the cell values
    assert rep.lhs == pytest.approx(float(BUMP(x0[None])[0]), rel=1e-3)
    assert rep.rhs == pytest.approx(rhs, rel=1e-9)
    # subrepresentation constant 1/(2 pi) against M_1 delta = 1/(pi |x|)
    assert rep.ratio <= 0.5 * 1.01


def test_isoperimetric_lebesgue_bounded_by_sharp_constant():
    corpus = standard_corpus()
    case = InequalityCase.standard("ISOPERIMETRIC_Q")
    res = run_suite([case], Corpus(2, corpus.functions, [], [], corpus.regions), refine=False)
    leb = [r for r in res.reports if r.inputs["measure"] == "lebesgue"]
    assert len(leb) == 3
    assert max(r.ratio for r in leb) <= 1.05 / KernelConstants(2).talenti


def test_lorentz_lhs_dominates_gns_measure_lhs():
    corpus = small_corpus(("bump0", "bump3", "cone2", "twobump1"), ("delta", "two_atom", "disk",
                                                                     "annulus"))
    lor = InequalityCase.standard("LORENTZ_SOBOLEV", q=2.0)
    gns = InequalityCase.standard("GNS_MEASURE")
    res = run_suite([lor, gns], corpus, refine=False)
    by = {}
    for r in res.reports:
        by.setdefault((r.inputs["function"], r.inputs["measure"]), {})[r.case] = r
    assert len(by) == 16
    for pair in by.values():
        assert pair["LORENTZ_SOBOLEV"].lhs >= pair["GNS_MEASURE"].lhs * (1 - 1e-12)
        assert pair["GNS_MEASURE"].extras["lorentz_lhs"] == pytest.approx(
            pair["LORENTZ_SOBOLEV"].lhs, rel=1e-12)


# suites ----------------------------------------------------------------------------

def test_empty_suite():
    res = run_suite([], standard_corpus())
    assert res.reports == [] and res.ok


def test_empty_corpus_rejected():
    with pytest.raises(ConfigurationError):
        run_suite([InequalityCase.standard("ALVINO")], Corpus(2, [], [], [], []))


def test_suite_is_deterministic_across_thread_counts():
    cases = [InequalityCase.standard(t) for t in ("MZ_GRADIENT", "GNS_CLASSICAL", "HARDY_ATOM")]
    a = run_suite(cases, small_corpus(), seeds=(0, 1), threads=1)
    b = run_suite(cases, small_corpus(), seeds=(0, 1), threads=3)
    assert reports_to_csv(a.reports, runtime=False) == reports_to_csv(b.reports, runtime=False)
    assert [r.case for r in a.reports] == sorted((r.case for r in a.reports),
                                                 key=[c.tag.value for c in cases].index)


def test_mz_suite_random_measures_stable():
    corpus = standard_corpus(random_measures=10, seed=3)
    corpus = Corpus(2, corpus.functions, corpus.measures[4:], [], [])
    res = run_suite([InequalityCase.standard("MZ_GRADIENT")], corpus, h=1 / 16)
    s = res.summary["MZ_GRADIENT"]
    assert s.count == 200 and s.finite
    assert s.drift < 0.10


def test_strong_malm_holds_while_growth_violates():
    res = run_suite([InequalityCase.standard("STRONG_MALM")], small_corpus(), refine=False)
    assert all(math.isfinite(r.ratio) for r in res.reports)
    g = counterexample_growth((4, 8, 16, 32))
    quotients = [r.lhs / r.rhs for r in g.rows]
    assert np.all(np.diff(quotients) > 0)
    assert quotients[-1] > 2 * quotients[0]


# experiments -------------------------------------------------------------------------

def test_counterexample_growth_table():
    g = counterexample_growth((1, 4, 8, 16, 32))
    assert g.rows[0].lhs == 0.0 and g.rows[0].rhs == 0.0
    inc = [r.increment for r in g.rows if r.increment is not None]
    assert len(inc) == 3
    assert all(0.8 <= i / g.expected_increment <= 1.2 for i in inc)
    assert 0.95 <= g.rows[-1].rhs / g.rows[-2].rhs <= 1.05
    assert g.ok
    with pytest.raises(ParameterError):
        counterexample_growth((0.5, 2))


def test_sharpness_scan_table():
    s = sharpness_scan(q=2.0, p=2.0, alpha=0.0)
    assert s.rows[0].x == 8.0
    assert s.spread <= 4
    assert s.integrand_ok()
    # the extra log power makes the normalized quotient grow
    cmp = [r.normalized_cmp / r.normalized for r in s.rows]
    assert np.all(np.diff(cmp) > 0)
    assert s.ok
    with pytest.raises(ParameterError):
        sharpness_scan(xs=[4.0])


def test_truncation_chain_cone():
    u = GridField.sample(cone((0.0, 0.0), 1.0), 1.5, 1 / 32)
    rep = truncation_upgrade(u, p=2.0, q=2.0)
    assert rep.ok
    assert rep.constant == pytest.approx(2 * 8 ** 2 / 2)
    assert len(rep.rows) >= 2
    assert all(r.term >= 0 for r in rep.rows)


def test_truncation_dyadic_reindexing():
    u = GridField.sample(cone((0.1, 0.0), 1.2), 1.5, 1 / 32)
    a = truncation_upgrade(u, p=2.0, q=1.5)
    b = truncation_upgrade(u.with_values(2 * u.values), p=2.0, q=1.5)
    assert [r.k + 1 for r in a.rows] == [r.k for r in b.rows]
    for ra, rb in zip(a.rows, b.rows):
        assert rb.level_mass == ra.level_mass
        assert rb.term == pytest.approx(4 * ra.term, rel=1e-12)
    assert b.lhs == pytest.approx(4 * a.lhs, rel=1e-12)
    assert b.rhs == pytest.approx(4 * a.rhs, rel=1e-12)


def test_truncation_rejects_negative_and_zero():
    u = GridField.sample(BUMP, 1.5, 1 / 16)
    with pytest.raises(ParameterError):
        truncation_upgrade(u.with_values(-u.values))
    z = truncation_upgrade(u.with_values(np.zeros(u.shape)))
    assert z.lhs == 0.0 and z.ok


def test_scaling_chain():
    u = GridField.sample(BUMP, 1.5, 1 / 32)
    rep = scaling_p_experiment(u, p=4 / 3)
    assert rep.ok
    assert rep.ratios["exponent_identity"] == pytest.approx(0.0, abs=1e-12)
    w = u.with_values(np.linalg.norm(u.mesh(), axis=-1) ** 0.5, "weight")
    assert scaling_p_experiment(u, w, p=4 / 3).ok
    z = scaling_p_experiment(u.with_values(np.zeros(u.shape)), p=4 / 3)
    assert z.lhs == 0.0 and z.ratios == {}
    with pytest.raises(ParameterError):
        scaling_p_experiment(u, p=2.0)


def test_hardy_atom_one_dimension():
    mu = GridField.sample(lambda X: 1 + 0 * X[..., 0], 4.0, 1 / 16, dim=1, role="density")
    rep = hardy_atom_test(Ball((0.0,), 1.0), mu, 0.5, profile="step")
    assert abs(rep.mean) <= 1e-12
    assert rep.sup_atom == pytest.approx(1 / rep.w_ball, rel=1e-12)
    assert math.isfinite(rep.total) and rep.total > 0


def test_hardy_zero_atom_and_unsupported_ball():
    mu = GridField.sample(lambda X: np.ones(X.shape[:-1]), 2.0, 1 / 16, role="density")
    rep = hardy_atom_test(Ball((0.0, 0.0), 0.5), mu, 1.0, profile=lambda Y: 0 * Y[..., 0])
    assert rep.total == 0.0
    zero = mu.with_values(np.zeros(mu.shape))
    with pytest.raises(UnsupportedInputError):
        hardy_atom_test(Ball((0.0, 0.0), 0.5), zero, 1.0)


def test_hardy_sweep_scale_stable():
    sw = hardy_sweep(atoms=3, cells_per_radius=4, half_width=4.0)
    for row in sw.reports:
        for rep in row:
            assert abs(rep.mean) <= 1e-12
    assert math.isfinite(sw.max_total)
    assert sw.scale_spread < 2


def test_riesz_riesz_delta():
    f = GridField.sample(BUMP, 1.5, 1 / 32)
    rep = riesz_riesz_experiment(f, PointMeasure.dirac((0.0, 0.0)))
    assert rep.lhs == pytest.approx(riesz_potential(f, 1.0, (0.0, 0.0)), rel=1e-12)
    assert 0 < rep.rhs < math.inf
    assert rep.extras["mz_cross_ratio"] == pytest.approx(rep.ratio, rel=0.05)
    z = riesz_riesz_experiment(f.with_values(np.zeros(f.shape)), PointMeasure.dirac((0, 0)))
    assert z.ratio == 0.0


def test_riesz_riesz_disk_density_matches_mz_regime():
    f = GridField.sample(BUMP, 1.5, 1 / 32)
    mu = f.with_values((np.linalg.norm(f.mesh(), axis=-1) < 1).astype(float), "density")
    rep = riesz_riesz_experiment(f, mu)
    assert rep.extras["mz_cross_ratio"] == pytest.approx(rep.ratio, rel=0.05)


def test_al_gt1_two_computations_agree():
    w = GridField.sample(lambda X: (np.linalg.norm(X, axis=-1) < 2).astype(float), 2.5, 1 / 16,
                         role="density")
    f = GridField.sample(BUMP, 2.5, 1 / 16)
    rep = al_gt1_experiment(f, w)
    assert rep.extras["agreement"] <= 0.03
    assert 0 < rep.ratio < math.inf
    z = al_gt1_experiment(f.with_values(np.zeros(f.shape)), w)
    assert z.ratio == 0.0
    with pytest.raises(ParameterError):
        al_gt1_experiment(f, w, alpha=1.0)


def test_al_gt1_a1_mode():
    f = GridField.sample(BUMP, 2.5, 1 / 16)
    w = f.with_values(np.ones(f.shape), "density")
    rep = al_gt1_experiment(f, w, a1=True)
    assert rep.extras["a1"] is True
    assert rep.extras["agreement"] <= 0.03
