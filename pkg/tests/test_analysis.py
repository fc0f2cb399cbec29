from __future__ import annotations

import json
import math
import random

import numpy as np
import pytest

from catalytic.algebra import TruncatedSeries, fixed_point_solve
from catalytic.analysis import (
    NumericSystem,
    analyze_catalytic,
    analyze_system,
    asymptotic_constants,
    check_domination,
    compute_period,
    empirical_asymptotics,
    find_dominant_singularity,
    minimal_solution,
    numeric_series,
    ratio_test_rho,
    residual_certificate,
    scc_condensation,
    spectral_radius,
    target_system,
)
from catalytic.grammar import FVar, classify_prime_walks, parse_grammar
from catalytic.model import load_system, solve_sections
from catalytic.randomsys import random_system

from conftest import catalan

DYCK_CORE = "F = 1 + A F\nA = x^2 F\n"
CATALAN = "y = 1 + x y y\n"
SQRT_DYCK = 2 * math.sqrt(2) / math.sqrt(math.pi)


def names(comp):
    return sorted(map(str, comp))


def var(sys, name):
    return next(v for v in sys.variables if str(v) == name)


def test_scc_single_equation():
    dag = scc_condensation(parse_grammar(CATALAN))
    assert [names(c) for c in dag.components] == [["y"]]


def test_scc_chain_order():
    sys = parse_grammar("y1 = 1 + x y2\ny2 = 1 + x y2\n")
    dag = scc_condensation(sys, var(sys, "y1"))
    assert [names(c) for c in dag.components] == [["y2"], ["y1"]]
    assert dag.edges == {(1, 0)} and dag.designated == 1


def test_dyck_critical_point():
    sys = parse_grammar(DYCK_CORE)
    cp = find_dominant_singularity(sys)
    assert cp.rho == pytest.approx(0.5, abs=1e-13)
    assert cp.value(var(sys, "F")) == pytest.approx(2.0, abs=1e-12)
    assert cp.value(var(sys, "A")) == pytest.approx(0.5, abs=1e-12)
    lo, hi = cp.rho_interval
    assert cp.certified and lo <= 0.5 <= hi and hi - lo <= 1e-10


def test_catalan_critical_point():
    cp = find_dominant_singularity(parse_grammar(CATALAN))
    assert cp.rho == pytest.approx(0.25, abs=1e-13)
    assert cp.y[0] == pytest.approx(2.0, abs=1e-6)


def test_long_jump_critical_point(long_jump):
    ts = target_system(long_jump)
    sys = ts.system
    cp = find_dominant_singularity(sys, [v for v in sys.variables if str(v) != "f_0"])
    ns = NumericSystem(sys)
    cert = residual_certificate(ns, cp.rho, cp.y)
    assert cert["fixed_point_residual"] < 1e-12
    assert cert["det_bound"] < 1e-12
    # coefficient ratios of the section F(x, 0), from the linear system alone
    ser = solve_sections(long_jump, 400, 0)[(1, 0)]
    assert abs(ratio_test_rho(ser) - cp.rho) < 1e-3


def test_residual_certificates_bound():
    sys = parse_grammar(DYCK_CORE)
    cp = find_dominant_singularity(sys)
    cert = residual_certificate(NumericSystem(sys), cp.rho, cp.y)
    assert cert["fixed_point_residual"] < 1e-10 and cert["det_bound"] < 1e-10


def test_period_examples(dyck, long_jump):
    table_sys = target_system(dyck).system
    sol = fixed_point_solve(table_sys, 40)
    assert compute_period(sol.by_name("F_0_0_0")).M == 2
    ts = target_system(long_jump)
    sol = fixed_point_solve(ts.system, 40)
    from catalytic.grammar import build_finite_system
    from catalytic.model import build_step_table

    table = build_step_table(long_jump)
    fin = fixed_point_solve(build_finite_system(table, classify_prime_walks(table)), 40)
    f11 = fin[FVar(1, 1, 1, 1, 1, False)]
    assert f11[2] != 0 and f11[3] != 0
    assert compute_period(f11).M == 1
    assert compute_period(TruncatedSeries((0, 0, 5))).degenerate
    assert compute_period(TruncatedSeries((0, 0, 0))).degenerate


def test_dyck_constants():
    sys = parse_grammar(DYCK_CORE)
    cp = find_dominant_singularity(sys)
    F = var(sys, "F")
    period = compute_period(fixed_point_solve(sys, 30)[F])
    c = asymptotic_constants(sys, cp, F, period)
    assert c[0] == pytest.approx(SQRT_DYCK, abs=1e-6)
    assert c[1] == 0.0


def test_catalan_constant():
    sys = parse_grammar(CATALAN)
    cp = find_dominant_singularity(sys)
    y = var(sys, "y")
    c = asymptotic_constants(sys, cp, y, compute_period(fixed_point_solve(sys, 30)[y]))
    assert c == {0: pytest.approx(1 / math.sqrt(math.pi), abs=1e-6)}


def test_odd_phase_constant():
    sys = parse_grammar("z = x y\ny = 1 + x^2 y y\n")
    rep = analyze_system(sys, var(sys, "z"), empirical_depth=2000)
    assert (rep.period, rep.phase) == (2, 1)
    assert rep.constants[0] == 0.0
    assert rep.constants[1] == pytest.approx(math.sqrt(2) / math.sqrt(math.pi), abs=1e-6)


def test_empirical_dyck_exact_coefficients():
    N = 4000
    ser = TruncatedSeries(tuple(catalan(n // 2) if n % 2 == 0 else 0 for n in range(N + 1)))
    est = empirical_asymptotics(ser, 0.5, 2)
    assert est.status == "ok"
    assert abs(est.constants[0] - SQRT_DYCK) <= 0.01 * SQRT_DYCK
    assert est.constants[1] == 0
    assert abs(est.exponent + 1.5) < 0.05


def test_empirical_catalan_float_series():
    sys = parse_grammar(CATALAN)
    ser = numeric_series(sys, 4000, 0.25)[sys.variables[0]]
    est = empirical_asymptotics(ser, 0.25, 1)
    assert abs(est.constants[0] - 1 / math.sqrt(math.pi)) <= 0.01 / math.sqrt(math.pi)


def test_numeric_series_matches_exact():
    sys = parse_grammar("a = 1 + x a b + 1/3 x^2 b\nb = x + x a a\n")
    exact = fixed_point_solve(sys, 30)
    flt = numeric_series(sys, 30, 0.5)
    for v in sys.variables:
        for n in range(31):
            assert flt[v].b[n] == pytest.approx(float(exact[v][n]) * 0.5**n, rel=1e-12)


def test_insufficient_depth():
    est = empirical_asymptotics(TruncatedSeries(tuple([1] * 10)), 1.0, 1)
    assert est.status == "insufficient-depth"


def test_jacobian_against_finite_differences():
    rng = random.Random(1)
    for seed in (0, 5, 9):
        ts = target_system(random_system(seed))
        ns = NumericSystem(ts.system)
        x = 0.05
        y = np.array([rng.uniform(0.1, 1.0) for _ in range(ns.n)])
        J = ns.Jy(x, y)
        h = 1e-6
        for j in range(ns.n):
            e = np.zeros(ns.n)
            e[j] = h
            fd = (ns.F(x, y + e) - ns.F(x, y - e)) / (2 * h)
            assert np.allclose(J[:, j], fd, rtol=1e-6, atol=1e-8)


def test_spectral_radius_increases(long_jump):
    sys = target_system(long_jump).system
    ns = NumericSystem(sys)
    rho = find_dominant_singularity(sys).rho
    radii = [spectral_radius(ns.Jy(x, minimal_solution(ns, x))) for x in np.linspace(0.05, 0.99, 12) * rho]
    assert all(a < b for a, b in zip(radii, radii[1:]))


@pytest.mark.parametrize("fixture", ["dyck", "long_jump"])
def test_domination(fixture, request):
    sys = target_system(request.getfixturevalue(fixture)).system
    assert check_domination(sys, fixed_point_solve(sys, 40)) == []


@pytest.mark.parametrize("fixture", ["dyck", "long_jump"])
def test_constants_agree_with_empirical(fixture, request):
    rep = analyze_catalytic(request.getfixturevalue(fixture))
    for m, c in rep.constants.items():
        emp = rep.diagnostics["empirical_constants"][str(m)]
        assert abs(c - emp) <= 0.02 * max(c, 1e-12)
    assert rep.diagnostics["propagation_max_rel_dev"] < 1e-3


def test_dyck_report_json(dyck):
    doc = analyze_catalytic(dyck).to_json()
    assert doc["format_version"] == 1
    assert doc["period"] == 2
    assert doc["constants"][1] == {"m": 1, "c": 0.0}
    json.dumps(doc)


def test_pole_for_linear_component():
    sys = parse_grammar("y = 1 + 2 x y\n")
    rep = analyze_system(sys, sys.variables[0], empirical_depth=500)
    assert rep.kind == "pole"
    assert rep.rho == pytest.approx(0.5, rel=1e-9)
    assert rep.diagnostics["empirical_constants"]["0"] == pytest.approx(1.0, rel=1e-6)


def test_not_strongly_connected_banner():
    text = '{"d":1,"L":1,"J":0,"Q":[{"s":1,"t":1,"l":1,"j":0,"poly":["1"]},{"s":1,"t":1,"l":0,"j":0,"poly":["1"]}]}'
    rep = analyze_catalytic(load_system(text)[0], empirical_depth=1000)
    assert not rep.hypothesis_met
    assert rep.kind == "empirical-only" and rep.constants == {}
    assert rep.render().startswith("NOTE:")
    assert rep.rho == pytest.approx(1.0, rel=1e-9)  # F(x, 0) = 1/(1 - x)
    assert abs(rep.exponent) < 0.05


def test_component_verdicts(long_jump):
    rep = analyze_catalytic(long_jump, empirical_depth=500)
    verdicts = {tuple(c["component"]): c["verdict"] for c in rep.components}
    assert verdicts[("A_0_0", "B_1", "D_1", "F_0_0_0", "F_1_2_1")] == "square-root"
    assert verdicts[("f_0",)] == "inherited"
