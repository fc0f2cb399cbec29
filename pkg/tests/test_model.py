from __future__ import annotations

import json
from fractions import Fraction

import pytest

from catalytic.algebra import UniPolynomial
from catalytic.errors import TrivialSystemError, ValidationError
from catalytic.model import (
    CatalyticSystem,
    build_recombination_plan,
    build_step_table,
    canonicalize_and_validate,
    expand_infinite_system,
    load_system,
    parse_catalytic_system,
    serialize_catalytic_system,
    solve_sections,
)
from catalytic.paths import PathQuery, oracle_count
from catalytic.randomsys import random_system

from conftest import catalan, fixture_text


def doc(Q, d=1, L=1, J=1, P=None):
    out = {"d": d, "L": L, "J": J, "Q": [{"s": s, "t": t, "l": l, "j": j, "poly": p} for s, t, l, j, p in Q]}
    if P is not None:
        out["P"] = [{"s": s, "m": m, "poly": p} for s, m, p in P]
    return json.dumps(out)


def steps_at(table, k, s=1, t=1):
    return sorted((st.width, st.rise, st.weight) for st in table.steps(s, t, k))


def test_parse_dyck(dyck):
    assert (dyck.d, dyck.L, dyck.J) == (1, 1, 1)
    assert set(dyck.Q) == {(1, 1, 0, 1), (1, 1, 1, 0)}
    assert dyck.P == {(1, 0): UniPolynomial((1,))}


def test_parse_long_jump(long_jump):
    assert (long_jump.L, long_jump.J) == (1, 3)


def test_negative_coefficient_names_entry():
    with pytest.raises(ValidationError) as err:
        parse_catalytic_system(doc([(1, 1, 0, 1, ["-1/2"])]))
    assert "Q(s=1,t=1,l=0,j=1)" in str(err.value)


@pytest.mark.parametrize(
    "text",
    [
        "{",
        "[]",
        doc([(1, 1, 0, 1, ["1"]), (1, 1, 0, 1, ["2"])]),
        doc([(2, 1, 0, 1, ["1"])]),
        doc([(1, 1, 2, 0, ["1"])]),
        doc([(1, 1, 0, 2, ["1"])]),
        doc([(1, 1, 0, 1, ["x"])]),
        json.dumps({"d": 1, "L": 1, "J": 1, "Q": [], "extra": 1}),
    ],
)
def test_malformed_documents(text):
    with pytest.raises(ValidationError):
        parse_catalytic_system(text)


def test_tightening_note():
    sys, notes = load_system(doc([(1, 1, 0, 3, ["1"]), (1, 1, 1, 0, ["1"])], J=5))
    assert sys.J == 3
    assert any("J=3" in n for n in notes)


def test_dyck_unchanged(dyck):
    sys, notes = canonicalize_and_validate(dyck)
    assert sys == dyck and notes == []


def test_trivial_system():
    with pytest.raises(TrivialSystemError):
        load_system(doc([(1, 1, 0, 1, ["0"])]))


def test_serialize_round_trip(long_jump):
    assert parse_catalytic_system(serialize_catalytic_system(long_jump)) == long_jump


def test_dyck_steps(dyck_table):
    assert steps_at(dyck_table, 0) == [(1, 1, 1)]
    for k in (1, 2, 7):
        assert steps_at(dyck_table, k) == [(1, -1, 1), (1, 1, 1)]


def test_long_jump_steps(long_jump_table):
    assert steps_at(long_jump_table, 0) == [(1, 1, 1)]
    assert steps_at(long_jump_table, 1) == steps_at(long_jump_table, 2) == [(1, -1, 1), (1, 1, 1)]
    for k in (3, 4, 10):
        assert steps_at(long_jump_table, k) == [(1, -2, 1), (1, -1, 1), (1, 1, 1)]


def test_wide_step():
    sys, _ = load_system(doc([(1, 1, 0, 1, ["0", "2"]), (1, 1, 1, 0, ["1"])]))
    table = build_step_table(sys)
    assert (2, -1, 2) in steps_at(table, 1)


def test_step_tables_monotone_and_stable():
    for seed in range(30):
        table = build_step_table(random_system(seed))
        for s in range(1, table.d + 1):
            for t in range(1, table.d + 1):
                for k in range(table.J + 3):
                    low = steps_at(table, k, s, t)
                    high = steps_at(table, k + 1, s, t)
                    assert all(low.count(x) <= high.count(x) for x in low)
                    if k >= table.J:
                        assert low == high


def test_infinite_system_dyck(dyck):
    eqs = [str(e) for e in expand_infinite_system(dyck, 2)]
    assert eqs == ["f_0 = 1 + x f_1", "f_1 = x f_0 + x f_2", "f_2 = x f_1 + x f_3"]


def test_sections_give_catalan(dyck):
    f0 = solve_sections(dyck, 20, 0)[(1, 0)]
    assert list(f0) == [catalan(n // 2) if n % 2 == 0 else 0 for n in range(21)]


def test_sections_match_oracle_with_polynomial_p():
    # P(x, u) = 1 + x u: the recombination weights paths ending at level 1 by x
    sys, _ = load_system(doc([(1, 1, 0, 1, ["1"]), (1, 1, 1, 0, ["1"])], P=[(1, 0, ["1"]), (1, 1, ["0", "1"])]))
    table = build_step_table(sys)
    N = 12
    expected = oracle_count(table, PathQuery(1, 1, 0, 0, 0, N))
    expected = expected + oracle_count(table, PathQuery(1, 1, 0, 1, 0, N)).shift(1)
    assert solve_sections(sys, N, 0)[(1, 0)] == expected


def test_recombination_plan():
    sys, _ = load_system(doc([(1, 1, 0, 1, ["1"]), (1, 1, 1, 0, ["1"])], P=[(1, 0, ["1"]), (1, 2, ["0", "1/2"])]))
    plan = build_recombination_plan(sys)
    assert [(t, m, p.coeffs) for t, m, p in plan.terms] == [(1, 0, (1,)), (1, 2, (0, Fraction(1, 2)))]
    assert plan.required(1, 3) == [(1, 1, 3, 0), (1, 1, 3, 2)]


def test_default_p_is_one():
    sys = parse_catalytic_system(fixture_text("dyck.json"))
    assert isinstance(sys, CatalyticSystem)
    assert sys.P == {(1, 0): UniPolynomial((1,))}
