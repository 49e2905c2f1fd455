from __future__ import annotations

import json
from fractions import Fraction as Q

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import lp_vertex_optimum

from tcspace.errors import DimensionMismatch
from tcspace.lp import (
    LinearProgram,
    dual_program,
    lp_to_dict,
    solve_lp,
    verify_lp_certificate,
)


def test_small_max():
    lp = LinearProgram.build("max", [1, 1], [([1, 2], "<=", 4), ([3, 1], "<=", 6)])
    out = solve_lp(lp)
    assert out.status == "optimal"
    assert out.objective == Q(14, 5)
    assert out.primal == [Q(8, 5), Q(6, 5)]
    assert verify_lp_certificate(lp, out).ok
    # shadow prices of a max with <= rows are nonnegative
    assert out.dual == [Q(2, 5), Q(1, 5)]


def test_equality_and_ge_rows():
    lp = LinearProgram.build("min", [2, 3, 1], [([1, 1, 1], "=", 3), ([1, 0, -1], ">=", 1)])
    out = solve_lp(lp)
    assert out.objective == lp_vertex_optimum("min", [2, 3, 1], lp_rows(lp), 3)
    assert verify_lp_certificate(lp, out).ok


def lp_rows(lp):
    return [(c.coeffs, c.relation, c.rhs) for c in lp.constraints]


def test_free_variable():
    # min x - y with y free, x >= 0, x + y >= 2, y <= 5
    lp = LinearProgram.build("min", [1, -1], [([1, 1], ">=", 2), ([0, 1], "<=", 5)],
                             lower_bounds=[0, None])
    out = solve_lp(lp)
    assert out.objective == -5
    assert verify_lp_certificate(lp, out).ok


def test_shifted_lower_bound():
    lp = LinearProgram.build("min", [1], [([1], "<=", 10)], lower_bounds=[3])
    out = solve_lp(lp)
    assert out.primal == [3] and out.objective == 3
    assert verify_lp_certificate(lp, out).ok


def test_infeasible():
    lp = LinearProgram.build("min", [1, 1], [([1, 1], "<=", 1), ([1, 1], ">=", 2)])
    assert solve_lp(lp).status == "infeasible"
    assert solve_lp(lp, dualize=True).status == "infeasible"


def test_unbounded():
    lp = LinearProgram.build("max", [1, 0], [([1, -1], "<=", 1)])
    assert solve_lp(lp).status == "unbounded"
    assert solve_lp(lp, dualize=True).status == "unbounded"


def test_degenerate_cycling_example():
    # a classic instance on which the largest-coefficient rule cycles
    c = [Q(-3, 4), 150, Q(-1, 50), 6]
    rows = [([Q(1, 4), -60, Q(-1, 25), 9], "<=", 0),
            ([Q(1, 2), -90, Q(-1, 50), 3], "<=", 0),
            ([0, 0, 1, 0], "<=", 1)]
    lp = LinearProgram.build("min", c, rows)
    out = solve_lp(lp, dualize=False)
    assert out.status == "optimal"
    assert out.objective == lp_vertex_optimum("min", c, rows, 4) == Q(-1, 20)
    assert verify_lp_certificate(lp, out).ok


def test_redundant_equalities():
    lp = LinearProgram.build("min", [1, 2], [([1, 1], "=", 2), ([2, 2], "=", 4), ([1, 0], "<=", 5)])
    out = solve_lp(lp)
    assert out.objective == 2 and verify_lp_certificate(lp, out).ok


def test_certificate_catches_bad_dual():
    lp = LinearProgram.build("max", [1, 1], [([1, 2], "<=", 4), ([3, 1], "<=", 6)])
    out = solve_lp(lp)
    out.dual = [Q(1, 2), Q(1, 5)]
    rep = verify_lp_certificate(lp, out)
    assert not rep.ok and any("gap" in v or "reduced" in v for v in rep.violations)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        LinearProgram.build("min", [1, 2], [([1], "<=", 1)])


def test_dual_program_value():
    lp = LinearProgram.build("max", [1, 1], [([1, 2], "<=", 4), ([3, 1], "<=", 6)])
    dual, _, offset = dual_program(lp)
    # the min form is min -x1 - x2, so the dual optimum is its value
    assert solve_lp(dual, dualize=False).objective + offset == -Q(14, 5)


def test_lp_dump_is_json():
    lp = LinearProgram.build("min", [1, Q(1, 3)], [([1, 1], ">=", 1)], lower_bounds=[0, None])
    d = json.loads(json.dumps(lp_to_dict(lp)))
    assert d["objective"] == ["1", "1/3"] and d["lower_bounds"] == ["0", None]


small = st.fractions(min_value=-5, max_value=5, max_denominator=3)


@st.composite
def boxed_lps(draw):
    n = draw(st.integers(2, 3))
    m = draw(st.integers(1, 3))
    c = [draw(small) for _ in range(n)]
    rows = [([draw(small) for _ in range(n)], draw(st.sampled_from(["<=", ">=", "="])),
             draw(small)) for _ in range(m)]
    # a box keeps every feasible program bounded
    rows += [([Q(int(i == j)) for j in range(n)], "<=", Q(4)) for i in range(n)]
    return draw(st.sampled_from(["min", "max"])), c, rows, n


@settings(max_examples=120, deadline=None)
@given(boxed_lps())
def test_random_lps_match_vertex_enumeration(prog):
    sense, c, rows, n = prog
    lp = LinearProgram.build(sense, c, rows)
    expect = lp_vertex_optimum(sense, c, rows, n)
    for dualize in (False, True):
        out = solve_lp(lp, dualize=dualize)
        if expect is None:
            assert out.status == "infeasible"
        else:
            assert out.status == "optimal" and out.objective == expect
            assert verify_lp_certificate(lp, out).ok


@settings(max_examples=30, deadline=None)
@given(boxed_lps())
def test_solver_is_deterministic(prog):
    sense, c, rows, _ = prog
    a = solve_lp(LinearProgram.build(sense, c, rows))
    b = solve_lp(LinearProgram.build(sense, c, rows))
    assert a == b
