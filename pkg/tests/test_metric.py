from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tcspace.errors import (
    DuplicateLabel,
    NegativeOrZeroOffDiagonal,
    NonSymmetric,
    NonZeroDiagonal,
    RationalSyntaxError,
    SpaceSyntaxError,
    TriangleViolation,
    UnknownLabel,
)
from tcspace.metric import (
    as_rational,
    induced_subspace,
    parse_space,
    serialize_space,
    space_to_dict,
    validate_metric,
)


def test_two_point_space():
    sp = validate_metric(["p", "q"], [[0, 1], [1, 0]])
    assert sp.d("p", "q") == 1 and len(sp) == 2 and "p" in sp


def test_triangle_violation_reports_witness():
    with pytest.raises(TriangleViolation) as exc:
        validate_metric(["u", "v", "w"], [[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    assert exc.value.points == ("u", "v", "w")


def test_line_is_metric(line4):
    # every triple checked directly, independent of the validator's scan order
    pts = [0, 1, 10, 11]
    for a in pts:
        for b in pts:
            for c in pts:
                assert abs(a - c) <= abs(a - b) + abs(b - c)
    assert line4.d("0", "11") == 11


@pytest.mark.parametrize("table, err", [
    ([[0, 1], [2, 0]], NonSymmetric),
    ([[0, 0], [0, 0]], NegativeOrZeroOffDiagonal),
    ([[0, -1], [-1, 0]], NegativeOrZeroOffDiagonal),
    ([[1, 1], [1, 0]], NonZeroDiagonal),
])
def test_axiom_violations(table, err):
    with pytest.raises(err):
        validate_metric(["p", "q"], table)


def test_duplicate_label():
    with pytest.raises(DuplicateLabel):
        validate_metric(["p", "p"], [[0, 1], [1, 0]])


def test_shape_mismatch():
    with pytest.raises(SpaceSyntaxError):
        validate_metric(["p", "q"], [[0, 1]])


def test_rationals_are_exact():
    assert as_rational("0.1") == Fraction(1, 10)
    assert as_rational("9/2") == Fraction(9, 2)
    assert as_rational(3) == 3
    for bad in (0.5, "1/0", "x", "", True, None):
        with pytest.raises(RationalSyntaxError):
            as_rational(bad)


def test_induced_subspace(two_triangles):
    sub = induced_subspace(two_triangles, ["a2", "a1"])
    assert sub.points == ("a1", "a2") and sub.d("a1", "a2") == 1
    assert induced_subspace(two_triangles, ["a1", "b1"]).d("a1", "b1") == 10
    assert induced_subspace(two_triangles, two_triangles.points) == two_triangles
    with pytest.raises(UnknownLabel):
        induced_subspace(two_triangles, ["zz"])


def test_parse_roundtrip_and_decimals():
    text = '{"points": ["a", "b", "c"], "distances": [[0, "0.5", 1], ["1/2", 0, "3/4"], [1, "0.75", 0]]}'
    sp = parse_space(text)
    assert sp.d("a", "b") == Fraction(1, 2)
    again = serialize_space(sp)
    assert serialize_space(parse_space(again)) == again
    assert space_to_dict(sp)["distances"][1][2] == "3/4"


@pytest.mark.parametrize("text", ["{", "[]", '{"points": ["a"]}', '{"points": "a", "distances": []}'])
def test_parse_rejects_garbage(text):
    with pytest.raises(SpaceSyntaxError):
        parse_space(text)


def test_unknown_label(two_triangles):
    with pytest.raises(UnknownLabel):
        two_triangles.d("a1", "nope")


@st.composite
def line_spaces(draw):
    xs = draw(st.lists(st.fractions(min_value=-20, max_value=20, max_denominator=6),
                       min_size=3, max_size=7, unique=True))
    return [f"p{i}" for i in range(len(xs))], [[abs(a - b) for b in xs] for a in xs]


@settings(max_examples=60, deadline=None)
@given(line_spaces(), st.data())
def test_injected_triangle_violation_is_caught(space, data):
    labels, table = space
    validate_metric(labels, table)
    m = len(labels)
    i = data.draw(st.integers(0, m - 1))
    j = data.draw(st.integers(0, m - 1).filter(lambda j: j != i))
    # stretch one distance past the sum through any third point
    k = next(k for k in range(m) if k not in (i, j))
    big = table[i][k] + table[k][j] + 1
    table[i][j] = table[j][i] = big
    with pytest.raises(TriangleViolation) as exc:
        validate_metric(labels, table)
    u, v, w = exc.value.points
    t = {p: n for n, p in enumerate(labels)}
    assert table[t[u]][t[w]] > table[t[u]][t[v]] + table[t[v]][t[w]]


@settings(max_examples=60, deadline=None)
@given(line_spaces(), st.data())
def test_injected_asymmetry_is_caught(space, data):
    labels, table = space
    i, j = data.draw(st.sampled_from([(0, 1), (1, 2), (0, 2)]))
    table[i][j] += 1
    with pytest.raises(NonSymmetric):
        validate_metric(labels, table)
