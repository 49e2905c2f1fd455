from __future__ import annotations

from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import grain_cost, min_matching_weight

from tcspace.errors import InvalidSpec, TooLarge
from tcspace.harness import (
    KINDS,
    SUITE_PROPERTIES,
    GeneratorSpec,
    gen_greedy_pair_sequence,
    gen_random_metric,
    gen_random_pair_sequence,
    oracle_tc_norm_integer,
    run_property_suite,
)
from tcspace.matching import MatchingInstance, dual_from_dict, pairs_from_dict
from tcspace.metric import space_from_dict, validate_metric
from tcspace.projection import build_projection, certify_projection
from tcspace.transport import TransportationProblem


@pytest.mark.parametrize("kind", KINDS)
def test_generated_spaces_are_valid_and_deterministic(kind):
    a = gen_random_metric(GeneratorSpec(kind, 7, seed=11))
    b = gen_random_metric(GeneratorSpec(kind, 7, seed=11))
    assert a == b and len(a) == 7
    validate_metric(a.points, a.dist)
    assert a != gen_random_metric(GeneratorSpec(kind, 7, seed=12))


@pytest.mark.parametrize("seed", range(5))
def test_tree_metric_four_point_condition(seed):
    sp = gen_random_metric(GeneratorSpec("tree-metric", 6, seed=seed))
    d = sp.d
    for u, v, x, y in combinations(sp.points, 4):
        sums = sorted([d(u, v) + d(x, y), d(u, x) + d(v, y), d(u, y) + d(v, x)])
        assert sums[1] == sums[2]


def test_clustered_separation():
    sp = gen_random_metric(GeneratorSpec("clustered", 6, seed=2))
    dists = sorted(sp.d(u, v) for u, v in combinations(sp.points, 2))
    # intra-cluster distances are at most 2, inter-cluster at least 10 (k = 2 clusters of 3)
    assert dists[5] <= 2 and dists[6] >= 10


@pytest.mark.parametrize("bad", [dict(kind="nope", size=4), dict(kind="clustered", size=1),
                                 dict(kind="clustered", size=4, denominator_bound=0)])
def test_invalid_spec(bad):
    with pytest.raises(InvalidSpec):
        GeneratorSpec(**bad)


def test_greedy_sequences(two_triangles, line4, tt_pairs, line_pairs):
    assert gen_greedy_pair_sequence(two_triangles, 3) == tt_pairs
    assert gen_greedy_pair_sequence(line4, 2) == line_pairs
    assert gen_greedy_pair_sequence(line4, 1) == [("0", "1")]
    assert gen_greedy_pair_sequence(line4, 3) is None


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(KINDS), st.integers(4, 9), st.integers(0, 10_000), st.integers(1, 4))
def test_greedy_sequences_pass_the_criterion(kind, size, seed, n):
    sp = gen_random_metric(GeneratorSpec(kind, size, seed))
    pairs = gen_greedy_pair_sequence(sp, n)
    if pairs is None:
        return
    for k in range(1, len(pairs) + 1):
        pts = [p for pair in pairs[:k] for p in pair]
        assert sum(sp.d(u, v) for u, v in pairs[:k]) == min_matching_weight(sp, pts)


def test_grain_oracle(two_triangles):
    f = TransportationProblem({"a1": 1, "a2": 1, "b1": -1, "b2": -1})
    assert oracle_tc_norm_integer(two_triangles, f) == 20 == grain_cost(two_triangles, f.masses)
    with pytest.raises(TooLarge):
        oracle_tc_norm_integer(two_triangles, TransportationProblem({"a1": 9, "b1": -9}))
    with pytest.raises(ValueError):
        oracle_tc_norm_integer(two_triangles, TransportationProblem({"a1": "1/2", "b1": "-1/2"}))


def test_suite_clustered_passes():
    rep = run_property_suite(GeneratorSpec("clustered", 6, seed=1), 10, battery=4, samples=2)
    assert rep.ok and rep.counterexample is None
    assert rep.completed + rep.skipped == 10 and rep.completed > 0
    assert all(rep.passes[p] == rep.completed for p in SUITE_PROPERTIES)


def test_suite_is_byte_deterministic():
    spec = GeneratorSpec("euclidean-rounded", 6, seed=4)
    a = run_property_suite(spec, 4, battery=2, samples=1).to_json()
    b = run_property_suite(spec, 4, battery=2, samples=1).to_json()
    assert a == b


def test_suite_zero_trials():
    rep = run_property_suite(GeneratorSpec("clustered", 6), 0)
    assert rep.completed == rep.skipped == 0 and rep.ok and rep.counterexample is None


def test_fault_injection_is_reported():
    rep = run_property_suite(GeneratorSpec("clustered", 6, seed=1), 3, n_pairs=3,
                             fault="perturb-dual", battery=2, samples=1)
    assert not rep.ok
    assert rep.failures["dual_certificate"] == rep.completed > 0
    cx = rep.counterexample
    assert cx["trial"] == 0 and "dual_certificate" in cx["failed"]
    # replay from the serialized artifact alone
    sp = space_from_dict(cx["space"])
    pairs = pairs_from_dict(cx)
    dual = dual_from_dict(MatchingInstance.from_pairs(sp, pairs), cx["dual"])
    P = build_projection(sp, pairs, dual, check_dual=False)
    assert not certify_projection(P, battery=2, samples=1).ok


def test_unknown_fault():
    with pytest.raises(InvalidSpec):
        run_property_suite(GeneratorSpec("clustered", 6), 1, fault="bogus")


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(KINDS), st.integers(4, 10), st.integers(0, 10_000), st.integers(1, 4))
def test_random_sequences_pass_the_criterion(kind, size, seed, n):
    sp = gen_random_metric(GeneratorSpec(kind, size, seed))
    pairs = gen_random_pair_sequence(sp, n, seed=seed)
    assert pairs == gen_random_pair_sequence(sp, n, seed=seed)
    if pairs is None:
        return
    assert len({p for pair in pairs for p in pair}) == 2 * n
    for k in range(1, n + 1):
        pts = [p for pair in pairs[:k] for p in pair]
        assert sum(sp.d(u, v) for u, v in pairs[:k]) == min_matching_weight(sp, pts)
