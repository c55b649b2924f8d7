"""Exact partition-function oracles and the recursion pipeline against them."""

import math

import numpy as np
import pytest

from pottstree import (
    BoundaryCondition,
    BudgetError,
    DomainError,
    TreeSpec,
    brute_force_Z,
    conditional_root_distribution,
    dp_Z,
    dp_log_Z,
    enumerate_log_ratio_sets,
    level,
    max_uniform_deviation,
    recursion_root_log_ratios,
    root_log_ratios,
)

IRREGULAR = TreeSpec(children=((1, 2, 3), (4, 5), (), (6,), (), (), ()), root=0)


def test_single_edge_closed_form():
    t = TreeSpec.regular(1, 1)
    for q, w in [(3, 0.5), (4, 0.25), (5, 1.0)]:
        assert brute_force_Z(t, q, w) == pytest.approx(q * (w + q - 1), rel=1e-14)
        assert dp_Z(t, q, w) == pytest.approx(q * (w + q - 1), rel=1e-12)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_free_star_closed_form(d):
    t = TreeSpec.regular(d, 1)
    q, w = 4, 0.3
    expected = q * (w + q - 1) ** d
    assert brute_force_Z(t, q, w) == pytest.approx(expected, rel=1e-13)
    assert dp_Z(t, q, w) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("q,w", [(3, 0.7), (4, 0.2), (3, 1.0), (3, 0.0)])
def test_brute_force_and_dp_agree_on_irregular_tree(q, w):
    rng = np.random.default_rng(1)
    b = BoundaryCondition.random(IRREGULAR, q, rng)
    for boundary in (None, b):
        for pin in (None, 1, q):
            z_brute = brute_force_Z(IRREGULAR, q, w, boundary, pinned_root=pin)
            z_dp = dp_Z(IRREGULAR, q, w, boundary, pinned_root=pin)
            assert z_dp == pytest.approx(z_brute, rel=1e-12, abs=1e-300)


def test_dp_handles_zero_weight_conflict():
    t = TreeSpec.regular(1, 1)
    b = BoundaryCondition.from_leaf_colors(t, [1])
    assert dp_log_Z(t, 3, 0.0, b, pinned_root=1) == -math.inf
    assert brute_force_Z(t, 3, 0.0, b, pinned_root=1) == 0.0


def test_root_log_ratios_match_pinned_partition_functions():
    t = TreeSpec.regular(2, 2)
    q, w = 3, 0.37
    b = BoundaryCondition.from_leaf_colors(t, [1, 2, 3, 1])
    x = root_log_ratios(t, q, w, b)
    logs = [math.log(brute_force_Z(t, q, w, b, pinned_root=c)) for c in range(1, q + 1)]
    np.testing.assert_allclose(x, np.array(logs[:-1]) - logs[-1], rtol=0, atol=1e-12)


def test_root_log_ratios_rejects_degenerate_calls():
    t = TreeSpec.regular(2, 1)
    b = BoundaryCondition.monochromatic(t, 1)
    with pytest.raises(DomainError):
        root_log_ratios(t, 3, 0.0, b)
    single = TreeSpec.regular(1, 0)
    with pytest.raises(DomainError):
        root_log_ratios(single, 3, 0.5, BoundaryCondition({0: 1}))


def test_conditional_distribution_monochromatic_star():
    q, d, w = 3, 4, 0.6
    t = TreeSpec.regular(d, 1)
    b = BoundaryCondition.monochromatic(t, 1)
    p = conditional_root_distribution(t, q, w, b)
    assert p.sum() == pytest.approx(1.0, abs=1e-15)
    assert p[0] == pytest.approx(w**d / (w**d + q - 1), rel=1e-13)
    assert p[1] == pytest.approx(p[2], rel=1e-13)


def test_conditional_distribution_is_uniform_at_weight_one():
    t = TreeSpec.regular(2, 2)
    b = BoundaryCondition.from_leaf_colors(t, [1, 1, 2, 3])
    p = conditional_root_distribution(t, 4, 1.0, b)
    assert max_uniform_deviation(p) <= 1e-15


def test_max_uniform_deviation():
    assert max_uniform_deviation([0.5, 0.25, 0.25]) == pytest.approx(1 / 6, abs=1e-15)
    assert max_uniform_deviation(np.full(5, 0.2)) == 0.0


@pytest.mark.parametrize("q,d,n,w", [
    (3, 2, 1, 0.5), (3, 2, 2, 0.5), (3, 2, 3, 0.25),
    (4, 3, 2, 0.4), (5, 2, 2, 0.8), (3, 4, 2, 0.55),
])
def test_recursion_pipeline_matches_dp(q, d, n, w):
    rng = np.random.default_rng(q * 100 + d * 10 + n)
    t = TreeSpec.regular(d, n)
    leaf_colors = rng.integers(1, q + 1, size=d**n)
    b = BoundaryCondition.from_leaf_colors(t, leaf_colors)
    from_dp = root_log_ratios(t, q, w, b)
    from_recursion = recursion_root_log_ratios(q, d, n, w, leaf_colors)
    np.testing.assert_allclose(from_recursion, from_dp, rtol=0, atol=1e-10)


def test_recursion_pipeline_input_checks():
    with pytest.raises(DomainError):
        recursion_root_log_ratios(3, 2, 1, 0.0, [1, 2])  # w = 0 has no finite patterns
    with pytest.raises(DomainError):
        recursion_root_log_ratios(3, 2, 1, 0.5, [1, 2, 3])  # wrong leaf count
    with pytest.raises(DomainError):
        recursion_root_log_ratios(3, 2, 1, 0.5, [1, 5])  # color out of range


def test_depth_one_enumeration_is_exhaustive():
    # compare against root log-ratios of every boundary condition directly
    q, d, w = 3, 2, 1 - 0.8 * 3 / 3  # alpha = 0.8
    t = TreeSpec.regular(d, 1)
    seen = []
    for c1 in range(1, q + 1):
        for c2 in range(1, q + 1):
            b = BoundaryCondition.from_leaf_colors(t, [c1, c2])
            seen.append(root_log_ratios(t, q, w, b))
    expected = np.unique(np.round(seen, 9), axis=0)
    got = np.unique(np.round(enumerate_log_ratio_sets(1, d, q, w), 9), axis=0)
    np.testing.assert_array_equal(got, expected)


def test_depth_two_enumeration_is_exhaustive():
    q, d, w = 3, 2, 0.45
    t = TreeSpec.regular(d, 2)
    seen = []
    for code in range(q ** 4):
        colors = [(code // q**k) % q + 1 for k in range(4)]
        b = BoundaryCondition.from_leaf_colors(t, colors)
        seen.append(root_log_ratios(t, q, w, b))
    expected = np.unique(np.round(seen, 9), axis=0)
    got = np.unique(np.round(enumerate_log_ratio_sets(2, d, q, w), 9), axis=0)
    assert got.shape == expected.shape
    np.testing.assert_allclose(got, expected, rtol=0, atol=1e-9)


def test_depth_one_sets_stay_in_the_invariant_polytope():
    q, d = 3, 4
    w = 1 - q / (d + 1)  # alpha = 1
    vectors = enumerate_log_ratio_sets(1, d, q, w)
    assert (level(vectors) <= q + 1 + 1e-12).all()


def test_enumeration_budget_guards():
    with pytest.raises(BudgetError):
        enumerate_log_ratio_sets(4, 2, 3, 0.5)
    with pytest.raises(BudgetError):
        enumerate_log_ratio_sets(3, 4, 4, 0.5, max_states=10)


def test_brute_force_budget_guard():
    t = TreeSpec.regular(3, 3)
    with pytest.raises(BudgetError):
        brute_force_Z(t, 5, 0.5)


def test_brute_force_rejects_bad_weight():
    t = TreeSpec.regular(1, 1)
    with pytest.raises(DomainError):
        brute_force_Z(t, 3, 1.5)
    with pytest.raises(DomainError):
        brute_force_Z(t, 3, -0.1)
