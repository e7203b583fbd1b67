"""Caching LP: enumeration, costs, simplex correctness, serialization."""

import itertools
import math
from math import comb

import numpy as np
import pytest
from scipy.optimize import linprog

import cachecancel.optimizer as optimizer
from cachecancel.analytics import plr_uniform
from cachecancel.exceptions import SubsetCapError
from cachecancel.model import PacketLibrary, zipf_popularity
from cachecancel.optimizer import (DEFAULT_SUBSET_CAP, build_lp,
                                   canonicalize, enumerate_subsets,
                                   optimize_distributed_caching,
                                   result_from_json, result_to_json,
                                   solve_lp)
from oracles import (PLR_NO_CSI_BETA4_TBAR1, Z1_BETA4_TBAR1,
                     brute_force_lp_optimum, lp_arrays)

T_BAR, BETA = 1.0, 4.0


def zipf_problem(n, m, gamma):
    lib = zipf_popularity(n, gamma) if gamma > 0 else \
        PacketLibrary.from_probabilities([1.0 / n] * n)
    return build_lp(lib, enumerate_subsets(n, m), T_BAR, BETA)


# -------------------------------------------------------- enumeration --


def test_enumerate_small():
    np.testing.assert_array_equal(enumerate_subsets(2, 1), [[0], [1]])
    got = enumerate_subsets(4, 2)
    assert got.shape == (6, 2)
    np.testing.assert_array_equal(
        got, list(itertools.combinations(range(4), 2)))


def test_enumerate_empty_and_full():
    assert enumerate_subsets(5, 0).shape == (1, 0)
    np.testing.assert_array_equal(enumerate_subsets(3, 3), [[0, 1, 2]])


def test_enumerate_large_count():
    got = enumerate_subsets(100, 3)
    assert got.shape == (comb(100, 3), 3)
    np.testing.assert_array_equal(got[0], [0, 1, 2])
    np.testing.assert_array_equal(got[-1], [97, 98, 99])


def test_enumerate_cap():
    with pytest.raises(SubsetCapError):
        enumerate_subsets(100, 3, cap=161_699)
    with pytest.raises(ValueError):
        enumerate_subsets(3, 4)


# -------------------------------------------------------------- costs --


def test_cost_of_empty_subset_is_no_csi_loss():
    lib = PacketLibrary.from_probabilities([1.0])
    problem = build_lp(lib, enumerate_subsets(1, 0), T_BAR, BETA)
    assert problem.costs[0] == pytest.approx(PLR_NO_CSI_BETA4_TBAR1,
                                             abs=1e-15)


def test_cost_of_full_coverage_is_zero():
    lib = PacketLibrary.from_probabilities([1.0])
    problem = build_lp(lib, enumerate_subsets(1, 1), T_BAR, BETA)
    assert problem.costs[0] == 0.0


def test_cost_formula():
    lib = PacketLibrary.from_probabilities([0.85, 0.15])
    problem = build_lp(lib, enumerate_subsets(2, 1), T_BAR, BETA)
    # probabilities sort descending, so subset (0,) covers mass 0.85
    for mass, cost in zip((0.85, 0.15), problem.costs):
        miss = 1.0 - mass
        want = miss * miss * Z1_BETA4_TBAR1 / (1.0 + miss * Z1_BETA4_TBAR1)
        assert cost == pytest.approx(want, abs=1e-15)
    assert problem.coverage == 0.5


# ------------------------------------------------------------ simplex --


@pytest.mark.parametrize("gamma", [0.0, 0.8, 1.2])
@pytest.mark.parametrize("n,m", [(4, 1), (4, 2), (5, 1), (5, 2), (6, 1)])
def test_solver_reaches_brute_force_optimum(n, m, gamma):
    problem = zipf_problem(n, m, gamma)
    result = solve_lp(problem)
    assert result.status == "optimal"
    want = brute_force_lp_optimum(problem)
    assert result.objective == pytest.approx(want, abs=1e-9)
    assert result.max_constraint_residual <= 1e-9
    assert result.support_size <= n
    scheme = result.scheme
    coverage = scheme.densities @ scheme.cache_matrix.astype(float)
    np.testing.assert_allclose(coverage, m / n, atol=1e-9)
    assert math.fsum(scheme.densities.tolist()) == pytest.approx(1.0,
                                                                 abs=1e-12)


def test_solver_matches_scipy():
    problem = zipf_problem(12, 3, 0.8)
    result = solve_lp(problem)
    A, b, c = lp_arrays(problem)
    ref = linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    assert ref.status == 0
    assert result.objective == pytest.approx(ref.fun, abs=1e-9)


def test_uniform_library_hits_uniform_loss():
    # equal popularity makes every subset cost the same, so the optimum
    # equals the closed-form uniform-caching loss
    for n, m in ((2, 1), (3, 1), (6, 2)):
        result = solve_lp(zipf_problem(n, m, 0.0))
        assert result.objective == pytest.approx(
            plr_uniform(n, m, T_BAR, BETA), abs=1e-12)


def test_objective_bounds():
    # the optimum can never beat the perfectly-uniform-coverage bound
    # (the cost function is strictly convex in covered mass), and never
    # loses to the uniform mixture over all subsets (a feasible point)
    for n, m, gamma in ((8, 2, 0.8), (9, 3, 1.2), (10, 2, 0.8)):
        problem = zipf_problem(n, m, gamma)
        result = solve_lp(problem)
        lower = plr_uniform(n, m, T_BAR, BETA)
        upper = float(np.mean(problem.costs))
        assert result.objective >= lower - 1e-12
        assert result.objective <= upper + 1e-12


def test_degenerate_cache_sizes():
    lib = zipf_popularity(6, 0.8)
    empty = optimize_distributed_caching(lib, 0, T_BAR, BETA)
    assert empty.status == "optimal"
    assert empty.objective == pytest.approx(PLR_NO_CSI_BETA4_TBAR1,
                                            abs=1e-12)
    assert empty.scheme.subsets() == [()]
    full = optimize_distributed_caching(lib, 6, T_BAR, BETA)
    assert full.status == "optimal"
    assert full.objective == 0.0
    assert full.scheme.subsets() == [(0, 1, 2, 3, 4, 5)]


def test_pairing_structure_small_instance():
    # n=10, m=2, Zipf 0.8: the optimum pairs the most popular packets
    # with the least popular ones (anti-diagonal perfect matching)
    result = optimize_distributed_caching(zipf_popularity(10, 0.8), 2,
                                          T_BAR, BETA)
    assert result.status == "optimal"
    assert result.objective == pytest.approx(0.3095294860057214, abs=1e-12)
    subsets = set(result.scheme.subsets())
    assert subsets == {(0, 9), (1, 8), (2, 7), (3, 6), (4, 5)}
    np.testing.assert_allclose(result.scheme.densities, 0.2, atol=1e-12)


def test_invalid_cache_size():
    lib = zipf_popularity(4, 0.8)
    with pytest.raises(ValueError):
        optimize_distributed_caching(lib, 5, T_BAR, BETA)
    with pytest.raises(ValueError):
        optimize_distributed_caching(lib, -1, T_BAR, BETA)


def test_iteration_cap_reports_numerical_failure():
    problem = zipf_problem(10, 2, 0.8)
    result = solve_lp(problem, max_iterations=2)
    assert result.status == "numerical_failure"
    assert result.scheme is None


def test_streaming_matches_dense():
    # force the streaming column oracle on an instance small enough to
    # also enumerate, and require the identical vertex
    lib = zipf_popularity(30, 0.8)
    dense = optimize_distributed_caching(lib, 2, T_BAR, BETA)
    streamed = optimize_distributed_caching(lib, 2, T_BAR, BETA,
                                            subset_cap=100)
    assert comb(30, 2) > 100
    assert streamed.status == dense.status == "optimal"
    assert streamed.objective == dense.objective
    assert streamed.scheme.subsets() == dense.scheme.subsets()
    np.testing.assert_array_equal(streamed.scheme.densities,
                                  dense.scheme.densities)


def test_bland_only_mode_agrees(monkeypatch):
    # forcing the anti-cycling rule from the first pivot must land on the
    # same optimum, just more slowly
    problem = zipf_problem(10, 2, 0.8)
    fast = solve_lp(problem)
    monkeypatch.setattr(optimizer, "_STALL_LIMIT", 0)
    slow = solve_lp(problem)
    assert slow.status == "optimal"
    assert slow.objective == pytest.approx(fast.objective, abs=1e-12)
    assert slow.iterations >= fast.iterations


# ------------------------------------------------- result bookkeeping --


def test_canonicalize_is_idempotent():
    result = optimize_distributed_caching(zipf_popularity(8, 1.2), 2,
                                          T_BAR, BETA)
    again = canonicalize(result)
    assert again.objective == result.objective
    assert again.support_size == result.support_size
    assert again.scheme.subsets() == result.scheme.subsets()
    np.testing.assert_array_equal(again.scheme.densities,
                                  result.scheme.densities)
    # densities are stored descending with lexicographic tie-break
    d = result.scheme.densities
    assert all(a >= b for a, b in zip(d.tolist(), d.tolist()[1:]))


def test_json_round_trip():
    result = optimize_distributed_caching(zipf_popularity(8, 0.8), 2,
                                          T_BAR, BETA)
    clone = result_from_json(result_to_json(result))
    assert clone.status == result.status
    assert clone.objective == result.objective
    assert clone.support_size == result.support_size
    assert clone.iterations == result.iterations
    assert clone.scheme.subsets() == result.scheme.subsets()
    np.testing.assert_allclose(clone.scheme.densities,
                               result.scheme.densities, atol=0)


def test_json_round_trip_without_scheme():
    failed = solve_lp(zipf_problem(10, 2, 0.8), max_iterations=2)
    clone = result_from_json(result_to_json(failed))
    assert clone.status == "numerical_failure"
    assert clone.scheme is None


def test_subset_cap_default_allows_reference_instance():
    assert comb(100, 3) <= DEFAULT_SUBSET_CAP
