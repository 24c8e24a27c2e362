import itertools
import json
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import linear_sum_assignment

from erap.lap import (
    AssignmentSolution,
    build_cost_matrix,
    dump_solution,
    solve_bruteforce,
    solve_jv,
    verify_optimality,
)
from erap.manifolds import make_manifold, klein, torus
from erap.pointsets import PointSet


def test_identity_example():
    sol = solve_jv([[0, 1], [1, 0]])
    assert sol.permutation.tolist() == [0, 1] and sol.cost == 0


def test_rank_one_example():
    sol = solve_jv([[1, 2, 3], [2, 4, 6], [3, 6, 9]])
    assert sol.permutation.tolist() == [2, 1, 0]
    assert sol.cost == 10


def test_bruteforce_small():
    assert solve_bruteforce([[4.5]]).cost == 4.5
    assert solve_bruteforce([[0, 1], [1, 0]]).cost == 0
    with pytest.raises(ValueError):
        solve_bruteforce(np.zeros((11, 11)))
    assert not solve_bruteforce([[1.0]]).has_duals


def test_500_random_8x8_match_bruteforce_exactly():
    rng = np.random.default_rng(0)
    for _ in range(500):
        C = rng.random((8, 8))
        jv, bf = solve_jv(C), solve_bruteforce(C)
        assert jv.cost == bf.cost
        assert verify_optimality(C, jv)


def test_random_7x7_and_integer_ties():
    rng = np.random.default_rng(1)
    for _ in range(200):
        C = rng.integers(0, 4, (7, 7)).astype(float)  # many ties
        jv = solve_jv(C)
        assert jv.cost == solve_bruteforce(C).cost
        assert verify_optimality(C, jv)


@pytest.mark.parametrize("n", [20, 64, 150])
def test_matches_scipy_on_larger_instances(n):
    rng = np.random.default_rng(n)
    for _ in range(20):
        C = rng.random((n, n)) ** 3
        r, c = linear_sum_assignment(C)
        sol = solve_jv(C)
        assert sol.cost == pytest.approx(C[r, c].sum(), rel=1e-12)
        assert verify_optimality(C, sol)


@settings(max_examples=80)
@given(arrays(np.float64, st.tuples(st.integers(1, 7), st.just(7)), elements=st.floats(0, 1e3)))
def test_hypothesis_jv_is_optimal(block):
    n = block.shape[0]
    C = block[:, :n]
    sol = solve_jv(C)
    assert sorted(sol.permutation.tolist()) == list(range(n))
    best = min(sum(C[i, p[i]] for i in range(n)) for p in itertools.permutations(range(n)))
    assert sol.cost == pytest.approx(best, rel=1e-12, abs=1e-12)
    assert verify_optimality(C, sol)


def test_duals_reproduce_cost():
    rng = np.random.default_rng(2)
    C = rng.random((50, 50))
    sol = solve_jv(C)
    assert sol.u.sum() + sol.v.sum() == pytest.approx(sol.cost, rel=1e-12)


def test_swapping_two_assignments_breaks_certificate():
    # strictly diagonal-dominant optimum: identity is the unique minimizer
    C = np.array([[0.0, 5, 5], [5, 0, 5], [5, 5, 0]])
    sol = solve_jv(C)
    assert verify_optimality(C, sol)
    perm = sol.permutation.copy()
    perm[[0, 1]] = perm[[1, 0]]
    bad = AssignmentSolution(perm, sol.u, sol.v, float(C[np.arange(3), perm].sum()))
    assert not verify_optimality(C, bad)


def test_zero_matrix_certificate():
    sol = AssignmentSolution(np.arange(4), np.zeros(4), np.zeros(4), 0.0)
    assert verify_optimality(np.zeros((4, 4)), sol)


def test_certificate_requires_duals():
    with pytest.raises(ValueError):
        verify_optimality([[1.0]], solve_bruteforce([[1.0]]))


@pytest.mark.parametrize("lam", [1e-6, 0.37, 5.0, 1e6])
def test_scale_equivariance(lam):
    rng = np.random.default_rng(3)
    C = rng.random((40, 40))
    base = solve_jv(C)
    scaled = solve_jv(lam * C)
    assert scaled.cost / lam == pytest.approx(base.cost, rel=1e-12)
    moved = AssignmentSolution(base.permutation, lam * base.u, lam * base.v, lam * base.cost)
    assert verify_optimality(lam * C, moved)


def test_deterministic():
    rng = np.random.default_rng(4)
    C = rng.integers(0, 3, (30, 30)).astype(float)
    a, b = solve_jv(C), solve_jv(C)
    assert np.array_equal(a.permutation, b.permutation)
    assert np.array_equal(a.u, b.u) and np.array_equal(a.v, b.v)


def test_n1024_under_five_seconds():
    M = make_manifold(torus(1j))
    rng = np.random.default_rng(5)
    C = M.pairwise_sq(M.sample_uniform(rng, 1024), M.sample_uniform(rng, 1024))
    solve_jv(C[:8, :8])  # compile outside the timer
    t = time.perf_counter()
    sol = solve_jv(C)
    assert time.perf_counter() - t < 5.0
    assert verify_optimality(C, sol)


@pytest.mark.parametrize("bad", [np.ones((2, 3)), np.array([[np.nan]]), np.array([[-1.0]]), np.zeros((0, 0))])
def test_rejects_invalid_matrices(bad):
    with pytest.raises(ValueError):
        solve_jv(bad)


def test_build_cost_matrix_examples():
    M = make_manifold(torus(1j))
    X = PointSet(M.spec, [[0, 0], [0.5, 0]], "P")
    Y = PointSet(M.spec, [[0, 0.5], [0.5, 0.5]], "P")
    C = build_cost_matrix(M, X, Y)
    assert set(np.round(C.ravel(), 15)) <= {0.25, 0.5}
    rng = np.random.default_rng(6)
    Z = PointSet(M.spec, M.sample_uniform(rng, 30), "P")
    CZ = build_cost_matrix(M, Z, Z)
    assert np.all(np.diag(CZ) == 0) and np.array_equal(CZ, CZ.T)


def test_build_cost_matrix_errors():
    M = make_manifold(torus(1j))
    X = PointSet(M.spec, [[0, 0], [0.5, 0]], "P")
    with pytest.raises(ValueError):
        build_cost_matrix(M, X, PointSet(M.spec, [[0, 0]], "P"))
    with pytest.raises(ValueError):
        build_cost_matrix(M, X, PointSet(klein(1), [[0, 0], [0.1, 0.1]], "P"))


def test_dump_round_trip(tmp_path):
    C = np.random.default_rng(7).random((5, 5))
    sol = solve_jv(C)
    dump_solution(C, sol, tmp_path / "c.csv", tmp_path / "s.json")
    back = np.loadtxt(tmp_path / "c.csv", delimiter=",")
    assert np.array_equal(back, C)
    data = json.loads((tmp_path / "s.json").read_text())
    assert data["permutation"] == sol.permutation.tolist()
    assert data["cost"] == sol.cost
