"""Dense linear assignment: Jonker-Volgenant solver, brute-force oracle, certificate.

The solver follows the original LAPJV pipeline (column reduction with
reduction transfer, two rounds of augmenting row reduction, then shortest
augmenting paths) on a dense float64 matrix.  Column duals ``v`` are carried
through all phases; row duals are recovered at the end as
``u_i = C[i, x_i] - v[x_i]``.
"""

import itertools
import json
import math
from dataclasses import dataclass, field

import numba
import numpy as np

BRUTEFORCE_MAX_N = 10
CERT_RTOL = 1e-9


@dataclass
class AssignmentSolution:
    permutation: np.ndarray  # row i -> column permutation[i]
    u: np.ndarray
    v: np.ndarray
    cost: float
    has_duals: bool = True
    meta: dict = field(default_factory=dict)


def assignment_cost(C, permutation):
    """Exactly rounded sum of the assigned entries (order independent)."""
    C = np.asarray(C)
    return math.fsum(C[np.arange(len(permutation)), permutation].tolist())


def as_cost_matrix(C):
    C = np.ascontiguousarray(C, dtype=np.float64)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValueError(f"cost matrix must be square, got shape {C.shape}")
    if C.shape[0] == 0:
        raise ValueError("cost matrix must be non-empty")
    if not np.all(np.isfinite(C)):
        raise ValueError("cost matrix has non-finite entries")
    if np.any(C < 0):
        raise ValueError("cost matrix has negative entries")
    return C


def build_cost_matrix(M, X, Y):
    """C[i, j] = squared geodesic distance between X_i and Y_j on M."""
    if len(X) != len(Y):
        raise ValueError(f"point sets differ in size: {len(X)} vs {len(Y)}")
    for ps in (X, Y):
        if ps.manifold != M.spec:
            raise ValueError(f"point set lives on {ps.manifold}, not on {M.spec}")
    return M.pairwise_sq(X.points, Y.points)


@numba.njit(cache=True)
def _column_reduction(C, free_rows, x, y, v):
    n = C.shape[0]
    for j in range(n):
        v[j] = np.inf
        y[j] = -1
    for i in range(n):
        x[i] = -1
    for i in range(n):
        for j in range(n):
            c = C[i, j]
            if c < v[j]:
                v[j] = c
                y[j] = i
    unique = np.ones(n, dtype=np.bool_)
    for j in range(n - 1, -1, -1):
        i = y[j]
        if x[i] < 0:
            x[i] = j
        else:
            unique[i] = False
            y[j] = -1
    n_free = 0
    for i in range(n):
        if x[i] < 0:
            free_rows[n_free] = i
            n_free += 1
        elif unique[i]:
            # reduction transfer
            j = x[i]
            mn = np.inf
            for j2 in range(n):
                if j2 == j:
                    continue
                c = C[i, j2] - v[j2]
                if c < mn:
                    mn = c
            v[j] -= mn
    return n_free


@numba.njit(cache=True)
def _augmenting_row_reduction(C, n_free, free_rows, x, y, v):
    n = C.shape[0]
    current = 0
    new_free = 0
    rr_cnt = 0
    while current < n_free:
        rr_cnt += 1
        free_i = free_rows[current]
        current += 1
        j1 = 0
        v1 = C[free_i, 0] - v[0]
        j2 = -1
        v2 = np.inf
        for j in range(1, n):
            c = C[free_i, j] - v[j]
            if c < v2:
                if c >= v1:
                    v2 = c
                    j2 = j
                else:
                    v2 = v1
                    v1 = c
                    j2 = j1
                    j1 = j
        i0 = y[j1]
        v1_new = v[j1] - (v2 - v1)
        v1_lowers = v1_new < v[j1]
        if rr_cnt < current * n:
            if v1_lowers:
                v[j1] = v1_new
            elif i0 >= 0 and j2 >= 0:
                j1 = j2
                i0 = y[j2]
            if i0 >= 0:
                if v1_lowers:
                    current -= 1
                    free_rows[current] = i0
                else:
                    free_rows[new_free] = i0
                    new_free += 1
        else:
            if i0 >= 0:
                free_rows[new_free] = i0
                new_free += 1
        x[free_i] = j1
        y[j1] = free_i
    return new_free


@numba.njit(cache=True)
def _find_path(C, start_i, y, v, pred, cols, d):
    """Dijkstra-style shortest augmenting path from a free row."""
    n = C.shape[0]
    for j in range(n):
        cols[j] = j
        pred[j] = start_i
        d[j] = C[start_i, j] - v[j]
    lo = 0
    hi = 0
    n_ready = 0
    final_j = -1
    while final_j == -1:
        if lo == hi:
            # collect the columns at minimum distance into [lo, hi)
            n_ready = lo
            hi = lo + 1
            mind = d[cols[lo]]
            for k in range(hi, n):
                j = cols[k]
                if d[j] <= mind:
                    if d[j] < mind:
                        hi = lo
                        mind = d[j]
                    cols[k] = cols[hi]
                    cols[hi] = j
                    hi += 1
            for k in range(lo, hi):
                j = cols[k]
                if y[j] < 0:
                    final_j = j
                    break
        if final_j == -1:
            # scan rows of the ready columns; lo is only committed when no
            # free column is reached, so d[cols[lo]] below is still the minimum
            lo_s = lo
            while lo_s != hi and final_j == -1:
                j = cols[lo_s]
                lo_s += 1
                i = y[j]
                mind = d[j]
                h = C[i, j] - v[j] - mind
                for k in range(hi, n):
                    j = cols[k]
                    cred = C[i, j] - v[j] - h
                    if cred < d[j]:
                        d[j] = cred
                        pred[j] = i
                        if cred == mind:
                            if y[j] < 0:
                                final_j = j
                                break
                            cols[k] = cols[hi]
                            cols[hi] = j
                            hi += 1
            if final_j == -1:
                lo = lo_s
    mind = d[cols[lo]]
    for k in range(n_ready):
        j = cols[k]
        v[j] += d[j] - mind
    return final_j


@numba.njit(cache=True)
def _augment(C, n_free, free_rows, x, y, v):
    n = C.shape[0]
    pred = np.empty(n, dtype=np.int64)
    cols = np.empty(n, dtype=np.int64)
    d = np.empty(n, dtype=np.float64)
    for f in range(n_free):
        free_i = free_rows[f]
        j = _find_path(C, free_i, y, v, pred, cols, d)
        i = -1
        while i != free_i:
            i = pred[j]
            y[j] = i
            tmp = x[i]
            x[i] = j
            j = tmp


@numba.njit(cache=True)
def _lapjv(C):
    n = C.shape[0]
    x = np.empty(n, dtype=np.int64)
    y = np.empty(n, dtype=np.int64)
    v = np.empty(n, dtype=np.float64)
    free_rows = np.empty(n, dtype=np.int64)
    n_free = _column_reduction(C, free_rows, x, y, v)
    it = 0
    while n_free > 0 and it < 2:
        n_free = _augmenting_row_reduction(C, n_free, free_rows, x, y, v)
        it += 1
    if n_free > 0:
        _augment(C, n_free, free_rows, x, y, v)
    u = np.empty(n, dtype=np.float64)
    for i in range(n):
        u[i] = C[i, x[i]] - v[x[i]]
    return x, u, v


def solve_jv(C):
    """Minimum-cost perfect matching of a dense square cost matrix."""
    C = as_cost_matrix(C)
    if C.shape[0] == 1:
        return AssignmentSolution(np.zeros(1, dtype=np.int64), C[0].copy(), np.zeros(1), float(C[0, 0]))
    x, u, v = _lapjv(C)
    return AssignmentSolution(x, u, v, assignment_cost(C, x))


def solve_bruteforce(C):
    """Enumerate all n! permutations (n <= 10). Duals are zero and flagged absent."""
    C = as_cost_matrix(C)
    n = C.shape[0]
    if n > BRUTEFORCE_MAX_N:
        raise ValueError(f"brute force limited to n <= {BRUTEFORCE_MAX_N}, got {n}")
    rows = np.arange(n)
    best, best_perm = math.inf, None
    perms = itertools.permutations(range(n))
    while True:
        chunk = np.array(list(itertools.islice(perms, 200_000)), dtype=np.int64)
        if chunk.size == 0:
            break
        totals = C[rows, chunk].sum(axis=1)
        # candidates within rounding of the chunk minimum, ranked by exact sum
        lo = totals.min()
        for k in np.flatnonzero(totals <= lo + 1e-12 * max(1.0, abs(lo))):
            c = assignment_cost(C, chunk[k])
            if c < best:
                best, best_perm = c, chunk[k].copy()
    z = np.zeros(n)
    return AssignmentSolution(best_perm, z, z.copy(), best, has_duals=False)


def verify_optimality(C, sol, rtol=CERT_RTOL):
    """LP duality certificate: dual feasibility plus complementary slackness."""
    C = np.asarray(C, dtype=np.float64)
    if not sol.has_duals:
        raise ValueError("solution carries no duals")
    perm = np.asarray(sol.permutation)
    n = C.shape[0]
    if sorted(perm.tolist()) != list(range(n)):
        return False
    tol = rtol * max(float(np.max(np.abs(C))), 1.0)
    u, v = np.asarray(sol.u), np.asarray(sol.v)
    if np.any(u[:, None] + v[None, :] > C + tol):
        return False
    slack = C[np.arange(n), perm] - u - v[perm]
    return bool(np.all(np.abs(slack) <= tol))


def dump_solution(C, sol, csv_path, json_path):
    """Debug dump: the cost matrix as CSV, permutation/duals/cost as JSON."""
    np.savetxt(csv_path, np.asarray(C), delimiter=",", fmt="%.17g")
    with open(json_path, "w") as fh:
        json.dump(
            {
                "permutation": [int(p) for p in sol.permutation],
                "u": [float(a) for a in sol.u],
                "v": [float(a) for a in sol.v],
                "cost": float(sol.cost),
                "has_duals": sol.has_duals,
            },
            fh,
            indent=1,
        )
