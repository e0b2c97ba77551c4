"""Random model generators and brute-force oracles shared by the test modules.

Oracles here are written independently of the library internals: vertex
search loops over constraint subsets one at a time, upper expectations come
from scipy's LP solver on the primal side over mass functions, and joint
expectations come from explicit enumeration of compatible precise trees.
"""

from __future__ import annotations

import itertools
import math
from pathlib import Path

import numpy as np
from scipy.optimize import linprog

from imc import (
    Belief,
    Contamination,
    CredalPolytope,
    Interval,
    Polytope,
    Precise,
    StateSpace,
    UpperTransitionOperator,
    Vacuous,
)

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "imc" / "fixtures"
FAMILIES = ("precise", "vacuous", "contamination", "belief", "interval", "polytope")


def space(n):
    return StateSpace(tuple("abcdefgh"[:n]))


def rand_mass(rng, n, sparse=False):
    m = rng.dirichlet(np.ones(n))
    if sparse:
        keep = rng.random(n) < 0.6
        keep[rng.integers(n)] = True
        m = np.where(keep, m, 0.0)
        m /= m.sum()
    return m


def rand_interval(rng, n, sparse=False, min_upper=0.0):
    """Consistent bounds around a random mass function."""
    m = rand_mass(rng, n, sparse)
    lo = np.clip(m - rng.random(n) * 0.3, 0.0, None)
    up = np.clip(m + rng.random(n) * 0.3, None, 1.0)
    if sparse:
        lo[m == 0] = 0.0
        up[m == 0] = 0.0
    if min_upper:
        up = np.where(up > 0, np.maximum(up, min_upper), 0.0)
        if up.sum() < 1:
            up[np.argmax(up)] += 1 - up.sum()
    return Interval(lo, up)


def rand_belief(rng, n):
    subsets = [frozenset(c) for r in range(1, n + 1) for c in itertools.combinations(range(n), r)]
    k = int(rng.integers(1, min(4, len(subsets)) + 1))
    chosen = rng.choice(len(subsets), size=k, replace=False)
    w = rng.dirichlet(np.ones(k))
    return Belief(n, [(subsets[i], float(x)) for i, x in zip(chosen, w)])


def rand_polytope(rng, n):
    k = int(rng.integers(1, 5))
    pts = [rand_mass(rng, n) for _ in range(k)]
    return Polytope(CredalPolytope.from_vertices(pts))


def rand_model(rng, n, family):
    if family == "precise":
        return Precise(rand_mass(rng, n))
    if family == "vacuous":
        return Vacuous(n)
    if family == "contamination":
        return Contamination(float(rng.random()), rand_mass(rng, n))
    if family == "belief":
        return rand_belief(rng, n)
    if family == "interval":
        return rand_interval(rng, n)
    if family == "polytope":
        return rand_polytope(rng, n)
    raise ValueError(family)


def rand_operator(rng, n, family=None):
    rows = [rand_model(rng, n, family or FAMILIES[rng.integers(len(FAMILIES))]) for _ in range(n)]
    return UpperTransitionOperator(space(n), rows)


def rand_gamble(rng, n, scale=10.0):
    return rng.normal(size=n) * scale * rng.random()


# --- independent oracles -------------------------------------------------


def lp_upper(polytope: CredalPolytope, h):
    """max E_m(h) over the polytope, solved on the primal side by scipy."""
    n = polytope.space_size
    A = [g for g, _ in polytope.halfspaces] or None
    b = [u for _, u in polytope.halfspaces] or None
    res = linprog(-np.asarray(h), A_ub=A, b_ub=b, A_eq=np.ones((1, n)), b_eq=[1.0],
                  bounds=[(0, None)] * n, method="highs")
    assert res.success, res.message
    return -res.fun


def subset_vertices(size, halfspaces, tol=1e-9):
    """Vertices by looping over every (size-1)-subset of constraints, one solve each."""
    rows = [(-np.eye(size)[i], 0.0) for i in range(size)] + [(np.asarray(g, float), float(u)) for g, u in halfspaces]
    pts = []
    for combo in itertools.combinations(range(len(rows)), size - 1):
        A = np.array([rows[i][0] for i in combo] + [np.ones(size)])
        b = np.array([rows[i][1] for i in combo] + [1.0])
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        x = np.linalg.solve(A, b)
        if all(g @ x <= u + tol for g, u in rows):
            if not any(np.max(np.abs(x - p)) < 1e-7 for p in pts):
                pts.append(x)
    return sorted(pts, key=lambda p: tuple(np.round(p, 9)))


def brute_joint_upper(initial, T, f):
    """Max over every compatible tree built from vertices, at every situation separately.

    ``T`` is one operator or a list with the operator of each step.
    """
    N = f.ndim
    ops = list(T) if isinstance(T, (list, tuple)) else [T] * (N - 1)
    n = initial.size
    init_v = initial.as_polytope().vertices
    row_v = [[r.as_polytope().vertices for r in op.rows] for op in ops]
    situations = [s for k in range(1, N) for s in itertools.product(range(n), repeat=k)]
    choices = [range(len(row_v[len(s) - 1][s[-1]])) for s in situations]
    best = -math.inf
    for m1 in init_v:
        for pick in itertools.product(*choices):
            local = {s: row_v[len(s) - 1][s[-1]][i] for s, i in zip(situations, pick)}
            total = 0.0
            for path in itertools.product(range(n), repeat=N):
                p = m1[path[0]]
                for k in range(1, N):
                    p *= local[path[:k]][path[k]]
                total += p * f[path]
            best = max(best, total)
    return best


def matrix_powers_upper(M, h, n):
    """max over all products of n matrices, by explicit enumeration."""
    best = None
    for factors in itertools.product(range(len(M)), repeat=n):
        P = np.eye(M.shape[1])
        for i in factors:
            P = P @ M[i]
        v = P @ h
        best = v if best is None else np.maximum(best, v)
    return best
