"""State spaces, gambles, mass functions and convex polytopes of mass functions.

Gambles and mass functions are plain 1-d numpy arrays indexed by the order of
a :class:`StateSpace`.  A :class:`CredalPolytope` is a set of mass functions
cut out of the probability simplex by halfspaces ``E_m(g) <= U(g)``; its
extreme points are found by exhaustive search over active constraint sets,
which is exact at the small sizes this package targets.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from imc.errors import DimensionError, InfeasibleError, ModelError, SizeCapError
from imc.settings import get_settings


@dataclass(frozen=True)
class StateSpace:
    """An ordered, finite set of distinct state labels."""

    states: tuple

    def __post_init__(self):
        states = tuple(str(s) for s in self.states)
        if not states:
            raise ModelError("a state space needs at least one state")
        if len(set(states)) != len(states):
            raise ModelError(f"duplicate state labels in {states}")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(states)})

    @property
    def size(self) -> int:
        return len(self.states)

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def index(self, state) -> int:
        try:
            return self._index[str(state)]
        except KeyError:
            raise DimensionError(f"unknown state {state!r}; states are {list(self.states)}") from None

    def subset(self, states: Iterable) -> frozenset:
        """Map labels to a frozenset of indices."""
        return frozenset(self.index(s) for s in states)

    def labels(self, indices: Iterable[int]) -> list:
        return [self.states[i] for i in sorted(indices)]

    def gamble(self, values) -> np.ndarray:
        """Build a gamble from a label mapping or a sequence in state order."""
        if isinstance(values, Mapping):
            out = np.zeros(self.size)
            seen = set()
            for key, val in values.items():
                i = self.index(key)
                out[i] = float(val)
                seen.add(i)
            missing = set(range(self.size)) - seen
            if missing:
                raise DimensionError(f"gamble has no value for states {self.labels(missing)}")
        else:
            out = np.asarray(values, dtype=float).copy()
            check_gamble(out, self.size)
        if not np.all(np.isfinite(out)):
            raise ModelError("gamble values must be finite")
        return out

    def indicator(self, states: Iterable) -> np.ndarray:
        out = np.zeros(self.size)
        for i in self.subset(states):
            out[i] = 1.0
        return out

    def mass(self, values) -> np.ndarray:
        if isinstance(values, Mapping):
            out = np.zeros(self.size)
            for key, val in values.items():
                out[self.index(key)] = float(val)
        else:
            out = np.asarray(values, dtype=float)
        return as_mass(out, self.size)


def check_gamble(h: np.ndarray, size: int) -> None:
    if np.shape(h)[-1:] != (size,):
        raise DimensionError(f"expected gamble(s) on {size} states, got shape {np.shape(h)}")


def as_mass(values, size: int | None = None, tol: float | None = None) -> np.ndarray:
    """Validate a probability mass vector and return a clamped copy."""
    tol = get_settings().tol_feas if tol is None else tol
    m = np.array(values, dtype=float)
    if m.ndim != 1 or (size is not None and m.shape[0] != size):
        raise DimensionError(f"expected a mass function on {size} states, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ModelError("mass function entries must be finite")
    if np.any(m < -tol):
        raise ModelError(f"negative mass {m.min()!r}")
    total = m.sum()
    if abs(total - 1.0) > tol:
        raise ModelError(f"masses sum to {total!r}, not 1")
    m = np.clip(m, 0.0, None)
    return m / m.sum()


def expectation(m: np.ndarray, h: np.ndarray) -> float:
    """Expectation of ``h`` under the mass function ``m``."""
    m = np.asarray(m, dtype=float)
    h = np.asarray(h, dtype=float)
    if m.shape != h.shape or m.ndim != 1:
        raise DimensionError(f"mass function shape {m.shape} does not match gamble shape {h.shape}")
    return float(m @ h)


class CredalPolytope:
    """Mass functions ``m`` with ``E_m(g) <= U`` for every halfspace ``(g, U)``.

    Construction checks feasibility; the extreme points are computed once and
    cached (or taken as given by :meth:`from_vertices`).
    """

    __slots__ = ("space_size", "halfspaces", "_vertices")

    def __init__(self, size: int, halfspaces: Sequence = (), vertices=None):
        self.space_size = int(size)
        hs = []
        for g, bound in halfspaces:
            g = np.asarray(g, dtype=float)
            check_gamble(g, self.space_size)
            hs.append((g, float(bound)))
        self.halfspaces = tuple(hs)
        if vertices is None:
            vertices = _enumerate(self.space_size, self.halfspaces)
            if len(vertices) == 0:
                culprits = _irreducible_infeasible(self.space_size, self.halfspaces)
                raise InfeasibleError(
                    f"constraint set is infeasible; irreducible conflicting halfspaces: {list(culprits)}",
                    culprits,
                )
        self._vertices = np.asarray(vertices, dtype=float).reshape(-1, self.space_size)

    @classmethod
    def simplex(cls, size: int) -> "CredalPolytope":
        return cls(size, (), np.eye(size)[::-1].copy())

    @classmethod
    def from_vertices(cls, vertices) -> "CredalPolytope":
        """Convex hull of the given mass functions, with halfspaces derived."""
        pts = np.array([as_mass(v) for v in vertices])
        if pts.ndim != 2 or len(pts) == 0:
            raise ModelError("need at least one mass function")
        halfspaces = _hull_halfspaces(pts)
        return cls(pts.shape[1], halfspaces)

    @property
    def vertices(self) -> np.ndarray:
        return self._vertices

    def contains(self, m, tol: float | None = None) -> bool:
        tol = get_settings().tol_feas if tol is None else tol
        m = np.asarray(m, dtype=float)
        if np.any(m < -tol) or abs(m.sum() - 1.0) > tol:
            return False
        return all(g @ m <= u + tol for g, u in self.halfspaces)

    def __repr__(self):
        return f"CredalPolytope(size={self.space_size}, halfspaces={len(self.halfspaces)}, vertices={len(self._vertices)})"


def enumerate_vertices(P: CredalPolytope) -> list:
    """Extreme points of ``P`` in lexicographic order."""
    return [v.copy() for v in P.vertices]


def upper_expectation_lp(P: CredalPolytope, h) -> float:
    """``max{E_m(h) : m in P}``, evaluated over the extreme points.

    This is the dual side of the linear program

        minimise  mu + sum_f lambda_f U(f)
        subject to h <= mu + sum_f lambda_f f,  lambda_f >= 0,

    see :func:`upper_expectation_primal` for a direct solve of that program.
    """
    h = np.asarray(h, dtype=float)
    check_gamble(h, P.space_size)
    return float(np.max(P.vertices @ h))


def upper_expectation_primal(P: CredalPolytope, h) -> float:
    """Solve the primal linear program with scipy; used for cross-checks."""
    from scipy.optimize import linprog

    h = np.asarray(h, dtype=float)
    check_gamble(h, P.space_size)
    k = len(P.halfspaces)
    # variables: mu, lambda_1..lambda_k
    c = np.concatenate([[1.0], [u for _, u in P.halfspaces]])
    A = np.zeros((P.space_size, k + 1))
    A[:, 0] = -1.0
    for j, (g, _) in enumerate(P.halfspaces):
        A[:, j + 1] = -g
    bounds = [(None, None)] + [(0, None)] * k
    res = linprog(c, A_ub=A, b_ub=-h, bounds=bounds, method="highs")
    if not res.success:
        raise InfeasibleError(f"primal program failed: {res.message}")
    return float(res.fun)


def _constraint_rows(size, halfspaces):
    A = [-row for row in np.eye(size)]
    b = [0.0] * size
    for g, u in halfspaces:
        A.append(g)
        b.append(u)
    return np.array(A).reshape(-1, size), np.array(b)


def _enumerate(size, halfspaces):
    settings = get_settings()
    tol = settings.tol_feas
    A, b = _constraint_rows(size, halfspaces)
    if size == 1:
        return np.ones((1, 1)) if np.all(A @ np.ones(1) <= b + tol) else np.zeros((0, 1))
    norms = np.linalg.norm(A, axis=1)
    keep = norms > 0
    # all-zero rows are either vacuous or make the system infeasible
    if np.any(~keep & (b < -tol)):
        return np.zeros((0, size))
    A, b, norms = A[keep], b[keep], norms[keep]
    An, bn = A / norms[:, None], b / norms

    k = len(An)
    count = math.comb(k, size - 1)
    if count > settings.product_cap:
        raise SizeCapError(f"vertex search over {count} constraint subsets exceeds cap {settings.product_cap}")
    ones = np.full((1, size), 1.0 / math.sqrt(size))
    found = []
    combos = itertools.combinations(range(k), size - 1)
    while True:
        chunk = np.array(list(itertools.islice(combos, 50_000)), dtype=int).reshape(-1, size - 1)
        if len(chunk) == 0:
            break
        M = np.concatenate([An[chunk], np.broadcast_to(ones, (len(chunk), 1, size))], axis=1)
        rhs = np.concatenate([bn[chunk], np.full((len(chunk), 1), 1.0 / math.sqrt(size))], axis=1)
        det = np.abs(np.linalg.det(M))
        ok = det > 1e-10
        if not np.any(ok):
            continue
        sol = np.linalg.solve(M[ok], rhs[ok][..., None])[..., 0]
        feasible = np.all(sol @ A.T <= b + tol * np.maximum(1.0, np.abs(b)), axis=1)
        found.append(sol[feasible])
    if not found:
        return np.zeros((0, size))
    pts = np.concatenate(found)
    if len(pts) == 0:
        return pts.reshape(0, size)
    pts[np.abs(pts) < tol] = 0.0
    pts = np.clip(pts, 0.0, None)
    pts /= pts.sum(axis=1, keepdims=True)
    return _dedup(pts, settings.dedup_tol)


def _dedup(pts, tol):
    order = np.lexsort(np.round(pts, 9).T[::-1])
    kept = []
    for p in pts[order]:
        if not any(np.max(np.abs(p - q)) <= tol for q in kept):
            kept.append(p)
    return np.array(kept)


def _irreducible_infeasible(size, halfspaces):
    active = list(range(len(halfspaces)))
    for i in list(active):
        trial = [j for j in active if j != i]
        if len(_enumerate(size, [halfspaces[j] for j in trial])) == 0:
            active = trial
    return tuple(active)


def _hull_halfspaces(pts):
    """Halfspaces (g, U) whose intersection with the simplex is conv(pts)."""
    from scipy.spatial import ConvexHull

    size = pts.shape[1]
    centre = pts.mean(axis=0)
    diffs = pts - centre
    # directions spanning the affine hull, orthogonal to the all-ones vector
    _, s, vt = np.linalg.svd(diffs, full_matrices=True)
    rank = int(np.sum(s > 1e-12))
    basis = vt[:rank]
    normals = vt[rank:]
    halfspaces = []
    for w in normals:
        if np.allclose(w - w.mean(), 0.0, atol=1e-12):
            continue  # parallel to the ones vector: already implied by the simplex
        level = float(w @ centre)
        halfspaces.append((w, level))
        halfspaces.append((-w, -level))
    if rank == 1:
        coords = diffs @ basis[0]
        halfspaces.append((basis[0], float(basis[0] @ centre + coords.max())))
        halfspaces.append((-basis[0], float(-(basis[0] @ centre) - coords.min())))
    elif rank >= 2:
        hull = ConvexHull(diffs @ basis.T)
        for eq in hull.equations:
            a, off = eq[:-1], eq[-1]
            g = basis.T @ a
            halfspaces.append((g, float(g @ centre - off)))
    return halfspaces
