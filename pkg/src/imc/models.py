"""Credal-set model families with exact upper and lower expectations.

Every family evaluates ``upper`` on a single gamble or on a stack of gambles
(the last axis indexes states), so transition operators can push whole tables
of partial gambles through one call.  Support queries (``upper_support`` and
``lower_hits``) are answered from the model's structure, never by comparing a
computed float against a threshold.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Union

import numpy as np

from imc.core import CredalPolytope, as_mass, check_gamble
from imc.errors import ModelError
from imc.settings import get_settings


def _gambles(h, size):
    h = np.asarray(h, dtype=float)
    check_gamble(h, size)
    return h


def _as_subset(S, size):
    S = frozenset(int(i) for i in S)
    if not S:
        raise ModelError("event must be non-empty")
    if not S <= set(range(size)):
        raise ModelError(f"event {sorted(S)} is not a subset of the {size} states")
    return S


class _Model:
    size: int

    def lower(self, h):
        return -self.upper(-np.asarray(h, dtype=float))

    def upper_probability(self, S) -> float:
        ind = np.zeros(self.size)
        ind[list(_as_subset(S, self.size))] = 1.0
        return float(self.upper(ind))

    def lower_probability(self, S) -> float:
        ind = np.zeros(self.size)
        ind[list(_as_subset(S, self.size))] = 1.0
        return float(self.lower(ind))


@dataclass(frozen=True, eq=False)
class Precise(_Model):
    mass: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mass", as_mass(self.mass))

    @property
    def size(self):
        return len(self.mass)

    def upper(self, h):
        return _gambles(h, self.size) @ self.mass

    lower = upper

    def as_polytope(self):
        return CredalPolytope(self.size, _point_halfspaces(self.mass), [self.mass])

    def upper_support(self):
        return frozenset(np.flatnonzero(self.mass > 0).tolist())

    def lower_hits(self, S):
        S = _as_subset(S, self.size)
        return bool(self.mass[list(S)].sum() > 0)


@dataclass(frozen=True, eq=False)
class Vacuous(_Model):
    size: int

    def upper(self, h):
        return _gambles(h, self.size).max(axis=-1)

    def lower(self, h):
        return _gambles(h, self.size).min(axis=-1)

    def as_polytope(self):
        return CredalPolytope.simplex(self.size)

    def upper_support(self):
        return frozenset(range(self.size))

    def lower_hits(self, S):
        return _as_subset(S, self.size) == frozenset(range(self.size))


@dataclass(frozen=True, eq=False)
class Contamination(_Model):
    """``(1 - epsilon)`` times a precise model plus ``epsilon`` times vacuous."""

    epsilon: float
    base: np.ndarray

    def __post_init__(self):
        eps = float(self.epsilon)
        if not 0.0 <= eps <= 1.0:
            raise ModelError(f"contamination epsilon must lie in [0, 1], got {eps}")
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "base", as_mass(self.base))

    @property
    def size(self):
        return len(self.base)

    def upper(self, h):
        h = _gambles(h, self.size)
        return (1.0 - self.epsilon) * (h @ self.base) + self.epsilon * h.max(axis=-1)

    def lower(self, h):
        h = _gambles(h, self.size)
        return (1.0 - self.epsilon) * (h @ self.base) + self.epsilon * h.min(axis=-1)

    def as_polytope(self):
        n = self.size
        if self.epsilon == 0.0:
            return Precise(self.base).as_polytope()
        scaled = (1.0 - self.epsilon) * self.base
        halfspaces = [(-np.eye(n)[x], -scaled[x]) for x in range(n)]
        vertices = scaled + self.epsilon * np.eye(n)
        return CredalPolytope(n, halfspaces, _sorted_unique(vertices))

    def upper_support(self):
        if self.epsilon > 0:
            return frozenset(range(self.size))
        return frozenset(np.flatnonzero(self.base > 0).tolist())

    def lower_hits(self, S):
        S = _as_subset(S, self.size)
        if S == frozenset(range(self.size)):
            return True
        return bool(self.epsilon < 1.0 and self.base[list(S)].sum() > 0)


@dataclass(frozen=True, eq=False)
class Belief(_Model):
    """Mixture of vacuous models on focal sets, weighted by their masses.

    ``focal`` is a sequence of ``(subset_of_state_indices, mass)`` pairs;
    focal sets with zero mass are dropped.
    """

    size: int
    focal: tuple

    def __post_init__(self):
        kept = []
        for F, m in self.focal:
            F = frozenset(int(i) for i in F)
            m = float(m)
            if not F:
                raise ModelError("focal sets must be non-empty")
            if not F <= set(range(self.size)):
                raise ModelError(f"focal set {sorted(F)} is not a subset of the {self.size} states")
            if m < 0:
                raise ModelError(f"negative basic probability assignment {m}")
            if m > 0:
                kept.append((F, m))
        total = sum(m for _, m in kept)
        if abs(total - 1.0) > 1e-12:
            raise ModelError(f"basic probability assignment sums to {total!r}, not 1")
        object.__setattr__(self, "focal", tuple(kept))

    def upper(self, h):
        h = _gambles(h, self.size)
        return sum(m * h[..., sorted(F)].max(axis=-1) for F, m in self.focal)

    def lower(self, h):
        h = _gambles(h, self.size)
        return sum(m * h[..., sorted(F)].min(axis=-1) for F, m in self.focal)

    def belief(self, S) -> float:
        S = _as_subset(S, self.size)
        return sum(m for F, m in self.focal if F <= S)

    def as_polytope(self):
        n = self.size
        halfspaces = []
        for r in range(1, n):
            for A in itertools.combinations(range(n), r):
                bel = self.belief(A)
                if bel > 0:
                    g = np.zeros(n)
                    g[list(A)] = -1.0
                    halfspaces.append((g, -bel))
        # each priority order sends every focal mass to its top-ranked element
        vertices = []
        for order in itertools.permutations(range(n)):
            rank = {x: i for i, x in enumerate(order)}
            v = np.zeros(n)
            for F, m in self.focal:
                v[min(F, key=rank.__getitem__)] += m
            vertices.append(v)
        return CredalPolytope(n, halfspaces, _sorted_unique(np.array(vertices)))

    def upper_support(self):
        return frozenset().union(*(F for F, _ in self.focal))

    def lower_hits(self, S):
        S = _as_subset(S, self.size)
        return any(F <= S for F, _ in self.focal)


@dataclass(frozen=True, eq=False)
class Interval(_Model):
    """Lower and upper bounds on the probability of each singleton.

    Bounds are tightened on construction to the reachable ones; a bound is
    only changed when it is slack by more than the feasibility tolerance.
    """

    lower_mass: np.ndarray
    upper_mass: np.ndarray

    def __post_init__(self):
        tol = get_settings().tol_feas
        lo = np.array(self.lower_mass, dtype=float)
        up = np.array(self.upper_mass, dtype=float)
        if lo.ndim != 1 or lo.shape != up.shape:
            raise ModelError("lower and upper mass functions must be vectors of equal length")
        if np.any(lo < -tol) or np.any(up > 1 + tol) or np.any(lo > up + tol):
            raise ModelError(f"need 0 <= lower <= upper <= 1, got lower={lo.tolist()} upper={up.tolist()}")
        lo = np.clip(lo, 0.0, 1.0)
        up = np.clip(up, 0.0, 1.0)
        if lo.sum() > 1 + tol:
            raise ModelError(f"lower masses sum to {lo.sum()!r} > 1")
        if up.sum() < 1 - tol:
            raise ModelError(f"upper masses sum to {up.sum()!r} < 1")
        lo_reach = 1.0 - (up.sum() - up)
        up_reach = 1.0 - (lo.sum() - lo)
        lo = np.where(lo_reach > lo + tol, lo_reach, lo)
        up = np.where(up_reach < up - tol, up_reach, up)
        object.__setattr__(self, "lower_mass", lo)
        object.__setattr__(self, "upper_mass", up)

    @property
    def size(self):
        return len(self.lower_mass)

    def upper_probability(self, S) -> float:
        S = list(_as_subset(S, self.size))
        rest = np.ones(self.size, dtype=bool)
        rest[S] = False
        return float(min(self.upper_mass[S].sum(), 1.0 - self.lower_mass[rest].sum()))

    def lower_probability(self, S) -> float:
        S = list(_as_subset(S, self.size))
        rest = np.ones(self.size, dtype=bool)
        rest[S] = False
        return float(max(self.lower_mass[S].sum(), 1.0 - self.upper_mass[rest].sum()))

    def upper(self, h):
        h = _gambles(h, self.size)
        # Choquet integral over the nested upper level sets {h >= value}
        order = np.argsort(-h, axis=-1, kind="stable")
        desc = np.take_along_axis(h, order, axis=-1)
        in_set_upper = np.cumsum(self.upper_mass[order], axis=-1)
        out_set_lower = self.lower_mass.sum() - np.cumsum(self.lower_mass[order], axis=-1)
        cap = np.clip(np.minimum(in_set_upper, 1.0 - out_set_lower), 0.0, 1.0)
        widths = desc[..., :-1] - desc[..., 1:]
        return desc[..., -1] + np.sum(widths * cap[..., :-1], axis=-1)

    def as_polytope(self):
        n = self.size
        eye = np.eye(n)
        halfspaces = [(eye[x], self.upper_mass[x]) for x in range(n)]
        halfspaces += [(-eye[x], -self.lower_mass[x]) for x in range(n)]
        return CredalPolytope(n, halfspaces)

    def upper_support(self):
        lo_total = self.lower_mass.sum()
        reach = np.minimum(self.upper_mass, 1.0 - (lo_total - self.lower_mass))
        return frozenset(np.flatnonzero(reach > 0).tolist())

    def lower_hits(self, S):
        return self.lower_probability(S) > 0


@dataclass(frozen=True, eq=False)
class Polytope(_Model):
    polytope: CredalPolytope

    @property
    def size(self):
        return self.polytope.space_size

    def upper(self, h):
        h = _gambles(h, self.size)
        return (h @ self.polytope.vertices.T).max(axis=-1)

    def lower(self, h):
        h = _gambles(h, self.size)
        return (h @ self.polytope.vertices.T).min(axis=-1)

    def as_polytope(self):
        return self.polytope

    def upper_support(self):
        V = self.polytope.vertices
        return frozenset(np.flatnonzero((V > 0).any(axis=0)).tolist())

    def lower_hits(self, S):
        S = _as_subset(S, self.size)
        return bool(np.all(self.polytope.vertices[:, sorted(S)].sum(axis=1) > 0))


UncertaintyModel = Union[Precise, Vacuous, Contamination, Belief, Interval, Polytope]


def upper(model, h):
    """Upper expectation of ``h`` (a float for one gamble, an array for a stack)."""
    out = model.upper(h)
    return float(out) if np.ndim(out) == 0 else out


def lower(model, h):
    out = model.lower(h)
    return float(out) if np.ndim(out) == 0 else out


def as_polytope(model) -> CredalPolytope:
    return model.as_polytope()


def upper_support(model) -> frozenset:
    return model.upper_support()


def lower_hits(model, S) -> bool:
    return model.lower_hits(S)


def _point_halfspaces(m):
    eye = np.eye(len(m))
    return [(-eye[x], -m[x]) for x in range(len(m))]


def _sorted_unique(pts):
    from imc.core import _dedup

    return _dedup(np.asarray(pts, dtype=float), get_settings().dedup_tol)
