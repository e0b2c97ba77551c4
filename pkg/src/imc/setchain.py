"""Markov set-chains: sets of transition matrices and their products.

This is the comparison model built from the one-step credal sets: every
matrix whose rows are extreme points of the row credal sets.  Maximising
``(T_1 ... T_n h)_x`` over such products reproduces ``T^n h(x)`` of the
upper transition operator, which makes this module an independent oracle
for the operator code.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from imc.errors import SizeCapError
from imc.models import Contamination
from imc.operators import UpperTransitionOperator
from imc.settings import get_settings


@dataclass(frozen=True, eq=False)
class MatrixSet:
    matrices: np.ndarray  # shape (count, |X|, |X|)
    source: UpperTransitionOperator | None = None

    def __len__(self):
        return len(self.matrices)

    def __iter__(self):
        return iter(self.matrices)

    def to_dict(self) -> dict:
        out = {"count": len(self), "matrices": self.matrices.tolist()}
        if self.source is not None:
            out["states"] = list(self.source.space.states)
        return out


def extreme_matrices(T: UpperTransitionOperator, cap: int | None = None) -> MatrixSet:
    """Every matrix whose row ``x`` is an extreme point of row ``x``'s credal set."""
    cap = get_settings().matrix_cap if cap is None else cap
    per_row = [row.as_polytope().vertices for row in T.rows]
    count = math.prod(len(v) for v in per_row)
    if count > cap:
        raise SizeCapError(f"{count} extreme matrices exceed the cap {cap}")
    mats = np.array([np.stack(choice) for choice in itertools.product(*per_row)])
    return MatrixSet(mats, T)


def _fold(M: MatrixSet, h, n: int, pick, cap):
    if n < 1:
        raise ValueError("n must be at least 1")
    cap = get_settings().product_cap if cap is None else cap
    if len(M) * n > cap:
        raise SizeCapError(f"fold over {len(M)} matrices for {n} steps exceeds the cap {cap}")
    g = np.asarray(h, dtype=float)
    for _ in range(n):
        g = pick(M.matrices @ g, axis=0)
    return g


def max_product_expectation(M: MatrixSet, h, n: int, x=None, cap: int | None = None):
    """``max (T_1 ... T_n h)_x`` over products of ``n`` matrices from ``M``.

    Computed by the backward fold ``g_{k-1} = max_T T g_k`` (component-wise),
    which is exact because the rows of the set are chosen independently.
    With ``x=None`` the whole maximising gamble is returned.
    """
    g = _fold(M, h, n, np.max, cap)
    return g if x is None else float(g[x])


def min_product_expectation(M: MatrixSet, h, n: int, x=None, cap: int | None = None):
    g = _fold(M, h, n, np.min, cap)
    return g if x is None else float(g[x])


def enumerate_products(M: MatrixSet, n: int, cap: int | None = None):
    """All ``len(M)**n`` products; only meant for small brute-force checks."""
    cap = get_settings().product_cap if cap is None else cap
    if len(M) ** n > cap:
        raise SizeCapError(f"{len(M)}**{n} products exceed the cap {cap}")
    for factors in itertools.product(range(len(M)), repeat=n):
        P = M.matrices[factors[0]]
        for i in factors[1:]:
            P = P @ M.matrices[i]
        yield P


def ergodicity_coefficient(T) -> float:
    """Half the largest L1 distance between two rows of a stochastic matrix."""
    T = np.asarray(T, dtype=float)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {T.shape}")
    if np.any(T < -1e-12) or np.any(np.abs(T.sum(axis=1) - 1.0) > 1e-9):
        raise ValueError("matrix is not row-stochastic")
    diffs = np.abs(T[:, None, :] - T[None, :, :]).sum(axis=-1)
    return float(0.5 * diffs.max())


def _scrambling(pattern) -> bool:
    # every pair of rows shares a positive column
    P = pattern.astype(np.int64)
    return bool(np.all((P @ P.T) > 0))


@dataclass(frozen=True)
class ScramblingVerdict:
    verdict: str  # "scrambling", "not_scrambling" or "inconclusive"
    m: int
    witness: np.ndarray | None = None
    factors: tuple = ()

    @property
    def scrambling(self) -> bool:
        return self.verdict == "scrambling"

    def to_dict(self) -> dict:
        out = {"verdict": self.verdict, "m": self.m}
        if self.witness is not None:
            out["witness"] = self.witness.tolist()
            out["factors"] = list(self.factors)
            out["tau"] = ergodicity_coefficient(self.witness)
        return out


def _witness_key(item):
    pattern, factors = item
    return (int(pattern.sum()), -int(np.trace(pattern)), pattern.tobytes()[::-1], factors)


def product_scrambling_check(M: MatrixSet, m_max: int, cap: int | None = None) -> ScramblingVerdict:
    """Search ``m = 1..m_max`` for a length with only scrambling products.

    Works on the boolean support patterns of products.  If the set of
    patterns starts repeating while still containing a non-scrambling one,
    no length will ever work and the verdict is a definite ``not_scrambling``;
    otherwise hitting ``m_max`` gives ``inconclusive``.  Witnesses are the
    sparsest non-scrambling product, preferring self-loops.
    """
    if m_max < 1:
        raise ValueError("m_max must be at least 1")
    cap = get_settings().pattern_cap if cap is None else cap
    base = {}
    for i, T in enumerate(M.matrices):
        base.setdefault((T > 0).tobytes(), ((T > 0), (i,)))
    layer = dict(base)
    history = []
    witness = None
    for m in range(1, m_max + 1):
        bad = [(p, f) for p, f in layer.values() if not _scrambling(p)]
        if not bad:
            return ScramblingVerdict("scrambling", m)
        witness = min(bad, key=_witness_key)
        key = frozenset(layer)
        if key in history:
            return ScramblingVerdict("not_scrambling", m, _product(M, witness[1]), witness[1])
        history.append(key)
        if m == m_max:
            break
        nxt = {}
        for p, f in layer.values():
            for q, g in base.values():
                r = (p.astype(np.int64) @ q.astype(np.int64)) > 0
                nxt.setdefault(r.tobytes(), (r, f + g))
        if len(nxt) > cap:
            raise SizeCapError(f"{len(nxt)} distinct product patterns exceed the cap {cap}")
        layer = nxt
    return ScramblingVerdict("inconclusive", m_max, _product(M, witness[1]), witness[1])


def _product(M, factors):
    P = M.matrices[factors[0]]
    for i in factors[1:]:
        P = P @ M.matrices[i]
    return P


def contaminated_identity(space, epsilon: float) -> UpperTransitionOperator:
    n = len(space)
    return UpperTransitionOperator(space, [Contamination(epsilon, np.eye(n)[x]) for x in range(n)])


def strict_inclusion_demo(epsilon: float) -> bool:
    """Two-state check that products of one-step matrices miss part of the two-step set.

    For ``T = (1-eps) id + eps max`` on two states, the matrix with both
    off-diagonal entries equal to ``delta = eps (2 - eps)`` has rows in the
    credal sets of ``T^2``.  A product of two one-step matrices has
    off-diagonal entries ``p01 = 1 - (1-e1)(1-e3) - e1 e4`` and
    ``p10 = 1 - (1-e2)(1-e4) - e2 e3`` with all ``e_i`` in ``[0, eps]``.
    Each is at most ``delta``; ``p01 = delta`` forces ``e1 = e3 = eps`` and
    ``e4 = 0``, after which ``p10 = e2 (1 - eps)``, whose maximum is compared
    with ``delta``.  A grid search over the four parameters confirms the gap.
    """
    if not 0.0 < epsilon < 1.0:
        return False
    eps = float(epsilon)
    delta = eps * (2.0 - eps)
    # membership of the delta-matrix in the two-step set
    two_step = [Contamination(delta, np.eye(2)[x]) for x in range(2)]
    target = np.array([[1.0 - delta, delta], [delta, 1.0 - delta]])
    member = all(row.as_polytope().contains(target[x]) for x, row in enumerate(two_step))

    def offdiag(e1, e2, e3, e4):
        return 1 - (1 - e1) * (1 - e3) - e1 * e4, 1 - (1 - e2) * (1 - e4) - e2 * e3

    # p01 = delta pins (e1, e3, e4) = (eps, eps, 0); maximise p10 over e2
    best_p10 = max(offdiag(eps, e2, eps, 0.0)[1] for e2 in (0.0, eps))
    analytic_gap = delta - best_p10
    grid = np.linspace(0.0, eps, 11)
    e1, e2, e3, e4 = np.meshgrid(grid, grid, grid, grid, indexing="ij")
    p01, p10 = offdiag(e1, e2, e3, e4)
    residual = np.maximum(np.abs(p01 - delta), np.abs(p10 - delta)).min()
    return bool(member and analytic_gap > 1e-12 and residual > 0)
