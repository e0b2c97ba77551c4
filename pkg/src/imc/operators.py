"""Upper transition operators and their action on gambles.

An upper transition operator assigns one uncertainty model to each state;
row ``x`` is the credal set for the next state given the current state ``x``.
Powers are applied lazily: the n-step operator is generally not a row-wise
model of any of the supported families.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from imc.core import StateSpace, check_gamble
from imc.errors import DimensionError, ModelError
from imc.models import Precise


class UpperTransitionOperator:
    """One uncertainty model per state of ``space``."""

    __slots__ = ("space", "rows")

    def __init__(self, space: StateSpace, rows):
        if not isinstance(space, StateSpace):
            space = StateSpace(tuple(space))
        if isinstance(rows, dict):
            missing = set(space.states) - set(map(str, rows))
            if missing:
                raise ModelError(f"no transition model for states {sorted(missing)}")
            extra = set(map(str, rows)) - set(space.states)
            if extra:
                raise ModelError(f"transition models given for unknown states {sorted(extra)}")
            rows = [rows[s] for s in space.states]
        rows = tuple(rows)
        if len(rows) != space.size:
            raise DimensionError(f"{len(rows)} rows for {space.size} states")
        for s, row in zip(space.states, rows):
            if row.size != space.size:
                raise DimensionError(f"row {s!r} is defined on {row.size} states, expected {space.size}")
        self.space = space
        self.rows = rows

    @classmethod
    def from_matrix(cls, space, matrix) -> "UpperTransitionOperator":
        """Precise operator with the given row-stochastic matrix."""
        if not isinstance(space, StateSpace):
            space = StateSpace(tuple(space))
        matrix = np.asarray(matrix, dtype=float)
        return cls(space, [Precise(r) for r in matrix])

    @property
    def size(self) -> int:
        return self.space.size

    def __call__(self, h):
        return apply(self, h)

    def __repr__(self):
        kinds = sorted({type(r).__name__ for r in self.rows})
        return f"UpperTransitionOperator(states={list(self.space.states)}, kinds={kinds})"


def apply(T: UpperTransitionOperator, h) -> np.ndarray:
    """``(T h)(x) = upper(row x, h)``; ``h`` may be a stack of gambles."""
    h = np.asarray(h, dtype=float)
    check_gamble(h, T.size)
    return np.stack([row.upper(h) for row in T.rows], axis=-1)


def lower_apply(T: UpperTransitionOperator, h) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    check_gamble(h, T.size)
    return np.stack([row.lower(h) for row in T.rows], axis=-1)


def power_apply(T: UpperTransitionOperator, h, n: int) -> np.ndarray:
    if n < 0:
        raise ValueError("number of steps must be non-negative")
    g = np.array(h, dtype=float)
    check_gamble(g, T.size)
    for _ in range(n):
        g = apply(T, g)
    return g


def lower_power_apply(T: UpperTransitionOperator, h, n: int) -> np.ndarray:
    if n < 0:
        raise ValueError("number of steps must be non-negative")
    g = np.array(h, dtype=float)
    check_gamble(g, T.size)
    for _ in range(n):
        g = lower_apply(T, g)
    return g


def tree_step(T: UpperTransitionOperator, f, lower: bool = False) -> np.ndarray:
    """Collapse the last time step of a map on ``X**(k+1)`` to one on ``X**k``.

    ``f`` is a dense array with ``k + 1 >= 2`` axes of length ``|X|``; for
    every prefix ``x_1..x_k`` the row of the last prefix state is applied to
    the partial gamble ``f(x_1..x_k, .)``.
    """
    f = np.asarray(f, dtype=float)
    n = T.size
    if f.ndim < 2 or any(d != n for d in f.shape):
        raise DimensionError(f"expected a map on X^k with k >= 2 and |X| = {n}, got shape {f.shape}")
    evaluate = (lambda row, g: row.lower(g)) if lower else (lambda row, g: row.upper(g))
    parts = [evaluate(row, f[..., x, :]) for x, row in enumerate(T.rows)]
    return np.stack(parts, axis=-1)


def matrix_of(T: UpperTransitionOperator) -> np.ndarray:
    """Row-stochastic matrix of an operator whose credal sets are all singletons."""
    out, bad = [], []
    for s, r in zip(T.space.states, T.rows):
        if isinstance(r, Precise):
            out.append(r.mass)
            continue
        V = r.as_polytope().vertices
        if len(V) == 1:
            out.append(V[0])
        else:
            bad.append(s)
    if bad:
        raise TypeError(f"rows {bad} are not precise")
    return np.array(out)


class TimeIndexedOperators:
    """Upper transition operators for steps ``1..N-1`` (possibly all equal)."""

    __slots__ = ("operators",)

    def __init__(self, operators: Sequence[UpperTransitionOperator]):
        operators = tuple(operators)
        if not operators:
            raise ModelError("need at least one transition operator")
        space = operators[0].space
        for k, op in enumerate(operators, start=1):
            if op.space != space:
                raise DimensionError(f"operator for step {k} uses a different state space")
        self.operators = operators

    @property
    def space(self):
        return self.operators[0].space

    @property
    def stationary(self) -> bool:
        first = self.operators[0]
        return all(op is first for op in self.operators)

    def __len__(self):
        return len(self.operators)

    def __getitem__(self, step: int) -> UpperTransitionOperator:
        """Operator for time step ``step`` (1-based)."""
        if not 1 <= step <= len(self.operators):
            raise IndexError(f"no transition operator for step {step}")
        return self.operators[step - 1]
