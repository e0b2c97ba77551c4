"""Backwards recursion in imprecise probability trees.

Joint and conditional upper expectations of maps on ``X**N`` are obtained by
folding the map through one tree step per time instant, from the horizon
back to the root; marginals reduce to powers of the transition operators.
"""

from __future__ import annotations

import numpy as np

from imc.core import StateSpace
from imc.errors import DimensionError, ModelError
from imc.operators import TimeIndexedOperators, UpperTransitionOperator, apply, lower_apply, tree_step


class ImpreciseMarkovChain:
    """Initial model, transition operators and (optional) finite horizon.

    ``transitions`` is either a single operator (stationary chain, any
    horizon) or a sequence of operators for steps ``1..N-1``.
    """

    def __init__(self, initial, transitions, horizon: int | None = None):
        if isinstance(transitions, UpperTransitionOperator):
            self.stationary_operator = transitions
            self.transitions = None
            space = transitions.space
        else:
            if not isinstance(transitions, TimeIndexedOperators):
                transitions = TimeIndexedOperators(transitions)
            self.transitions = transitions
            self.stationary_operator = transitions.operators[0] if transitions.stationary else None
            space = transitions.space
            if horizon is None:
                horizon = len(transitions) + 1
            elif horizon - 1 > len(transitions):
                raise ModelError(f"horizon {horizon} needs {horizon - 1} transition operators, got {len(transitions)}")
        if horizon is not None and horizon < 1:
            raise ModelError("horizon must be at least 1")
        if initial.size != space.size:
            raise DimensionError(f"initial model has {initial.size} states, chain has {space.size}")
        self.space: StateSpace = space
        self.initial = initial
        self.horizon = horizon

    @property
    def stationary(self) -> bool:
        return self.stationary_operator is not None

    def operator(self, step: int) -> UpperTransitionOperator:
        """Upper transition operator from time ``step`` to ``step + 1``."""
        if step < 1:
            raise IndexError("time steps start at 1")
        if self.horizon is not None and step >= self.horizon:
            raise IndexError(f"step {step} is beyond the horizon {self.horizon}")
        if self.transitions is None:
            return self.stationary_operator
        return self.transitions[step]

    def with_initial(self, initial) -> "ImpreciseMarkovChain":
        ops = self.stationary_operator if self.transitions is None else self.transitions
        return ImpreciseMarkovChain(initial, ops, self.horizon)

    def with_horizon(self, horizon: int) -> "ImpreciseMarkovChain":
        ops = self.stationary_operator if self.transitions is None else self.transitions
        return ImpreciseMarkovChain(self.initial, ops, horizon)


def _check_map(model, f):
    f = np.asarray(f, dtype=float)
    n = model.space.size
    if f.ndim < 1 or any(d != n for d in f.shape):
        raise DimensionError(f"expected a map on X^N with |X| = {n}, got shape {f.shape}")
    if model.horizon is not None and f.ndim > model.horizon:
        raise DimensionError(f"map on X^{f.ndim} exceeds the horizon {model.horizon}")
    return f


def _fold(model, f, down_to: int) -> np.ndarray:
    """Apply tree steps N-1, ..., down_to to a map on X^N."""
    for k in range(f.ndim - 1, down_to - 1, -1):
        f = tree_step(model.operator(k), f)
    return f


def joint_upper(model: ImpreciseMarkovChain, f) -> float:
    """Upper expectation of a map ``f`` on ``X**N`` (``N = f.ndim``)."""
    f = _check_map(model, f)
    return float(model.initial.upper(_fold(model, f, 1)))


def joint_lower(model: ImpreciseMarkovChain, f) -> float:
    return -joint_upper(model, -np.asarray(f, dtype=float))


def _situation(model, s):
    return tuple(model.space.index(x) for x in s)


def conditional_upper(model: ImpreciseMarkovChain, f, situation) -> float:
    """Upper expectation of ``f`` conditional on the path ``situation``."""
    f = _check_map(model, f)
    s = _situation(model, situation)
    if not s:
        raise ValueError("the root situation has no conditional; use joint_upper")
    if len(s) > f.ndim:
        raise DimensionError(f"situation of length {len(s)} is longer than the map's horizon {f.ndim}")
    if len(s) == f.ndim:
        return float(f[s])
    return float(_fold(model, f, len(s))[s])


def conditional_lower(model, f, situation) -> float:
    return -conditional_upper(model, -np.asarray(f, dtype=float), situation)


def path_bounds(model: ImpreciseMarkovChain, path) -> tuple:
    """Lower and upper probability of observing ``path`` at times ``1..m``."""
    p = _situation(model, path)
    if not p:
        raise ValueError("path must visit at least one state")
    if model.horizon is not None and len(p) > model.horizon:
        raise DimensionError(f"path of length {len(p)} exceeds the horizon {model.horizon}")
    first = frozenset([p[0]])
    up = model.initial.upper_probability(first)
    lo = model.initial.lower_probability(first)
    for k in range(1, len(p)):
        row = model.operator(k).rows[p[k - 1]]
        nxt = frozenset([p[k]])
        up *= row.upper_probability(nxt)
        lo *= row.lower_probability(nxt)
    return float(lo), float(up)


def marginal_upper(model: ImpreciseMarkovChain, h, n: int) -> float:
    """Upper expectation of ``h(X(n))``."""
    g = np.asarray(h, dtype=float)
    for k in range(n - 1, 0, -1):
        g = apply(model.operator(k), g)
    return float(model.initial.upper(g))


def marginal_lower(model: ImpreciseMarkovChain, h, n: int) -> float:
    g = np.asarray(h, dtype=float)
    for k in range(n - 1, 0, -1):
        g = lower_apply(model.operator(k), g)
    return float(model.initial.lower(g))


def path_indicator(size: int, path) -> np.ndarray:
    """Indicator of a single path, as a map on ``X**len(path)``."""
    f = np.zeros((size,) * len(path))
    f[tuple(path)] = 1.0
    return f
