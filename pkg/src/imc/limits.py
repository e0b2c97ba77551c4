"""Convergence of ``T^n h`` to a constant, and contamination closed forms.

For a stationary chain, ``min T^n h`` never decreases and ``max T^n h``
never increases.  When the chain is regularly absorbing the two envelopes
meet, and their common limit is the invariant upper expectation of ``h``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from imc.errors import ConvergenceError, ModelError
from imc.operators import UpperTransitionOperator, apply, lower_apply
from imc.settings import get_settings

CONVERGED = "converged"
MAX_ITER = "max_iter_exceeded"
OSCILLATION = "oscillation_detected"

_MONOTONE_SLACK = 1e-12


@dataclass
class ConvergenceResult:
    limit_value: float
    iterations: int
    envelope_trace: list = field(repr=False)  # (min T^n h, max T^n h) for n = 0..iterations
    status: str
    final: np.ndarray = field(repr=False, default=None)

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED

    @property
    def bracket(self) -> tuple:
        return self.envelope_trace[-1]

    def to_dict(self) -> dict:
        lo, hi = self.bracket
        return {
            "status": self.status,
            "limit_value": self.limit_value,
            "iterations": self.iterations,
            "bracket": [lo, hi],
        }

    def write_trace(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "min", "max"])
            for n, (lo, hi) in enumerate(self.envelope_trace):
                w.writerow([n, repr(lo), repr(hi)])


def invariant_upper_expectation(T, h, tol=None, max_iter=None) -> ConvergenceResult:
    """Iterate ``h_{n+1} = T h_n`` until ``max h_n - min h_n < tol``.

    The stall detector (relative gap decrease below ``stall_rel`` across a
    window of ``4 |X|`` steps) is a heuristic diagnostic for periodic orbits,
    not a proof of periodicity.
    """
    if not isinstance(T, UpperTransitionOperator):
        raise ModelError("invariant_upper_expectation needs a single stationary operator")
    settings = get_settings()
    tol = settings.pf_tol if tol is None else tol
    max_iter = settings.max_iter if max_iter is None else max_iter
    if tol <= 0:
        raise ValueError("tol must be positive")
    window = 4 * T.size
    g = np.array(h, dtype=float)
    trace = [(float(g.min()), float(g.max()))]
    status = None
    n = 0
    while True:
        lo, hi = trace[-1]
        if hi - lo < tol:
            status = CONVERGED
            break
        if n >= max_iter:
            status = MAX_ITER
            break
        if n >= window:
            old = trace[n - window][1] - trace[n - window][0]
            if old - (hi - lo) <= settings.stall_rel * old:
                status = OSCILLATION
                break
        g = apply(T, g)
        n += 1
        new_lo, new_hi = float(g.min()), float(g.max())
        if new_lo < lo - _MONOTONE_SLACK * max(1.0, abs(lo)) or new_hi > hi + _MONOTONE_SLACK * max(1.0, abs(hi)):
            raise ConvergenceError(
                f"envelope lost monotonicity at step {n}: [{lo}, {hi}] -> [{new_lo}, {new_hi}]"
            )
        trace.append((new_lo, new_hi))
    lo, hi = trace[-1]
    return ConvergenceResult(0.5 * (lo + hi), n, trace, status, g)


def marginal_sequence(model, h, n_max: int) -> list:
    """``(lower, upper)`` expectation of ``h(X(n))`` for ``n = 1..n_max``."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    h = np.asarray(h, dtype=float)
    out = []
    if model.stationary:
        T = model.stationary_operator
        up, lo = h.copy(), h.copy()
        for n in range(1, n_max + 1):
            if n > 1:
                up, lo = apply(T, up), lower_apply(T, lo)
            out.append((float(model.initial.lower(lo)), float(model.initial.upper(up))))
        return out
    from imc.recursion import marginal_lower, marginal_upper

    return [(marginal_lower(model, h, n), marginal_upper(model, h, n)) for n in range(1, n_max + 1)]


def _check_eps(epsilon):
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in the open interval (0, 1), got {epsilon}")


def _matrix(T):
    if isinstance(T, UpperTransitionOperator):
        from imc.operators import matrix_of

        return matrix_of(T)
    return np.asarray(T, dtype=float)


def contamination_marginal(T, epsilon: float, initial, h, n: int) -> float:
    """Upper expectation of ``h(X(n+1))`` when every row of the precise
    matrix ``T`` is contaminated with weight ``epsilon``.

    ``initial`` is the initial uncertainty model (anything with ``upper``).
    """
    _check_eps(epsilon)
    if n < 1:
        raise ValueError("n must be at least 1")
    M = _matrix(T)
    g = np.asarray(h, dtype=float)
    tail = 0.0
    for k in range(n):
        tail += (1.0 - epsilon) ** k * g.max()
        g = M @ g
    return float((1.0 - epsilon) ** n * initial.upper(g) + epsilon * tail)


def contamination_limit(T, epsilon: float, h, tail_tol: float = 1e-12) -> float:
    """Invariant upper expectation of a contaminated precise chain.

    The geometric series is cut at the first ``K`` with
    ``(1-eps)^K (max h - min h) < tail_tol``; the remainder is replaced by
    ``(1-eps)^K max T^K h``, which overestimates it by at most that bound.
    """
    _check_eps(epsilon)
    M = _matrix(T)
    g = np.asarray(h, dtype=float)
    spread = float(g.max() - g.min())
    total = 0.0
    weight = 1.0
    while weight * spread >= tail_tol:
        total += epsilon * weight * g.max()
        g = M @ g
        weight *= 1.0 - epsilon
    return float(total + weight * g.max())
