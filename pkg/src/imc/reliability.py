"""k-out-of-n:F systems with interval component reliabilities.

The embedded chain counts failed components on ``{0, 1, ..., k}``.  From
``l < k`` the next component either works (stay at ``l``) or fails (move to
``l + 1``); state ``k`` (system failure) is absorbing.  Each component works
with a probability known only to lie in ``[r_lower, r_upper]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from imc.core import StateSpace
from imc.errors import ModelError
from imc.models import Interval, Precise
from imc.operators import UpperTransitionOperator, lower_power_apply, power_apply
from imc.recursion import ImpreciseMarkovChain


@dataclass(frozen=True)
class ReliabilitySpec:
    k: int
    n: int
    r_lower: float
    r_upper: float

    def __post_init__(self):
        if self.k < 1 or self.n < 0:
            raise ModelError(f"need k >= 1 and n >= 0, got k={self.k}, n={self.n}")
        if not 0.0 <= self.r_lower <= self.r_upper <= 1.0:
            raise ModelError(f"need 0 <= r_lower <= r_upper <= 1, got [{self.r_lower}, {self.r_upper}]")


def embedded_operator(k: int, r_lower: float, r_upper: float) -> UpperTransitionOperator:
    if not 0.0 <= r_lower <= r_upper <= 1.0:
        raise ModelError(f"need 0 <= r_lower <= r_upper <= 1, got [{r_lower}, {r_upper}]")
    space = StateSpace(tuple(str(i) for i in range(k + 1)))
    rows = []
    for ell in range(k):
        lo = np.zeros(k + 1)
        up = np.zeros(k + 1)
        lo[ell], lo[ell + 1] = r_lower, 1.0 - r_upper
        up[ell], up[ell + 1] = r_upper, 1.0 - r_lower
        rows.append(Interval(lo, up))
    rows.append(Precise(np.eye(k + 1)[k]))
    return UpperTransitionOperator(space, rows)


def build_embedded_chain(spec: ReliabilitySpec) -> ImpreciseMarkovChain:
    T = embedded_operator(spec.k, spec.r_lower, spec.r_upper)
    initial = Precise(np.eye(spec.k + 1)[0])
    return ImpreciseMarkovChain(initial, T)


def failure_bounds(spec: ReliabilitySpec) -> tuple:
    """Lower and upper probability that at least ``k`` of ``n`` components fail."""
    T = embedded_operator(spec.k, spec.r_lower, spec.r_upper)
    failed = np.zeros(spec.k + 1)
    failed[spec.k] = 1.0
    upper = power_apply(T, failed, spec.n)[0]
    lower = lower_power_apply(T, failed, spec.n)[0]
    # both sides round differently; with r_lower == r_upper they must coincide
    return float(min(lower, upper)), float(upper)


def failure_closed_form(k: int, n: int, r: float) -> float:
    """``1 - sum_{l<k} C(n, l) r^(n-l) (1-r)^l``: failure probability for reliability ``r``."""
    if r in (0.0, 1.0) or n <= 50:
        survive = sum(math.comb(n, ell) * r ** (n - ell) * (1.0 - r) ** ell for ell in range(min(k, n + 1)))
    else:
        logs = [
            math.lgamma(n + 1) - math.lgamma(ell + 1) - math.lgamma(n - ell + 1)
            + (n - ell) * math.log(r) + ell * math.log1p(-r)
            for ell in range(min(k, n + 1))
        ]
        top = max(logs)
        survive = math.exp(top) * sum(math.exp(v - top) for v in logs)
    return 1.0 - survive


def reliability_sweep(k: int, r_values, eps_values, n_values) -> list:
    """Rows ``(r, epsilon, n, f_lower, f_upper)`` with ``[r - eps, r + eps]`` as reliability range.

    Pairs whose range leaves ``[0, 1]`` are skipped.
    """
    rows = []
    for r in r_values:
        for eps in eps_values:
            lo, hi = r - eps, r + eps
            if lo < -1e-12 or hi > 1 + 1e-12:
                continue
            lo, hi = min(max(lo, 0.0), 1.0), min(max(hi, 0.0), 1.0)
            for n in n_values:
                f_lo, f_up = failure_bounds(ReliabilitySpec(k, n, lo, hi))
                rows.append((r, eps, n, f_lo, f_up))
    return rows
