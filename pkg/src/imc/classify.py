"""State classification under the upper accessibility relation.

``y`` is accessible from ``x`` in ``n`` steps when the n-step upper
transition probability from ``x`` to ``y`` is positive.  That happens exactly
when the support digraph (edge ``x -> y`` iff row ``x`` gives ``y`` positive
upper probability) has a walk of length ``n`` from ``x`` to ``y``, so all of
the classification works on that digraph and never thresholds floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from imc.core import StateSpace
from imc.operators import UpperTransitionOperator


@dataclass(frozen=True)
class SupportDigraph:
    space: StateSpace
    adjacency: tuple  # adjacency[i] is the frozenset of successor indices of state i

    def matrix(self) -> np.ndarray:
        n = self.space.size
        A = np.zeros((n, n), dtype=bool)
        for i, succ in enumerate(self.adjacency):
            A[i, list(succ)] = True
        return A

    def graph(self) -> nx.DiGraph:
        G = nx.DiGraph()
        G.add_nodes_from(range(self.space.size))
        G.add_edges_from((i, j) for i, succ in enumerate(self.adjacency) for j in succ)
        return G


def support_digraph(T: UpperTransitionOperator) -> SupportDigraph:
    adjacency = tuple(frozenset(row.upper_support()) for row in T.rows)
    for s, succ in zip(T.space.states, adjacency):
        if not succ:
            raise AssertionError(f"state {s!r} has no successor; its row is not a credal set")
    return SupportDigraph(T.space, adjacency)


def _as_digraph(T):
    return T if isinstance(T, SupportDigraph) else support_digraph(T)


def _bool_matmul(A, B):
    return (A.astype(np.int64) @ B.astype(np.int64)) > 0


def reachability_power(T, n: int) -> np.ndarray:
    """Boolean matrix of ``x ->^n y``."""
    D = _as_digraph(T)
    A = D.matrix()
    R = np.eye(D.space.size, dtype=bool)
    base = A
    while n:
        if n & 1:
            R = _bool_matmul(R, base)
        base = _bool_matmul(base, base)
        n >>= 1
    return R


def n_step_accessible(T, x, y, n: int) -> bool:
    if n < 0:
        raise ValueError("number of steps must be non-negative")
    D = _as_digraph(T)
    i, j = D.space.index(x), D.space.index(y)
    return bool(reachability_power(D, n)[i, j])


def maximal_regular_states(T) -> frozenset:
    """States reachable in some common number of steps from every state.

    This is the simpler existential characterisation of the top class of a
    top class regular chain; it is empty otherwise.  Once a column of the
    n-step reachability matrix is all true it stays so, and Wielandt's bound
    ``(|X|-1)**2 + 1`` caps the first such ``n``.
    """
    D = _as_digraph(T)
    size = D.space.size
    A = D.matrix()
    R = A.copy()
    out = set()
    for _ in range((size - 1) ** 2 + 1):
        out |= set(np.flatnonzero(R.all(axis=0)).tolist())
        R = _bool_matmul(R, A)
    return frozenset(out)


@dataclass
class ClassificationReport:
    states: list
    classes: list  # lists of labels, ordered by their first state
    order: list  # Hasse edges (i, j): class i has access to class j
    maximal_classes: list
    transient_classes: list
    period: dict  # class index -> period, or None when the class cannot be re-entered
    cyclic_residues: dict  # label -> residue, maximal classes only
    regular: bool
    maximal_class_regular: bool
    top_class_regular: bool
    regularly_absorbing: bool
    top_class: list | None
    absorption_steps: dict = field(default_factory=dict)
    unreached: list = field(default_factory=list)

    def class_of(self, state) -> int:
        for i, members in enumerate(self.classes):
            if state in members:
                return i
        raise KeyError(state)

    def to_dict(self) -> dict:
        return {
            "states": list(self.states),
            "classes": [list(c) for c in self.classes],
            "order": [list(e) for e in self.order],
            "maximal_classes": list(self.maximal_classes),
            "transient_classes": list(self.transient_classes),
            "period": {str(k): v for k, v in self.period.items()},
            "cyclic_residues": dict(self.cyclic_residues),
            "regular": self.regular,
            "maximal_class_regular": self.maximal_class_regular,
            "top_class_regular": self.top_class_regular,
            "regularly_absorbing": self.regularly_absorbing,
            "top_class": self.top_class,
            "absorption_steps": dict(self.absorption_steps),
            "unreached": list(self.unreached),
        }


def _class_period(G: nx.DiGraph, members):
    """Period and BFS levels of a strongly connected class."""
    members = sorted(members)
    root = members[0]
    inside = set(members)
    level = {root: 0}
    frontier = [root]
    while frontier:
        nxt = []
        for u in frontier:
            for v in sorted(G.successors(u)):
                if v in inside and v not in level:
                    level[v] = level[u] + 1
                    nxt.append(v)
        frontier = nxt
    d = 0
    for u in members:
        for v in G.successors(u):
            if v in inside:
                d = math.gcd(d, level[u] + 1 - level[v])
    return (d or None), level


@dataclass(frozen=True)
class AbsorptionResult:
    absorbing: bool
    top_class: frozenset
    steps: dict  # state index -> first k with positive lower probability of hitting the top class
    unreached: frozenset

    def __bool__(self):
        return self.absorbing


def regularly_absorbing(T: UpperTransitionOperator, top_class=None) -> AbsorptionResult:
    """Top class regular, and every state hits the top class with positive lower probability.

    Iterates ``L(S) = {y : row y gives S positive lower probability}`` from the
    top class; ``L^k(S)`` is the support of the k-step lower probability of S.
    """
    n = T.size
    if top_class is None:
        top_class = _top_class_if_regular(T)
    if not top_class:
        return AbsorptionResult(False, frozenset(), {}, frozenset(range(n)))
    top = frozenset(top_class)
    steps = {x: 0 for x in top}
    seen = {top}
    current = top
    k = 0
    while k < 2**n:
        k += 1
        current = frozenset(y for y, row in enumerate(T.rows) if row.lower_hits(current))
        for y in current:
            steps.setdefault(y, k)
        if current in seen:
            break
        seen.add(current)
    unreached = frozenset(range(n)) - set(steps)
    return AbsorptionResult(not unreached, top, steps, unreached)


def _top_class_if_regular(T):
    report = _structure(support_digraph(T))
    return report["top"]


def _structure(D: SupportDigraph):
    G = D.graph()
    comps = sorted((sorted(c) for c in nx.strongly_connected_components(G)), key=lambda c: c[0])
    which = {x: i for i, c in enumerate(comps) for x in c}
    C = nx.DiGraph()
    C.add_nodes_from(range(len(comps)))
    C.add_edges_from((which[u], which[v]) for u, v in G.edges if which[u] != which[v])
    maximal = [i for i in range(len(comps)) if C.out_degree(i) == 0]
    periods, levels = {}, {}
    for i, c in enumerate(comps):
        periods[i], levels[i] = _class_period(G, c)
    top = None
    if len(maximal) == 1 and periods[maximal[0]] == 1:
        top = frozenset(comps[maximal[0]])
    return {
        "comps": comps,
        "condensation": C,
        "maximal": maximal,
        "periods": periods,
        "levels": levels,
        "top": top,
    }


def classify(T: UpperTransitionOperator) -> ClassificationReport:
    D = support_digraph(T)
    s = _structure(D)
    labels = D.space.states
    comps, maximal, periods = s["comps"], s["maximal"], s["periods"]
    hasse = sorted(nx.transitive_reduction(s["condensation"]).edges)
    residues = {}
    for i in maximal:
        d = periods[i]
        for x in comps[i]:
            residues[labels[x]] = s["levels"][i][x] % d
    absorbing = regularly_absorbing(T, s["top"])
    return ClassificationReport(
        states=list(labels),
        classes=[[labels[x] for x in c] for c in comps],
        order=[(int(a), int(b)) for a, b in hasse],
        maximal_classes=maximal,
        transient_classes=[i for i in range(len(comps)) if i not in maximal],
        period=periods,
        cyclic_residues=residues,
        regular=len(comps) == 1 and periods[0] == 1,
        maximal_class_regular=all(periods[i] == 1 for i in maximal),
        top_class_regular=s["top"] is not None,
        regularly_absorbing=absorbing.absorbing,
        top_class=None if s["top"] is None else D.space.labels(s["top"]),
        absorption_steps={labels[x]: k for x, k in sorted(absorbing.steps.items())},
        unreached=D.space.labels(absorbing.unreached),
    )
