"""Singleton bounds over time and their picture in the probability simplex."""

from __future__ import annotations

import csv
import math

import numpy as np

from imc.core import CredalPolytope
from imc.errors import ModelError
from imc.operators import apply, lower_apply


def singleton_bounds(model, steps: int) -> np.ndarray:
    """Array ``B[n-1, x] = (lower, upper)`` probability of ``X(n) = x``, ``n = 1..steps``.

    Uses the backwards recursion on the indicators, so each entry is exact
    (the box they span is a conservative outer approximation of the credal
    set of ``X(n)``).
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    size = model.space.size
    eye = np.eye(size)
    out = np.zeros((steps, size, 2))
    if model.stationary:
        T = model.stationary_operator
        up, lo = eye.copy(), eye.copy()  # row x holds T^(n-1) 1_x
        for n in range(steps):
            if n:
                up, lo = apply(T, up), lower_apply(T, lo)
            out[n, :, 0] = model.initial.lower(lo)
            out[n, :, 1] = model.initial.upper(up)
        return out
    from imc.recursion import marginal_lower, marginal_upper

    for n in range(steps):
        for x in range(size):
            out[n, x] = marginal_lower(model, eye[x], n + 1), marginal_upper(model, eye[x], n + 1)
    return out


def write_csv(path, space, bounds) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "state", "lower", "upper"])
        for n, row in enumerate(bounds, start=1):
            for s, (lo, up) in zip(space.states, row):
                w.writerow([n, s, repr(float(lo)), repr(float(up))])


def box_polygon(bounds_at_n) -> np.ndarray:
    """Vertices of ``{m : lower(x) <= m(x) <= upper(x)}`` in angular order."""
    lo, up = bounds_at_n[:, 0], bounds_at_n[:, 1]
    size = len(lo)
    eye = np.eye(size)
    halfspaces = [(eye[x], up[x]) for x in range(size)] + [(-eye[x], -lo[x]) for x in range(size)]
    V = CredalPolytope(size, halfspaces).vertices
    if len(V) > 2:
        pts = _ternary(V)
        centre = pts.mean(axis=0)
        order = np.argsort(np.arctan2(pts[:, 1] - centre[1], pts[:, 0] - centre[0]))
        V = V[order]
    return V


_SIDE = 200.0
_CORNERS = np.array([[0.0, _SIDE * math.sqrt(3) / 2], [_SIDE, _SIDE * math.sqrt(3) / 2], [_SIDE / 2, 0.0]])


def _ternary(V):
    return np.asarray(V) @ _CORNERS


def render_svg(space, bounds, panels) -> str:
    """Simplex panels (one per selected step) with the bound polygon of each step."""
    if space.size != 3:
        raise ModelError("simplex pictures need exactly three states")
    margin, gap = 20.0, 30.0
    height = _SIDE * math.sqrt(3) / 2
    width = len(panels) * (_SIDE + gap) - gap + 2 * margin
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height + 2 * margin + 20:.0f}">',
    ]
    for i, n in enumerate(panels):
        if not 1 <= n <= len(bounds):
            raise ValueError(f"step {n} is outside 1..{len(bounds)}")
        dx = margin + i * (_SIDE + gap)
        lines.append(f'<g transform="translate({dx:.1f},{margin:.1f})">')
        outline = " ".join(f"{x:.2f},{y:.2f}" for x, y in _CORNERS)
        lines.append(f'<polygon points="{outline}" fill="#eeeeee" stroke="black"/>')
        pts = _ternary(box_polygon(bounds[n - 1]))
        poly = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
        lines.append(f'<polygon points="{poly}" fill="#4a7ebb" fill-opacity="0.6" stroke="#1f3f66"/>')
        for (x, y), label in zip(_CORNERS, space.states):
            lines.append(f'<text x="{x:.2f}" y="{y + (14 if y > 0 else -4):.2f}" font-size="12" text-anchor="middle">{label}</text>')
        lines.append(f'<text x="{_SIDE / 2:.2f}" y="{height + 30:.2f}" font-size="12" text-anchor="middle">n={n}</text>')
        lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
