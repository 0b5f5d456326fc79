"""Nelder-Mead minimization in plain Python, for small smooth objectives."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence


@dataclass
class SimplexResult:
    x: list[float]
    fun: float
    n_iter: int
    n_eval: int
    diameter: float
    converged: bool


def _diameter(simplex) -> float:
    best = simplex[0]
    return max(max(abs(a - b) for a, b in zip(v, best)) for v in simplex[1:])


def nelder_mead(
    f: Callable[[Sequence[float]], float],
    x0: Sequence[float],
    step: float = 0.1,
    xtol: float = 1e-11,
    max_iter: int = 20000,
    simplex: list | None = None,
) -> SimplexResult:
    """Minimize ``f`` from ``x0`` with the standard reflection/expansion/contraction/shrink moves.

    Stops when every vertex lies within ``xtol`` (max-norm) of the best one.
    """
    n = len(x0)
    if simplex is None:
        simplex = [list(map(float, x0))]
        for i in range(n):
            v = list(map(float, x0))
            v[i] += step
            simplex.append(v)
    values = [f(v) for v in simplex]
    n_eval = n + 1
    it = 0
    converged = False
    while it < max_iter:
        order = sorted(range(n + 1), key=values.__getitem__)
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]
        if _diameter(simplex) <= xtol:
            converged = True
            break
        it += 1
        worst = simplex[-1]
        centroid = [sum(v[k] for v in simplex[:-1]) / n for k in range(n)]
        xr = [2 * c - w for c, w in zip(centroid, worst)]
        fr = f(xr)
        n_eval += 1
        if fr < values[0]:
            xe = [3 * c - 2 * w for c, w in zip(centroid, worst)]
            fe = f(xe)
            n_eval += 1
            if fe < fr:
                simplex[-1], values[-1] = xe, fe
            else:
                simplex[-1], values[-1] = xr, fr
            continue
        if fr < values[-2]:
            simplex[-1], values[-1] = xr, fr
            continue
        if fr < values[-1]:
            xc = [1.5 * c - 0.5 * w for c, w in zip(centroid, worst)]  # outside contraction
            fc = f(xc)
            n_eval += 1
            if fc <= fr:
                simplex[-1], values[-1] = xc, fc
                continue
        else:
            xc = [0.5 * (c + w) for c, w in zip(centroid, worst)]  # inside contraction
            fc = f(xc)
            n_eval += 1
            if fc < values[-1]:
                simplex[-1], values[-1] = xc, fc
                continue
        best = simplex[0]
        for i in range(1, n + 1):
            simplex[i] = [0.5 * (b + v) for b, v in zip(best, simplex[i])]
            values[i] = f(simplex[i])
        n_eval += n
    order = sorted(range(n + 1), key=values.__getitem__)
    simplex = [simplex[i] for i in order]
    return SimplexResult(simplex[0], values[order[0]], it, n_eval, _diameter(simplex), converged)
