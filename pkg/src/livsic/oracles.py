"""Independent reference computations used to cross-check the solvers.

None of these share code paths with :mod:`livsic.transfer_operator`; they
rely on closed forms (Parry series, Markov chains), on Ulam's cell-to-cell
matrix, or on plain orbit statistics.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .interval_maps import MapDescription, eval_map


def parry_density(beta: float, x, n_terms: int = 200) -> np.ndarray:
    """Parry density of ``x -> beta x mod 1``: ``sum_{n: x < T^n 1} beta^-n``, normalised.

    ``T^n 1`` is iterated with ``T 1 = beta - 1`` (the left limit convention)
    and the series stops once the orbit of 1 hits 0.
    """
    x = np.asarray(x, dtype=float)
    orbit = []
    t = 1.0
    for _ in range(n_terms):
        orbit.append(t)
        t = beta * t - np.floor(beta * t) if t < 1.0 else beta - 1.0
        if t <= 0.0:
            break
    weights = beta ** -np.arange(len(orbit), dtype=float)
    raw = np.sum(weights[:, None] * (x[None, :] < np.array(orbit)[:, None]), axis=0)
    # Normalising constant: int_0^1 sum = sum_n beta^-n T^n 1.
    norm = float(np.dot(weights, orbit))
    return raw / norm


def orbit_histogram(
    tmap: MapDescription,
    n_points: int = 10**7,
    bins: int = 64,
    n_orbits: int = 1000,
    burn_in: int = 100,
    seed: int = 0,
) -> np.ndarray:
    """Empirical density (one value per bin) from ``n_orbits`` parallel orbits.

    The orbits start at random points and are advanced together, so the cost
    is ``n_points / n_orbits`` vectorised map evaluations.
    """
    rng = np.random.default_rng(seed)
    x = rng.random(n_orbits)
    counts = np.zeros(bins)
    steps = n_points // n_orbits
    for i in range(burn_in + steps):
        x = eval_map(tmap, x)
        # Keep the orbit in [0, 1) and away from exact float fixed points.
        x = np.where(x >= 1.0, rng.random(n_orbits), x)
        if i >= burn_in:
            counts += np.bincount(np.minimum((x * bins).astype(int), bins - 1), minlength=bins)
    return counts / counts.sum() * bins


def ulam_density(tmap: MapDescription, n_cells: int, samples: int = 64) -> np.ndarray:
    """Ulam approximation: cell-to-cell transition frequencies, leading left eigenvector."""
    t = (np.arange(samples) + 0.5) / samples
    x = ((np.arange(n_cells)[:, None] + t[None, :]) / n_cells).ravel()
    src = np.repeat(np.arange(n_cells), samples)
    dst = np.minimum((eval_map(tmap, x) * n_cells).astype(int), n_cells - 1)
    p = sp.coo_matrix((np.full(len(x), 1.0 / samples), (src, dst)), shape=(n_cells, n_cells)).tocsr()
    _, vec = spla.eigs(p.T, k=1, which="LM")
    v = np.abs(np.real(vec[:, 0]))
    return v / v.mean()


def markov_density(tmap: MapDescription, points: Sequence[Fraction]) -> tuple:
    """Exact piecewise-constant invariant density of an affine Markov map.

    Returns ``(points, values)`` where ``values[i]`` is the density on
    ``(points[i], points[i+1])``.  Transition weight from element ``i`` to
    element ``j`` is ``|I_j| / |I_i|`` when ``T(I_i)`` covers ``I_j`` (mass flow
    for affine branches); the stationary vector is solved exactly with
    Fractions.
    """
    pts = sorted(points)
    n = len(pts) - 1
    lengths = [pts[i + 1] - pts[i] for i in range(n)]
    trans = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        lo, hi = pts[i], pts[i + 1]
        branch = next(b for b in tmap.branches if b.left <= (lo + hi) / 2 <= b.right)
        a, b = sorted((branch(lo), branch(hi)))
        for j in range(n):
            if a <= pts[j] and pts[j + 1] <= b:
                trans[i][j] = lengths[j] / (b - a)
    # Stationary mass pi = pi P, sum pi = 1, by exact Gauss-Jordan elimination.
    rows = [[trans[j][i] - (1 if i == j else 0) for j in range(n)] + [Fraction(0)] for i in range(n)]
    rows[-1] = [Fraction(1)] * n + [Fraction(1)]
    for col in range(n):
        piv = next(r for r in range(col, n) if rows[r][col] != 0)
        rows[col], rows[piv] = rows[piv], rows[col]
        rows[col] = [v / rows[col][col] for v in rows[col]]
        for r in range(n):
            if r != col and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [u - f * v for u, v in zip(rows[r], rows[col])]
    mass = [rows[i][-1] for i in range(n)]
    return pts, [m / length for m, length in zip(mass, lengths)]
