"""Weighted transfer operators and their finite-rank approximation.

``L_psi f(x) = sum_{T y = x} exp(psi(y)) f(y) / |T'(y)|``.

The operator is discretised by collocation: a function is represented by its
values at the ``n`` cell midpoints of a uniform grid and interpolated piecewise
linearly (linearly extrapolated on the two boundary half-cells).  Row ``i`` of
the matrix is the exact preimage sum at node ``i`` applied to that interpolant.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from .interval_maps import MapDescription, eval_derivative, inverse_images, preimage_table

__all__ = [
    "ConvergenceError",
    "GridFunction",
    "SpectralData",
    "grid_nodes",
    "apply_transfer_pointwise",
    "apply_transfer_power",
    "discretize",
    "leading_eigendata",
    "invariant_density",
    "spectral_data",
    "variation_estimate",
]

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 100_000
MAX_GRID = 1 << 22


class ConvergenceError(RuntimeError):
    """Power iteration failed to settle within the iteration budget."""


def grid_nodes(n_grid: int) -> np.ndarray:
    return (np.arange(n_grid) + 0.5) / n_grid


def _interp_weights(n_grid: int, y: np.ndarray):
    t = np.asarray(y, dtype=float) * n_grid - 0.5
    j0 = np.clip(np.floor(t), 0, max(n_grid - 2, 0)).astype(np.int64)
    w1 = t - j0
    return j0, np.minimum(j0 + 1, n_grid - 1), 1.0 - w1, w1


@dataclass(frozen=True)
class GridFunction:
    """Values at the cell midpoints ``(i + 1/2)/n`` of a uniform grid on [0, 1)."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    @property
    def n_grid(self) -> int:
        return len(self.values)

    @property
    def nodes(self) -> np.ndarray:
        return grid_nodes(self.n_grid)

    @property
    def floor(self) -> float:
        return float(np.min(self.values))

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        j0, j1, w0, w1 = _interp_weights(self.n_grid, arr)
        out = w0 * self.values[j0] + w1 * self.values[j1]
        return float(out) if out.ndim == 0 else out

    def integral(self, weight: Optional["GridFunction"] = None) -> float:
        """Midpoint-rule integral, optionally against a density on the same grid."""
        v = self.values if weight is None else self.values * weight.values
        return float(np.mean(v))

    def variation(self) -> float:
        return float(np.sum(np.abs(np.diff(self.values))))

    def shifted(self, c: float) -> "GridFunction":
        return GridFunction(self.values + c)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("x,value\n")
            for x, v in zip(self.nodes, self.values):
                fh.write(f"{x:.17g},{v:.17g}\n")

    @classmethod
    def from_csv(cls, path) -> "GridFunction":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        return cls(np.array([float(r["value"]) for r in rows]))


def variation_estimate(f: GridFunction) -> float:
    """Sum of absolute consecutive differences of the grid values."""
    return f.variation()


def _weight(psi, y):
    if psi is None:
        return np.ones_like(np.asarray(y, dtype=float))
    return np.exp(psi(y))


def apply_transfer_pointwise(
    tmap: MapDescription, psi: Optional[Callable], f: Callable, x: float
) -> float:
    """Exact finite preimage sum ``L_psi f(x)``."""
    total = 0.0
    for y, k in inverse_images(tmap, x):
        jac = abs(float(tmap.branches[k].derivative(y)))
        w = 1.0 if psi is None else float(np.exp(psi(y)))
        total += w * float(f(y)) / jac
    return total


def _preimage_level(tmap: MapDescription, x: np.ndarray):
    """All preimages of every entry of ``x``: returns ``(ys, source index, branch index)``.

    A shared domain endpoint mapped to the same value by both neighbouring
    branches is counted once, as in :func:`inverse_images`.
    """
    ys, src, ks = [], [], []
    prev = None
    for k, ((y, valid), branch) in enumerate(zip(preimage_table(tmap, x), tmap.branches)):
        keep = valid.copy()
        if prev is not None:
            py, pvalid = prev
            dup = pvalid & (np.abs(py - y) <= 1e-13) & (np.abs(y - float(branch.left)) <= 1e-13)
            keep &= ~dup
        prev = (y, valid)
        idx = np.nonzero(keep)[0]
        ys.append(y[idx])
        src.append(idx)
        ks.append(np.full(len(idx), k))
    return np.concatenate(ys), np.concatenate(src), np.concatenate(ks)


def _leaf_values(f: Callable, pts: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(f(pts), dtype=float)
        return np.broadcast_to(vals, pts.shape).astype(float)
    except (TypeError, ValueError):
        return np.array([float(f(y)) for y in pts])


def apply_transfer_power(
    tmap: MapDescription, psi: Optional[Callable], f: Callable, x, n: int
):
    """``L_psi^n f(x)`` as the exact sum over the full preimage tree (no discretisation).

    The tree is expanded level by level for all points of ``x`` at once.
    """
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    pts = arr
    weight = np.ones(len(arr))
    root = np.arange(len(arr))
    for _ in range(n):
        ys, src, ks = _preimage_level(tmap, pts)
        jac = np.abs(eval_derivative(tmap, ys, 1))
        # eval_derivative uses the left branch at shared endpoints; use the true branch.
        for k, branch in enumerate(tmap.branches):
            sel = ks == k
            if np.any(sel):
                jac[sel] = np.abs(branch.derivative(ys[sel]))
        weight = weight[src] * _weight(psi, ys) / jac
        root = root[src]
        pts = ys
    vals = _leaf_values(f, pts)
    out = np.bincount(root, weights=weight * vals, minlength=len(arr))
    return float(out[0]) if np.ndim(x) == 0 else out


def discretize(
    tmap: MapDescription, psi: Optional[Callable], n_grid: int
) -> sp.csr_matrix:
    """Collocation matrix of ``L_psi`` on the piecewise-linear interpolants."""
    if n_grid < len(tmap.branches) or n_grid < 2:
        raise ValueError("n_grid must be at least the number of branches (and >= 2)")
    if n_grid > MAX_GRID:
        raise ValueError(f"n_grid {n_grid} exceeds budget {MAX_GRID}")
    x = grid_nodes(n_grid)
    rows, cols, vals = [], [], []
    for (ys, valid), branch in zip(preimage_table(tmap, x), tmap.branches):
        i = np.nonzero(valid)[0]
        y = ys[i]
        wt = _weight(psi, y) / np.abs(branch.derivative(y))
        j0, j1, w0, w1 = _interp_weights(n_grid, y)
        rows += [i, i]
        cols += [j0, j1]
        vals += [wt * w0, wt * w1]
    op = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_grid, n_grid),
    )
    return op.tocsr()


def _power(op, tol: float, max_iter: int):
    v = np.ones(op.shape[0])
    for it in range(1, max_iter + 1):
        u = op @ v
        scale = np.max(np.abs(u))
        if scale == 0:
            raise ConvergenceError("operator annihilated the iterate")
        u /= scale
        if np.max(np.abs(u - v)) <= tol:
            au = op @ u
            return float(np.dot(u, au) / np.dot(u, u)), u, it
        v = u
    raise ConvergenceError(f"power iteration did not converge in {max_iter} steps")


def leading_eigendata(op, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER):
    """Dominant eigenvalue with right and left eigenvectors, by power iteration.

    Both vectors come back sup-normalised and non-negative.
    """
    lam, right, _ = _power(op, tol, max_iter)
    _, left, _ = _power(op.T.tocsr(), tol, max_iter)
    return lam, right, left


@dataclass(frozen=True)
class SpectralData:
    """Leading eigendata of a discretised ``L_phi`` together with the density ``h``.

    ``a`` is the reciprocal of the dominant eigenvalue, so that
    ``a^n L_phi^n f -> w * int f dnu``.  ``nu`` holds one weight per grid cell and
    is scaled so that ``sum(w * nu) == 1``.
    """

    a: float
    eigenvalue: float
    w: GridFunction
    nu: np.ndarray
    h: GridFunction
    h_eigenvalue: float

    @property
    def gamma_floor(self) -> float:
        return min(self.w.floor, self.h.floor)


def invariant_density(
    tmap: MapDescription,
    n_grid: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> GridFunction:
    """Fixed density of the discretised ``L_0``, normalised to unit integral."""
    return _density(tmap, n_grid, tol, max_iter)[0]


def _density(tmap, n_grid, tol, max_iter):
    lam, v, _ = _power(discretize(tmap, None, n_grid), tol, max_iter)
    return GridFunction(v / np.mean(v)), lam


def spectral_data(
    tmap: MapDescription,
    psi: Optional[Callable],
    n_grid: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> SpectralData:
    h, h_lam = _density(tmap, n_grid, tol, max_iter)
    lam, w, nu = leading_eigendata(discretize(tmap, psi, n_grid), tol, max_iter)
    nu = nu / np.dot(w, nu)
    return SpectralData(
        a=1.0 / lam, eigenvalue=lam, w=GridFunction(w), nu=nu, h=h, h_eigenvalue=h_lam
    )


def jacobian(tmap: MapDescription, y) -> np.ndarray:
    return np.abs(eval_derivative(tmap, y, 1))
