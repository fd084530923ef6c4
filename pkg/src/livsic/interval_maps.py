"""Piecewise expanding maps of the unit interval.

A map is a finite ordered list of monotone polynomial branches whose closed
domains tile [0, 1].  Everything here is a pure function of an immutable
:class:`MapDescription`.

Conventions
-----------
* Branch domains are stored closed.  At a shared endpoint the left branch
  is used by :func:`eval_map`.
* A branch value equal to 1 is returned as 1.0 (the right endpoint of the
  closure); callers iterating orbits fold it themselves if they need to.
* Coefficients may be :class:`fractions.Fraction`; scalar evaluation then
  stays exact, which the Markov checks rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "DomainError",
    "BudgetExceeded",
    "Branch",
    "MapDescription",
    "CylinderPartition",
    "eval_map",
    "eval_derivative",
    "inverse_images",
    "preimage_table",
    "cylinders",
    "forward_image",
    "weak_covering_index",
    "make_beta_map",
    "merge_intervals",
]

MAX_DEGREE = 5
_ROOT_WIDTH = 1e-15
_DEDUP = 1e-13
_EDGE_TOL = 1e-14


class DomainError(ValueError):
    """A point lies outside the domain on which it was evaluated."""


class BudgetExceeded(RuntimeError):
    """A construction would exceed its configured size budget."""


def _horner(coeffs, x):
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * x + c
    return acc


def _poly_derivative(coeffs: Sequence, order: int) -> tuple:
    out = list(coeffs)
    for _ in range(order):
        if len(out) <= 1:
            return (0 * out[0],) if out else (0,)
        out = [k * out[k] for k in range(1, len(out))]
    return tuple(out)


@dataclass(frozen=True)
class Branch:
    """One monotone polynomial piece ``T(x) = sum coeffs[k] x**k`` on ``domain``."""

    domain: tuple
    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(self.domain))
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        lo, hi = self.domain
        if not lo < hi:
            raise ValueError(f"empty branch domain {self.domain}")
        if len(self.coeffs) - 1 > MAX_DEGREE:
            raise ValueError(f"branch degree exceeds {MAX_DEGREE}")

    @cached_property
    def _fcoeffs(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs])

    @cached_property
    def _fderivs(self) -> tuple:
        return tuple(
            np.array([float(c) for c in _poly_derivative(self.coeffs, k)])
            for k in range(MAX_DEGREE + 2)
        )

    @property
    def left(self):
        return self.domain[0]

    @property
    def right(self):
        return self.domain[1]

    def __call__(self, x):
        if isinstance(x, np.ndarray):
            return np.polynomial.polynomial.polyval(x, self._fcoeffs)
        return _horner(self.coeffs, x)

    def derivative(self, x, order: int = 1):
        if order < 0:
            raise ValueError("order must be non-negative")
        if isinstance(x, np.ndarray):
            if order > MAX_DEGREE + 1:
                return np.zeros_like(x, dtype=float)
            return np.polynomial.polynomial.polyval(x, self._fderivs[order])
        return _horner(_poly_derivative(self.coeffs, order), x)

    def taylor(self, x: float, order: int) -> np.ndarray:
        """Taylor coefficients of the branch at ``x`` up to ``order``."""
        out = np.zeros(order + 1)
        fact = 1.0
        for k in range(order + 1):
            if k:
                fact *= k
            out[k] = float(self.derivative(float(x), k)) / fact
        return out

    @cached_property
    def orientation(self) -> int:
        mid = (float(self.left) + float(self.right)) / 2
        return 1 if float(self.derivative(mid)) > 0 else -1

    @cached_property
    def image(self) -> tuple:
        """Closed image ``T([l, r])`` as an ordered pair."""
        a, b = self(self.left), self(self.right)
        return (a, b) if a <= b else (b, a)

    def contains(self, x, tol: float = 0.0) -> bool:
        return float(self.left) - tol <= x <= float(self.right) + tol

    @cached_property
    def is_affine(self) -> bool:
        return not np.any(self._fcoeffs[2:])

    def inverse(self, x: float) -> float:
        """Unique ``y`` in the domain with ``T(y) = x`` (``x`` must lie in the image)."""
        if self.is_affine:
            c = self._fcoeffs
            return min(max((float(x) - c[0]) / c[1], float(self.left)), float(self.right))
        return float(self.inverse_array(np.array([float(x)]))[0])

    def inverse_array(self, xs: np.ndarray) -> np.ndarray:
        """Vectorised monotone root solve: bisection to 1e-15, then one Newton step.

        Affine branches are inverted directly.
        """
        xs = np.asarray(xs, dtype=float)
        if self.is_affine:
            c = self._fcoeffs
            return np.clip((xs - c[0]) / c[1], float(self.left), float(self.right))
        lo = np.full(xs.shape, float(self.left))
        hi = np.full(xs.shape, float(self.right))
        sign = self.orientation
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            below = sign * (self(mid) - xs) < 0
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.all(hi - lo <= _ROOT_WIDTH):
                break
        y = 0.5 * (lo + hi)
        d = self.derivative(y)
        y = y - (self(y) - xs) / d
        return np.clip(y, float(self.left), float(self.right))

    def min_abs_derivative(self, samples: int = 2049) -> float:
        t = np.linspace(float(self.left), float(self.right), samples)
        return float(np.min(np.abs(self.derivative(t))))

    def max_abs_derivative(self, samples: int = 2049) -> float:
        t = np.linspace(float(self.left), float(self.right), samples)
        return float(np.max(np.abs(self.derivative(t))))


@dataclass(frozen=True)
class MapDescription:
    """A piecewise expanding map of [0, 1) given by ordered polynomial branches.

    ``lam`` is the declared expansion bound; when omitted it is estimated as the
    sampled minimum of ``|T'|`` over all branches.
    """

    branches: tuple
    lam: Optional[float] = None
    label: str = ""

    def __post_init__(self):
        branches = tuple(
            b if isinstance(b, Branch) else Branch(*b) for b in self.branches
        )
        object.__setattr__(self, "branches", branches)
        if not branches:
            raise ValueError("a map needs at least one branch")
        if abs(float(branches[0].left)) > _EDGE_TOL or abs(float(branches[-1].right) - 1) > _EDGE_TOL:
            raise ValueError("branch domains must start at 0 and end at 1")
        for a, b in zip(branches, branches[1:]):
            if a.right != b.left and abs(float(a.right) - float(b.left)) > _EDGE_TOL:
                raise ValueError("consecutive branch domains must share an endpoint")
        inf_slope = min(b.min_abs_derivative() for b in branches)
        if inf_slope <= 1:
            raise ValueError(f"map is not expanding: inf |T'| = {inf_slope}")
        for k, b in enumerate(branches):
            t = np.linspace(float(b.left), float(b.right), 2049)
            d = b.derivative(t)
            if not (np.all(d > 0) or np.all(d < 0)):
                raise ValueError(f"branch {k} is not strictly monotone")
            lo, hi = b.image
            if float(lo) < -1e-12 or float(hi) > 1 + 1e-12:
                raise ValueError(f"branch {k} leaves [0, 1]: image {b.image}")
        if self.lam is None:
            object.__setattr__(self, "lam", inf_slope)
        elif not 1 < self.lam <= inf_slope * (1 + 1e-12):
            raise ValueError(f"declared lambda {self.lam} exceeds inf |T'| = {inf_slope}")

    def __len__(self):
        return len(self.branches)

    @cached_property
    def breakpoints(self) -> np.ndarray:
        """Sorted domain endpoints, including 0 and 1."""
        pts = [float(self.branches[0].left)] + [float(b.right) for b in self.branches]
        return np.array(pts)

    @cached_property
    def _rights(self) -> np.ndarray:
        return self.breakpoints[1:]

    @property
    def images(self) -> list:
        return [b.image for b in self.branches]

    def branch_index(self, x):
        """Index of the branch used at ``x`` (left branch wins at shared endpoints)."""
        arr = np.asarray(x, dtype=float)
        if np.any(arr < -_EDGE_TOL) or np.any(arr > 1 + _EDGE_TOL):
            raise DomainError(f"point outside [0, 1]: {x}")
        idx = np.searchsorted(self._rights, arr, side="left")
        idx = np.minimum(idx, len(self.branches) - 1)
        return idx if arr.ndim else int(idx)

    def sup_derivative(self) -> float:
        return max(b.max_abs_derivative() for b in self.branches)


def eval_map(tmap: MapDescription, x):
    """Evaluate ``T`` at a point or an array of points in [0, 1]."""
    if isinstance(x, np.ndarray):
        idx = tmap.branch_index(x)
        out = np.empty(x.shape, dtype=float)
        for k, b in enumerate(tmap.branches):
            sel = idx == k
            if np.any(sel):
                out[sel] = b(x[sel])
        return np.clip(out, 0.0, 1.0)
    branch = tmap.branches[tmap.branch_index(float(x))]
    y = branch(x)
    if isinstance(y, Fraction):
        return min(max(y, Fraction(0)), Fraction(1))
    return min(max(float(y), 0.0), 1.0)


def eval_derivative(tmap: MapDescription, x, order: int = 1):
    """Exact derivative of the active branch polynomial at ``x``."""
    if not 1 <= order <= MAX_DEGREE:
        raise ValueError(f"derivative order must be in 1..{MAX_DEGREE}")
    if isinstance(x, np.ndarray):
        idx = tmap.branch_index(x)
        out = np.empty(x.shape, dtype=float)
        for k, b in enumerate(tmap.branches):
            sel = idx == k
            if np.any(sel):
                out[sel] = b.derivative(x[sel], order)
        return out
    return tmap.branches[tmap.branch_index(float(x))].derivative(x, order)


def inverse_images(tmap: MapDescription, x: float) -> list:
    """All ``(y, branch_index)`` with ``T_k(y) = x``, ordered by branch index."""
    x = float(x)
    if not -_EDGE_TOL <= x <= 1 + _EDGE_TOL:
        raise DomainError(f"point outside [0, 1]: {x}")
    out = []
    for k, b in enumerate(tmap.branches):
        lo, hi = b.image
        if float(lo) - _EDGE_TOL <= x <= float(hi) + _EDGE_TOL:
            y = b.inverse(x)
            if out and abs(out[-1][0] - y) <= _DEDUP:
                continue
            out.append((y, k))
    return out


def preimage_table(tmap: MapDescription, xs: np.ndarray) -> list:
    """Vectorised preimages: per branch, ``(ys, valid)`` arrays aligned with ``xs``.

    ``valid[i]`` is true when ``xs[i]`` lies in the closed image of the branch;
    ``ys`` holds the preimage there and is meaningless elsewhere.
    """
    xs = np.asarray(xs, dtype=float)
    table = []
    for b in tmap.branches:
        lo, hi = (float(v) for v in b.image)
        valid = (xs >= lo - _EDGE_TOL) & (xs <= hi + _EDGE_TOL)
        ys = b.inverse_array(np.clip(xs, lo, hi))
        table.append((ys, valid))
    return table


@dataclass(frozen=True)
class CylinderPartition:
    """Cells of the refined partition P v T^-1 P v ... v T^-(n-1) P.

    ``words[i]`` is the branch itinerary of cell ``i``; cells are sorted left to right.
    """

    generation: int
    left: np.ndarray
    right: np.ndarray
    words: np.ndarray

    def __len__(self):
        return len(self.left)

    @property
    def lengths(self) -> np.ndarray:
        return self.right - self.left

    def cells(self) -> list:
        return [
            ((float(a), float(b)), tuple(int(k) for k in w))
            for a, b, w in zip(self.left, self.right, self.words)
        ]

    def locate(self, x) -> np.ndarray:
        """Index of the cell containing each point (left-closed convention)."""
        idx = np.searchsorted(self.right, np.asarray(x, dtype=float), side="left")
        return np.minimum(idx, len(self.left) - 1)


def cylinders(
    tmap: MapDescription, n: int, budget: int = 10**6, min_length: float = 1e-14
) -> CylinderPartition:
    """All nonempty n-cylinders, built by recursive pullback of the branch domains."""
    if n < 1:
        raise ValueError("generation must be >= 1")
    left = np.array([float(b.left) for b in tmap.branches])
    right = np.array([float(b.right) for b in tmap.branches])
    words = np.arange(len(tmap.branches)).reshape(-1, 1)
    for _ in range(n - 1):
        new_l, new_r, new_w = [], [], []
        for k, b in enumerate(tmap.branches):
            lo, hi = (float(v) for v in b.image)
            a = np.maximum(left, lo)
            c = np.minimum(right, hi)
            keep = c - a > min_length
            if not np.any(keep):
                continue
            ya = b.inverse_array(a[keep])
            yc = b.inverse_array(c[keep])
            cl, cr = (ya, yc) if b.orientation > 0 else (yc, ya)
            ok = cr - cl > min_length
            new_l.append(cl[ok])
            new_r.append(cr[ok])
            w = words[keep][ok]
            new_w.append(np.hstack([np.full((len(w), 1), k), w]))
        left = np.concatenate(new_l)
        right = np.concatenate(new_r)
        words = np.vstack(new_w)
        if len(left) > budget:
            raise BudgetExceeded(f"{len(left)} cylinders exceed budget {budget}")
        order = np.argsort(left, kind="stable")
        left, right, words = left[order], right[order], words[order]
    return CylinderPartition(n, left, right, words)


def merge_intervals(intervals, tol: float = 1e-12) -> list:
    """Union of closed intervals as a sorted list of disjoint intervals."""
    ivs = sorted((float(a), float(b)) for a, b in intervals if b - a > -tol)
    merged = []
    for a, b in ivs:
        if merged and a <= merged[-1][1] + tol:
            merged[-1] = (merged[-1][0], max(merged[-1][1], b))
        else:
            merged.append((a, b))
    return merged


def forward_image(tmap: MapDescription, intervals) -> list:
    """``T`` applied to a union of closed intervals, as merged intervals."""
    out = []
    for a, b in intervals:
        for br in tmap.branches:
            lo, hi = max(a, float(br.left)), min(b, float(br.right))
            if hi - lo <= 0:
                continue
            ya, yb = float(br(lo)), float(br(hi))
            out.append((min(ya, yb), max(ya, yb)))
    return merge_intervals(out)


def _covers_unit(intervals, tol: float = 1e-12) -> bool:
    return len(intervals) == 1 and intervals[0][0] <= tol and intervals[0][1] >= 1 - tol


def weak_covering_index(
    tmap: MapDescription, n_max: int, include_initial: bool = True
) -> Optional[int]:
    """Smallest n0 <= n_max with the union of T^j(alpha), j = 0..n0, equal to I.

    Returns ``None`` when no such n0 exists up to ``n_max``.  With
    ``include_initial=False`` the union starts at j = 1 instead.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    best = 0
    for b in tmap.branches:
        current = [(float(b.left), float(b.right))]
        union = list(current) if include_initial else []
        found = None
        for j in range(1, n_max + 1):
            current = forward_image(tmap, current)
            union = merge_intervals(union + current)
            if _covers_unit(union):
                found = j
                break
        if found is None:
            return None
        best = max(best, found)
    return best


def make_beta_map(beta: float, alpha: float = 0.0, label: str = "") -> MapDescription:
    """Affine beta-transformation ``x -> beta x + alpha (mod 1)``."""
    if not beta > 1:
        raise ValueError("beta must exceed 1")
    if not 0 <= alpha < 1:
        raise ValueError("offset must lie in [0, 1)")
    exact = isinstance(beta, Fraction) and isinstance(alpha, Fraction)
    branches = []
    top = math.ceil(float(beta) + float(alpha))
    for k in range(top):
        lo = max((k - alpha) / beta, 0)
        hi = min((k + 1 - alpha) / beta, 1)
        if hi - lo <= 1e-15:
            continue
        if not exact:
            lo, hi = float(lo), float(hi)
        branches.append(Branch((lo, hi), (alpha - k, beta)))
    fixed = list(branches)
    # Snap float endpoints so domains share them exactly.
    for i in range(1, len(fixed)):
        fixed[i] = Branch((fixed[i - 1].right, fixed[i].right), fixed[i].coeffs)
    tag = label or f"beta={float(beta):g},alpha={float(alpha):g}"
    return MapDescription(tuple(fixed), lam=float(beta), label=tag)
