"""A three-branch expanding map whose coboundary solution must jump at 1/2.

``T_c`` is ``2x + 1/2`` on [0, 1/4], ``d(x - 1/2) + 1/2`` on (1/4, 3/4) and
``2x - 3/2`` on [3/4, 1], with ``d = 2 - 4c``.  The transfer function ``chi``
is 0 on [w, 1/2), 1 on [1/2, 1 - w) and joins ``chi(0) = 1`` and ``chi(1) = 0``
by smoothstep ramps of width ``w <= c``.  Then ``phi = chi o T - chi`` is
``C^k`` on all of [0, 1] although ``chi`` has a unit jump at 1/2:

* on (1/4, 3/4) both ``chi o T`` and ``chi`` jump at 1/2 and ``phi`` vanishes;
* at 1/4 the left limit of ``chi o T`` is the flat end of the right ramp,
  while the right limit lands on the plateau ``[c, 1/4)`` where ``chi = 0``
  (this is why the ramp must end by ``c``); 3/4 is symmetric.

The map is Markov for some ``c`` only, ``c = 1/8`` among them.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import chebyshev as C

from .cohomology import Cocycle, make_coboundary
from .functions import PiecewisePolynomial
from .interval_maps import Branch, MapDescription

__all__ = [
    "CounterexampleSpec",
    "Counterexample",
    "SmoothnessReport",
    "build_counterexample",
    "counterexample_map",
    "NotMarkov",
    "markov_points",
    "certification_points",
    "is_markov",
    "smoothstep",
    "one_sided_jet",
    "adaptive_jet",
    "certify_smoothness",
]

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class CounterexampleSpec:
    c: Fraction = Fraction(1, 8)
    k: int = 3
    ramp_width: Optional[Fraction] = None

    def __post_init__(self):
        c = self.c if isinstance(self.c, Fraction) else Fraction(self.c).limit_denominator(10**12)
        object.__setattr__(self, "c", c)
        if not 0 < c < Fraction(1, 4):
            raise ValueError("c must lie in (0, 1/4)")
        if self.k < 0:
            raise ValueError("k must be non-negative")
        w = c if self.ramp_width is None else Fraction(self.ramp_width)
        if not 0 < w <= c:
            raise ValueError("ramp width must lie in (0, c]")
        object.__setattr__(self, "ramp_width", w)

    @property
    def d(self) -> Fraction:
        return 2 - 4 * self.c

    @property
    def plateau_edges(self) -> tuple:
        """Ends of the middle-branch plateaus, ``1/2 -+ 1/(4d)``."""
        r = 1 / (4 * self.d)
        return (Fraction(1, 2) - r, Fraction(1, 2) + r)


def counterexample_map(c=Fraction(1, 8)) -> MapDescription:
    c = Fraction(c).limit_denominator(10**12) if not isinstance(c, Fraction) else c
    d = 2 - 4 * c
    q = Fraction(1, 4)
    half = Fraction(1, 2)
    branches = (
        Branch((Fraction(0), q), (half, Fraction(2))),
        Branch((q, 3 * q), (half - d * half, d)),
        Branch((3 * q, Fraction(1)), (Fraction(-3, 2), Fraction(2))),
    )
    return MapDescription(branches, lam=float(min(d, 2)), label=f"counterexample c={c}")


class NotMarkov(ValueError):
    """The branch-end orbits of ``T_c`` do not close up into a finite set."""


MAX_MARKOV_POINTS = 64


def _structural_points(spec: CounterexampleSpec) -> set:
    e, f = spec.plateau_edges
    half = Fraction(1, 2)
    return {Fraction(0), spec.c, Fraction(1, 4), e, half, f, Fraction(3, 4), 1 - spec.c, Fraction(1)}


def markov_points(spec: CounterexampleSpec, max_points: int = MAX_MARKOV_POINTS) -> list:
    """Closure of the structural points under one-sided branch values.

    For ``c = 1/8`` this gives ``0, 1/8, 1/4, 1/2 -+ 1/(4d), 1/2, 3/4, 7/8, 1``.
    Raises ``NotMarkov`` when the closure exceeds ``max_points``.
    """
    tmap = counterexample_map(spec.c)
    pts = _structural_points(spec)
    todo = list(pts)
    while todo:
        p = todo.pop()
        for b in tmap.branches:
            if b.left <= p <= b.right:
                v = b(p)
                if v not in pts:
                    pts.add(v)
                    todo.append(v)
        if len(pts) > max_points:
            raise NotMarkov(f"c = {spec.c}: no Markov partition with at most {max_points} points")
    return sorted(pts)


def certification_points(spec: CounterexampleSpec) -> list:
    """Points where ``phi`` could lose smoothness: breakpoints of ``T`` and ``chi``
    together with the preimages of the ``chi`` breakpoints."""
    w = spec.ramp_width
    tmap = counterexample_map(spec.c)
    pts = _structural_points(spec) | {w, 1 - w}
    for target in (w, Fraction(1, 2), 1 - w):
        for b in tmap.branches:
            a0, a1 = b.coeffs
            y = (target - a0) / a1
            if b.left <= y <= b.right:
                pts.add(y)
    return sorted(pts)


def is_markov(tmap: MapDescription, points: Sequence[Fraction]) -> bool:
    """Exact check that every element maps onto a union of elements.

    Requires exact (``Fraction``) coefficients and points.
    """
    pts = set(points)
    ordered = sorted(pts)
    for lo, hi in zip(ordered, ordered[1:]):
        mid = (lo + hi) / 2
        branch = next(b for b in tmap.branches if b.left <= mid <= b.right)
        if not (branch.left <= lo and hi <= branch.right):
            return False
        if branch(lo) not in pts or branch(hi) not in pts:
            return False
    return True


def smoothstep(k: int) -> np.polynomial.Polynomial:
    """Order ``2k+1`` polynomial with S(0)=0, S(1)=1 and ``k`` vanishing derivatives at both ends."""
    u = np.polynomial.Polynomial([0.0, 1.0])
    s = np.polynomial.Polynomial([0.0])
    for j in range(k + 1):
        s = s + math.comb(k + j, j) * (1 - u) ** j
    return u ** (k + 1) * s


@dataclass(frozen=True)
class Counterexample:
    spec: CounterexampleSpec
    tmap: MapDescription
    chi: PiecewisePolynomial
    phi: Cocycle

    @property
    def partition(self) -> list:
        """Markov partition points when ``T_c`` is Markov, else the certification points."""
        try:
            return markov_points(self.spec)
        except NotMarkov:
            return certification_points(self.spec)


def _ramp(x0: float, x1: float, start: float, end: float, k: int):
    """Smoothstep from ``start`` at ``x0`` to ``end`` at ``x1`` as two half pieces.

    Each half is expanded about its own end point, where the value is flat, so
    evaluation never cancels large monomial terms.
    """
    s = smoothstep(k).coef
    mid = 0.5 * (x0 + x1)
    first = np.polynomial.Polynomial((end - start) * s, domain=[x0, x1], window=[0.0, 1.0])
    first.coef[0] += start
    second = np.polynomial.Polynomial((start - end) * s, domain=[x1, x0], window=[0.0, 1.0])
    second.coef[0] += end
    return [x0, mid], [first, second]


def build_counterexample(spec: Optional[CounterexampleSpec] = None) -> Counterexample:
    spec = spec or CounterexampleSpec()
    w = float(spec.ramp_width)
    lb, lp = _ramp(0.0, w, 1.0, 0.0, spec.k)
    rb, rp = _ramp(1.0 - w, 1.0, 1.0, 0.0, spec.k)
    chi = PiecewisePolynomial(
        lb + [w, 0.5] + rb + [1.0],
        lp + [[0.0], [1.0]] + rp,
    )
    chi.smoothness = spec.k
    tmap = counterexample_map(spec.c)
    return Counterexample(spec, tmap, chi, make_coboundary(tmap, chi, smoothness_k=spec.k))


JET_POINTS = 32
JET_DEGREE = 8


@lru_cache(maxsize=None)
def _stencil(points: int, degree: int, k: int) -> np.ndarray:
    """Weights taking samples at offsets ``1..points`` (in steps) to derivatives at offset 0.

    Least-squares Chebyshev fit in a window mapped to [-1, 1]; row ``j`` gives
    the ``j``-th derivative in units of ``step**-j``.
    """
    s = np.arange(1, points + 1)
    t = 2.0 * s / (points + 1) - 1.0
    pinv = np.linalg.pinv(C.chebvander(t, degree))
    basis = np.eye(degree + 1)
    at_end = np.array([[C.chebval(-1.0, C.chebder(basis[m], j)) for m in range(degree + 1)]
                       for j in range(k + 1)])
    return at_end @ pinv * (2.0 / (points + 1)) ** np.arange(k + 1)[:, None]


def _jet_and_noise(f, b, side, k, h, points, degree, magnitude=1.0):
    """Richardson jet and its typical (rms) rounding error.

    ``magnitude`` bounds the size of the terms ``f`` is computed from, which
    sets the rounding floor when ``f`` itself is a small difference.
    """
    if degree < k:
        raise ValueError("fit degree must be at least k")
    weights = _stencil(points, degree, k)
    offsets = np.arange(1, points + 1)
    orders = np.arange(k + 1)
    l1 = np.abs(weights).sum(axis=1)
    l2 = np.sqrt((weights**2).sum(axis=1))

    def estimate(step):
        y = np.asarray(f(b + side * step * offsets), dtype=float)
        scale = (side * step) ** -orders.astype(float)
        return weights @ y * scale, EPS * max(np.max(np.abs(y)), magnitude) * np.abs(scale)

    (coarse, u1), (fine, u2) = estimate(h), estimate(h / 2)
    gain = 2.0 ** (degree + 1 - orders)
    extrapolated = fine + (fine - coarse) / (gain - 1)
    quiet = np.abs(coarse - fine) <= 4 * (u1 + u2) * l1
    rms = np.where(quiet, u1, u2 * (1 + 2 / (gain - 1))) * l2
    return np.where(quiet, coarse, extrapolated), rms


def one_sided_jet(
    f: Callable,
    b: float,
    side: int,
    k: int,
    h: float,
    points: int = JET_POINTS,
    degree: int = JET_DEGREE,
) -> np.ndarray:
    """Derivatives ``f^(j)(b±)``, ``j <= k``, from samples ``f(b + side*h*i)``, ``i = 1..points``.

    Estimates at steps ``h`` and ``h/2`` are Richardson-combined.  When the two
    already agree to within their rounding floor the truncation error is
    negligible, and the coarse (less noise-amplifying) estimate is returned.
    """
    return _jet_and_noise(f, b, side, k, h, points, degree, 0.0)[0]


def adaptive_jet(
    f: Callable,
    b: float,
    side: int,
    k: int,
    h_max: float,
    levels: int = 4,
    points: int = JET_POINTS,
    degree: int = JET_DEGREE,
    magnitude: float = 1.0,
) -> tuple:
    """``one_sided_jet`` with the step chosen per order from ``h_max * 2**-i``, ``i <= levels``.

    For each order the coarser of the two neighbouring steps whose estimates
    agree best, counting their rounding floors, is kept.  Returns the jet and
    the rms rounding error of each entry.
    """
    est = [_jet_and_noise(f, b, side, k, h_max * 2.0**-i, points, degree, magnitude)
           for i in range(levels + 1)]
    jets = np.array([e[0] for e in est])
    noise = np.array([e[1] for e in est])
    score = np.abs(np.diff(jets, axis=0)) + noise[:-1]
    best = np.argmin(score, axis=0)
    cols = np.arange(k + 1)
    return jets[best, cols], noise[best, cols]


@dataclass(frozen=True)
class SmoothnessReport:
    """Per-breakpoint jet comparison; ``rows`` has one dict per (breakpoint, order)."""

    rows: list
    k: int

    @property
    def passed(self) -> bool:
        return all(r["pass"] for r in self.rows)

    @property
    def max_mismatch(self) -> float:
        return max((r["mismatch"] for r in self.rows), default=0.0)

    def failures(self) -> list:
        return [r for r in self.rows if not r["pass"]]

    def to_dict(self) -> dict:
        return {"passed": self.passed, "k": self.k, "max_mismatch": self.max_mismatch, "rows": self.rows}


def certify_smoothness(
    f: Callable,
    breakpoints: Sequence[float],
    k: int,
    h_fd: float = 2.0**-9,
    domain: tuple = (0.0, 1.0),
    rtol: float = 1e-6,
) -> SmoothnessReport:
    """Compare left and right derivative jets of ``f`` up to order ``k`` at each breakpoint.

    Breakpoints on the boundary of ``domain`` only have one side and pass
    vacuously (flagged ``"boundary": True``).  The sampling window on each side
    stays short of the neighbouring breakpoint.  A row passes when the jets
    agree to ``rtol`` relative to their size, or to within three times their
    combined rms rounding error (``"noise"``).
    """
    pts = sorted({float(p) for p in breakpoints})
    rows = []
    for b in pts:
        if b <= domain[0] or b >= domain[1]:
            for j in range(k + 1):
                rows.append({"x": b, "order": j, "left": None, "right": None,
                             "mismatch": 0.0, "noise": 0.0, "pass": True, "boundary": True})
            continue
        i = bisect.bisect_left(pts, b)
        gap_left = b - max(pts[i - 1] if i > 0 else domain[0], domain[0])
        gap_right = min(pts[i + 1] if i + 1 < len(pts) else domain[1], domain[1]) - b
        left, nl = adaptive_jet(f, b, -1, k, min(h_fd, gap_left / (JET_POINTS + 1)))
        right, nr = adaptive_jet(f, b, +1, k, min(h_fd, gap_right / (JET_POINTS + 1)))
        for j in range(k + 1):
            mism = abs(left[j] - right[j])
            scale = max(1.0, abs(left[j]), abs(right[j]))
            noise = math.hypot(nl[j], nr[j])
            rows.append({"x": b, "order": j, "left": float(left[j]), "right": float(right[j]),
                         "mismatch": float(mism), "noise": float(noise),
                         "pass": bool(mism <= max(rtol * scale, 3 * noise)), "boundary": False})
    return SmoothnessReport(rows, k)
