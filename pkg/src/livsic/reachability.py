"""Regularity domains of transfer functions: the partition Q and the Lebesgue number.

Two points share a Q-element when, for every m-cylinder, both can be pulled
back along one common branch word until they land inside that cylinder.  We
work with whole intervals: an open interval ``J`` is *reachable* when for
every m-cylinder ``C`` there is a word with each pulled-back interval inside
an open image ``T(int alpha)`` and the last one inside ``C``.

A small interval around ``z`` is reachable iff the single point ``z`` has a
backward path that stays strictly inside the open images and ends strictly
inside each ``C``.  Which paths exist can only change where some ``z_i`` meets
an image endpoint or a cylinder endpoint, i.e. on forward orbits of the
one-sided branch end values.  So the boundaries of Q are found among those
orbit points, and every gap between consecutive candidates is decided by its
midpoint.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .interval_maps import MapDescription, cylinders, eval_map

__all__ = [
    "CoverError",
    "QPartition",
    "lebesgue_number",
    "sliding_window_lebesgue",
    "q_partition",
    "check_diameter_bound",
    "interval_reachable",
]

POINT_TOL = 1e-12
DEFAULT_BUDGET = 200_000


class CoverError(ValueError):
    """The open branch images do not cover (0, 1)."""


def _snap(v):
    if abs(float(v)) <= POINT_TOL:
        return type(v)(0)
    if abs(float(v) - 1) <= POINT_TOL:
        return type(v)(1)
    return v


def _open_images(tmap: MapDescription) -> list:
    """Branch images with float round-off at 0 and 1 snapped away."""
    return [tuple(_snap(v) for v in b.image) for b in tmap.branches]


def lebesgue_number(tmap: MapDescription):
    """Largest ``delta`` with every ``(s, s + delta)`` in (0, 1) inside one open image.

    With ``F(s) = max{b - s : (a, b) an image, a <= s}``, the answer is the
    largest ``delta`` with ``F >= delta`` on ``[0, 1 - delta]``.  ``F`` falls with
    slope -1 between image left ends, so only the left limits at those ends and
    the right end ``1 - delta`` need checking.  Exact when the map has
    ``Fraction`` coefficients.
    """
    images = _open_images(tmap)
    lefts = sorted({a for a, _ in images})
    if lefts[0] > 0:
        raise CoverError("no image reaches 0")
    if max(b for _, b in images) < 1:
        raise CoverError("no image reaches 1")
    for a in lefts[1:]:
        if a < 1 and not any(lo < a < hi for lo, hi in images):
            raise CoverError(f"point {float(a)} lies in no open image")

    def slack_before(a):
        return max(b for lo, b in images if lo < a) - a

    def feasible(d):
        if d <= 0:
            return True
        if max(b for a, b in images if a <= 1 - d) < 1:
            return False
        if max(b for a, b in images if a == 0) < d:
            return False
        return all(slack_before(a) >= d for a in lefts if 0 < a <= 1 - d)

    candidates = {max(b for a, b in images if a == 0)}
    candidates |= {slack_before(a) for a in lefts if 0 < a < 1}
    candidates |= {1 - a for a in lefts}
    return max(d for d in candidates if feasible(d))


def sliding_window_lebesgue(tmap: MapDescription, resolution: float = 1e-4) -> float:
    """Brute-force ``delta`` by sliding windows over a grid of step ``resolution``."""
    images = np.array([[float(a), float(b)] for a, b in _open_images(tmap)])
    n = int(round(1 / resolution))
    s = np.arange(n + 1) * resolution
    fit = np.where(images[:, :1] <= s + 1e-15, images[:, 1:] - s, -np.inf)
    worst = np.minimum.accumulate(fit.max(axis=0))
    deltas = np.arange(n, 0, -1) * resolution
    for d in deltas:
        k = int(round((1 - d) / resolution))
        if worst[k] >= d - 1e-15:
            return float(d)
    return 0.0


@dataclass(frozen=True)
class QPartition:
    """Open intervals partitioning (0, 1) up to finitely many boundary points.

    ``boundaries`` records, per boundary point, whether the failure was
    certified (the backward tree was exhausted) or only observed within the
    search limits.  ``excluded`` lists gaps in which no point passed.
    """

    elements: list
    depth_certified: int
    delta: Optional[float]
    m: int
    boundaries: list = field(default_factory=list)
    excluded: list = field(default_factory=list)

    @property
    def uncertified(self) -> list:
        return [b["x"] for b in self.boundaries if not b["certified"]]

    def element_of(self, x: float) -> Optional[int]:
        for i, (a, b) in enumerate(self.elements):
            if a < x < b:
                return i
        return None

    def same_element(self, x1: float, x2: float) -> bool:
        i = self.element_of(float(x1))
        return i is not None and i == self.element_of(float(x2))

    def to_dict(self) -> dict:
        return {
            "delta": None if self.delta is None else float(self.delta),
            "depth_certified": int(self.depth_certified),
            "elements": [[float(a), float(b)] for a, b in self.elements],
        }


def _orbit_candidates(tmap: MapDescription, n_max: int) -> list:
    """Forward orbits (length <= n_max) of the one-sided end values of each branch."""
    ends = {v for b in tmap.branches for v in (b(b.left), b(b.right))}
    domain_ends = {float(p) for p in tmap.breakpoints}
    found = []

    def seen(x):
        return any(abs(float(x) - float(y)) <= POINT_TOL for y in found)

    for start in ends:
        x = start
        for _ in range(n_max):
            if x < 0 or x > 1 or seen(x):
                break
            found.append(x)
            if any(abs(float(x) - p) <= POINT_TOL for p in domain_ends):
                break
            x = eval_map(tmap, x)
    pts = sorted(float(x) for x in found if POINT_TOL < float(x) < 1 - POINT_TOL)
    return pts


class _Search:
    """Backward breadth-first search from a point through open images."""

    def __init__(self, tmap: MapDescription, m: int, n_max: int, budget: int):
        self.tmap = tmap
        self.cyl = cylinders(tmap, m)
        self.n_max = n_max
        self.budget = budget
        self.images = [(float(a), float(b)) for a, b in _open_images(tmap)]

    def _interior_cells(self, ys: np.ndarray) -> np.ndarray:
        idx = self.cyl.locate(ys)
        inside = (ys > self.cyl.left[idx] + POINT_TOL) & (ys < self.cyl.right[idx] - POINT_TOL)
        return idx[inside]

    def run(self, z: float):
        """Return ``(reached cell indices, complete, certified)``."""
        total = len(self.cyl)
        reached = set()
        frontier = np.array([float(z)])
        seen = set(np.round(frontier / POINT_TOL).astype(np.int64).tolist())
        for level in range(self.n_max + 1):
            reached.update(self._interior_cells(frontier).tolist())
            if len(reached) == total:
                return reached, True, True
            if level == self.n_max:
                break
            nxt = []
            for (lo, hi), br in zip(self.images, self.tmap.branches):
                sel = frontier[(frontier > lo + POINT_TOL) & (frontier < hi - POINT_TOL)]
                if len(sel):
                    nxt.append(br.inverse_array(sel))
            if not nxt:
                return reached, False, True
            cand = np.concatenate(nxt)
            keys = np.round(cand / POINT_TOL).astype(np.int64)
            keys, first = np.unique(keys, return_index=True)
            fresh = [i for k, i in zip(keys.tolist(), first.tolist()) if k not in seen]
            if not fresh:
                return reached, False, True
            seen.update(keys.tolist())
            frontier = cand[fresh]
            if len(seen) > self.budget:
                break
        return reached, False, False

    def full_depth(self, reached: set) -> int:
        """Largest generation ``g <= m`` whose every cylinder has a reached sub-cell."""
        m = self.cyl.generation
        words = self.cyl.words
        for g in range(m, 0, -1):
            all_prefixes = {tuple(w[:g]) for w in words}
            hit = {tuple(words[i][:g]) for i in reached}
            if hit == all_prefixes:
                return g
        return 0


def q_partition(
    tmap: MapDescription, m: int = 6, n_max: int = 40, budget: int = DEFAULT_BUDGET
) -> QPartition:
    """Partition Q at cylinder generation ``m`` with pullbacks of length <= ``n_max``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if n_max < m:
        raise ValueError("n_max must be at least m")
    search = _Search(tmap, m, n_max, budget)
    cands = _orbit_candidates(tmap, n_max)
    edges = [0.0] + cands + [1.0]
    mids = [(a + b) / 2 for a, b in zip(edges, edges[1:])]

    boundaries, excluded = [], []
    depth = m
    for z in cands:
        reached, complete, certified = search.run(z)
        if not complete:
            boundaries.append({"x": z, "certified": certified,
                               "reached": len(reached), "total": len(search.cyl)})
            if not certified:
                depth = min(depth, search.full_depth(reached))
    for (a, b), z in zip(zip(edges, edges[1:]), mids):
        reached, complete, certified = search.run(z)
        if not complete:
            excluded.append((a, b))
            if not certified:
                depth = min(depth, search.full_depth(reached))

    cuts = sorted({b["x"] for b in boundaries} | {v for iv in excluded for v in iv})
    pts = [0.0] + [c for c in cuts if 0.0 < c < 1.0] + [1.0]
    bad = set(excluded)
    elements = [(a, b) for a, b in zip(pts, pts[1:]) if b > a and (a, b) not in bad]
    try:
        delta = lebesgue_number(tmap)
    except CoverError:
        delta = None
    return QPartition(
        elements=elements, depth_certified=depth, delta=delta, m=m,
        boundaries=boundaries, excluded=excluded,
    )


def check_diameter_bound(q: QPartition, tol: float = 1e-12) -> bool:
    """True iff every element is at least ``delta/2`` long."""
    if q.delta is None:
        raise CoverError("no Lebesgue number: the images do not cover (0, 1)")
    return all(b - a >= float(q.delta) / 2 - tol for a, b in q.elements)


def interval_reachable(
    tmap: MapDescription, interval: tuple, m: int, n_max: int, budget: int = 100_000
) -> bool:
    """Brute-force interval pullback: can ``interval`` be pulled into every m-cylinder?

    Intervals are pulled back whole through branches whose open image contains
    them; this is the literal definition, used as an independent check on
    :func:`q_partition`.
    """
    cyl = cylinders(tmap, m)
    images = _open_images(tmap)
    need = set(range(len(cyl)))
    frontier = [tuple(float(v) for v in interval)]
    explored = 0
    for _ in range(n_max + 1):
        nxt = []
        for a, b in frontier:
            inside = np.nonzero((cyl.left <= a) & (b <= cyl.right))[0]
            need.difference_update(inside.tolist())
            if not need:
                return True
            for (lo, hi), br in zip(images, tmap.branches):
                if float(lo) <= a and b <= float(hi):
                    ya, yb = br.inverse(a), br.inverse(b)
                    nxt.append((min(ya, yb), max(ya, yb)))
        explored += len(nxt)
        if not nxt or explored > budget:
            return False
        frontier = nxt
    return False
