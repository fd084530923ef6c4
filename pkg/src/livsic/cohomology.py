"""The cohomological equation ``phi = chi o T - chi``.

Two independent routes recover ``chi`` from ``phi``:

* spectral: ``chi = log w - log h + const`` where ``h`` is the invariant
  density and ``w`` the leading eigenfunction of the weighted operator
  ``L_phi`` (:func:`solve_spectral`);
* backward orbits: telescoping ``phi`` along paired inverse orbits gives
  differences ``chi(x1) - chi(x2)`` and, differentiated term by term, the
  derivatives of ``chi`` (:func:`chi_difference`, :func:`chi_derivative_series`,
  :func:`chi_higher_derivative`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import jets
from .functions import Coboundary, SmoothFunction
from .interval_maps import MapDescription, eval_map
from .transfer_operator import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    GridFunction,
    SpectralData,
    grid_nodes,
    invariant_density,
    spectral_data,
)

__all__ = [
    "Cocycle",
    "CocycleSolution",
    "ResidualReport",
    "SeriesValue",
    "PolicyDeadEnd",
    "NotInSameElement",
    "SpectralFailure",
    "make_coboundary",
    "verify_cocycle",
    "solve_spectral",
    "backward_orbit",
    "chi_difference",
    "chi_derivative_series",
    "chi_higher_derivative",
    "default_truncation",
]

_IMAGE_TOL = 1e-14


class PolicyDeadEnd(ValueError):
    """The branch-choice policy found no admissible preimage."""


class NotInSameElement(PolicyDeadEnd):
    """No common branch word pulls the pair back (the points are not Q-related)."""


class SpectralFailure(RuntimeError):
    """The eigenfunctions are not bounded away from zero, so their logs are undefined."""


@dataclass(frozen=True)
class Cocycle:
    """An observable ``phi`` with exact derivatives up to ``smoothness_k``."""

    phi: SmoothFunction
    smoothness_k: int = 5

    def __call__(self, x):
        return self.phi(x)

    def derivative(self, x, order: int = 1):
        if order > self.smoothness_k:
            raise ValueError(f"order {order} exceeds smoothness {self.smoothness_k}")
        return self.phi.derivative(x, order) if order else self.phi(x)

    def taylor(self, x: float, order: int) -> np.ndarray:
        if order > self.smoothness_k:
            raise ValueError(f"order {order} exceeds smoothness {self.smoothness_k}")
        return self.phi.taylor(x, order)

    def sup_derivative(self, order: int = 1, samples: int = 4097) -> float:
        """Sampled sup of ``|phi^(order)|`` (an estimate, not a certified bound)."""
        t = np.linspace(0.0, 1.0, samples)
        return float(np.max(np.abs(self.derivative(t, order))))


def make_coboundary(tmap: MapDescription, chi0: SmoothFunction, smoothness_k: int = 5) -> Cocycle:
    """``phi = chi0 o T - chi0``."""
    return Cocycle(Coboundary(tmap, chi0), smoothness_k)


def _as_callable(chi):
    return chi if callable(chi) else (lambda x: chi)


def _endpoint_mask(tmap: MapDescription, x: np.ndarray, width: float) -> np.ndarray:
    d = np.min(np.abs(x[:, None] - tmap.breakpoints[None, :]), axis=1)
    return d > width


@dataclass(frozen=True)
class ResidualReport:
    sup: float
    l1: float
    n_used: int

    def to_dict(self) -> dict:
        return {"residual_sup": self.sup, "residual_l1": self.l1, "n_used": self.n_used}


def verify_cocycle(
    tmap: MapDescription,
    phi,
    chi,
    n_samples: int = 10_000,
    exclusion: float = 1e-9,
) -> ResidualReport:
    """Residual of ``phi - chi o T + chi`` on a midpoint grid, away from branch endpoints."""
    x = grid_nodes(n_samples)
    x = x[_endpoint_mask(tmap, x, exclusion)]
    chi = _as_callable(chi)
    r = np.asarray(phi(x)) - np.asarray(chi(eval_map(tmap, x))) + np.asarray(chi(x))
    r = np.abs(r)
    return ResidualReport(float(np.max(r)), float(np.mean(r)), len(x))


@dataclass(frozen=True)
class CocycleSolution:
    """A reconstructed transfer function ``chi`` and its diagnostics."""

    chi: GridFunction
    normalization: str
    residual_sup: float
    method: str
    a: Optional[float] = None
    is_coboundary: bool = True
    spectral: Optional[SpectralData] = field(default=None, repr=False)

    @property
    def variation(self) -> float:
        return self.chi.variation()

    def diagnostics(self) -> dict:
        out = {
            "method": self.method,
            "normalization": self.normalization,
            "residual_sup": self.residual_sup,
            "variation": self.variation,
            "is_coboundary": self.is_coboundary,
        }
        if self.a is not None:
            out["a"] = self.a
            out["abs_a_minus_1"] = abs(self.a - 1.0)
        if self.spectral is not None:
            out["eigenvalue"] = self.spectral.eigenvalue
            out["h_eigenvalue"] = self.spectral.h_eigenvalue
            out["gamma_floor"] = self.spectral.gamma_floor
        return out


def solve_spectral(
    tmap: MapDescription,
    phi,
    n_grid: int = 4096,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    normalization: str = "mean",
    x_ref: float = 0.5,
    value: float = 0.0,
    coboundary_tol: float = 1e-4,
) -> CocycleSolution:
    """Recover ``chi`` as ``log w - log h`` from the leading eigendata.

    ``normalization="mean"`` fixes ``int chi dmu = 0``; ``"point"`` fixes
    ``chi(x_ref) = value``.  The reported ``a`` divides out the grid bias of the
    dominant eigenvalue by using the discretised ``L_0`` eigenvalue as reference.
    """
    sd = spectral_data(tmap, phi, n_grid, tol, max_iter)
    if sd.gamma_floor <= 0:
        raise SpectralFailure(f"eigenfunction floor {sd.gamma_floor} <= 0; weak covering fails?")
    chi = GridFunction(np.log(sd.w.values) - np.log(sd.h.values))
    if normalization == "mean":
        chi = chi.shifted(-chi.integral(sd.h))
        tag = "mean_mu_zero"
    elif normalization == "point":
        chi = chi.shifted(value - chi(x_ref))
        tag = f"point:{x_ref:.17g}={value:.17g}"
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    a = sd.h_eigenvalue / sd.eigenvalue
    res = verify_cocycle(tmap, phi, chi, n_samples=n_grid, exclusion=2.0 / n_grid)
    return CocycleSolution(
        chi=chi,
        normalization=tag,
        residual_sup=res.sup,
        method="spectral",
        a=a,
        is_coboundary=abs(a - 1.0) <= coboundary_tol,
        spectral=sd,
    )


def _admissible(branch, lo: float, hi: float) -> bool:
    a, b = (float(v) for v in branch.image)
    return a - _IMAGE_TOL <= lo and hi <= b + _IMAGE_TOL


def backward_orbit(
    tmap: MapDescription,
    x: float,
    policy: str = "leftmost",
    n: int = 1,
    itinerary: Optional[Sequence[int]] = None,
    density: Optional[GridFunction] = None,
) -> list:
    """Inverse orbit ``y_1, ..., y_n`` with ``T(y_j) = y_{j-1}``, ``y_0 = x``.

    Policies: ``"leftmost"`` takes the lowest admissible branch index,
    ``"fixed-itinerary"`` follows ``itinerary`` and ``"max-weight"`` picks the
    preimage carrying the most invariant mass ``h(y)/|T'(y)|``.
    """
    return [y for y, _ in _orbit_with_branches(tmap, x, policy, n, itinerary, density)]


def _orbit_with_branches(tmap, x, policy, n, itinerary=None, density=None):
    if policy == "fixed-itinerary" and (itinerary is None or len(itinerary) < n):
        raise ValueError("fixed-itinerary policy needs an itinerary of length >= n")
    if policy == "max-weight" and density is None:
        density = invariant_density(tmap, 4096)
    if policy not in ("leftmost", "fixed-itinerary", "max-weight"):
        raise ValueError(f"unknown policy {policy!r}")
    out = []
    y = float(x)
    for j in range(n):
        if policy == "fixed-itinerary":
            k = int(itinerary[j])
            if not _admissible(tmap.branches[k], y, y):
                raise PolicyDeadEnd(f"step {j + 1}: branch {k} image does not contain {y!r}")
        else:
            ks = [k for k, b in enumerate(tmap.branches) if _admissible(b, y, y)]
            if not ks:
                raise PolicyDeadEnd(f"step {j + 1}: {y!r} has no preimage")
            if policy == "leftmost":
                k = ks[0]
            else:
                cands = [(tmap.branches[k].inverse(y), k) for k in ks]
                k = max(
                    cands,
                    key=lambda c: density(c[0]) / abs(float(tmap.branches[c[1]].derivative(c[0]))),
                )[1]
        y = tmap.branches[k].inverse(y)
        out.append((y, k))
    return out


@dataclass(frozen=True)
class SeriesValue:
    """A truncated series with an estimate of the neglected tail."""

    value: float
    tail_bound: float
    n_terms: int

    def __float__(self):
        return self.value


def default_truncation(lam: float, tol: float = 1e-12) -> int:
    return int(math.ceil(math.log(tol) / math.log(1.0 / lam))) + 5


def chi_difference(
    tmap: MapDescription,
    phi: Cocycle,
    x1: float,
    x2: float,
    n: int,
    q=None,
) -> SeriesValue:
    """``chi(x1) - chi(x2)`` as ``sum_{j<=n} phi(y_{1,j}) - phi(y_{2,j})``.

    The pair is pulled back through a common branch word: each step uses the
    lowest-index branch whose image contains the whole interval between the
    current pair.  ``q`` (a ``QPartition``) optionally checks that both points
    share an element first.
    """
    if q is not None and not q.same_element(x1, x2):
        raise NotInSameElement(f"{x1!r} and {x2!r} lie in different Q elements")
    if x1 == x2:
        return SeriesValue(0.0, 0.0, 0)
    y1, y2 = float(x1), float(x2)
    gap = abs(y1 - y2)
    total = 0.0
    for j in range(n):
        lo, hi = min(y1, y2), max(y1, y2)
        k = next((k for k, b in enumerate(tmap.branches) if _admissible(b, lo, hi)), None)
        if k is None:
            raise NotInSameElement(f"step {j + 1}: no branch image contains [{lo!r}, {hi!r}]")
        b = tmap.branches[k]
        y1, y2 = b.inverse(y1), b.inverse(y2)
        total += float(phi(y1)) - float(phi(y2))
    lam = tmap.lam
    tail = phi.sup_derivative(1) * gap * lam ** (-n) / (lam - 1.0)
    return SeriesValue(total, tail, n)


def chi_derivative_series(
    tmap: MapDescription,
    phi: Cocycle,
    x: float,
    n_trunc: Optional[int] = None,
    policy: str = "leftmost",
    itinerary: Optional[Sequence[int]] = None,
) -> SeriesValue:
    """``chi'(x) = sum_j phi'(y_j) / (T^j)'(y_j)`` along one inverse orbit."""
    lam = tmap.lam
    n = default_truncation(lam) if n_trunc is None else n_trunc
    total = 0.0
    dprod = 1.0
    for y, k in _orbit_with_branches(tmap, x, policy, n, itinerary):
        dprod *= float(tmap.branches[k].derivative(y))
        total += float(phi.derivative(y, 1)) / dprod
    tail = phi.sup_derivative(1) * lam ** (-n) / (lam - 1.0)
    return SeriesValue(total, tail, n)


def chi_higher_derivative(
    tmap: MapDescription,
    phi: Cocycle,
    x: float,
    order: int,
    n_trunc: Optional[int] = None,
    policy: str = "leftmost",
    itinerary: Optional[Sequence[int]] = None,
) -> SeriesValue:
    """``chi^(m)(x) = sum_n psi_{n,m}(y_n) g_n(y_n)`` with ``g_n = 1/(T^n)'``.

    ``psi_{n,1} = phi'`` and ``psi_{n,m+1} = psi_{n,m}' g_n + psi_{n,m} g_n'``.
    Every quantity is carried as a Taylor jet in the variable at ``y_n``; the jet
    of ``T^n`` is built incrementally by composing branch jets along the orbit.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if order > phi.smoothness_k:
        raise ValueError(f"order {order} exceeds cocycle smoothness {phi.smoothness_k}")
    lam = tmap.lam
    n = default_truncation(lam) if n_trunc is None else n_trunc
    iterate = np.zeros(order + 1)
    iterate[0] = float(x)
    if order >= 1:
        iterate[1] = 1.0
    total = 0.0
    scaled = []
    for y, k in _orbit_with_branches(tmap, x, policy, n, itinerary):
        iterate = jets.compose(iterate, tmap.branches[k].taylor(y, order))
        g = jets.reciprocal(jets.derivative(iterate))
        dg = jets.derivative(g)
        psi = jets.derivative(phi.taylor(y, order))
        for _ in range(order - 1):
            psi = jets.mul(jets.derivative(psi), g) + jets.mul(psi, dg)
        term = psi[0] * g[0]
        total += term
        scaled.append(abs(term) / abs(g[0]))
    # psi_{n,m} stays bounded; the tail is dominated by sup|psi| * sum_{j>n} lam^-j.
    tail = max(scaled) * lam ** (-n) / (lam - 1.0)
    return SeriesValue(float(total), float(tail), n)
