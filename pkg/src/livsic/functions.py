"""Real functions on [0, 1] that carry exact derivative data.

Every function here supports vectorised evaluation, vectorised derivatives and
scalar Taylor jets (see :mod:`livsic.jets`).  The cocycles and the
counterexample are built from these.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from . import jets
from .interval_maps import MapDescription, eval_derivative, eval_map

TWO_PI = 2.0 * math.pi


class SmoothFunction:
    """Base class: subclasses implement ``__call__`` and ``derivative``."""

    #: Highest derivative order the representation supports exactly.
    smoothness = math.inf

    def __call__(self, x):
        raise NotImplementedError

    def derivative(self, x, order: int = 1):
        raise NotImplementedError

    def taylor(self, x: float, order: int) -> np.ndarray:
        d = [float(self.derivative(float(x), k)) if k else float(self(float(x))) for k in range(order + 1)]
        return jets.from_derivatives(d)


class TrigPolynomial(SmoothFunction):
    """``sum_j cos[j] cos(2 pi j x) + sin[j] sin(2 pi j x)``, ``j = 0, 1, ...``."""

    def __init__(self, cos: Sequence[float] = (), sin: Sequence[float] = ()):
        n = max(len(cos), len(sin), 1)
        self.cos = np.zeros(n)
        self.sin = np.zeros(n)
        self.cos[: len(cos)] = cos
        self.sin[: len(sin)] = sin
        self._freq = TWO_PI * np.arange(n)

    @property
    def degree(self) -> int:
        nz = np.nonzero((self.cos != 0) | (self.sin != 0))[0]
        return int(nz[-1]) if len(nz) else 0

    def __call__(self, x):
        return self.derivative(x, 0)

    def derivative(self, x, order: int = 1):
        x = np.asarray(x, dtype=float)
        theta = np.multiply.outer(x, self._freq) + order * math.pi / 2
        scale = self._freq**order
        out = (np.cos(theta) * self.cos + np.sin(theta) * self.sin) @ scale
        return float(out) if out.ndim == 0 else out

    def variation(self, n: int = 1 << 16) -> float:
        """Total variation on [0, 1] via a fine quadrature of |f'|."""
        t = (np.arange(n) + 0.5) / n
        return float(np.mean(np.abs(self.derivative(t))))

    def to_dict(self) -> dict:
        return {"type": "trig", "cos": self.cos.tolist(), "sin": self.sin.tolist()}

    def __repr__(self):
        return f"TrigPolynomial(cos={self.cos.tolist()}, sin={self.sin.tolist()})"


class Polynomial(SmoothFunction):
    """Ordinary polynomial with ascending coefficients."""

    def __init__(self, coeffs: Sequence[float]):
        self.poly = np.polynomial.Polynomial(np.asarray(coeffs, dtype=float))

    @property
    def coeffs(self) -> np.ndarray:
        return self.poly.coef

    def __call__(self, x):
        out = self.poly(np.asarray(x, dtype=float))
        return float(out) if np.ndim(out) == 0 else out

    def derivative(self, x, order: int = 1):
        out = self.poly.deriv(order)(np.asarray(x, dtype=float)) if order else self.poly(np.asarray(x, dtype=float))
        return float(out) if np.ndim(out) == 0 else out

    def to_dict(self) -> dict:
        return {"type": "poly", "coeffs": self.coeffs.tolist()}


class PiecewisePolynomial(SmoothFunction):
    """Polynomial pieces on ``[breaks[i], breaks[i+1])``.

    Evaluation is right-continuous at interior breaks; the last piece also owns
    the right end of the domain.
    """

    def __init__(self, breaks: Sequence[float], pieces: Sequence):
        self.breaks = np.asarray(breaks, dtype=float)
        if len(pieces) != len(self.breaks) - 1:
            raise ValueError("need exactly one piece per break interval")
        if np.any(np.diff(self.breaks) <= 0):
            raise ValueError("breaks must be strictly increasing")
        # Pieces given as Polynomial keep their own domain/window (local variable).
        self.pieces = [
            p if isinstance(p, np.polynomial.Polynomial)
            else np.polynomial.Polynomial(np.asarray(p, dtype=float))
            for p in pieces
        ]

    def _index(self, x: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.breaks, x, side="right") - 1
        return np.clip(idx, 0, len(self.pieces) - 1)

    def __call__(self, x):
        return self.derivative(x, 0)

    def derivative(self, x, order: int = 1):
        arr = np.asarray(x, dtype=float)
        idx = self._index(arr)
        out = np.zeros(arr.shape)
        for k, p in enumerate(self.pieces):
            sel = idx == k
            if np.any(sel):
                q = p.deriv(order) if order else p
                out[sel] = q(arr[sel])
        return float(out) if out.ndim == 0 else out


class Coboundary(SmoothFunction):
    """``phi = chi0 o T - chi0`` with chain-rule derivatives through the branches."""

    def __init__(self, tmap: MapDescription, chi0: SmoothFunction):
        self.tmap = tmap
        self.chi0 = chi0
        self.smoothness = getattr(chi0, "smoothness", math.inf)

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        tx = eval_map(self.tmap, arr) if arr.ndim else eval_map(self.tmap, float(arr))
        out = np.asarray(self.chi0(tx)) - np.asarray(self.chi0(arr))
        return float(out) if out.ndim == 0 else out

    def taylor(self, x: float, order: int) -> np.ndarray:
        x = float(x)
        branch = self.tmap.branches[self.tmap.branch_index(x)]
        inner = branch.taylor(x, order)
        outer = self.chi0.taylor(float(branch(x)), order)
        return jets.compose(outer, inner) - self.chi0.taylor(x, order)

    def derivative(self, x, order: int = 1):
        if order == 0:
            return self(x)
        arr = np.asarray(x, dtype=float)
        if arr.ndim == 0:
            return float(jets.to_derivatives(self.taylor(float(arr), order))[order])
        if order <= 2:
            tx = eval_map(self.tmap, arr)
            d1 = eval_derivative(self.tmap, arr, 1)
            if order == 1:
                out = self.chi0.derivative(tx, 1) * d1
            else:
                d2 = eval_derivative(self.tmap, arr, 2)
                out = self.chi0.derivative(tx, 2) * d1**2 + self.chi0.derivative(tx, 1) * d2
            return out - self.chi0.derivative(arr, order)
        return np.array([jets.to_derivatives(self.taylor(v, order))[order] for v in arr])

    def to_dict(self) -> dict:
        return {"type": "coboundary", "chi0": self.chi0.to_dict()}


def random_trig(rng: np.random.Generator, max_degree: int = 5) -> TrigPolynomial:
    """Random 1-periodic trigonometric polynomial with coefficients ~ U(-1, 1)/j."""
    deg = int(rng.integers(1, max_degree + 1))
    j = np.arange(1, deg + 1)
    cos = np.concatenate([[0.0], rng.uniform(-1, 1, deg) / j])
    sin = np.concatenate([[0.0], rng.uniform(-1, 1, deg) / j])
    return TrigPolynomial(cos, sin)
