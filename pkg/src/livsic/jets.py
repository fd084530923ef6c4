"""Truncated Taylor series arithmetic.

A jet of order ``m`` at a point is the array ``[f(c), f'(c), f''(c)/2!, ...,
f^(m)(c)/m!]``.  All routines keep the length of their first argument.
"""

from __future__ import annotations

import math

import numpy as np


def mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = len(a)
    return np.convolve(a, b)[:n]


def derivative(a: np.ndarray) -> np.ndarray:
    """Jet of ``f'`` (one order is lost; the top coefficient is zero-filled)."""
    n = len(a)
    out = np.zeros(n)
    out[: n - 1] = a[1:] * np.arange(1, n)
    return out


def reciprocal(a: np.ndarray) -> np.ndarray:
    n = len(a)
    if a[0] == 0:
        raise ZeroDivisionError("jet with zero constant term has no reciprocal")
    out = np.zeros(n)
    out[0] = 1.0 / a[0]
    for k in range(1, n):
        out[k] = -np.dot(a[1 : k + 1], out[k - 1 :: -1][:k]) / a[0]
    return out


def compose(outer: np.ndarray, inner: np.ndarray) -> np.ndarray:
    """Jet of ``F(g(x))`` from the jet of ``F`` at ``g(c)`` and the jet of ``g`` at ``c``."""
    n = len(inner)
    shift = np.array(inner, dtype=float)
    shift[0] = 0.0
    out = np.zeros(n)
    out[0] = outer[-1] if len(outer) else 0.0
    for c in outer[-2::-1]:
        out = mul(out, shift)
        out[0] += c
    return out


def to_derivatives(a: np.ndarray) -> np.ndarray:
    return np.array([a[k] * math.factorial(k) for k in range(len(a))])


def from_derivatives(d) -> np.ndarray:
    return np.array([d[k] / math.factorial(k) for k in range(len(d))], dtype=float)
