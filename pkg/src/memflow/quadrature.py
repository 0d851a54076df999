"""Small shared quadrature helpers (Gauss-Legendre rules, sphere measures)."""

from __future__ import annotations

import math

import numpy as np

_LEGGAUSS_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].

    Cached; callers must treat the returned arrays as read-only.
    """
    if n not in _LEGGAUSS_CACHE:
        _LEGGAUSS_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _LEGGAUSS_CACHE[n]


def gauss_legendre_on(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """The n-point Gauss-Legendre rule mapped to the interval [a, b]."""
    x, w = gauss_legendre(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def panel_rule(bounds: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule with n nodes per panel.

    ``bounds`` is the increasing sequence of panel edges; returns flat node
    and weight arrays covering [bounds[0], bounds[-1]].
    """
    x, w = gauss_legendre(n)
    centers = 0.5 * (bounds[1:] + bounds[:-1])
    halves = 0.5 * (bounds[1:] - bounds[:-1])
    nodes = centers[:, None] + halves[:, None] * x[None, :]
    weights = halves[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


def sphere_surface_area(m: int) -> float:
    """Surface measure of the unit sphere S^m embedded in R^(m+1)."""
    return 2.0 * math.pi ** ((m + 1) / 2.0) / math.gamma((m + 1) / 2.0)
