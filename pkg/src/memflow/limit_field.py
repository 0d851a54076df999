"""The local limit field, evaluated on the resonance sphere.

As the memory horizon grows the oscillatory r-integral concentrates on the
zero set of the phase, the sphere of radius |u| centered at u.  The field is
the (scaled) surface integral of the coupling density over that sphere,
parametrized here by the polar angle against the direction of u and a point
on the equatorial sphere S^(d-2); the polar substitution makes the integrand
analytic, so Gauss-Legendre converges spectrally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError, SingularInputError, UnsupportedDimensionError
from .profiles import Profile
from .quadrature import gauss_legendre_on, sphere_surface_area

__all__ = [
    "SphereQuadSpec",
    "eval_limit_field",
    "radial_coefficient",
    "dissipation",
    "orthonormal_completion",
]

_SUPPORTED = (3, 4, 5)


@dataclass(frozen=True)
class SphereQuadSpec:
    """Node counts for the sphere integral: polar angle and S^(d-2) factor."""

    rho_nodes: int = 48
    circle_nodes: int = 48

    def __post_init__(self):
        if self.rho_nodes < 8:
            raise InputError(f"rho_nodes must be >= 8, got {self.rho_nodes}")
        if self.circle_nodes < 8:
            raise InputError(f"circle_nodes must be >= 8, got {self.circle_nodes}")


def orthonormal_completion(direction: np.ndarray) -> np.ndarray:
    """Columns: an orthonormal basis of the hyperplane orthogonal to ``direction``.

    Deterministic Householder construction (reflect e1 onto the direction,
    choosing the stable sign); any completion works by rotation invariance of
    the sphere measure, a fixed one keeps outputs reproducible.
    """
    d = len(direction)
    e1 = np.zeros(d)
    e1[0] = 1.0
    if direction[0] >= 0.0:
        v = direction + e1
    else:
        v = direction - e1
    house = np.eye(d) - 2.0 * np.outer(v, v) / (v @ v)
    return house[:, 1:]


def _equator_nodes(d: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature on the unit sphere S^(d-2) in R^(d-1): points (m, d-1), weights (m,)."""
    if d == 3:
        angles = 2.0 * math.pi * np.arange(n) / n
        pts = np.stack([np.cos(angles), np.sin(angles)], axis=1)
        wts = np.full(n, 2.0 * math.pi / n)
        return pts, wts
    if d == 4:
        cosp, wp = np.polynomial.legendre.leggauss(n)
        sinp = np.sqrt(1.0 - cosp**2)
        angles = 2.0 * math.pi * np.arange(n) / n
        pts = np.concatenate(
            [
                np.kron(cosp, np.ones(n))[:, None],
                np.kron(sinp, np.cos(angles))[:, None],
                np.kron(sinp, np.sin(angles))[:, None],
            ],
            axis=1,
        )
        wts = np.kron(wp, np.full(n, 2.0 * math.pi / n))
        return pts, wts
    # d == 5: polar Gauss-Legendre (sin^2 weight) times the S^2 rule above
    psi, wpsi = gauss_legendre_on(0.0, math.pi, n)
    sub_pts, sub_wts = _equator_nodes(4, n)
    m = len(sub_pts)
    pts = np.concatenate(
        [
            np.repeat(np.cos(psi), m)[:, None],
            np.repeat(np.sin(psi), m)[:, None] * np.tile(sub_pts, (n, 1)),
        ],
        axis=1,
    )
    wts = np.repeat(wpsi * np.sin(psi) ** 2, m) * np.tile(sub_wts, n)
    return pts, wts


def _check_inputs(u, profile: Profile) -> np.ndarray:
    d = profile.dimension
    if d not in _SUPPORTED:
        raise UnsupportedDimensionError(f"limit field supports d in {_SUPPORTED}, got d={d}")
    u = np.asarray(u, dtype=float)
    if u.shape != (d,):
        raise InputError(f"u must have shape ({d},), got {u.shape}")
    if np.linalg.norm(u) == 0.0:
        raise SingularInputError("limit field is undefined at u = 0")
    return u


def eval_limit_field(u, profile: Profile, squad: SphereQuadSpec) -> np.ndarray:
    """Surface-integral form of the limit field at u != 0.

    -pi |u|^(d-1) times the integral over the unit resonance sphere
    uhat + S^(d-1) of eta |f(|u| eta)|^2, parametrized by the polar angle
    theta against uhat and a point w' on the equatorial sphere S^(d-2):
    eta = (1 - cos theta) uhat + sin theta w', surface measure
    sin^(d-2) theta dtheta dH(w').  (In the height variable rho = 1 - cos
    theta the measure is sqrt(2 rho - rho^2)^(d-3) drho; the exponent d-3 is
    forced by the area identity and by agreement with the h -> 0 limit of
    the frozen field.)
    """
    u = _check_inputs(u, profile)
    d = profile.dimension
    speed = float(np.linalg.norm(u))
    uhat = u / speed

    theta, wt = gauss_legendre_on(0.0, math.pi, squad.rho_nodes)
    eq_pts, eq_wts = _equator_nodes(d, squad.circle_nodes)
    frame = orthonormal_completion(uhat)
    omega = eq_pts @ frame.T  # (m, d) unit vectors orthogonal to uhat

    # points on the unit resonance sphere: (n_theta, m, d)
    pts = (1.0 - np.cos(theta))[:, None, None] * uhat[None, None, :] + np.sin(theta)[
        :, None, None
    ] * omega[None, :, :]
    density = profile.squared(speed * pts)
    weights = (wt * np.sin(theta) ** (d - 2))[:, None] * eq_wts[None, :]
    field = np.einsum("ij,ij,ijk->k", weights, density, pts)
    return -math.pi * speed ** (d - 1) * field


def radial_coefficient(speed: float, profile: Profile, squad: SphereQuadSpec) -> float:
    """Decay coefficient lambda(|u|) >= 0 with field(u) = -lambda(|u|) * uhat.

    Only defined for radial profiles, where the equatorial integral of w'
    vanishes by symmetry and the field reduces to a single polar integral.
    """
    if not profile.radial():
        raise InputError("radial_coefficient requires a radial (centered) profile")
    d = profile.dimension
    if d not in _SUPPORTED:
        raise UnsupportedDimensionError(f"limit field supports d in {_SUPPORTED}, got d={d}")
    if not speed > 0.0:
        raise InputError(f"speed must be > 0, got {speed}")

    theta, wt = gauss_legendre_on(0.0, math.pi, squad.rho_nodes)
    rho = 1.0 - np.cos(theta)
    # |point| = sqrt(2 rho) on the unit resonance sphere
    radii = speed * np.sqrt(2.0 * rho)
    density = profile.amplitude**2 * np.exp(-(radii**2) / profile.width**2)
    area = sphere_surface_area(d - 2)
    integral = float(np.sum(wt * rho * density * np.sin(theta) ** (d - 2)))
    return math.pi * speed ** (d - 1) * area * integral


def dissipation(u, profile: Profile, squad: SphereQuadSpec) -> float:
    """u . field(u); nonpositive for every u and every profile of this family."""
    u = _check_inputs(u, profile)
    return float(u @ eval_limit_field(u, profile, squad))
