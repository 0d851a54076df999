"""Gaussian coupling profiles and the integral constants derived from them.

The coupling amplitude is a (possibly shifted) Gaussian bump

    f(eta) = amplitude * exp(-|eta - center|^2 / (2 * width^2)).

Everything downstream is driven by the vector density eta*|f(eta)|^2, by its
Fourier transform (convention: (2*pi)^(-d/2) * integral of e^(-i x.eta)), and
by a handful of L1-type integrals of the two.  For this family the transform
and all tail masses are analytic, so truncations can be certified and the
numerically computed norms can be cross-checked against closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import gammaincc

from .errors import InputError, UnsupportedDimensionError
from .quadrature import gauss_legendre_on, sphere_surface_area

__all__ = [
    "Profile",
    "ConstantSet",
    "compute_constants",
    "coupling_tail_mass",
    "coupling_ft_tail_mass",
    "radius_for_tail",
    "nu_exponent",
]


def nu_exponent(dimension: int) -> float:
    """Largest admissible averaging-error exponent, (d - 2) / 4."""
    return (dimension - 2) / 4.0


@dataclass(frozen=True, eq=False)
class Profile:
    """Shifted Gaussian coupling amplitude in R^d."""

    dimension: int
    amplitude: float = 1.0
    center: np.ndarray | None = None
    width: float = 1.0

    def __post_init__(self):
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise InputError(f"dimension must be a positive integer, got {self.dimension}")
        object.__setattr__(self, "dimension", int(self.dimension))
        if not self.amplitude >= 0.0:
            raise InputError(f"amplitude must be >= 0, got {self.amplitude}")
        if not self.width > 0.0:
            raise InputError(f"width must be > 0, got {self.width}")
        c = np.zeros(self.dimension) if self.center is None else np.asarray(self.center, dtype=float)
        if c.shape != (self.dimension,):
            raise InputError(f"center must have shape ({self.dimension},), got {c.shape}")
        object.__setattr__(self, "center", c)

    def radial(self) -> bool:
        """True iff the bump is centered at the origin."""
        return bool(np.all(self.center == 0.0))

    def _points(self, eta) -> np.ndarray:
        pts = np.asarray(eta, dtype=float)
        if pts.shape[-1:] != (self.dimension,):
            raise InputError(
                f"expected vectors of dimension {self.dimension}, got shape {pts.shape}"
            )
        return pts

    def value(self, eta):
        """f(eta); accepts a single vector or an array of trailing-dim-d vectors."""
        pts = self._points(eta)
        q = np.sum((pts - self.center) ** 2, axis=-1)
        return self.amplitude * np.exp(-q / (2.0 * self.width**2))

    def squared(self, eta):
        """|f(eta)|^2 (the Gaussian is real, so this is just f^2)."""
        pts = self._points(eta)
        q = np.sum((pts - self.center) ** 2, axis=-1)
        return self.amplitude**2 * np.exp(-q / self.width**2)

    def coupling(self, eta):
        """Vector density eta * |f(eta)|^2 driving every field integral."""
        pts = self._points(eta)
        return pts * self.squared(pts)[..., None]

    def coupling_ft(self, y):
        """Fourier transform of the vector density (complex, componentwise).

        Closed form for the Gaussian family:
            A^2 (s^2/2)^(d/2) e^(-i y.c) e^(-s^2|y|^2/4) (c - i (s^2/2) y).
        """
        pts = self._points(y)
        s2 = self.width**2
        pref = self.amplitude**2 * (s2 / 2.0) ** (self.dimension / 2.0)
        mod = np.exp(-1j * (pts @ self.center) - s2 * np.sum(pts**2, axis=-1) / 4.0)
        vec = self.center - 1j * (s2 / 2.0) * pts
        return pref * mod[..., None] * vec

    def coupling_ft_jacobian(self, y) -> np.ndarray:
        """Jacobian matrix of the transformed density at a single point y."""
        pt = self._points(y)
        if pt.ndim != 1:
            raise InputError("coupling_ft_jacobian expects a single point")
        s2 = self.width**2
        pref = self.amplitude**2 * (s2 / 2.0) ** (self.dimension / 2.0)
        mod = np.exp(-1j * (pt @ self.center) - s2 * (pt @ pt) / 4.0)
        v = self.center - 1j * (s2 / 2.0) * pt
        return -1j * pref * mod * (np.outer(v, v) + (s2 / 2.0) * np.eye(self.dimension))

    def coupling_ft_norm(self, rho):
        """|coupling_ft(y)| as a function of rho = |y| (radial even for shifted centers)."""
        rho = np.asarray(rho, dtype=float)
        s2 = self.width**2
        kappa = s2 / 2.0
        pref = self.amplitude**2 * kappa ** (self.dimension / 2.0)
        c2 = float(self.center @ self.center)
        return pref * np.exp(-s2 * rho**2 / 4.0) * np.sqrt(c2 + kappa**2 * rho**2)

    def coupling_ft_jacobian_fro(self, rho):
        """Frobenius norm of the transform's Jacobian as a function of rho = |y|.

        The squared norm reduces to
            (|c|^2 + k^2 rho^2)^2 + s^2 (|c|^2 - k^2 rho^2) + d s^4 / 4,  k = s^2/2,
        which depends on y only through |y|.
        """
        rho = np.asarray(rho, dtype=float)
        s2 = self.width**2
        kappa = s2 / 2.0
        pref = self.amplitude**2 * kappa ** (self.dimension / 2.0)
        c2 = float(self.center @ self.center)
        q = kappa**2 * rho**2
        fro2 = (c2 + q) ** 2 + s2 * (c2 - q) + self.dimension * s2**2 / 4.0
        return pref * np.exp(-s2 * rho**2 / 4.0) * np.sqrt(fro2)

    def with_amplitude(self, amplitude: float) -> "Profile":
        return replace(self, amplitude=amplitude)


def _gauss_upper_moment(k: int, scale: float, a: float) -> float:
    """integral_a^inf r^k exp(-r^2/scale^2) dr for a >= 0 (closed form)."""
    half = (k + 1) / 2.0
    return 0.5 * scale ** (k + 1) * math.gamma(half) * float(gammaincc(half, (a / scale) ** 2))


def coupling_tail_mass(profile: Profile, radius: float) -> float:
    """Certified upper bound on the mass of |eta||f|^2 outside the ball |eta| <= radius."""
    d, s = profile.dimension, profile.width
    cn = float(np.linalg.norm(profile.center))
    a = max(radius - cn, 0.0)
    area = sphere_surface_area(d - 1)
    bound = _gauss_upper_moment(d, s, a) + cn * _gauss_upper_moment(d - 1, s, a)
    return profile.amplitude**2 * area * bound


def coupling_ft_tail_mass(profile: Profile, radius: float) -> float:
    """Upper bound on the transformed density's L1 mass outside |y| <= radius."""
    d, s = profile.dimension, profile.width
    kappa = s**2 / 2.0
    pref = profile.amplitude**2 * kappa ** (d / 2.0)
    cn = float(np.linalg.norm(profile.center))
    area = sphere_surface_area(d - 1)
    scale = 2.0 / s
    bound = cn * _gauss_upper_moment(d - 1, scale, radius) + kappa * _gauss_upper_moment(
        d, scale, radius
    )
    return pref * area * bound


def radius_for_tail(profile: Profile, tolerance: float) -> float:
    """Smallest grid radius (up to width/8) whose certified coupling tail is below tolerance."""
    if not tolerance > 0.0:
        raise InputError(f"tolerance must be > 0, got {tolerance}")
    cn = float(np.linalg.norm(profile.center))
    radius = cn + profile.width
    step = profile.width / 8.0
    while coupling_tail_mass(profile, radius) > tolerance:
        radius += step
        if radius > cn + 60.0 * profile.width:  # e^-3600 scale; tolerance is unattainable
            raise InputError(f"no radius reaches tail tolerance {tolerance}")
    return radius


@dataclass(frozen=True)
class ConstantSet:
    """The integral constants entering the a priori bounds and error envelopes.

    moment1              first absolute moment of the coupling density
    coupling_l1          L1 norm of the coupling density
    coupling_ft_l1       L1 norm of its Fourier transform (pointwise Euclidean norm)
    coupling_ft_grad_l1  L1 norm of the transform's Jacobian (Frobenius norm)
    c_derivative         slope bound constant; solutions obey |xi'| <= 2*c_derivative
    c_memory             envelope constant for |memory field - frozen field|
    c_frozen_tail        envelope constant for |frozen field - limit field|
    c_sphere             geometric factor of the two-sided norm-decay comparison
    delta                exponent margin used with c_memory (0 < delta < (d-2)/4)
    """

    moment1: float
    coupling_l1: float
    coupling_ft_l1: float
    coupling_ft_grad_l1: float
    c_derivative: float
    c_memory: float
    c_frozen_tail: float
    c_sphere: float
    delta: float

    def as_dict(self) -> dict[str, float]:
        return {
            "moment1": self.moment1,
            "coupling_l1": self.coupling_l1,
            "coupling_ft_l1": self.coupling_ft_l1,
            "coupling_ft_grad_l1": self.coupling_ft_grad_l1,
            "c_derivative": self.c_derivative,
            "c_memory": self.c_memory,
            "c_frozen_tail": self.c_frozen_tail,
            "c_sphere": self.c_sphere,
            "delta": self.delta,
        }


def _radial_moment(profile: Profile, power: int, nodes: int) -> float:
    """integral over R^d of |eta|^power * |f|^2 for a centered profile."""
    d, s = profile.dimension, profile.width
    r, w = gauss_legendre_on(0.0, 12.0 * s, nodes)
    vals = r ** (power + d - 1) * np.exp(-(r / s) ** 2)
    return profile.amplitude**2 * sphere_surface_area(d - 1) * float(w @ vals)


def _shifted_moment(profile: Profile, power: int, nodes: int) -> float:
    """Same moment for a shifted profile, via the axisymmetric (r, psi) reduction."""
    d, s = profile.dimension, profile.width
    cn = float(np.linalg.norm(profile.center))
    r, wr = gauss_legendre_on(0.0, cn + 12.0 * s, nodes)
    psi, wpsi = gauss_legendre_on(0.0, math.pi, max(nodes // 4, 32))
    rr = r[:, None]
    dist2 = rr**2 - 2.0 * rr * cn * np.cos(psi)[None, :] + cn**2
    integrand = rr ** (power + d - 1) * np.exp(-dist2 / s**2) * np.sin(psi)[None, :] ** (d - 2)
    inner = integrand @ wpsi
    return profile.amplitude**2 * sphere_surface_area(d - 2) * float(wr @ inner)


def _moment(profile: Profile, power: int, nodes: int) -> float:
    if profile.radial():
        return _radial_moment(profile, power, nodes)
    return _shifted_moment(profile, power, nodes)


def _ft_l1(profile: Profile, nodes: int) -> float:
    d, s = profile.dimension, profile.width
    rho, w = gauss_legendre_on(0.0, 24.0 / s, nodes)
    vals = rho ** (d - 1) * profile.coupling_ft_norm(rho)
    return sphere_surface_area(d - 1) * float(w @ vals)


def _ft_grad_l1(profile: Profile, nodes: int) -> float:
    d, s = profile.dimension, profile.width
    rho, w = gauss_legendre_on(0.0, 24.0 / s, nodes)
    vals = rho ** (d - 1) * profile.coupling_ft_jacobian_fro(rho)
    return sphere_surface_area(d - 1) * float(w @ vals)


def _sphere_factor(dimension: int, nodes: int) -> float:
    """2*pi * |S^(d-2)| * integral_0^2 rho * sqrt(2 rho - rho^2)^(d-3) d rho.

    Geometric factor of the limit field's dissipation rate, computed in the
    polar variable rho = 1 - cos(theta) where the integrand is analytic.
    The exponent d-3 matches the resonance sphere's surface measure (the
    dissipation bound property fails with any other power).
    """
    theta, w = gauss_legendre_on(0.0, math.pi, nodes)
    vals = (1.0 - np.cos(theta)) * np.sin(theta) ** (dimension - 2)
    return 2.0 * math.pi * sphere_surface_area(dimension - 2) * float(w @ vals)


def compute_constants(profile: Profile, delta: float = 0.05, *, nodes: int = 512) -> ConstantSet:
    """Populate every constant for a profile in dimension >= 3.

    L1 norms are reduced to one-dimensional radial integrals (the transform's
    pointwise norm and Jacobian norm are radial even for shifted centers);
    shifted-center coupling moments use a two-dimensional axisymmetric
    reduction.  All rules are Gauss-Legendre with the given node count.
    """
    d = profile.dimension
    if d < 3:
        raise UnsupportedDimensionError(
            "c_derivative, c_memory, c_frozen_tail and c_sphere require dimension >= 3 "
            f"(got d={d})"
        )
    nu = nu_exponent(d)
    if not 0.0 < delta < nu:
        raise InputError(f"delta must lie in (0, {nu}) for d={d}, got {delta}")

    moment1 = _moment(profile, 2, nodes)
    coupling_l1 = _moment(profile, 1, nodes)
    ft_l1 = _ft_l1(profile, nodes)
    ft_grad_l1 = _ft_grad_l1(profile, nodes)

    pi_half_d = math.pi ** (d / 2.0)
    c_frozen_tail = (d / 2.0 - 1.0) * pi_half_d * ft_l1
    c_derivative = coupling_l1 + c_frozen_tail
    c_memory = 4.0 * coupling_l1 + 2.0 * pi_half_d * (c_derivative * ft_grad_l1 + ft_l1)
    c_sphere = _sphere_factor(d, nodes)

    return ConstantSet(
        moment1=moment1,
        coupling_l1=coupling_l1,
        coupling_ft_l1=ft_l1,
        coupling_ft_grad_l1=ft_grad_l1,
        c_derivative=c_derivative,
        c_memory=c_memory,
        c_frozen_tail=c_frozen_tail,
        c_sphere=c_sphere,
        delta=delta,
    )
