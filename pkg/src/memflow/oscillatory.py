"""Oscillatory field evaluation: the finite-horizon frozen field and the
memory field with its running-average argument.

Both fields are integrals of e^(-i r phase(eta; .)) against the coupling
density over (r, eta).  For the frozen field the r-integral is done exactly
(sin(R*phi)/phi), leaving a smooth but oscillatory eta-integral evaluated by
tensor-product Gauss-Legendre on a truncated box -- the package's hot spot.
For the memory field the average makes the phase r-dependent; the r-axis is
split at the times where the averaging window crosses trajectory grid nodes
and integrated panel by panel, while the eta-integral factorizes axis by
axis (the integrand is separable for the Gaussian family), so each r node
costs d one-dimensional quadrature sums instead of a d-dimensional one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .history import check_window, window_averages
from .profiles import Profile, coupling_tail_mass, radius_for_tail
from .quadrature import gauss_legendre_on, panel_rule

__all__ = ["QuadratureSpec", "phase", "eval_frozen_field", "eval_memory_field"]

_CHUNK = 1 << 19


@dataclass(frozen=True)
class QuadratureSpec:
    """Truncation radius and node counts for the oscillatory integrals.

    r-axis accuracy scales with ``r_substeps_per_history_step`` relative to
    the phase swept per history step, roughly (dt/h) * max|phase|; the
    defaults resolve the baseline configurations to well below the envelope
    tolerances.
    """

    eta_radius: float
    eta_nodes_per_axis: int = 128
    r_substeps_per_history_step: int = 8
    tail_tolerance: float = 1e-9

    def __post_init__(self):
        if not self.eta_radius > 0.0:
            raise InputError(f"eta_radius must be > 0, got {self.eta_radius}")
        if self.eta_nodes_per_axis < 8:
            raise InputError(f"eta_nodes_per_axis must be >= 8, got {self.eta_nodes_per_axis}")
        if self.r_substeps_per_history_step < 1:
            raise InputError(
                f"r_substeps_per_history_step must be >= 1, got {self.r_substeps_per_history_step}"
            )
        if not self.tail_tolerance > 0.0:
            raise InputError(f"tail_tolerance must be > 0, got {self.tail_tolerance}")

    @classmethod
    def for_profile(
        cls,
        profile: Profile,
        tail_tolerance: float = 1e-9,
        eta_nodes_per_axis: int = 128,
        r_substeps_per_history_step: int = 8,
    ) -> "QuadratureSpec":
        """Choose the smallest certified truncation radius for the profile."""
        return cls(
            eta_radius=radius_for_tail(profile, tail_tolerance),
            eta_nodes_per_axis=eta_nodes_per_axis,
            r_substeps_per_history_step=r_substeps_per_history_step,
            tail_tolerance=tail_tolerance,
        )

    def validate_for(self, profile: Profile) -> None:
        mass = coupling_tail_mass(profile, self.eta_radius)
        if mass > self.tail_tolerance:
            raise InputError(
                f"eta_radius {self.eta_radius} leaves coupling tail {mass:.3e} "
                f"above the tolerance {self.tail_tolerance:.3e}"
            )


def phase(eta, u) -> np.ndarray:
    """Oscillation phase |eta|^2 - 2 eta.u; zero on the sphere |eta - u| = |u|."""
    eta = np.asarray(eta, dtype=float)
    u = np.asarray(u, dtype=float)
    if eta.shape[-1:] != u.shape[-1:]:
        raise InputError(f"dimension mismatch: {eta.shape} vs {u.shape}")
    return np.sum(eta**2, axis=-1) - 2.0 * (eta @ u)


def eval_frozen_field(u, t: float, h: float, profile: Profile, quad: QuadratureSpec) -> np.ndarray:
    """Finite-horizon field at a frozen state u with r-horizon R = t/h.

    Computes -2 * integral of sin(R*phi)/phi * coupling(eta) over the
    truncated eta-box; sin(R*phi)/phi is the exact integral of cos(r*phi)
    over [0, R], with the removable singularity Taylor-expanded near
    R*phi = 0.
    """
    u = np.asarray(u, dtype=float)
    d = profile.dimension
    if u.shape != (d,):
        raise InputError(f"u must have shape ({d},), got {u.shape}")
    if not t > 0.0:
        raise InputError(f"t must be > 0, got {t}")
    if not h > 0.0:
        raise InputError(f"h must be > 0, got {h}")
    quad.validate_for(profile)

    big_r = t / h
    n = quad.eta_nodes_per_axis
    x, w = gauss_legendre_on(-quad.eta_radius, quad.eta_radius, n)
    c = profile.center
    inv_s2 = 1.0 / profile.width**2
    shape = (n,) * d
    total = n**d
    acc = np.zeros(d)

    for lo in range(0, total, _CHUNK):
        idx = np.unravel_index(np.arange(lo, min(lo + _CHUNK, total)), shape)
        sq = np.zeros(idx[0].shape)
        dot = np.zeros(idx[0].shape)
        gauss = np.zeros(idx[0].shape)
        wprod = np.ones(idx[0].shape)
        for j in range(d):
            xj = x[idx[j]]
            sq += xj**2
            dot += xj * u[j]
            gauss += (xj - c[j]) ** 2
            wprod *= w[idx[j]]
        phi = sq - 2.0 * dot
        z = big_r * phi
        small = np.abs(z) < 1e-4
        core = np.empty_like(z)
        core[small] = big_r * (1.0 - z[small] ** 2 / 6.0)
        core[~small] = np.sin(z[~small]) / phi[~small]
        common = wprod * core * np.exp(-gauss * inv_s2)
        for j in range(d):
            acc[j] += x[idx[j]] @ common

    return -2.0 * profile.amplitude**2 * acc


class MemoryFieldEvaluator:
    """Memory field at a fixed target time, re-evaluable against trial states.

    The r-panel structure, Gauss-Legendre nodes and the state-independent
    phase factor e^(-i r x^2) depend only on (t, h, dt, quad) and are built
    once; `evaluate` recomputes only the parts that depend on the trajectory
    values.  The corrector iteration of the memory solver reuses one
    instance per step.
    """

    def __init__(self, dt: float, t: float, h: float, profile: Profile, quad: QuadratureSpec):
        if not h > 0.0:
            raise InputError(f"h must be > 0, got {h}")
        if t < 0.0:
            raise InputError(f"t must be >= 0, got {t}")
        quad.validate_for(profile)
        self.dt = dt
        self.t = t
        self.h = h
        self.profile = profile
        self.quad = quad
        self.d = profile.dimension

        big_r = t / h
        self.empty = big_r == 0.0
        if self.empty:
            return

        n_cross = int(np.ceil(t / dt - 1e-12)) - 1
        crossings = (t - dt * np.arange(n_cross, 0, -1)) / h
        bounds = np.concatenate(([0.0], crossings, [big_r]))
        self.r_nodes, self.r_weights = panel_rule(bounds, quad.r_substeps_per_history_step)

        radius = quad.eta_radius
        self.x, self.w = gauss_legendre_on(-radius, radius, quad.eta_nodes_per_axis)
        c = profile.center
        inv_s2 = 1.0 / profile.width**2
        # state-independent per-axis factors: weights * Gaussian envelope
        self.envelope = np.stack([self.w * np.exp(-((self.x - cj) ** 2) * inv_s2) for cj in c])
        # e^(-i r x^2), shared by all axes
        self.osc0 = np.exp(-1j * np.outer(self.r_nodes, self.x**2))

    def evaluate(self, values: np.ndarray, prefix: np.ndarray) -> np.ndarray:
        if self.empty:
            return np.zeros(self.d)
        spans = self.h * self.r_nodes
        avg = window_averages(self.dt, values, prefix, self.t, spans)

        d = self.d
        n_r = len(self.r_nodes)
        acc = np.zeros(d)
        row_chunk = max(1, _CHUNK // len(self.x))
        for lo in range(0, n_r, row_chunk):
            hi = min(lo + row_chunk, n_r)
            r_blk = self.r_nodes[lo:hi]
            w_blk = self.r_weights[lo:hi]
            axis_sum = np.empty((hi - lo, d), dtype=complex)
            axis_mom = np.empty((hi - lo, d), dtype=complex)
            for j in range(d):
                theta = 2.0 * np.outer(r_blk * avg[lo:hi, j], self.x)
                z = self.envelope[j][None, :] * self.osc0[lo:hi] * np.exp(1j * theta)
                axis_sum[:, j] = z.sum(axis=1)
                axis_mom[:, j] = z @ self.x
            for j in range(d):
                others = np.ones(hi - lo, dtype=complex)
                for k in range(d):
                    if k != j:
                        others *= axis_sum[:, k]
                acc[j] += w_blk @ np.real(axis_mom[:, j] * others)

        return -2.0 * self.profile.amplitude**2 * acc


def eval_memory_field(traj, t: float, h: float, profile: Profile, quad: QuadratureSpec) -> np.ndarray:
    """Memory field of a trajectory at time t (zero at t = 0).

    ``traj`` must cover [0, t]; the running averages entering the phase are
    taken from its piecewise-linear reconstruction.
    """
    if traj.values.shape[1] != profile.dimension:
        raise InputError(
            f"trajectory dimension {traj.values.shape[1]} != profile dimension {profile.dimension}"
        )
    check_window(traj.dt, len(traj.values), t, t)
    if t == 0.0:
        return np.zeros(profile.dimension)
    ev = MemoryFieldEvaluator(traj.dt, t, h, profile, quad)
    return ev.evaluate(traj.values, traj.prefix)
