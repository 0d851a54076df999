"""Time steppers for the memory equation and its local limit.

The limit equation is a plain ODE and is advanced with classical RK4.  The
memory equation needs its own history: each step runs a Heun
predictor-corrector whose corrector is iterated to a fixed point with the
trial state appended to the history, mirroring the contraction construction
that gives the equation its well-posedness.  Trajectories carry trapezoid
prefix integrals so the running averages inside the memory field cost O(1)
per window.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import history
from .errors import FixedPointError, InputError, SingularInputError, UnsupportedDimensionError
from .limit_field import SphereQuadSpec, eval_limit_field
from .oscillatory import MemoryFieldEvaluator, QuadratureSpec
from .profiles import Profile, compute_constants

__all__ = ["Trajectory", "SolverConfig", "running_average", "solve_limit", "solve_memory"]

_SUPPORTED = (3, 4, 5)
_NORM_FLOOR_FACTOR = 1e-6


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States on a uniform time grid plus exact trapezoid prefix integrals.

    values[k] approximates the state at k*dt; prefix[k] is the integral of
    the piecewise-linear reconstruction over [0, k*dt], so
    prefix[k+1] - prefix[k] == dt*(values[k] + values[k+1])/2 holds exactly.
    ``fields`` optionally records the right-hand side at each node.
    """

    dt: float
    values: np.ndarray
    prefix: np.ndarray
    fields: np.ndarray | None = None
    truncated: bool = False
    note: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        prefix = np.asarray(self.prefix, dtype=float)
        if not self.dt > 0.0:
            raise InputError(f"dt must be > 0, got {self.dt}")
        if values.ndim != 2 or len(values) == 0:
            raise InputError("values must be a nonempty (nodes, d) array")
        if prefix.shape != values.shape:
            raise InputError(f"prefix shape {prefix.shape} != values shape {values.shape}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "prefix", prefix)

    @property
    def horizon(self) -> float:
        return (len(self.values) - 1) * self.dt

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(len(self.values))

    def value_at(self, t: float) -> np.ndarray:
        history.check_window(self.dt, len(self.values), t, 0.0)
        return history.value_at(self.dt, self.values, t)

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.values, axis=1)


def running_average(traj: Trajectory, t: float, span: float) -> np.ndarray:
    """Average of the reconstructed state over [t - span, t].

    A zero span returns the interpolated state at t; the window must lie
    inside the trajectory's covered horizon.
    """
    history.check_window(traj.dt, len(traj.values), t, span)
    out = history.window_averages(traj.dt, traj.values, traj.prefix, t, np.asarray([span]))
    return out[0]


def _prefix_step(prefix_k: np.ndarray, dt: float, v_k: np.ndarray, v_k1: np.ndarray) -> np.ndarray:
    return prefix_k + dt * (v_k + v_k1) / 2.0


@dataclass(frozen=True, eq=False)
class SolverConfig:
    """Everything needed to run one solve.

    ``h`` is the memory parameter; None selects the limit equation (the CLI
    spells it "limit").  ``fp_tol`` defaults to 1e-10 * (1 + |xi0|).
    """

    profile: Profile
    xi0: np.ndarray
    horizon: float
    dt: float
    h: float | None = None
    quad: QuadratureSpec | None = None
    squad: SphereQuadSpec = field(default_factory=SphereQuadSpec)
    fp_tol: float | None = None
    fp_max_iter: int = 50

    def __post_init__(self):
        xi0 = np.asarray(self.xi0, dtype=float)
        d = self.profile.dimension
        if xi0.shape != (d,):
            raise InputError(f"xi0 must have shape ({d},), got {xi0.shape}")
        if np.linalg.norm(xi0) == 0.0:
            raise InputError("xi0 must be nonzero")
        if not self.horizon > 0.0:
            raise InputError(f"horizon must be > 0, got {self.horizon}")
        if not 0.0 < self.dt <= self.horizon:
            raise InputError(f"dt must lie in (0, horizon], got {self.dt}")
        if self.h is not None and not self.h > 0.0:
            raise InputError(f"h must be > 0 (or None for the limit equation), got {self.h}")
        if self.fp_max_iter < 1:
            raise InputError(f"fp_max_iter must be >= 1, got {self.fp_max_iter}")
        object.__setattr__(self, "xi0", xi0)
        if self.fp_tol is None:
            object.__setattr__(self, "fp_tol", 1e-10 * (1.0 + float(np.linalg.norm(xi0))))
        if self.quad is None:
            object.__setattr__(self, "quad", QuadratureSpec.for_profile(self.profile))

    @property
    def dimension(self) -> int:
        return self.profile.dimension

    def n_steps(self) -> int:
        n = int(round(self.horizon / self.dt))
        if abs(n * self.dt - self.horizon) > 1e-9 * max(1.0, self.horizon):
            raise InputError(
                f"horizon {self.horizon} is not an integer number of steps of dt {self.dt}"
            )
        return n

    def with_h(self, h: float | None) -> "SolverConfig":
        return replace(self, h=h)


def _check_dimension(config: SolverConfig) -> None:
    if config.dimension not in _SUPPORTED:
        raise UnsupportedDimensionError(
            f"solvers support d in {_SUPPORTED}, got d={config.dimension}"
        )


def solve_limit(config: SolverConfig, field_fn=None) -> Trajectory:
    """Integrate the limit equation with classical RK4 on the uniform grid.

    If the state norm falls below 1e-6 * |xi0| (possible only when the
    coupling vanishes somewhere on the relevant ball) the run is truncated
    at the last safe node and flagged instead of integrating toward the
    singular point.  ``field_fn`` overrides the right-hand side for
    manufactured-problem tests.
    """
    if field_fn is None:
        _check_dimension(config)
        field_fn = lambda u: eval_limit_field(u, config.profile, config.squad)

    n = config.n_steps()
    d = config.dimension
    dt = config.dt
    floor = _NORM_FLOOR_FACTOR * float(np.linalg.norm(config.xi0))

    values = np.empty((n + 1, d))
    prefix = np.empty((n + 1, d))
    fields = np.empty((n + 1, d))
    values[0] = config.xi0
    prefix[0] = 0.0

    for k in range(n):
        xi = values[k]
        if np.linalg.norm(xi) < floor:
            return _truncate(dt, values, prefix, fields, k, "state norm fell below the floor")
        try:
            k1 = field_fn(xi)
            k2 = field_fn(xi + 0.5 * dt * k1)
            k3 = field_fn(xi + 0.5 * dt * k2)
            k4 = field_fn(xi + dt * k3)
        except SingularInputError as exc:
            return _truncate(dt, values, prefix, fields, k, f"field evaluation failed: {exc}")
        fields[k] = k1
        values[k + 1] = xi + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        prefix[k + 1] = _prefix_step(prefix[k], dt, xi, values[k + 1])

    try:
        fields[n] = field_fn(values[n])
    except SingularInputError:
        fields[n] = np.nan
    return Trajectory(dt=dt, values=values, prefix=prefix, fields=fields)


def _truncate(dt, values, prefix, fields, k, note) -> Trajectory:
    if k == 0:
        raise SingularInputError(f"cannot start the solve: {note}")
    return Trajectory(
        dt=dt,
        values=values[: k + 1].copy(),
        prefix=prefix[: k + 1].copy(),
        fields=fields[: k + 1].copy(),
        truncated=True,
        note=note,
    )


def picard_window_step_limit(config: SolverConfig, moment1: float) -> float:
    """Step size below which the contraction-mapping window argument applies."""
    return config.h**2 / (8.0 * moment1 * (config.horizon + config.dt))


def solve_memory(config: SolverConfig, field_fn=None) -> Trajectory:
    """Integrate the memory equation with a Heun predictor-corrector.

    Each corrector pass appends the trial state to the history, re-evaluates
    the memory field at the step's end time and updates the trial until the
    fixed-point tolerance (or the iteration cap, which raises).  The proof's
    contraction window is surfaced as a warning when dt exceeds it: the
    constant is pessimistic and the scheme is observed stable far beyond it.
    ``field_fn(t, values, prefix)`` overrides the field for tests.
    """
    if config.h is None:
        raise InputError("solve_memory needs a finite h (got the limit token)")
    custom = field_fn is not None
    if not custom:
        _check_dimension(config)
        constants_guard = compute_constants(config.profile) if config.dimension >= 3 else None
        if constants_guard is not None and constants_guard.moment1 > 0.0:
            step_limit = picard_window_step_limit(config, constants_guard.moment1)
            if config.dt > step_limit:
                warnings.warn(
                    f"dt={config.dt} exceeds the contraction-window step limit "
                    f"{step_limit:.3e}; the bound is pessimistic but convergence "
                    "is no longer covered by it",
                    RuntimeWarning,
                    stacklevel=2,
                )

    n = config.n_steps()
    d = config.dimension
    dt = config.dt
    h = config.h

    values = np.empty((n + 1, d))
    prefix = np.empty((n + 1, d))
    fields = np.empty((n + 1, d))
    values[0] = config.xi0
    prefix[0] = 0.0
    # the memory field itself vanishes at t = 0 (empty r-range); a custom
    # right-hand side need not
    fields[0] = field_fn(0.0, values[:1], prefix[:1]) if custom else 0.0

    for k in range(n):
        t_next = (k + 1) * dt
        f_k = fields[k]
        if custom:
            evaluate = lambda: field_fn(t_next, values[: k + 2], prefix[: k + 2])
        else:
            ev = MemoryFieldEvaluator(dt, t_next, h, config.profile, config.quad)
            evaluate = lambda: ev.evaluate(values[: k + 2], prefix[: k + 2])

        trial = values[k] + dt * f_k
        f_next = None
        converged = False
        for it in range(config.fp_max_iter):
            values[k + 1] = trial
            prefix[k + 1] = _prefix_step(prefix[k], dt, values[k], trial)
            f_next = evaluate()
            updated = values[k] + 0.5 * dt * (f_k + f_next)
            shift = float(np.linalg.norm(updated - trial))
            trial = updated
            if shift <= config.fp_tol:
                converged = True
                break
        if not converged:
            error = FixedPointError(
                f"corrector did not reach tol {config.fp_tol:.3e} within "
                f"{config.fp_max_iter} iterations at t={t_next} (last update {shift:.3e})",
                step=k + 1,
                time=t_next,
                iterations=config.fp_max_iter,
                residual=shift,
            )
            error.partial = Trajectory(
                dt=dt,
                values=values[: k + 1].copy(),
                prefix=prefix[: k + 1].copy(),
                fields=fields[: k + 1].copy(),
                truncated=True,
                note="fixed-point failure",
            )
            raise error
        values[k + 1] = trial
        prefix[k + 1] = _prefix_step(prefix[k], dt, values[k], trial)
        fields[k + 1] = f_next

    return Trajectory(dt=dt, values=values, prefix=prefix, fields=fields)
