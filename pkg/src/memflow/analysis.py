"""Quantitative checks on solver output: decay, a priori bounds, field-gap
envelopes, two-sided norm comparisons and h-convergence studies.

Every check returns a BoundReport whose sampling grids are deterministic, so
reports are reproducible bit for bit from the same inputs.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .errors import InputError
from .integrators import SolverConfig, Trajectory, running_average, solve_limit, solve_memory
from .limit_field import SphereQuadSpec, eval_limit_field
from .oscillatory import QuadratureSpec, eval_frozen_field, eval_memory_field
from .profiles import ConstantSet, Profile, nu_exponent

__all__ = [
    "BoundReport",
    "StudyRow",
    "StudyTable",
    "check_decay",
    "check_derivative_bound",
    "check_avg_control",
    "check_frozen_limit_gap",
    "check_memory_frozen_gap",
    "check_field_envelopes",
    "convergence_study",
    "estimate_lipschitz",
    "gronwall_check",
    "sandwich_envelopes",
    "comparison_ode_envelopes",
    "loglog_slope",
]

_DECAY_SLACK = 1e3 * np.finfo(float).eps


@dataclass(frozen=True)
class BoundReport:
    """Samples of an observed quantity against a proven envelope.

    ``columns`` names the entries of each sample row; the first column is the
    sample coordinate.  ``violated`` is true iff some observation escapes its
    envelope by more than the recorded relative slack.  Two-sided reports
    (lower and upper envelope) carry four columns.
    """

    name: str
    columns: tuple[str, ...]
    samples: tuple[tuple[float, ...], ...]
    violated: bool
    max_ratio: float
    slack: float
    applicable: bool = True

    @staticmethod
    def one_sided(name, rows, slack, columns=("x", "observed", "envelope")):
        """Build a report from (x, observed, envelope) rows with upper envelopes."""
        ratios = [obs / env if env > 0.0 else (0.0 if obs == 0.0 else math.inf) for _, obs, env in rows]
        max_ratio = max(ratios, default=0.0)
        return BoundReport(
            name=name,
            columns=columns,
            samples=tuple(tuple(r) for r in rows),
            violated=bool(max_ratio > 1.0 + slack),
            max_ratio=float(max_ratio),
            slack=slack,
        )

    def row_violations(self) -> list[bool]:
        if len(self.columns) == 4:  # (x, observed, lower, upper)
            return [
                not (lo * (1.0 - self.slack) <= obs <= up * (1.0 + self.slack))
                for _, obs, lo, up in self.samples
            ]
        return [obs > env * (1.0 + self.slack) for _, obs, env in self.samples]


def check_decay(traj: Trajectory, slack: float = _DECAY_SLACK) -> BoundReport:
    """Node-to-node monotonicity of the state norm on a limit trajectory."""
    norms = traj.norms()
    rows = [
        (float((k + 1) * traj.dt), float(norms[k + 1]), float(norms[k]))
        for k in range(len(norms) - 1)
    ]
    return BoundReport.one_sided("decay", rows, slack, columns=("t", "norm", "previous_norm"))


def check_derivative_bound(traj: Trajectory, constants: ConstantSet, slack: float = 0.05) -> BoundReport:
    """Finite-difference slope magnitudes against the uniform bound 2*c_derivative."""
    diffs = np.linalg.norm(np.diff(traj.values, axis=0), axis=1) / traj.dt
    env = 2.0 * constants.c_derivative
    rows = [(float((k + 1) * traj.dt), float(diffs[k]), env) for k in range(len(diffs))]
    return BoundReport.one_sided("derivative_bound", rows, slack, columns=("t", "slope", "envelope"))


def check_avg_control(
    traj: Trajectory, h: float, constants: ConstantSet, grid: int = 20, slack: float = 0.0
) -> BoundReport:
    """|window average - endpoint state| against c_derivative * h * r on a (t, r) grid."""
    horizon = traj.horizon
    rows = []
    for i in range(1, grid + 1):
        t = horizon * i / grid
        for j in range(1, grid + 1):
            r = (t / h) * j / (grid + 1)  # keeps h*r strictly inside (0, t)
            observed = float(np.linalg.norm(running_average(traj, t, h * r) - traj.value_at(t)))
            rows.append((float(t), observed, constants.c_derivative * h * r))
    return BoundReport.one_sided("avg_control", rows, slack, columns=("t", "observed", "envelope"))


def check_frozen_limit_gap(
    u,
    t_grid,
    h_grid,
    profile: Profile,
    constants: ConstantSet,
    quad: QuadratureSpec,
    squad: SphereQuadSpec,
    slack: float = 0.05,
) -> BoundReport:
    """|frozen field - limit field| at a frozen state against the tail envelope."""
    u = np.asarray(u, dtype=float)
    d = profile.dimension
    limit = eval_limit_field(u, profile, squad)
    rows = []
    for t in t_grid:
        for h in h_grid:
            frozen = eval_frozen_field(u, t, h, profile, quad)
            observed = float(np.linalg.norm(frozen - limit))
            envelope = constants.c_frozen_tail * (h / t) ** (d / 2.0 - 1.0)
            rows.append((float(h), float(t), observed, envelope))
    ratios = [obs / env for _, _, obs, env in rows if env > 0.0]
    return BoundReport(
        name="frozen_limit_gap",
        columns=("h", "t", "observed", "envelope"),
        samples=tuple(rows),
        violated=bool(max(ratios, default=0.0) > 1.0 + slack),
        max_ratio=float(max(ratios, default=0.0)),
        slack=slack,
    )


def check_memory_frozen_gap(
    traj: Trajectory,
    h: float,
    profile: Profile,
    constants: ConstantSet,
    quad: QuadratureSpec,
    times,
    slack: float = 0.05,
) -> BoundReport:
    """|memory field - frozen field| along a solved trajectory.

    The envelope is c_memory * h^(nu - delta) with nu = (d-2)/4 and the
    report's delta taken from the constant set.
    """
    envelope = constants.c_memory * h ** (nu_exponent(profile.dimension) - constants.delta)
    rows = []
    for t in times:
        if not 0.0 < t <= traj.horizon + 1e-9 * traj.dt:
            raise InputError(f"sample time {t} outside the trajectory horizon {traj.horizon}")
        mem = eval_memory_field(traj, t, h, profile, quad)
        frozen = eval_frozen_field(traj.value_at(t), t, h, profile, quad)
        rows.append((float(t), float(np.linalg.norm(mem - frozen)), envelope))
    return BoundReport.one_sided("memory_frozen_gap", rows, slack, columns=("t", "observed", "envelope"))


def check_field_envelopes(
    u,
    t_grid,
    h_grid,
    profile: Profile,
    constants: ConstantSet,
    quad: QuadratureSpec,
    squad: SphereQuadSpec,
    memory_traj: Trajectory | None = None,
    memory_h: float | None = None,
    memory_times=None,
) -> list[BoundReport]:
    """Both field-gap envelope checks; the memory-side check needs a trajectory."""
    reports = [check_frozen_limit_gap(u, t_grid, h_grid, profile, constants, quad, squad)]
    if memory_traj is not None:
        if memory_h is None:
            raise InputError("memory_h is required along with memory_traj")
        times = memory_times if memory_times is not None else t_grid
        reports.append(
            check_memory_frozen_gap(memory_traj, memory_h, profile, constants, quad, times)
        )
    return reports


@dataclass(frozen=True)
class StudyRow:
    h: float
    sup_error: float
    runtime: float
    failed: bool = False
    message: str = ""


@dataclass(frozen=True, eq=False)
class StudyTable:
    """Per-h sup-norm errors against a shared limit-equation reference."""

    rows: tuple[StudyRow, ...]
    reference: Trajectory | None = None

    @property
    def monotone(self) -> bool:
        errs = [r.sup_error for r in self.rows if not r.failed]
        return bool(errs) and all(b < a for a, b in zip(errs, errs[1:]))


def convergence_study(config: SolverConfig, h_list) -> StudyTable:
    """Solve the memory equation for each h and measure sup|xi_h - xi_limit|.

    ``h_list`` must be strictly decreasing.  The reference is the limit
    equation solved at dt/4 and compared on the shared coarse grid, so the
    reference's time-discretization error is negligible against the h-limit
    error being measured.  Failures are isolated per row.
    """
    h_list = [float(h) for h in h_list]
    if not h_list or any(h <= 0 for h in h_list):
        raise InputError("h_list must be nonempty and positive")
    if any(b >= a for a, b in zip(h_list, h_list[1:])):
        raise InputError("h_list must be strictly decreasing")

    reference = solve_limit(replace(config, h=None, dt=config.dt / 4.0))
    ref_on_grid = reference.values[::4]

    rows = []
    for h in h_list:
        start = time.perf_counter()
        try:
            traj = solve_memory(config.with_h(h))
            if len(traj.values) != len(ref_on_grid):
                raise InputError("memory run was truncated; grids do not align")
            err = float(np.max(np.linalg.norm(traj.values - ref_on_grid, axis=1)))
            rows.append(StudyRow(h=h, sup_error=err, runtime=time.perf_counter() - start))
        except Exception as exc:  # per-row isolation
            rows.append(
                StudyRow(
                    h=h,
                    sup_error=math.nan,
                    runtime=time.perf_counter() - start,
                    failed=True,
                    message=str(exc),
                )
            )
    return StudyTable(rows=tuple(rows), reference=reference)


def estimate_lipschitz(
    reference: Trajectory,
    profile: Profile,
    squad: SphereQuadSpec,
    n_samples: int = 16,
    fd_step: float = 1e-5,
    ring_factors=(0.95, 1.0, 1.05),
) -> float:
    """Largest finite-difference Jacobian norm of the limit field near the trajectory.

    Samples trajectory nodes and radially scaled copies (staying on the ring
    bracketing the run) and takes the max spectral norm of central-difference
    Jacobians.
    """
    d = profile.dimension
    idx = np.unique(np.linspace(0, len(reference.values) - 1, n_samples).astype(int))
    best = 0.0
    for k in idx:
        for factor in ring_factors:
            p = factor * reference.values[k]
            if np.linalg.norm(p) == 0.0:
                continue
            eps = fd_step * max(1.0, float(np.linalg.norm(p)))
            jac = np.empty((d, d))
            for i in range(d):
                e = np.zeros(d)
                e[i] = eps
                jac[:, i] = (
                    eval_limit_field(p + e, profile, squad) - eval_limit_field(p - e, profile, squad)
                ) / (2.0 * eps)
            best = max(best, float(np.linalg.norm(jac, ord=2)))
    return best


def gronwall_check(
    study: StudyTable,
    constants: ConstantSet,
    dimension: int,
    horizon: float,
    lipschitz: float,
    slack: float = 0.0,
) -> BoundReport:
    """Study errors against (L T e^(LT) + 1) * delta1(h).

    delta1(h) = sqrt(h) + T * (c_memory * h^(nu - delta) + c_frozen_tail * h^nu)
    is the accumulated field-gap budget; L is the measured Lipschitz constant.
    """
    nu = nu_exponent(dimension)
    amp = lipschitz * horizon * math.exp(lipschitz * horizon) + 1.0
    rows = []
    for row in study.rows:
        if row.failed:
            continue
        delta1 = math.sqrt(row.h) + horizon * (
            constants.c_memory * row.h ** (nu - constants.delta)
            + constants.c_frozen_tail * row.h**nu
        )
        rows.append((row.h, row.sup_error, amp * delta1))
    return BoundReport.one_sided("gronwall", rows, slack, columns=("h", "sup_error", "envelope"))


def comparison_ode_envelopes(
    y0: float, rates, exponent: float, horizon: float, dt: float, oracle_dt: float = 1e-5
) -> np.ndarray:
    """RK4 solutions of y' = -C * y^exponent for each C, sampled on the grid.

    Substeps are aligned to the grid with length <= oracle_dt.  Returns an
    array of shape (n_nodes, len(rates)).
    """
    rates = np.asarray(rates, dtype=float)
    n = int(round(horizon / dt))
    m = max(1, int(math.ceil(dt / oracle_dt - 1e-12)))
    sub = dt / m
    out = np.empty((n + 1, len(rates)))
    y = np.full(len(rates), float(y0))
    out[0] = y
    rhs = lambda yy: -rates * yy**exponent
    for k in range(n):
        for _ in range(m):
            k1 = rhs(y)
            k2 = rhs(y + 0.5 * sub * k1)
            k3 = rhs(y + 0.5 * sub * k2)
            k4 = rhs(y + sub * k3)
            y = y + sub / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[k + 1] = y
    return out


def sandwich_envelopes(
    traj: Trajectory,
    profile: Profile,
    constants: ConstantSet,
    slack: float = 1e-12,
    oracle_dt: float = 1e-5,
) -> BoundReport:
    """Two-sided envelopes on the squared norm of a limit trajectory.

    The comparison rates are c_sphere times the extrema of |f|^2 over the
    closed ball of radius 2|xi_0|; the comparison ODE y' = -C y^(d/2) is
    integrated by a high-resolution RK4 oracle.  Marked not-applicable when
    the coupling minimum vanishes (only the zero-amplitude profile here).
    """
    d = profile.dimension
    xi0_norm = float(np.linalg.norm(traj.values[0]))
    ball = 2.0 * xi0_norm
    cn = float(np.linalg.norm(profile.center))
    f2_max = profile.amplitude**2 * math.exp(-max(0.0, cn - ball) ** 2 / profile.width**2)
    f2_min = profile.amplitude**2 * math.exp(-((cn + ball) ** 2) / profile.width**2)
    if f2_min == 0.0:
        return BoundReport(
            name="sandwich",
            columns=("t", "observed", "lower", "upper"),
            samples=(),
            violated=False,
            max_ratio=math.nan,
            slack=slack,
            applicable=False,
        )

    rate_fast = constants.c_sphere * f2_max
    rate_slow = constants.c_sphere * f2_min
    env = comparison_ode_envelopes(
        xi0_norm**2, [rate_fast, rate_slow], d / 2.0, traj.horizon, traj.dt, oracle_dt
    )
    sq = traj.norms() ** 2
    rows = [
        (float(k * traj.dt), float(sq[k]), float(env[k, 0]), float(env[k, 1]))
        for k in range(len(sq))
    ]
    # the initial node coincides with both envelopes by construction; measure
    # tightness on the evolved part
    ratios = [max(lo / obs, obs / up) for x, obs, lo, up in rows if x > 0.0]
    return BoundReport(
        name="sandwich",
        columns=("t", "observed", "lower", "upper"),
        samples=tuple(rows),
        violated=any(
            not (lo * (1.0 - slack) <= obs <= up * (1.0 + slack)) for _, obs, lo, up in rows
        ),
        max_ratio=float(max(ratios, default=math.nan)),
        slack=slack,
    )


def loglog_slope(x, y) -> float:
    """Least-squares slope of log(y) against log(x)."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])
