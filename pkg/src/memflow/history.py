"""Reconstruction helpers for uniformly sampled trajectories.

States are reconstructed piecewise-linearly between grid nodes; their running
integral is therefore piecewise-quadratic and is evaluated exactly from the
stored trapezoid prefix sums.  Window averages computed this way are exact
for linear trajectories at arbitrary (off-grid) window endpoints.

These functions operate on raw arrays so the field evaluators can work on
in-progress solver buffers; `integrators.Trajectory` wraps them.
"""

from __future__ import annotations

import numpy as np

from .errors import InputError


def _interval_index(dt: float, n_intervals: int, t) -> np.ndarray:
    idx = np.floor(np.asarray(t) / dt).astype(int)
    return np.clip(idx, 0, n_intervals - 1)


def value_at(dt: float, values: np.ndarray, t: float) -> np.ndarray:
    """Linearly interpolated state at time t."""
    k = int(_interval_index(dt, len(values) - 1, t))
    tau = (t - k * dt) / dt
    return (1.0 - tau) * values[k] + tau * values[k + 1]


def prefix_at(dt: float, values: np.ndarray, prefix: np.ndarray, t) -> np.ndarray:
    """Integral of the reconstructed state over [0, t]; t may be an array."""
    t = np.asarray(t, dtype=float)
    k = _interval_index(dt, len(values) - 1, t)
    tau = t - k * dt
    vk = values[k]
    slope = (values[k + 1] - vk) / dt
    return prefix[k] + vk * tau[..., None] + 0.5 * slope * (tau**2)[..., None]


def window_averages(
    dt: float, values: np.ndarray, prefix: np.ndarray, t: float, spans: np.ndarray
) -> np.ndarray:
    """Averages of the reconstructed state over the windows [t - span, t].

    Vectorized over ``spans``; a zero span returns the interpolated state.
    Windows contained in a single grid interval are averaged in closed form
    (midpoint of the linear reconstruction), which avoids the cancellation of
    differencing prefix integrals over tiny windows.
    """
    spans = np.asarray(spans, dtype=float)
    n_int = len(values) - 1
    starts = t - spans

    end_interval = int(_interval_index(dt, n_int, np.nextafter(t, -np.inf) if t > 0 else 0.0))
    start_interval = _interval_index(dt, n_int, starts)
    local = (start_interval == end_interval) | (spans == 0.0)

    # closed-form branch: average of a linear segment is its midpoint value
    mids = t - 0.5 * spans
    k = _interval_index(dt, n_int, mids)
    tau = (mids - k * dt) / dt
    local_avg = (1.0 - tau)[..., None] * values[k] + tau[..., None] * values[k + 1]

    p_t = prefix_at(dt, values, prefix, np.asarray(t))
    p_start = prefix_at(dt, values, prefix, starts)
    safe = np.where(spans == 0.0, 1.0, spans)
    wide_avg = (p_t - p_start) / safe[..., None]

    return np.where(local[..., None], local_avg, wide_avg)


def check_window(dt: float, n_nodes: int, t: float, span: float) -> None:
    """Raise InputError unless [t - span, t] lies inside the covered horizon."""
    horizon = (n_nodes - 1) * dt
    slack = 1e-9 * dt
    if span < 0.0:
        raise InputError(f"span must be >= 0, got {span}")
    if t - span < -slack or t > horizon + slack:
        raise InputError(
            f"window [{t - span}, {t}] outside the covered horizon [0, {horizon}]"
        )
