"""Figure rendering.

Figures are pure functions of their input CSVs: fixed style, no timestamps
in the drawn content, and every caption carries the SHA-256 digest of the
inputs so a figure can be traced back to the exact artifact that produced
it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .schemas import SchemaError, Table, read_csv_table

__all__ = ["FigureSpec", "plot_decay", "plot_convergence", "plot_envelopes", "fit_slope"]

_STYLE = {
    "figure.figsize": (7.0, 4.5),
    "figure.dpi": 110,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
}


@dataclass(frozen=True)
class FigureSpec:
    """What to render: input CSV path(s), figure kind, output image path."""

    kind: str  # decay | convergence | envelope
    inputs: tuple[str, ...]
    output: str
    log_x: bool = False
    log_y: bool = False

    def __post_init__(self):
        if self.kind not in ("decay", "convergence", "envelope"):
            raise SchemaError(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise SchemaError("at least one input CSV is required")


def _caption(fig, tables: list[Table]) -> None:
    digest = " + ".join(t.digest[:12] for t in tables)
    fig.text(0.01, 0.01, f"input sha256 {digest}", fontsize=7, color="0.4")


def _finish(fig, out_path) -> Path:
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out)
    plt.close(fig)
    return out


def plot_decay(run_csv, out_path, sandwich_csv=None) -> Path:
    """State norm against time, optionally between its two-sided envelopes."""
    run = read_csv_table(run_csv, required=("t", "norm"))
    tables = [run]
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        ax.plot(run.column("t"), run.column("norm"), color="tab:blue", label="|state|")
        if sandwich_csv is not None:
            env = read_csv_table(sandwich_csv, required=("t", "lower", "upper"))
            tables.append(env)
            t = env.column("t")
            ax.plot(t, np.sqrt(env.column("lower")), "--", color="tab:red", label="lower envelope")
            ax.plot(t, np.sqrt(env.column("upper")), "--", color="tab:green", label="upper envelope")
        ax.set_xlabel("t")
        ax.set_ylabel("norm")
        ax.set_title("state-norm decay")
        ax.legend()
        _caption(fig, tables)
        return _finish(fig, out_path)


def fit_slope(h, err) -> float:
    """Least-squares slope of log(err) against log(h) via the normal equations."""
    x = np.log(np.asarray(h, dtype=float))
    y = np.log(np.asarray(err, dtype=float))
    xm = x - x.mean()
    denom = float(xm @ xm)
    if denom == 0.0:
        return 0.0
    return float(xm @ (y - y.mean()) / denom)


def plot_convergence(study_csv, out_path):
    """Log-log sup-error against h with the fitted slope annotated.

    Returns (output path, annotated slope).
    """
    study = read_csv_table(study_csv, required=("h", "sup_error"))
    rows = [(h, e) for h, e in zip(study.column("h"), study.column("sup_error"))
            if not (math.isnan(h) or math.isnan(e))]
    if len(rows) < 2:
        raise SchemaError(f"{study_csv} has {len(rows)} usable rows; need at least 2")
    h = [r[0] for r in rows]
    err = [r[1] for r in rows]
    slope = fit_slope(h, err)
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        ax.loglog(h, err, "o-", color="tab:blue", label="sup error")
        ax.annotate(f"slope = {slope:.15g}", xy=(0.05, 0.9), xycoords="axes fraction")
        ax.set_xlabel("h")
        ax.set_ylabel("sup error")
        ax.set_title("h-convergence")
        ax.legend()
        _caption(fig, [study])
        return _finish(fig, out_path), slope


def plot_envelopes(bound_csv, out_path) -> Path:
    """Observed quantity and its envelope on shared axes; violations marked."""
    table = read_csv_table(bound_csv, required=("observed", "envelope"))
    x_name = table.header[0]
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        if len(table) == 0:
            ax.plot([], [], "o", color="tab:blue", label="observed")
            ax.plot([], [], "--", color="tab:orange", label="envelope")
        else:
            x = table.column(x_name)
            observed = table.column("observed")
            envelope = table.column("envelope")
            ax.plot(x, observed, "o", ms=4, color="tab:blue", label="observed")
            ax.plot(x, envelope, "--", color="tab:orange", label="envelope")
            if "violated" in table.header:
                bad = [i for i, v in enumerate(table.column("violated")) if v != 0.0]
                if bad:
                    ax.plot(
                        [x[i] for i in bad],
                        [observed[i] for i in bad],
                        "x", ms=10, color="tab:red", label="violation",
                    )
        ax.set_xlabel(x_name)
        ax.set_ylabel("value")
        ax.set_title("observed vs envelope")
        ax.legend()
        _caption(fig, [table])
        return _finish(fig, out_path)
