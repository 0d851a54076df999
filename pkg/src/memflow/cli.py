"""Batch front door: parse a flat JSON config, run a subcommand, emit
deterministic CSV/JSON artifacts plus a run manifest.

Exit codes: 0 success, 2 config error, 3 solver failure, 4 bound violation
in check mode.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import platform
import sys
import time
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .analysis import (
    check_avg_control,
    check_decay,
    check_derivative_bound,
    check_frozen_limit_gap,
    check_memory_frozen_gap,
    convergence_study,
    estimate_lipschitz,
    gronwall_check,
    sandwich_envelopes,
)
from .errors import ConfigError, FixedPointError, InputError
from .integrators import SolverConfig, solve_limit, solve_memory
from .limit_field import SphereQuadSpec
from .oscillatory import QuadratureSpec
from .profiles import Profile, compute_constants, radius_for_tail

_CONFIG_KEYS = {
    "dimension",
    "amplitude",
    "center",
    "width",
    "xi0",
    "horizon",
    "dt",
    "h",
    "h_list",
    "eta_radius",
    "eta_nodes_per_axis",
    "r_substeps_per_history_step",
    "tail_tolerance",
    "rho_nodes",
    "circle_nodes",
    "fp_tol",
    "fp_max_iter",
    "delta",
}
_REQUIRED_KEYS = {"dimension", "amplitude", "center", "width", "xi0", "horizon", "dt"}


def load_config(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object with flat keys")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    missing = _REQUIRED_KEYS - set(raw)
    if missing:
        raise ConfigError(f"missing config keys: {sorted(missing)}")
    return raw


def resolve_config(raw: dict) -> dict:
    """Fill every optional key with its resolved value; the result re-runs identically."""
    cfg = dict(raw)
    cfg.setdefault("h", None)
    cfg.setdefault("h_list", None)
    cfg.setdefault("eta_nodes_per_axis", 128)
    cfg.setdefault("r_substeps_per_history_step", 8)
    cfg.setdefault("tail_tolerance", 1e-9)
    cfg.setdefault("rho_nodes", 48)
    cfg.setdefault("circle_nodes", 48)
    cfg.setdefault("fp_max_iter", 50)
    cfg.setdefault("delta", 0.05)
    if cfg["h"] == "limit":
        cfg["h"] = None
    if cfg["h"] is not None and not isinstance(cfg["h"], (int, float)):
        raise ConfigError(f'h must be a number, null or "limit", got {cfg["h"]!r}')
    try:
        profile = Profile(
            dimension=cfg["dimension"],
            amplitude=cfg["amplitude"],
            center=cfg["center"],
            width=cfg["width"],
        )
        if cfg.get("eta_radius") is None:
            cfg["eta_radius"] = radius_for_tail(profile, cfg["tail_tolerance"])
        if cfg.get("fp_tol") is None:
            cfg["fp_tol"] = 1e-10 * (1.0 + float(np.linalg.norm(np.asarray(cfg["xi0"], float))))
    except InputError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def build_solver_config(cfg: dict) -> SolverConfig:
    try:
        profile = Profile(
            dimension=cfg["dimension"],
            amplitude=cfg["amplitude"],
            center=cfg["center"],
            width=cfg["width"],
        )
        quad = QuadratureSpec(
            eta_radius=cfg["eta_radius"],
            eta_nodes_per_axis=cfg["eta_nodes_per_axis"],
            r_substeps_per_history_step=cfg["r_substeps_per_history_step"],
            tail_tolerance=cfg["tail_tolerance"],
        )
        quad.validate_for(profile)
        squad = SphereQuadSpec(rho_nodes=cfg["rho_nodes"], circle_nodes=cfg["circle_nodes"])
        return SolverConfig(
            profile=profile,
            xi0=cfg["xi0"],
            horizon=cfg["horizon"],
            dt=cfg["dt"],
            h=cfg["h"],
            quad=quad,
            squad=squad,
            fp_tol=cfg["fp_tol"],
            fp_max_iter=cfg["fp_max_iter"],
        )
    except InputError as exc:
        raise ConfigError(str(exc)) from exc


def _fmt(x) -> str:
    return "%.16e" % float(x)


def write_table(path: Path, header: list[str], rows, fmt: str) -> None:
    if fmt == "json":
        payload = {"header": header, "rows": [[float(v) for v in row] for row in rows]}
        path.write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8")
    else:
        lines = [",".join(header)]
        lines.extend(",".join(_fmt(v) for v in row) for row in rows)
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def trajectory_rows(traj) -> tuple[list[str], list[list[float]]]:
    d = traj.values.shape[1]
    header = (
        ["t"]
        + [f"xi_{i + 1}" for i in range(d)]
        + ["norm"]
        + [f"field_{i + 1}" for i in range(d)]
    )
    fields = traj.fields if traj.fields is not None else np.full_like(traj.values, np.nan)
    rows = []
    for k, t in enumerate(traj.times):
        rows.append([t, *traj.values[k], float(np.linalg.norm(traj.values[k])), *fields[k]])
    return header, rows


def report_rows(report) -> tuple[list[str], list[list[float]]]:
    header = list(report.columns) + ["violated"]
    flags = report.row_violations()
    rows = [[*sample, 1.0 if flag else 0.0] for sample, flag in zip(report.samples, flags)]
    return header, rows


class RunWriter:
    """Collects emitted files and wall-clocks, then writes the manifest."""

    def __init__(self, out_dir: Path, cfg: dict, fmt: str):
        self.out_dir = out_dir
        self.cfg = cfg
        self.fmt = fmt
        self.outputs: list[str] = []
        self.clocks: dict[str, float] = {}
        self.extra: dict = {}
        out_dir.mkdir(parents=True, exist_ok=True)

    def emit(self, name: str, header, rows) -> Path:
        path = self.out_dir / f"{name}.{self.fmt}"
        write_table(path, header, rows, self.fmt)
        self.outputs.append(path.name)
        return path

    def _hashes(self) -> dict[str, str]:
        return {
            name: hashlib.sha256((self.out_dir / name).read_bytes()).hexdigest()
            for name in sorted(self.outputs)
        }

    def emit_report(self, report) -> None:
        header, rows = report_rows(report)
        self.emit(f"report_{report.name}", header, rows)
        self.extra.setdefault("reports", {})[report.name] = {
            "violated": bool(report.violated),
            "applicable": bool(report.applicable),
            "max_ratio": None if np.isnan(report.max_ratio) else float(report.max_ratio),
            "slack": float(report.slack),
        }

    def finish(self, status: str = "ok", message: str = "") -> None:
        manifest = {
            "config": self.cfg,
            "format": self.fmt,
            "versions": {
                "memflow": __version__,
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "python": platform.python_version(),
            },
            "created_utc": datetime.now(timezone.utc).isoformat(),
            "status": status,
            "message": message,
            "wall_clock_seconds": self.clocks,
            "outputs": sorted(self.outputs),
            "output_sha256": self._hashes(),
        }
        path = self.out_dir / "manifest.json"
        path.write_text(json.dumps({**manifest, **self.extra}, indent=1) + "\n", encoding="utf-8")


def cmd_constants(cfg: dict, writer: RunWriter) -> int:
    start = time.perf_counter()
    profile = Profile(
        dimension=cfg["dimension"], amplitude=cfg["amplitude"], center=cfg["center"], width=cfg["width"]
    )
    try:
        constants = compute_constants(profile, cfg["delta"])
    except InputError as exc:
        raise ConfigError(str(exc)) from exc
    table = constants.as_dict()
    for name, value in table.items():
        print(f"{name} = {value:.12g}")
    path = writer.out_dir / f"constants.{writer.fmt}"
    if writer.fmt == "csv":
        lines = ["name,value"] + [f"{k},{_fmt(v)}" for k, v in table.items()]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    else:
        path.write_text(json.dumps(table, indent=1) + "\n", encoding="utf-8")
    writer.outputs.append(path.name)
    writer.clocks["constants"] = time.perf_counter() - start
    return 0


def cmd_run(cfg: dict, writer: RunWriter, which: str) -> int:
    config = build_solver_config(cfg)
    start = time.perf_counter()
    status, message, code = "ok", "", 0
    if which == "limit":
        traj = solve_limit(replace(config, h=None))
        if traj.truncated:
            status, message, code = "truncated", traj.note, 3
    else:
        if config.h is None:
            raise ConfigError("run-memory needs a numeric h in the config")
        try:
            traj = solve_memory(config)
        except FixedPointError as exc:
            traj = exc.partial if getattr(exc, "partial", None) is not None else None
            status, message, code = "failed", str(exc), 3
    writer.clocks[f"run_{which}"] = time.perf_counter() - start

    name = f"trajectory_{which}"
    if traj is not None:
        header, rows = trajectory_rows(traj)
        if code != 0:
            rows.append([float("nan")] * len(header))  # failure marker row
        writer.emit(name, header, rows)
    writer.finish(status=status, message=message)
    return code


def _study_h_list(cfg: dict, args) -> list[float]:
    if args.h_list:
        return [float(v) for v in args.h_list.split(",")]
    if cfg.get("h_list"):
        return [float(v) for v in cfg["h_list"]]
    raise ConfigError("study needs --h-list or an h_list config entry")


def cmd_study(cfg: dict, writer: RunWriter, args) -> int:
    config = build_solver_config(cfg)
    h_list = _study_h_list(cfg, args)
    try:
        start = time.perf_counter()
        study = convergence_study(config, h_list)
        writer.clocks["study"] = time.perf_counter() - start
    except InputError as exc:
        raise ConfigError(str(exc)) from exc

    writer.emit(
        "study",
        ["h", "sup_error"],
        [[row.h, row.sup_error] for row in study.rows],
    )
    writer.extra["study"] = {
        "monotone": study.monotone,
        "rows": [
            {"h": r.h, "failed": r.failed, "message": r.message, "runtime_seconds": r.runtime}
            for r in study.rows
        ],
    }

    profile = config.profile
    constants = compute_constants(profile, cfg["delta"])
    reference = study.reference
    writer.emit_report(check_decay(reference))
    writer.emit_report(sandwich_envelopes(reference, profile, constants))

    smallest = min((r.h for r in study.rows if not r.failed), default=None)
    if smallest is not None:
        start = time.perf_counter()
        traj = solve_memory(config.with_h(smallest))
        writer.clocks["smallest_h_rerun"] = time.perf_counter() - start
        writer.emit_report(check_derivative_bound(traj, constants))
        writer.emit_report(check_avg_control(traj, smallest, constants))
        times = [config.horizon * i / 10.0 for i in range(1, 11)]
        writer.emit_report(
            check_memory_frozen_gap(traj, smallest, profile, constants, config.quad, times)
        )
        writer.emit_report(
            check_frozen_limit_gap(
                config.xi0, [config.horizon], h_list, profile, constants, config.quad, config.squad
            )
        )
        lipschitz = estimate_lipschitz(reference, profile, config.squad)
        writer.extra["lipschitz"] = lipschitz
        writer.emit_report(
            gronwall_check(study, constants, profile.dimension, config.horizon, lipschitz)
        )

    failed = [r for r in study.rows if r.failed]
    writer.finish(
        status="ok" if not failed else "partial",
        message="" if not failed else f"{len(failed)} study rows failed",
    )
    return 0 if not failed else 3


def cmd_check(cfg: dict, writer: RunWriter) -> int:
    config = build_solver_config(cfg)
    profile = config.profile
    constants = compute_constants(profile, cfg["delta"])
    reports = []

    start = time.perf_counter()
    limit_traj = solve_limit(replace(config, h=None))
    writer.clocks["run_limit"] = time.perf_counter() - start
    reports.append(check_decay(limit_traj))
    reports.append(sandwich_envelopes(limit_traj, profile, constants))

    if config.h is not None:
        start = time.perf_counter()
        mem_traj = solve_memory(config)
        writer.clocks["run_memory"] = time.perf_counter() - start
        reports.append(check_derivative_bound(mem_traj, constants))
        reports.append(check_avg_control(mem_traj, config.h, constants))
        times = [config.horizon * i / 10.0 for i in range(1, 11)]
        reports.append(
            check_memory_frozen_gap(mem_traj, config.h, profile, constants, config.quad, times)
        )
        reports.append(
            check_frozen_limit_gap(
                config.xi0,
                [config.horizon],
                [config.h],
                profile,
                constants,
                config.quad,
                config.squad,
            )
        )

    for report in reports:
        writer.emit_report(report)
        flag = "VIOLATED" if report.violated else ("n/a" if not report.applicable else "ok")
        print(f"{report.name}: {flag} (max_ratio={report.max_ratio:.3e})")

    violated = any(r.violated for r in reports if r.applicable)
    writer.finish(status="ok" if not violated else "violated")
    return 4 if violated else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="memflow", description=__doc__)
    parser.add_argument("command", choices=["constants", "run-memory", "run-limit", "study", "check"])
    parser.add_argument("--config", required=True, help="path to the flat JSON config")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--h-list", default="", help="comma-separated decreasing h values (study)")
    parser.add_argument("--format", choices=["csv", "json"], default="csv")
    args = parser.parse_args(argv)

    try:
        cfg = resolve_config(load_config(args.config))
        writer = RunWriter(Path(args.out), cfg, args.format)
        if args.command == "constants":
            code = cmd_constants(cfg, writer)
            writer.finish()
            return code
        if args.command == "run-memory":
            return cmd_run(cfg, writer, "memory")
        if args.command == "run-limit":
            return cmd_run(cfg, writer, "limit")
        if args.command == "study":
            return cmd_study(cfg, writer, args)
        return cmd_check(cfg, writer)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (FixedPointError, InputError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
