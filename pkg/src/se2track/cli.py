"""Command-line front end.

Subcommands:

    simulate   one closed-loop run -> CSV log + JSON manifest
    pe-check   excitation scan of a reference -> JSON report
    lin-check  linearization diagnostics -> JSON report
    compare    several controllers on one scenario (JSON config) -> CSVs + summary
    basin      Monte-Carlo convergence sweep -> JSON summary

Exit codes: 0 success, 1 runtime failure (diverged simulation),
2 usage or config error. Outputs are deterministic: re-running a
written manifest reproduces the CSV byte for byte.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .engine import (
    CONTROLLERS,
    SimConfig,
    SimulationDiverged,
    compare_controllers,
    monte_carlo_basin,
    simulate,
)
from .excitation import (
    controller_regressor,
    ellipse_pe_closed_form,
    pe_epsilon,
    uniform_heading_ellipse_regressor,
    window_gram,
)
from .linearization import lin_check
from .trajectories import trajectory_from_descriptor


class ConfigError(ValueError):
    """Bad flag combination or config file; maps to exit code 2."""


def _parse_floats(text: str, n: int, what: str) -> tuple:
    try:
        parts = tuple(float(tok) for tok in text.split(","))
    except ValueError:
        raise ConfigError(f"{what}: expected comma-separated numbers, got {text!r}")
    if len(parts) != n:
        raise ConfigError(f"{what}: expected {n} comma-separated numbers, got {text!r}")
    return parts


def _add_trajectory_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--traj", choices=["ellipse", "line"], default="ellipse",
                   help="reference family (default: ellipse)")
    p.add_argument("--a", type=float, default=3.0, help="ellipse semi-axis x (default 3)")
    p.add_argument("--b", type=float, default=5.0, help="ellipse semi-axis y (default 5)")
    p.add_argument("--h", type=float, default=2.0 * math.pi / 5.0,
                   help="ellipse angular rate (default 2*pi/5)")
    p.add_argument("--origin", default="0,0",
                   help="ellipse center / line start as x,y (default 0,0)")
    p.add_argument("--speed", type=float, default=1.0, help="line speed (default 1)")
    p.add_argument("--heading", type=float, default=0.0, help="line heading, rad (default 0)")


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--controller", choices=list(CONTROLLERS), default="spatial")
    p.add_argument("--gains", default=None,
                   help="comma-separated controller gains (spatial: k_omega,k_v; "
                        "kanayama: k_x,k_y,k_theta)")
    p.add_argument("--offset", default="0,0,0",
                   help="initial offset dx,dy,dtheta from the reference (default 0,0,0)")
    p.add_argument("--dt", type=float, default=None, help="integration step, s")
    p.add_argument("--t-end", type=float, default=None, help="horizon, s")
    p.add_argument("--seed", type=int, default=None, help="rng seed (batch modes)")
    p.add_argument("--config", default=None,
                   help="JSON config or manifest; explicit flags override its values")


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="se2track",
        description="Tracking control experiments for the kinematic unicycle on SE(2).",
    )
    top.add_argument("--version", action="version", version=f"se2track {__version__}")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one closed-loop simulation")
    _add_trajectory_flags(p)
    _add_run_flags(p)
    p.add_argument("--out", required=True, help="output CSV path")

    p = sub.add_parser("pe-check", help="persistent-excitation scan of a reference")
    _add_trajectory_flags(p)
    p.add_argument("--window", type=float, default=None,
                   help="window length T, s (default: one period, or 5 if aperiodic)")
    p.add_argument("--horizon", type=float, default=None,
                   help="scan horizon, s (default: 5 windows)")
    p.add_argument("--windows", type=int, default=64, help="window start grid size")
    p.add_argument("--points", type=int, default=401, help="Simpson points per window (odd)")
    p.add_argument("--out", default=None, help="optional JSON report path")

    p = sub.add_parser("lin-check", help="linearization structure and decay diagnostics")
    _add_trajectory_flags(p)
    p.add_argument("--t-end", type=float, default=25.0, help="LTV probe horizon, s")
    p.add_argument("--dt", type=float, default=1e-3, help="probe step, s")
    p.add_argument("--out", default=None, help="optional JSON report path")

    p = sub.add_parser("compare", help="run several controllers on one scenario")
    p.add_argument("--config", required=True, help="JSON scenario file (see README)")
    p.add_argument("--out", default="compare", help="output stem for CSVs and summary")

    p = sub.add_parser("basin", help="Monte-Carlo convergence sweep")
    _add_trajectory_flags(p)
    _add_run_flags(p)
    p.add_argument("--samples", type=int, default=100, help="number of draws (default 100)")
    p.add_argument("--threshold", type=float, default=1e-6,
                   help="Lyapunov convergence threshold (default 1e-6)")
    p.add_argument("--out", default=None, help="optional JSON summary path")

    return top


def _trajectory_descriptor(args) -> dict:
    origin = _parse_floats(args.origin, 2, "--origin")
    if args.traj == "ellipse":
        if args.a <= 0 or args.b <= 0:
            raise ConfigError("ellipse semi-axes --a/--b must be positive")
        if args.h == 0:
            raise ConfigError("--h must be nonzero")
        return {"family": "ellipse", "a": args.a, "b": args.b, "h": args.h,
                "origin": list(origin)}
    return {"family": "line", "speed": args.speed, "heading": args.heading,
            "start": list(origin)}


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}")


def _resolve_sim_config(args, argv) -> SimConfig:
    """Merge --config file (if any) with explicit flags; flags win."""
    base = {}
    if args.config is not None:
        doc = _load_json(args.config)
        base = doc.get("config", doc)  # accept a manifest or a bare config
        if not isinstance(base, dict) or "trajectory" not in base:
            raise ConfigError(f"config file {args.config} lacks a trajectory section")

    def given(flag: str) -> bool:
        return any(tok == flag or tok.startswith(flag + "=") for tok in argv)

    cfg = dict(base) if base else {}
    if not cfg or given("--traj") or given("--a") or given("--b") or given("--h") \
            or given("--origin") or given("--speed") or given("--heading"):
        cfg["trajectory"] = _trajectory_descriptor(args)
    if "controller" not in cfg or given("--controller"):
        cfg["controller"] = args.controller
    if given("--gains"):
        cfg["gains"] = list(_parse_floats(args.gains, len(args.gains.split(",")), "--gains"))
    elif "gains" not in cfg:
        cfg["gains"] = None
    if "offset" not in cfg or given("--offset"):
        cfg["offset"] = list(_parse_floats(args.offset, 3, "--offset"))
    if args.dt is not None:
        cfg["dt"] = args.dt
    cfg.setdefault("dt", 1e-3)
    if getattr(args, "t_end", None) is not None:
        cfg["t_end"] = args.t_end
    cfg.setdefault("t_end", 40.0)
    if args.seed is not None:
        cfg["seed"] = args.seed
    try:
        return SimConfig.from_dict(cfg)
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"invalid configuration: {exc}")


def _write_json(path, doc) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _manifest_path(out_csv: str) -> Path:
    p = Path(out_csv)
    stem = p.with_suffix("") if p.suffix == ".csv" else p
    return Path(str(stem) + ".manifest.json")


def cmd_simulate(args, argv) -> int:
    cfg = _resolve_sim_config(args, argv)
    t0 = time.perf_counter()
    log = simulate(cfg)
    log.to_csv(args.out)
    manifest = {
        "tool": "se2track",
        "version": __version__,
        "command": "simulate",
        "config": cfg.to_dict(),
        "out": str(args.out),
        "rows": len(log),
        "wall_clock_s": round(time.perf_counter() - t0, 6),
    }
    _write_json(_manifest_path(args.out), manifest)
    final_pos = float(log.position_error()[-1])
    final_head = float(log.heading_error()[-1])
    print(f"wrote {args.out} ({len(log)} rows); final position error "
          f"{final_pos:.3e} m, heading error {final_head:.3e} rad")
    return 0


def cmd_pe_check(args) -> int:
    desc = _trajectory_descriptor(args)
    traj = trajectory_from_descriptor(desc)
    T = args.window if args.window is not None else (traj.period or 5.0)
    horizon = args.horizon if args.horizon is not None else 5.0 * T
    report = pe_epsilon(controller_regressor(traj), horizon, T,
                        windows=args.windows, n=args.points)
    doc = {"trajectory": desc, "report": report.to_dict()}
    verdict = "PE certified on scanned horizon" if report.epsilon > 1e-9 \
        else "not PE on scanned horizon"
    doc["verdict"] = verdict
    print(f"epsilon = {report.epsilon:.6g} over horizon {horizon:g} s "
          f"(window {T:g} s): {verdict}")

    if desc["family"] == "ellipse":
        a, b, h = desc["a"], desc["b"], desc["h"]
        closed = ellipse_pe_closed_form(a, b, h)
        period = 2.0 * math.pi / abs(h)
        quad = window_gram(uniform_heading_ellipse_regressor(a, b, h, desc["origin"]),
                           0.0, period, args.points)
        resid = float(np.max(np.abs(quad - closed)) / np.max(np.abs(closed)))
        doc["uniform_heading_convention"] = {
            "closed_form_diag": [float(closed[i, i]) for i in range(3)],
            "quadrature_residual_rel": resid,
        }
        print(f"uniform-heading one-period Gram diag: "
              f"({closed[0, 0]:.6g}, {closed[1, 1]:.6g}, {closed[2, 2]:.6g}); "
              f"quadrature residual {resid:.3e} (relative)")

    if args.out:
        _write_json(args.out, doc)
        print(f"wrote {args.out}")
    return 0


def cmd_lin_check(args) -> int:
    desc = _trajectory_descriptor(args)
    traj = trajectory_from_descriptor(desc)
    report = lin_check(traj, t_end=args.t_end, dt=args.dt)
    doc = {"trajectory": desc, "report": report.to_dict()}
    print(f"structure residual {report.max_structure_residual:.3e}, "
          f"FD residual {report.max_fd_residual:.3e}, "
          f"fitted decay rate {report.fitted_decay_rate:.4f} "
          f"(R^2 = {report.r_squared:.4f}) -> {report.verdict}")
    if args.out:
        _write_json(args.out, doc)
        print(f"wrote {args.out}")
    return 0


def _compare_config(path: str):
    doc = _load_json(path)
    missing = [k for k in ("trajectory", "controllers") if k not in doc]
    if missing:
        raise ConfigError(f"compare config {path}: missing keys {missing}")
    ctrls = doc["controllers"]
    if not isinstance(ctrls, list) or not ctrls:
        raise ConfigError(f"compare config {path}: 'controllers' must be a non-empty list")
    bad = []
    cfgs = []
    for i, entry in enumerate(ctrls):
        if isinstance(entry, str):
            entry = {"name": entry}
        name = entry.get("name")
        if name not in CONTROLLERS:
            bad.append(f"controllers[{i}].name={name!r}")
            continue
        cfgs.append(
            SimConfig(
                trajectory=doc["trajectory"],
                controller=name,
                gains=tuple(entry["gains"]) if entry.get("gains") else None,
                offset=tuple(doc.get("offset", (0.0, 0.0, 0.0))),
                dt=float(doc.get("dt", 1e-3)),
                t_end=float(doc.get("t_end", 40.0)),
            )
        )
    if bad:
        raise ConfigError(f"compare config {path}: invalid entries: {', '.join(bad)}")
    return cfgs, float(doc.get("threshold", 1e-2))


def cmd_compare(args) -> int:
    cfgs, threshold = _compare_config(args.config)
    try:
        rows, logs = compare_controllers(cfgs, threshold=threshold)
    except ValueError as exc:
        raise ConfigError(str(exc))
    stem = Path(args.out)

    paths = []
    for i, (cfg, log) in enumerate(zip(cfgs, logs)):
        path = Path(f"{stem}_{i}_{cfg.controller}.csv")
        log.to_csv(path)
        paths.append(str(path))

    long_path = Path(f"{stem}_long.csv")
    with open(long_path, "w", newline="\n") as fh:
        fh.write("controller,run,t,variable,value\n")
        for i, (cfg, log) in enumerate(zip(cfgs, logs)):
            t = log.t
            series = {
                "px": log.column("px"), "py": log.column("py"),
                "pxd": log.column("pxd"), "pyd": log.column("pyd"),
                "position_error": log.position_error(),
                "heading_error": log.heading_error(),
                "lyapunov": log.lyap,
            }
            for var, vals in series.items():
                for tk, vk in zip(t, vals):
                    fh.write(f"{cfg.controller},{i},{tk!r},{var},{vk!r}\n")

    summary = {
        "threshold": threshold,
        "rows": [r.to_dict() for r in rows],
        "csv_files": paths,
        "long_format": str(long_path),
    }
    _write_json(f"{stem}_summary.json", summary)
    for r in rows:
        tth = "never" if r.time_to_heading is None else f"{r.time_to_heading:g} s"
        ttp = "never" if r.time_to_position is None else f"{r.time_to_position:g} s"
        print(f"{r.controller:12s} heading<thr: {tth:>9s}  position<thr: {ttp:>9s}  "
              f"final pos err {r.final_position_error:.3e}")
    print(f"wrote {len(paths)} run CSVs, {long_path}, {stem}_summary.json")
    return 0


def cmd_basin(args, argv) -> int:
    cfg = _resolve_sim_config(args, argv)
    # basin-specific defaults (only when neither flag nor config set them)
    if args.t_end is None and args.config is None:
        cfg = SimConfig.from_dict({**cfg.to_dict(), "t_end": 60.0})
    if args.dt is None and args.config is None:
        cfg = SimConfig.from_dict({**cfg.to_dict(), "dt": 5e-3})
    seed = args.seed if args.seed is not None else 0
    summary = monte_carlo_basin(cfg, samples=args.samples, seed=seed,
                                threshold=args.threshold)
    frac = "n/a" if summary.fraction is None else f"{summary.fraction:.3f}"
    print(f"{summary.converged}/{summary.samples} runs reached "
          f"Lyapunov < {args.threshold:g} by t = {cfg.t_end:g} s "
          f"(fraction {frac}, seed {seed})")
    doc = {"config": cfg.to_dict(), "summary": summary.to_dict()}
    if args.out:
        _write_json(args.out, doc)
        print(f"wrote {args.out}")
    return 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        if args.command == "simulate":
            return cmd_simulate(args, argv)
        if args.command == "pe-check":
            return cmd_pe_check(args)
        if args.command == "lin-check":
            return cmd_lin_check(args)
        if args.command == "compare":
            return cmd_compare(args)
        if args.command == "basin":
            return cmd_basin(args, argv)
        raise ConfigError(f"unknown command {args.command!r}")
    except SimulationDiverged as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        # ConfigError and validation errors from the library surface the
        # same way: a usage problem, not a crash
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
