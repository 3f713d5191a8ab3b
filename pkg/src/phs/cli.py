"""``phs`` command line: run, sweep and validate YAML scenarios.

Exit codes: 0 ok, 2 config, 3 assembly, 4 solver, 5 io.
"""
from __future__ import annotations

import argparse
import csv
import math
import os
import re
import shutil
import sys as _sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .config import ConfigError, Scenario, parse_config
from .convergence import ReferenceUnavailable, convergence_rows, fit_order, standing_wave
from .core import P_FAMILY, ModelError
from .simulate import SolverError, simulate, stack_inputs, static_equilibrium, stepper_for
from .svg import line_plot

EXIT_CONFIG, EXIT_ASSEMBLY, EXIT_SOLVER, EXIT_IO = 2, 3, 4, 5
FLOAT = "%.17g"


def _fmt(v: float) -> str:
    return FLOAT % v


def _column_name(port_name: str) -> str:
    return re.sub(r"[^0-9A-Za-z]+", "_", port_name).strip("_")


# --- simulation bundle ------------------------------------------------------

def initial_state(scenario: Scenario, sys, signals) -> np.ndarray:
    kind = scenario.initial["kind"]
    if kind == "rest":
        return np.zeros(sys.n_states)
    if kind == "equilibrium":
        eq = static_equilibrium(sys, stack_inputs(sys, signals, 0.0))
        if not eq.exists:
            raise SolverError(f"no static equilibrium for the initial load (residual {eq.residual:.3e})")
        return eq.state
    if kind == "mode":
        return standing_wave(scenario.model, scenario.initial["mode"]).state(sys, 0.0)
    rng = np.random.default_rng(scenario.initial["seed"])
    return rng.standard_normal(sys.n_states)


def conservative_start(signals, times: np.ndarray, dt: float) -> int | None:
    """First state index after which every input is zero, or None."""
    last = 0.0
    for sig in signals:
        if sig is None or sig.is_zero:
            continue
        if sig.kind != "step_release":
            return None
        last = max(last, sig.release_time)
    # inputs are sampled at t_k + dt/2
    idx = np.nonzero(times + 0.5 * dt >= last)[0]
    if last == 0.0:
        return 0
    return int(idx[0]) if idx.size and idx[0] < len(times) - 1 else None


def displacement_history(sys, states: np.ndarray, dt: float):
    """Trapezoid-integrated first p co-energy (velocity) at every p point."""
    blocks = sys.state_blocks(P_FAMILY)
    rows = [b.start for b in blocks]
    w = sys.q_weights.tocsr()[rows]
    vel = (w @ states.T).T / sys.measure
    disp = np.zeros_like(vel)
    disp[1:] = np.cumsum(0.5 * dt * (vel[1:] + vel[:-1]), axis=0)
    return blocks, disp


def _selected_ports(scenario: Scenario, sys, signals):
    if scenario.ports == "none":
        return []
    if scenario.ports == "all":
        return list(sys.ports)
    return [p for p, s in zip(sys.ports, signals) if s is not None and not s.is_zero]


def write_bundle(scenario: Scenario, out_dir: Path) -> dict:
    """Simulate and write every artifact into ``out_dir`` (assumed empty)."""
    try:
        sys, signals = scenario.build()
    except ModelError as exc:
        raise _AssemblyError(str(exc)) from exc
    x0 = initial_state(scenario, sys, signals)
    tr = simulate(sys, signals, scenario.dt, scenario.t_end, x0)
    dt, times = tr.dt, tr.times

    ports = _selected_ports(scenario, sys, signals)
    bt_w = (sys.b_mat.T @ sys.q_weights).tocsr()
    every = scenario.record_every
    keep = np.arange(0, len(times), every)
    if keep[-1] != len(times) - 1:
        keep = np.append(keep, len(times) - 1)

    header = ["t", "H"]
    for p in ports:
        c = _column_name(p.name)
        header += [f"u_{c}_{k}" for k in range(p.width)]
        header += [f"y_{c}_{k}" for k in range(p.width)]
    header.append("balance_residual")
    header += [f"x_{i}" for i in scenario.selected_states]

    with open(out_dir / "trajectory.csv", "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for k in keep:
            row = [_fmt(times[k]), _fmt(tr.hamiltonian[k])]
            if ports:
                u = stack_inputs(sys, signals, times[k])
                y = bt_w @ tr.states[k]
                for p in ports:
                    row += [_fmt(v) for v in u[p.slice]] + [_fmt(v) for v in y[p.slice]]
            row.append(_fmt(tr.residual[k - 1] if k else 0.0))
            row += [_fmt(tr.states[k, i]) for i in scenario.selected_states]
            wr.writerow(row)

    blocks, disp = displacement_history(sys, tr.states, dt)
    snap_idx = [min(int(round(t / dt)), len(times) - 1) for t in scenario.snapshot_times]
    coord_names = ["x", "y"][: len(sys.steps)]
    with open(out_dir / "snapshots.csv", "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["t", *coord_names, "w"])
        for k in snap_idx:
            for j, b in enumerate(blocks):
                wr.writerow([_fmt(times[k]), *(_fmt(c) for c in b.point), _fmt(disp[k, j])])

    line_plot(out_dir / "energy.svg", [(times, tr.hamiltonian, "H")],
              title="Hamiltonian", xlabel="t [s]", ylabel="H [J]")
    if scenario.selected_states:
        line_plot(out_dir / "states.svg",
                  [(times, tr.states[:, i], f"x_{i}") for i in scenario.selected_states],
                  title="Selected states", xlabel="t [s]", ylabel="state")
    if snap_idx and len(sys.steps) == 1:
        xs = np.array([b.point[0] for b in blocks])
        line_plot(out_dir / "snapshots.svg",
                  [(xs, disp[k], f"t = {times[k]:.4g} s") for k in snap_idx],
                  title="Deflection profiles", xlabel="x [m]", ylabel="w [m]")

    start = conservative_start(signals, times, dt)
    drift = tr.max_relative_drift(start) if start is not None else None
    scale = np.maximum(1.0, np.maximum(tr.hamiltonian[1:], tr.hamiltonian[:-1]))
    res = float(np.max(np.abs(tr.residual) / scale)) if tr.n_steps else 0.0
    cond = stepper_for(sys, dt).condition
    lines = [
        f"scenario: {Path(scenario.source).name or '-'}",
        f"model: {scenario.model_name}",
        f"grid: {sys.summary()}",
        f"resolution: {scenario.resolution}",
        f"dt: {_fmt(dt)}",
        f"steps: {tr.n_steps}",
        f"t_end: {_fmt(times[-1])}",
        f"initial: {scenario.initial['kind']}",
        f"midpoint_condition_1norm: {cond:.6e}",
        f"H_initial: {_fmt(tr.hamiltonian[0])}",
        f"H_final: {_fmt(tr.hamiltonian[-1])}",
        f"H_max: {_fmt(tr.hamiltonian.max())}",
        f"max_balance_residual_rel: {res:.6e}",
    ]
    if drift is None:
        lines.append("energy_drift_rel: n/a (inputs never vanish)")
    else:
        lines.append(f"energy_window_start_t: {_fmt(times[start])}")
        lines.append(f"energy_drift_rel: {drift:.6e}")
    (out_dir / "report.txt").write_text("\n".join(lines) + "\n")
    return {"drift": drift, "residual": res, "system": sys, "trajectory": tr}


class _AssemblyError(Exception):
    pass


def _atomic_output(target: Path, writer):
    """Run ``writer(tmpdir)`` and move the result to ``target`` only on success."""
    target = Path(target)
    parent = target.resolve().parent
    parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{target.name}.", dir=parent))
    try:
        result = writer(tmp)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    old = None
    if target.exists():
        old = Path(tempfile.mkdtemp(prefix=f".{target.name}.old.", dir=parent))
        os.rmdir(old)
        os.rename(target, old)
    os.rename(tmp, target)
    if old is not None:
        shutil.rmtree(old, ignore_errors=True)
    return result


def run(scenario: Scenario, out_dir) -> dict:
    return _atomic_output(Path(out_dir), lambda tmp: write_bundle(scenario, tmp))


# --- convergence sweep ------------------------------------------------------

def sweep(scenario: Scenario, levels: int, out_dir, threads: int | None = None):
    if levels < 2:
        raise ConfigError(["--levels must be at least 2"])
    threads = threads or int(os.environ.get("PHS_THREADS", "0") or 0) or (os.cpu_count() or 1)

    def writer(tmp: Path):
        with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
            rows = convergence_rows(scenario.model, scenario.resolution, levels, scenario.dt,
                                    scenario.t_end, scenario.sweep_mode, map_fn=pool.map)
        order = fit_order([r.h for r in rows], [r.error for r in rows])
        with open(tmp / "convergence.csv", "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["level", "resolution", "h", "dt", "error", "order"])
            for r in rows:
                res = "x".join(map(str, r.resolution)) if isinstance(r.resolution, tuple) else str(r.resolution)
                wr.writerow([r.level, res, _fmt(r.h), _fmt(r.dt), _fmt(r.error),
                             "" if r.order is None else _fmt(r.order)])
        (tmp / "report.txt").write_text(
            f"model: {scenario.model_name}\nlevels: {levels}\nt_end: {_fmt(scenario.t_end)}\n"
            f"fitted_order: {order:.6f}\n"
        )
        return rows, order

    return _atomic_output(Path(out_dir), writer)


# --- entry point ------------------------------------------------------------

def _positive(text: str) -> float:
    v = float(text)
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"must be a positive number, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="phs", description="Staggered-grid port-Hamiltonian simulations.")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="simulate a scenario and write CSV/SVG/report")
    r.add_argument("config")
    r.add_argument("--out", default=None, help="output directory (default: <config stem>_out)")
    r.add_argument("--dt", type=_positive, default=None, help="override time.dt_s")
    r.add_argument("--t-end", type=_positive, default=None, help="override time.t_end_s")
    s = sub.add_parser("sweep", help="spatial convergence sweep against a standing wave")
    s.add_argument("config")
    s.add_argument("--levels", type=int, default=None)
    s.add_argument("--out", default=None, help="output directory (default: <config stem>_sweep)")
    v = sub.add_parser("validate", help="parse and assemble a scenario without simulating")
    v.add_argument("config")
    return ap


def _fail(category: str, msg: str, code: int) -> int:
    print(f"error [{category}]: {msg}", file=_sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario = parse_config(args.config)
        stem = Path(args.config).stem
        if args.command == "validate":
            sys, signals = scenario.build()
            print(f"ok: {sys.summary()}")
            for p, sig in zip(sys.ports, signals):
                print(f"  port {p.name}: {p.family}-effort input at {p.point}, signal {sig.kind}")
            return 0
        if args.command == "run":
            scenario = scenario.with_time(args.dt, args.t_end)
            out = Path(args.out or f"{stem}_out")
            info = run(scenario, out)
            drift = "n/a" if info["drift"] is None else f"{info['drift']:.3e}"
            print(f"wrote {out}: drift {drift}, max residual {info['residual']:.3e}")
            return 0
        out = Path(args.out or f"{stem}_sweep")
        rows, order = sweep(scenario, args.levels or scenario.sweep_levels, out)
        for r in rows:
            print(f"level {r.level}: h={r.h:.4g} error={r.error:.4e}"
                  + ("" if r.order is None else f" order={r.order:.3f}"))
        print(f"fitted order {order:.3f}; wrote {out}")
        return 0
    except ConfigError as exc:
        msg = "\n  ".join(exc.errors)
        return _fail("config", msg if len(exc.errors) == 1 else "\n  " + msg, EXIT_CONFIG)
    except ReferenceUnavailable as exc:
        return _fail("config", str(exc), EXIT_CONFIG)
    except (_AssemblyError, ModelError) as exc:
        return _fail("assembly", str(exc), EXIT_ASSEMBLY)
    except (SolverError, np.linalg.LinAlgError, FloatingPointError) as exc:
        return _fail("solver", str(exc), EXIT_SOLVER)
    except OSError as exc:
        return _fail("io", str(exc), EXIT_IO)


if __name__ == "__main__":
    raise SystemExit(main())
