"""Command-line front end: deterministic, file-emitting experiment runner.

Every subcommand reads one JSON config (lab units), writes data files
atomically into the output directory, and finishes with a manifest.  Physics
negatives (no zero modes, validity failure, tracking loss) are structured
results with exit code 0; malformed input exits nonzero with a message on
standard error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, braiding, circuit_map, config, edge_modes
from . import open_system, spin_chain, topology
from .units import (T0_MHZ, mhz_from_energy, time_from_ns, time_from_us,
                    us_from_time)

_FLOAT_FMT = "%.9g"


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return _FLOAT_FMT % value


def write_text_atomic(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_json(path: str, obj) -> None:
    write_text_atomic(path, json.dumps(obj, indent=1, sort_keys=False) + "\n")


def write_table(out_dir: str, stem: str, header: list, rows: list,
                fmt: str) -> str:
    """One tabular artifact; rows are sequences aligned with the header."""
    if fmt == "json":
        path = os.path.join(out_dir, stem + ".json")

        def conv(v):
            if isinstance(v, str):
                return v
            if isinstance(v, (int, np.integer)):
                return int(v)
            return float(_FLOAT_FMT % v)

        objs = [{k: conv(v) for k, v in zip(header, row)} for row in rows]
        write_json(path, objs)
        return path
    path = os.path.join(out_dir, stem + ".csv")
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    write_text_atomic(path, "\n".join(lines) + "\n")
    return path


def _series_files(out_dir: str, stem: str, series, fmt: str) -> str:
    if fmt == "json":
        n = series.site_density.shape[1]
        obj = {
            "time_us": [float(_FLOAT_FMT % us_from_time(t))
                        for t in series.times],
            "p1": [float(_FLOAT_FMT % v) for v in series.p1],
            "p2": [float(_FLOAT_FMT % v) for v in series.p2],
            "chiral_center": [float(_FLOAT_FMT % v)
                              for v in series.chiral_center],
        }
        for l in range(n):
            obj["site_%d" % (l + 1)] = [float(_FLOAT_FMT % v)
                                        for v in series.site_density[:, l]]
        path = os.path.join(out_dir, stem + ".json")
        write_json(path, obj)
        return path
    path = os.path.join(out_dir, stem + ".csv")
    write_text_atomic(path, series.to_csv())
    return path


# ---------------------------------------------------------------- commands


def cmd_bands(cfg: dict, out_dir: str, fmt: str, threads: int):
    p = config.chain_params_from(cfg)
    k_grid = np.linspace(-np.pi, np.pi, cfg["bands"]["k_points"])
    rows = []
    for k in k_grid:
        lo, hi = spin_chain.band_energies(p, float(k))
        rows.append((float(k), lo, hi))
    files = [write_table(out_dir, "bands", ["k_rad", "e_minus_t0", "e_plus_t0"],
                         rows, fmt)]
    gap = spin_chain.minimum_gap(p)
    summary = os.path.join(out_dir, "bands_summary.json")
    write_json(summary, {"minimum_gap_t0": float(_FLOAT_FMT % gap),
                         "minimum_gap_mhz": float(_FLOAT_FMT % mhz_from_energy(gap))})
    files.append(summary)
    return files, []


def cmd_phase_diagram(cfg: dict, out_dir: str, fmt: str, threads: int):
    sec = cfg["phase_diagram"]
    t_axis = np.linspace(sec["t_z_mhz_min"] / T0_MHZ,
                         sec["t_z_mhz_max"] / T0_MHZ, sec["grid_points"])
    h_axis = np.linspace(sec["h_z_mhz_min"] / T0_MHZ,
                         sec["h_z_mhz_max"] / T0_MHZ, sec["grid_points"])
    diagram = topology.phase_diagram(t_axis, h_axis)
    rows = []
    for i, t_z in enumerate(diagram.t_z_axis):
        for j, h_z in enumerate(diagram.h_z_axis):
            nu = diagram.nu[i, j]
            rows.append((float(t_z), float(h_z),
                         "NA" if np.isnan(nu) else int(round(nu))))
    files = [write_table(out_dir, "phase_diagram", ["t_z_t0", "h_z_t0", "nu"],
                         rows, fmt)]

    points = [(x / T0_MHZ, y / T0_MHZ) for x, y in sec["dynamical_points_mhz"]]
    if points:
        duration = time_from_ns(sec["dynamical_duration_ns"])
        n = cfg["model"]["n_cells"]
        d0 = cfg["model"]["delta0_mhz"] / T0_MHZ

        def one(pt):
            return topology.dynamical_winding_scan([pt], delta0=d0, n_cells=n,
                                                   duration=duration)[0]

        with ThreadPoolExecutor(max_workers=max(threads, 1)) as pool:
            scan = list(pool.map(one, points))
        drows = [(r["t_z"], r["h_z"], r["gap"],
                  "NA" if r["nu_closed_form"] is None else r["nu_closed_form"],
                  r["nu_dynamical"]) for r in scan]
        files.append(write_table(
            out_dir, "dynamical_winding",
            ["t_z_t0", "h_z_t0", "gap_t0", "nu_closed", "nu_dynamical"],
            drows, fmt))
    return files, []


def cmd_edge_modes(cfg: dict, out_dir: str, fmt: str, threads: int):
    p = config.chain_params_from(cfg)
    h = spin_chain.build_open_hamiltonian(p)
    vals = np.sort(np.linalg.eigvalsh(h))
    files = [write_table(out_dir, "spectrum", ["index", "energy_t0"],
                         [(i, float(v)) for i, v in enumerate(vals)], fmt)]

    dot = cfg["edge_modes"]["dot"] or braiding._infer_dot(p)
    try:
        left, right = edge_modes.analytic_edge_states(dot, p)
    except edge_modes.TopologicalPhaseAbsentError as exc:
        path = os.path.join(out_dir, "no_zero_modes.json")
        write_json(path, {"zero_modes": False, "reason": str(exc),
                          "dot": dot})
        files.append(path)
        return files, ["no zero modes at these parameters"]

    numeric = edge_modes.numeric_zero_modes(h)
    states = {
        "analytic_left": left.state(), "analytic_right": right.state(),
        "numeric_left": numeric.left_state, "numeric_right": numeric.right_state,
    }
    header = ["site"]
    for name in states:
        for spin in ("up", "dn"):
            for part in ("re", "im"):
                header.append("%s_%s_%s" % (name, spin, part))
    rows = []
    for l in range(p.n_cells):
        row = [l + 1]
        for vec in states.values():
            for s in (0, 1):
                amp = vec[2 * l + s]
                row += [float(np.real(amp)), float(np.imag(amp))]
        rows.append(row)
    files.append(write_table(out_dir, "edge_modes", header, rows, fmt))

    summary = os.path.join(out_dir, "edge_summary.json")
    write_json(summary, {
        "zero_modes": True,
        "dot": dot,
        "overlap_left":
            float(_FLOAT_FMT % edge_modes.edge_overlap(left, numeric.left_state)),
        "overlap_right":
            float(_FLOAT_FMT % edge_modes.edge_overlap(right, numeric.right_state)),
        "energy_left_t0": float(_FLOAT_FMT % numeric.energies[0]),
        "energy_right_t0": float(_FLOAT_FMT % numeric.energies[1]),
        "sigma_y_left":
            float(_FLOAT_FMT % edge_modes.sigma_y_expectation(numeric.left_state)),
        "sigma_y_right":
            float(_FLOAT_FMT % edge_modes.sigma_y_expectation(numeric.right_state)),
    })
    files.append(summary)
    return files, []


def _report_dict(r) -> dict:
    return {
        "edge_side": r.edge_side,
        "edge_population": float(_FLOAT_FMT % r.edge_population),
        "sigma_y_expectation": float(_FLOAT_FMT % r.sigma_y_expectation),
        "fidelity_to_expected": float(_FLOAT_FMT % r.fidelity_to_expected),
        "expected_label": r.expected_label,
    }


def cmd_braid(cfg: dict, out_dir: str, fmt: str, threads: int):
    p = config.chain_params_from(cfg)
    sec = cfg["protocol"]
    durations = config.protocol_durations(cfg)
    total = sum(durations) if durations else time_from_us(3.0)
    order = tuple(sec["order"])
    files, warnings = [], []
    try:
        finals, p_end = braiding._run_both_orders(
            p, total, sec["mode"], sec["ramp_shape"], sec["steps"], order)
    except braiding.TrackingLossError as exc:
        path = os.path.join(out_dir, "braid_error.json")
        write_json(path, {"error": "tracking_loss",
                          "step_index": exc.step_index,
                          "message": str(exc)})
        return [path], ["tracking loss at step %d" % exc.step_index]

    report_red = braiding.classify_final(finals["red"], p_end)
    report_blue = braiding.classify_final(finals["blue"], p_end)
    disting = 1.0 - abs(np.vdot(finals["red"], finals["blue"])) ** 2
    summary = os.path.join(out_dir, "braid_summary.json")
    write_json(summary, {
        "mode": sec["mode"],
        "order_red": list(order),
        "order_blue": list(reversed(order)),
        "total_duration_us": float(_FLOAT_FMT % us_from_time(total)),
        "distinguishability": float(_FLOAT_FMT % disting),
        "red": _report_dict(report_red),
        "blue": _report_dict(report_blue),
    })
    files.append(summary)

    dens_red = spin_chain.site_populations(finals["red"])
    dens_blue = spin_chain.site_populations(finals["blue"])
    rows = [(l + 1, float(dens_red[l]), float(dens_blue[l]))
            for l in range(p.n_cells)]
    files.append(write_table(out_dir, "braid_density",
                             ["site", "red_density", "blue_density"],
                             rows, fmt))

    if sec["mode"] == "unitary":
        scan = braiding.convergence_scan(p, sec["scan_durations_us"],
                                         sec["ramp_shape"], sec["steps"])
        rows = [(r["duration_us"], r["distinguishability"], r["red_left"],
                 r["red_right"], r["blue_left"], r["blue_right"])
                for r in scan]
        files.append(write_table(
            out_dir, "braid_convergence",
            ["duration_us", "distinguishability", "red_left", "red_right",
             "blue_left", "blue_right"], rows, fmt))
    return files, warnings


def cmd_drives(cfg: dict, out_dir: str, fmt: str, threads: int):
    p = config.chain_params_from(cfg)
    c = config.circuit_params_from(cfg)
    plan = circuit_map.synthesize_drives(p, c)
    files, warnings = [], []

    path = os.path.join(out_dir, "drive_plan.json")
    write_json(path, circuit_map.drive_plan_json(plan))
    files.append(path)

    gaps = circuit_map.hopping_gaps(c)
    rows = [(i + 1, float(v)) for i, v in enumerate(gaps.values_mhz)]
    files.append(write_table(out_dir, "hopping_gaps",
                             ["rank", "gap_mhz"], rows, fmt))
    if gaps.collision:
        warnings.append("degenerate hopping gaps: tones are not addressable")

    report = circuit_map.rwa_validity(plan, p)
    path = os.path.join(out_dir, "rwa_validity.json")
    write_json(path, {
        "min_tone_ratio": float(_FLOAT_FMT % report.min_tone_ratio),
        "min_gap_spacing_ratio": float(_FLOAT_FMT % report.min_gap_spacing_ratio),
        "min_tone_combination_ratio":
            float(_FLOAT_FMT % report.min_tone_combination_ratio),
        "threshold": report.threshold,
        "passed": report.passed,
    })
    files.append(path)
    if not report.passed:
        warnings.append("rwa validity failed")

    window_ns = cfg["drives"]["cross_validate_ns"]
    if window_ns is not None:
        fid = circuit_map.rwa_cross_validation(plan, p, c,
                                               time_from_ns(window_ns))
        path = os.path.join(out_dir, "cross_validation.json")
        write_json(path, {"window_ns": window_ns,
                          "fidelity": float(_FLOAT_FMT % fid)})
        files.append(path)
    return files, warnings


def cmd_lindblad(cfg: dict, out_dir: str, fmt: str, threads: int):
    p = config.chain_params_from(cfg)
    base, gammas = config.lindblad_base_from(cfg)
    khz = cfg["lindblad"]["gamma_khz"]
    h = open_system.effective_hamiltonian_bare(p)
    files = []

    jobs = [(g, side) for g in range(len(gammas)) for side in ("left", "right")]

    def run(job):
        gi, side = job
        run_cfg = base.with_(gamma=gammas[gi])
        rho0 = open_system.pure_density(
            open_system.edge_initial_state(side, p.n_cells))
        return open_system.lindblad_evolve(rho0, run_cfg, h)

    with ThreadPoolExecutor(max_workers=max(threads, 1)) as pool:
        results = list(pool.map(run, jobs))
    for (gi, side), series in zip(jobs, results):
        stem = "lindblad_%s_%gkhz" % (side, khz[gi])
        files.append(_series_files(out_dir, stem, series, fmt))

    sweep = open_system.gamma_sweep(p, gammas, base.duration, base)
    rows = [(r["gamma_khz"], r["p1"], r["p2"], r["nu_half"]) for r in sweep]
    files.append(write_table(out_dir, "lindblad_sweep",
                             ["gamma_khz", "p1", "p2", "nu_half"], rows, fmt))
    return files, []


def cmd_chiral_center(cfg: dict, out_dir: str, fmt: str, threads: int):
    p = config.chain_params_from(cfg)
    sec = cfg["chiral_center"]
    series = topology.chiral_center_dynamics(
        p, time_from_ns(sec["duration_ns"]), sec["steps"])
    rows = [(us_from_time(t), float(c), float(r))
            for t, c, r in zip(series.times, series.instantaneous_center,
                               series.running_average)]
    files = [write_table(out_dir, "chiral_center",
                         ["time_us", "chiral_center", "nu_running"],
                         rows, fmt)]
    return files, []


_COMMANDS = {
    "bands": cmd_bands,
    "phase-diagram": cmd_phase_diagram,
    "edge-modes": cmd_edge_modes,
    "braid": cmd_braid,
    "drives": cmd_drives,
    "lindblad": cmd_lindblad,
    "chiral-center": cmd_chiral_center,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topochain",
        description="Topological zero-mode chain laboratory: band structure, "
                    "phase diagram, edge modes, order-dependent exchange, "
                    "drive synthesis, and open-system detection.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        cp = sub.add_parser(name)
        cp.add_argument("--config", default=None,
                        help="JSON config; defaults used when omitted")
        cp.add_argument("--out", default=None, help="output directory")
        cp.add_argument("--format", choices=("csv", "json"), default=None)
        cp.add_argument("--threads", type=int, default=1)
        cp.add_argument("--set", action="append", default=[],
                        metavar="KEY=VALUE",
                        help="dotted-path config override, repeatable")
        cp.add_argument("--seedless", action="store_true",
                        help="documents that every computation is "
                             "deterministic; no RNG exists to seed")
    return parser


def _resolve_out(cfg: dict, cli_out: str | None, command: str) -> str:
    explicit = cli_out or cfg["output"]["directory"]
    if explicit:
        out_dir = explicit
    else:
        base = os.environ.get("TOPOCHAIN_OUT", "topochain_out")
        out_dir = os.path.join(base, command)
    os.makedirs(out_dir, exist_ok=True)
    return out_dir


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config.load_config(args.config)
        for assignment in args.set:
            config.apply_override(cfg, assignment)
        if args.threads < 1:
            raise config.ConfigError("--threads must be >= 1")
    except config.ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2

    fmt = args.format or cfg["output"]["format"] or "csv"
    out_dir = _resolve_out(cfg, args.out, args.command)
    started = time.monotonic()
    try:
        files, warnings = _COMMANDS[args.command](cfg, out_dir, fmt,
                                                  args.threads)
    except config.ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2

    manifest = {
        "command": args.command,
        "config_sha256": config.config_hash(cfg),
        "version": __version__,
        "files": sorted(os.path.basename(f) for f in files),
        "wall_clock_s": round(time.monotonic() - started, 3),
        "units": {"t0_mhz": T0_MHZ},
        "warnings": warnings,
    }
    path = os.path.join(out_dir, "manifest.json")
    write_json(path, manifest)
    return 0


if __name__ == "__main__":
    sys.exit(main())
