"""Command-line surface.

Subcommands: groundstate, evolve, classify, verify, weights, report.
Exit codes: 0 success, 1 verification failure, 2 validation error,
3 numerical fault.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .classify import Symmetry, classify
from .errors import LabError, NumericalFaultError, ValidationError
from .evolution import EvolutionConfig, blowup_monitor, evolve
from .functionals import potential, report
from .grids import ComplexField, GridSpec, Mode, StatePair
from .groundstate import GroundStateConstants, solve_ground_state
from .operators import apply_multiplier
from .reporting import (
    make_manifest,
    parse_config,
    write_reports_jsonl,
    write_summary_csv,
)
from . import snapshots
from .weights import build_morawetz_weights, verify_weight_identities


def _load_config(args) -> dict:
    if args.config:
        return parse_config(Path(args.config).read_text())
    return {}


def _outdir(args, cfg) -> Path:
    out = args.out or cfg.get("output", {}).get("dir") or os.environ.get("THIRDHARMONIC_OUT") or "runs"
    p = Path(out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _grid_from(args, cfg) -> GridSpec:
    g = cfg.get("grid", {})
    mode = g.get("mode", "radial")
    points = int(args.grid or g.get("points", 1024))
    extent = float(args.extent or g.get("extent", 16.0))
    if mode == "radial":
        return GridSpec.radial(points, extent)
    if mode == "cart":
        return GridSpec.cartesian(points, extent)
    if mode == "cyl":
        points_z = int(g.get("points_z", points))
        extent_z = float(g.get("extent_z", extent))
        return GridSpec.cylindrical(points, points_z, extent, extent_z)
    raise ValidationError(f"unknown grid mode {mode!r}")


def _physics_from(args, cfg) -> tuple[float, float]:
    ph = cfg.get("physics", {})
    gamma = float(args.gamma or ph.get("gamma", 3.0))
    mu = float(args.mu or ph.get("mu", 3.0 * gamma))
    return gamma, mu


def _initial_state(args, cfg, grid: GridSpec, gamma: float, mu: float) -> StatePair:
    if args.seed_snapshot:
        return snapshots.read_state(Path(args.seed_snapshot))
    ini = cfg.get("initial", {})
    kind = ini.get("kind", "gaussian")
    if kind == "snapshot":
        return snapshots.read_state(Path(ini["path"]))
    if kind != "gaussian":
        raise ValidationError(f"unknown initial kind {kind!r}")
    amp_u = float(ini.get("amp_u", 1.0))
    amp_v = float(ini.get("amp_v", 0.5))
    width = float(ini.get("width", 1.0))
    phase_v = float(ini.get("phase_v", 0.0))
    scale = float(ini.get("scale", 1.0))
    r = grid.radius_field
    bump = np.exp(-(r**2) / width**2)
    u = ComplexField(grid, scale * amp_u * bump.astype(complex))
    v = ComplexField(grid, scale * amp_v * np.exp(1j * phase_v) * bump.astype(complex))
    return StatePair(u, v, gamma, mu, 0.0)


def cmd_groundstate(args) -> int:
    cfg = _load_config(args)
    out = _outdir(args, cfg)
    grid = _grid_from(args, cfg)
    gamma, mu = _physics_from(args, cfg)
    gcfg = cfg.get("groundstate", {})
    gs = solve_ground_state(
        gamma,
        grid,
        tol=float(gcfg.get("tol", 1e-8)),
        max_iter=int(gcfg.get("max_iter", 500)),
        method=gcfg.get("method", "petviashvili"),
    )
    paths = gs.save(out / "groundstate")
    c = gs.constants
    print(f"converged in {gs.iterations} iterations [{gs.branch} branch]")
    print(f"residuals: {gs.residual_1:.3e}, {gs.residual_2:.3e}")
    print("Pohozaev report:")
    print(f"  P   = {c.potential:.10f}")
    print(f"  E3g = {c.energy_3gamma:.10f}  (P/E - 1 = {c.potential / c.energy_3gamma - 1:.2e})")
    print(f"  M3g = {c.mass_3gamma:.10f}  (E/M - 1 = {c.energy_3gamma / c.mass_3gamma - 1:.2e})")
    print(f"  K/3 = {c.kinetic / 3:.10f}  (K/3P - 1 = {c.kinetic / (3 * c.potential) - 1:.2e})")
    print(f"  C_opt = {c.c_opt:.10e}")
    manifest = make_manifest(cfg, grid, gamma, mu, c.to_dict(), paths.values())
    (out / "manifest.json").write_text(manifest.to_json() + "\n")
    return 0


def cmd_evolve(args) -> int:
    cfg = _load_config(args)
    out = _outdir(args, cfg)
    grid = _grid_from(args, cfg)
    gamma, mu = _physics_from(args, cfg)
    state = _initial_state(args, cfg, grid, gamma, mu)
    ecfg = cfg.get("evolve", {})
    monitors = tuple(
        m.strip()
        for m in ecfg.get("monitors", "coercivity,l5,virial,local_mass").split(",")
        if m.strip()
    )
    config = EvolutionConfig(
        dt=float(args.dt or ecfg.get("dt", 1e-3)),
        t_end=float(args.t_end or ecfg.get("t_end", 1.0)),
        output_stride=int(ecfg.get("output_stride", 10)),
        adapt_enabled=ecfg.get("adapt", "true").lower() != "false",
        dt_floor=float(ecfg.get("dt_floor", 1e-7)),
        blowup_trigger=float(ecfg.get("blowup_trigger", 100.0)),
        epsilon=float(ecfg.get("epsilon", 0.25)),
        monitors=monitors,
        virial_R=float(ecfg["virial_r"]) if "virial_r" in ecfg else None,
        local_mass_R=float(ecfg["local_mass_r"]) if "local_mass_r" in ecfg else None,
        local_l103_R=float(ecfg["local_l103_r"]) if "local_l103_r" in ecfg else None,
    )
    record = evolve(state, config)
    outputs = [
        write_reports_jsonl(record, out / "reports.jsonl"),
        write_summary_csv(record, out / "summary.csv"),
    ]
    final = out / "final"
    snapshots.write_state(final, record.final_state)
    outputs.append(final.with_suffix(".u.crf1"))
    detector = blowup_monitor(record)
    print(f"termination: {record.termination.value} at t = {record.reports[-1].time:.6g}")
    print(f"mass drift {record.mass_drift():.3e}, energy drift {record.energy_drift():.3e}")
    if detector.fired:
        print(f"blow-up detector fired at t = {detector.fired_time:.6g}")
        if detector.blowup_time_estimate is not None:
            print(f"ODE-comparison blow-up time estimate: {detector.blowup_time_estimate:.6g}")
    manifest = make_manifest(cfg, grid, gamma, mu, None, outputs)
    (out / "manifest.json").write_text(manifest.to_json() + "\n")
    return 0


def cmd_classify(args) -> int:
    cfg = _load_config(args)
    out = _outdir(args, cfg)
    ccfg = cfg.get("classify", {})
    const_path = args.gs_constants or ccfg.get("constants")
    if not const_path:
        raise ValidationError("classify needs --gs-constants or [classify] constants = PATH")
    consts = GroundStateConstants.from_dict(json.loads(Path(const_path).read_text()))
    state_path = args.seed_snapshot or ccfg.get("state")
    if not state_path:
        raise ValidationError("classify needs --seed-snapshot or [classify] state = PATH")
    state = snapshots.read_state(Path(state_path))
    symmetry = Symmetry[ccfg.get("symmetry", "radial").upper()]
    verdict = classify(state, consts, symmetry)
    print(verdict.to_json())
    (out / "verdict.json").write_text(verdict.to_json() + "\n")
    return 0


def cmd_weights(args) -> int:
    cfg = _load_config(args)
    out = _outdir(args, cfg)
    wcfg = cfg.get("weights", {})
    R = float(wcfg.get("r", 4.0))
    sigma = float(wcfg.get("sigma", 0.1))
    grid = _grid_from(args, cfg)
    if grid.mode is not Mode.CART3D:
        grid = GridSpec.cartesian(int(args.grid or 64), float(args.extent or 4.0 * R))
    w = build_morawetz_weights(R, sigma, grid)
    rep = verify_weight_identities(w)
    written = w.export_tables(out / "weights")
    print(rep.to_json())
    (out / "weights_report.json").write_text(rep.to_json() + "\n")
    ok = (
        rep.laplacian_residual_rel <= 1e-3
        and rep.min_psi_minus_phi >= -1e-10
        and rep.c_psi_bound <= 2.0
    )
    print(f"weight identities: {'PASS' if ok else 'FAIL'} ({len(written)} tables written)")
    return 0 if ok else 1


def cmd_report(args) -> int:
    cfg = _load_config(args)
    out = _outdir(args, cfg)
    rows_path = Path(args.trajectory or (out / "reports.jsonl"))
    if not rows_path.exists():
        raise ValidationError(f"no trajectory log at {rows_path}")
    rows = [json.loads(line) for line in rows_path.read_text().splitlines() if line.strip()]
    if not rows:
        raise ValidationError(f"trajectory log {rows_path} is empty")
    selection = args.series or "all"
    names = [k for k in rows[0] if k != "time"] if selection == "all" else selection.split(",")
    unknown = [n for n in names if n not in rows[0]]
    if unknown:
        raise ValidationError(f"unknown series: {unknown}; available: {sorted(rows[0])}")
    plotdir = out / "plots"
    plotdir.mkdir(parents=True, exist_ok=True)
    for name in names:
        p = plotdir / f"{name}.txt"
        with p.open("w") as fh:
            fh.write(f"# t {name}\n")
            for row in rows:
                fh.write(f"{row['time']:.17g} {row[name]:.17g}\n")
        print(p)
    return 0


def _verify_identities(n_states: int = 200, seed: int = 0) -> list[tuple[str, bool, str]]:
    rng = np.random.default_rng(seed)
    grid = GridSpec.radial(32, 8.0)
    r = grid.radii
    worst = {"energy": 0.0, "pohozaev": 0.0, "action": 0.0, "chain": 0.0, "pos": 0.0}
    for _ in range(n_states):
        def rand_field():
            a, b = rng.normal(size=2)
            w = rng.uniform(0.5, 2.0)
            ph = rng.uniform(0, 2 * np.pi)
            return (a + 1j * b) * np.exp(1j * ph) * np.exp(-(r**2) / w**2)

        state = StatePair(
            ComplexField(grid, rand_field()),
            ComplexField(grid, rand_field()),
            rng.uniform(0.5, 5.0),
            rng.uniform(0.5, 5.0),
        )
        rep = report(state, omega=rng.uniform(-1, 1))
        scale = max(1.0, abs(rep.energy_mu))
        worst["energy"] = max(
            worst["energy"],
            abs(rep.energy_mu - (0.5 * (rep.kinetic + rep.mass_mu) - rep.potential)) / scale,
        )
        worst["pohozaev"] = max(
            worst["pohozaev"], abs(rep.pohozaev - (rep.kinetic - 3 * rep.potential)) / scale
        )
        worst["action"] = max(
            worst["action"],
            abs(rep.action_omega - (rep.energy_mu + 0.5 * rep.omega * rep.mass_3gamma)) / scale,
        )
        worst["chain"] = max(
            worst["chain"],
            abs(
                (rep.pohozaev + 0.5 * rep.kinetic)
                - (3 * rep.energy_mu - 1.5 * rep.mass_mu)
            )
            / scale,
        )
        p_abs = potential(
            StatePair(
                state.u.with_samples(np.abs(state.u.samples).astype(complex)),
                state.v.with_samples(np.abs(state.v.samples).astype(complex)),
                state.gamma,
                state.mu,
            )
        )
        worst["pos"] = max(worst["pos"], rep.potential - p_abs)
    checks = [
        ("E = (K + M_mu)/2 - P", worst["energy"] <= 1e-12, f"max rel dev {worst['energy']:.2e}"),
        ("G = K - 3P", worst["pohozaev"] <= 1e-12, f"max rel dev {worst['pohozaev']:.2e}"),
        ("S = E + (w/2) M_3g", worst["action"] <= 1e-12, f"max rel dev {worst['action']:.2e}"),
        ("G + K/2 = 3E - 3M_mu/2", worst["chain"] <= 1e-12, f"max rel dev {worst['chain']:.2e}"),
        ("P(u,v) <= P(|u|,|v|)", worst["pos"] <= 1e-12, f"max excess {worst['pos']:.2e}"),
    ]
    # unitary round trip
    f = ComplexField(grid, rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape))
    g2 = apply_multiplier(f, lambda k: np.ones_like(k[0]))
    rt = float(np.abs(g2.samples - f.samples).max() / np.abs(f.samples).max())
    checks.append(("transform round trip", rt <= 1e-12, f"max rel dev {rt:.2e}"))
    return checks


def cmd_verify(args) -> int:
    checks = _verify_identities()
    failed = 0
    for name, ok, detail in checks:
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        failed += 0 if ok else 1
    return 0 if failed == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thirdharmonic",
        description="numerical laboratory for the coupled cubic Schrodinger system",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed-snapshot", help="state base path (reads .u.crf1/.v.crf1/.json)")
    common.add_argument("--gamma", type=float)
    common.add_argument("--mu", type=float)
    common.add_argument("--grid", type=int, help="points per axis")
    common.add_argument("--extent", type=float, help="domain extent L")
    common.add_argument("--dt", type=float)
    common.add_argument("--t-end", type=float)
    sub.add_parser("groundstate", parents=[common]).set_defaults(func=cmd_groundstate)
    sub.add_parser("evolve", parents=[common]).set_defaults(func=cmd_evolve)
    pc = sub.add_parser("classify", parents=[common])
    pc.add_argument("--gs-constants", help="ground-state constants JSON record")
    pc.set_defaults(func=cmd_classify)
    sub.add_parser("verify", parents=[common]).set_defaults(func=cmd_verify)
    sub.add_parser("weights", parents=[common]).set_defaults(func=cmd_weights)
    pr = sub.add_parser("report", parents=[common])
    pr.add_argument("--trajectory", help="reports.jsonl path")
    pr.add_argument("--series", help="comma list of series names, or 'all'")
    pr.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except NumericalFaultError as exc:
        print(f"numerical fault: {exc}", file=sys.stderr)
        return 3
    except LabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
