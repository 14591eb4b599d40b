"""Run manifests, trajectory logs, plot-data emission, and config parsing.

The config format is flat key = value text with [sections], parsed with the
stdlib configparser.  Unknown sections or keys are rejected with a listing.
The only environment override is the output directory (THIRDHARMONIC_OUT).
"""

from __future__ import annotations

import configparser
import hashlib
import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__ as _version
from .errors import ValidationError
from .evolution import TrajectoryRecord
from .functionals import FunctionalReport, REPORT_FIELDS
from .grids import GridSpec

CONFIG_SCHEMA: dict[str, dict[str, str]] = {
    "grid": {
        "mode": "radial | cart | cyl",
        "points": "samples per axis (radial/cart) or rho axis (cyl)",
        "points_z": "z samples (cyl only)",
        "extent": "L (radial: [0,L]; cart: [-L,L)^3; cyl: rho extent)",
        "extent_z": "z half-width (cyl only)",
    },
    "physics": {"gamma": "coupling gamma > 0", "mu": "coupling mu > 0"},
    "initial": {
        "kind": "gaussian | snapshot",
        "amp_u": "u amplitude (gaussian)",
        "amp_v": "v amplitude (gaussian)",
        "width": "gaussian width",
        "phase_v": "constant phase of v (radians)",
        "path": "state base path (snapshot)",
        "scale": "overall scale factor",
    },
    "evolve": {
        "dt": "time step",
        "t_end": "horizon",
        "output_stride": "steps between reports",
        "adapt": "true | false",
        "dt_floor": "smallest allowed dt",
        "blowup_trigger": "K growth factor that fires the detector",
        "epsilon": "epsilon in the G + eps K monitor",
        "monitors": "comma list: virial,local_mass,l5,coercivity,local_l103",
        "virial_r": "virial weight scale R",
        "local_mass_r": "local-mass radius",
        "local_l103_r": "Morawetz average radius",
    },
    "groundstate": {
        "tol": "residual tolerance",
        "max_iter": "iteration cap",
        "method": "petviashvili | imaginary_time",
    },
    "classify": {
        "symmetry": "radial | cylindrical | none",
        "constants": "path to a ground-state constants JSON record",
        "state": "path to a state base (snapshot pair)",
    },
    "weights": {"r": "Morawetz scale R", "sigma": "transition width"},
    "output": {"dir": "output directory"},
}


def parse_config(text: str) -> dict[str, dict[str, str]]:
    """Parse and validate flat key = value config text."""
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ValidationError(f"config parse error: {exc}") from exc
    out: dict[str, dict[str, str]] = {}
    problems = []
    for section in parser.sections():
        if section not in CONFIG_SCHEMA:
            problems.append(f"unknown section [{section}]")
            continue
        out[section] = {}
        for key, value in parser.items(section):
            if key not in CONFIG_SCHEMA[section]:
                problems.append(f"unknown key {key!r} in [{section}]")
            else:
                out[section][key] = value
    if problems:
        raise ValidationError("invalid config: " + "; ".join(problems))
    if not out:
        raise ValidationError("empty config: nothing to do")
    return out


def canonical_config_text(cfg: dict[str, dict[str, str]]) -> str:
    buf = io.StringIO()
    for section in sorted(cfg):
        buf.write(f"[{section}]\n")
        for key in sorted(cfg[section]):
            buf.write(f"{key} = {cfg[section][key]}\n")
    return buf.getvalue()


def config_digest(cfg: dict[str, dict[str, str]]) -> str:
    return hashlib.sha256(canonical_config_text(cfg).encode()).hexdigest()


@dataclass(frozen=True)
class RunManifest:
    config_digest: str
    grid: dict
    gamma: float
    mu: float
    ground_state_constants: dict | None
    output_paths: list[str]
    tool_version: str = _version

    def to_json(self) -> str:
        return json.dumps(
            {
                "config_digest": self.config_digest,
                "grid": self.grid,
                "gamma": self.gamma,
                "mu": self.mu,
                "ground_state_constants": self.ground_state_constants,
                "output_paths": self.output_paths,
                "tool_version": self.tool_version,
            },
            indent=2,
        )


def make_manifest(cfg, grid: GridSpec, gamma: float, mu: float, gs_constants=None, outputs=()) -> RunManifest:
    return RunManifest(
        config_digest=config_digest(cfg),
        grid=grid.describe(),
        gamma=gamma,
        mu=mu,
        ground_state_constants=dict(gs_constants) if gs_constants else None,
        output_paths=[str(p) for p in outputs],
    )


# -- trajectory logs ------------------------------------------------------------


def write_reports_jsonl(record: TrajectoryRecord, path) -> Path:
    """One row-JSON record per report: time, functionals, enabled monitors."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(record.monitor_series)
    with path.open("w") as fh:
        for i, rep in enumerate(record.reports):
            row = {name: getattr(rep, name) for name in REPORT_FIELDS}
            for name in names:
                row[name] = record.monitor_series[name][i]
            fh.write(json.dumps(row) + "\n")
    return path


def write_summary_csv(record: TrajectoryRecord, path) -> Path:
    """Run summary: report rows plus the conserved-quantity drift columns."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    m0 = record.reports[0].mass_3gamma
    e0 = record.reports[0].energy_mu
    with path.open("w") as fh:
        fh.write(FunctionalReport.csv_header() + ",mass_3gamma_drift,energy_mu_drift\n")
        for rep in record.reports:
            drift_m = abs(rep.mass_3gamma - m0) / max(abs(m0), 1e-300)
            drift_e = abs(rep.energy_mu - e0) / max(1.0, abs(e0))
            fh.write(rep.to_row() + f",{drift_m:.17g},{drift_e:.17g}\n")
    return path


def emit_plot_data(record: TrajectoryRecord, selection, outdir) -> list[Path]:
    """Two-column (t, value) text files per selected series.

    selection is a series name, a list of names, or "all"; unknown names
    raise ValidationError.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    available = [f for f in REPORT_FIELDS if f != "time"] + list(record.monitor_series)
    if selection == "all":
        names = available
    elif isinstance(selection, str):
        names = [selection]
    else:
        names = list(selection)
    unknown = [n for n in names if n not in available]
    if unknown:
        raise ValidationError(f"unknown series: {unknown}; available: {available}")
    times = record.times
    written = []
    for name in names:
        vals = record.series(name)
        p = outdir / f"{name}.txt"
        with p.open("w") as fh:
            fh.write(f"# t {name}\n")
            for t, v in zip(times, vals):
                fh.write(f"{t:.17g} {v:.17g}\n")
        written.append(p)
    return written


def read_plot_data(path) -> tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(path, ndmin=2)
    if data.size == 0:
        return np.array([]), np.array([])
    return data[:, 0], data[:, 1]
