"""Binary field snapshots (CRF1) and state-pair persistence.

CRF1 layout, 64-byte header followed by interleaved samples:

    bytes  0..3    magic "CRF1"
    byte   4       mode byte: 0 = Radial3D, 1 = Cart3D, 2 = Cyl3D
    bytes  5..7    zero padding
    bytes  8..31   three uint64 little-endian axis counts (unused axes 0)
    bytes 32..55   three float64 little-endian extents (unused axes 0)
    bytes 56..63   zero padding
    payload        row-major (re, im) float64 little-endian per sample

A state pair persists as <base>.u.crf1, <base>.v.crf1 plus <base>.json
holding gamma, mu, and time.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .grids import ComplexField, GridSpec, Mode, StatePair

MAGIC = b"CRF1"
_MODE_BYTE = {Mode.RADIAL3D: 0, Mode.CART3D: 1, Mode.CYL3D: 2}
_BYTE_MODE = {v: k for k, v in _MODE_BYTE.items()}


def _header(grid: GridSpec) -> bytes:
    counts = list(grid.points) + [0] * (3 - len(grid.points))
    extents = list(grid.extent) + [0.0] * (3 - len(grid.extent))
    return struct.pack(
        "<4sB3x3Q3d8x", MAGIC, _MODE_BYTE[grid.mode], *counts, *extents
    )


def _grid_from_header(header: bytes) -> GridSpec:
    magic, mode_byte, c0, c1, c2, e0, e1, e2 = struct.unpack("<4sB3x3Q3d8x", header)
    if magic != MAGIC:
        raise ValidationError(f"bad snapshot magic {magic!r}")
    if mode_byte not in _BYTE_MODE:
        raise ValidationError(f"unknown snapshot mode byte {mode_byte}")
    mode = _BYTE_MODE[mode_byte]
    if mode is Mode.RADIAL3D:
        return GridSpec(mode, (e0,), (c0,))
    if mode is Mode.CART3D:
        return GridSpec(mode, (e0,), (c0, c1, c2))
    return GridSpec(mode, (e0, e1), (c0, c1))


def write_field(path, f: ComplexField) -> Path:
    path = Path(path)
    payload = np.empty(f.grid.shape + (2,), dtype="<f8")
    payload[..., 0] = f.samples.real
    payload[..., 1] = f.samples.imag
    path.write_bytes(_header(f.grid) + payload.tobytes(order="C"))
    return path


def read_field(path) -> ComplexField:
    raw = Path(path).read_bytes()
    if len(raw) < 64:
        raise ValidationError(f"snapshot {path} is truncated")
    grid = _grid_from_header(raw[:64])
    expected = grid.cardinality * 16
    if len(raw) - 64 != expected:
        raise ValidationError(
            f"snapshot {path} payload is {len(raw) - 64} bytes, expected {expected}"
        )
    flat = np.frombuffer(raw, dtype="<f8", offset=64).reshape(grid.shape + (2,))
    return ComplexField(grid, flat[..., 0] + 1j * flat[..., 1])


def write_state(base, state: StatePair) -> dict:
    """Persist a state pair; returns the written paths."""
    base = Path(base)
    base.parent.mkdir(parents=True, exist_ok=True)
    paths = {
        "u": str(write_field(base.with_suffix(".u.crf1"), state.u)),
        "v": str(write_field(base.with_suffix(".v.crf1"), state.v)),
    }
    meta = {"gamma": state.gamma, "mu": state.mu, "time": state.time}
    meta_path = base.with_suffix(".json")
    meta_path.write_text(json.dumps(meta, indent=2) + "\n")
    paths["meta"] = str(meta_path)
    return paths


def read_state(base) -> StatePair:
    base = Path(base)
    meta = json.loads(base.with_suffix(".json").read_text())
    u = read_field(base.with_suffix(".u.crf1"))
    v = read_field(base.with_suffix(".v.crf1"))
    return StatePair(u, v, float(meta["gamma"]), float(meta["mu"]), float(meta.get("time", 0.0)))
