"""Run artifacts on disk: CSV series, JSON reports and binary checkpoints.

Per run directory:

=====================  =======================================================
``config.yaml``        config echo (re-running it reproduces the CSVs exactly)
``snapshots.csv``      header ``t`` then the node coordinates; one row per snapshot
``diagnostics.csv``    ``t, energy, gradient_energy, dissipation, min_u, max_u,
                       n_layers, layer_1..layer_N``
``trajectories.csv``   ``t, layer_1..layer_N``; vanished layers are ``nan``
``events.json``        list of collapse events
``energy.json``        initial energy report, datum energy, audit, certification
``summary.json``       run summary including expectation checks
``checkpoint.bin``     final state (see :func:`save_checkpoint`)
=====================  =======================================================
"""
import json
import math
import os
import struct

import numpy as np

from ..errors import IOFailure
from ..fields import Grid, PhaseField
from ..solver import RunRecord
from .config import ExperimentConfig

CHECKPOINT_VERSION = 1
_HEADER = struct.Struct("<BddI")  # version, a, b, M
_FMT = "%.17g"


def _ensure_dir(path):
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise IOFailure(f"cannot create output directory {path!r}: {exc}") from None
    if not os.access(path, os.W_OK):
        raise IOFailure(f"output directory {path!r} is not writable")


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serializable: {type(obj).__name__}")


def clean_json(obj):
    """Replace non-finite floats by None so the JSON stays standard."""
    if isinstance(obj, dict):
        return {k: clean_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean_json(v) for v in obj]
    if isinstance(obj, (float, np.floating)) and not math.isfinite(obj):
        return None
    return obj


def write_json(obj, path):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(clean_json(obj), fh, indent=2, default=_json_default)
            fh.write("\n")
    except OSError as exc:
        raise IOFailure(f"cannot write {path!r}: {exc}") from None


def write_text(text, path):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise IOFailure(f"cannot write {path!r}: {exc}") from None


def _savetxt(path, table, header):
    try:
        np.savetxt(path, table, delimiter=",", header=",".join(header), comments="", fmt=_FMT)
    except OSError as exc:
        raise IOFailure(f"cannot write {path!r}: {exc}") from None


# --------------------------------------------------------------------------
# checkpoints
# --------------------------------------------------------------------------

def save_checkpoint(u, t, path):
    """Binary state: version byte, ``(a, b, M)``, then ``u`` and ``t`` as LE float64."""
    g = u.grid
    payload = (_HEADER.pack(CHECKPOINT_VERSION, g.a, g.b, g.M)
               + np.asarray(u.values, dtype="<f8").tobytes()
               + struct.pack("<d", float(t)))
    try:
        with open(path, "wb") as fh:
            fh.write(payload)
    except OSError as exc:
        raise IOFailure(f"cannot write checkpoint {path!r}: {exc}") from None


def load_checkpoint(path):
    """Inverse of :func:`save_checkpoint`; returns ``(PhaseField, t)``."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IOFailure(f"cannot read checkpoint {path!r}: {exc}") from None
    if len(data) < _HEADER.size:
        raise IOFailure("checkpoint truncated")
    version, a, b, M = _HEADER.unpack_from(data)
    if version != CHECKPOINT_VERSION:
        raise IOFailure(f"unsupported checkpoint version {version}")
    expected = _HEADER.size + 8 * (M + 2)
    if len(data) != expected:
        raise IOFailure(f"checkpoint has {len(data)} bytes, expected {expected}")
    u = np.frombuffer(data, dtype="<f8", count=M + 1, offset=_HEADER.size).astype(float)
    (t,) = struct.unpack_from("<d", data, _HEADER.size + 8 * (M + 1))
    return PhaseField(Grid(a, b, M), u), t


# --------------------------------------------------------------------------
# run outputs
# --------------------------------------------------------------------------

def trajectory_table(result):
    tr = result.tracks
    return np.column_stack([tr.times, tr.positions])


def write_outputs(result, out):
    """Write all artifacts of an :class:`ExperimentRecord` into ``out``."""
    _ensure_dir(out)
    rec = result.record
    x = rec.grid.x
    _savetxt(os.path.join(out, "snapshots.csv"),
             np.column_stack([rec.times, rec.fields]),
             ["t"] + [_FMT % v for v in x])

    n0 = int(rec.counts[0])
    if result.tracks is not None:
        layer_cols = result.tracks.positions
    else:
        layer_cols = np.full((rec.times.size, n0), np.nan)
    diag = np.column_stack([rec.times, rec.energies, rec.gradient_energies, rec.dissipation,
                            rec.min_u, rec.max_u, rec.counts, layer_cols])
    head = ["t", "energy", "gradient_energy", "dissipation", "min_u", "max_u", "n_layers"]
    _savetxt(os.path.join(out, "diagnostics.csv"), diag,
             head + [f"layer_{k + 1}" for k in range(layer_cols.shape[1])])

    if result.tracks is not None:
        _savetxt(os.path.join(out, "trajectories.csv"), trajectory_table(result),
                 ["t"] + [f"layer_{k + 1}" for k in range(result.tracks.N0)])
        events = [e.to_dict() for e in result.tracks.events]
    else:
        events = []
    write_json(events, os.path.join(out, "events.json"))
    write_json({
        "epsilon": result.epsilon,
        "initial": result.initial_energy.to_dict() if result.initial_energy else None,
        "datum_energy": result.datum_energy,
        "datum_deficit": result.datum_deficit,
        "dissipation_audit": result.audit,
        "certification": result.certification.to_dict() if result.certification else None,
    }, os.path.join(out, "energy.json"))
    echo = result.config.to_dict()
    echo.update(epsilon=result.epsilon, epsilons=[])
    write_text(ExperimentConfig.from_dict(echo).to_yaml(), os.path.join(out, "config.yaml"))
    summary = result.summary()
    summary["solver"] = rec.config
    write_json(summary, os.path.join(out, "summary.json"))
    save_checkpoint(rec.final, rec.times[-1], os.path.join(out, "checkpoint.bin"))
    return out


def write_sweep(sweep, out):
    _ensure_dir(out)
    s = sweep.summary()
    write_json({"name": s["name"], "samples": s["samples"], "fit": s["fit"]},
               os.path.join(out, "sweep_fit.json"))
    write_text(sweep.config.to_yaml(), os.path.join(out, "config.yaml"))
    return out


def load_record(out):
    """Rebuild a :class:`RunRecord` from ``snapshots.csv`` and ``diagnostics.csv``."""
    snap_path = os.path.join(out, "snapshots.csv")
    diag_path = os.path.join(out, "diagnostics.csv")
    try:
        with open(snap_path, encoding="utf-8") as fh:
            header = fh.readline().strip().split(",")
        snaps = np.loadtxt(snap_path, delimiter=",", skiprows=1, ndmin=2)
        diag = np.loadtxt(diag_path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise IOFailure(f"cannot read run outputs in {out!r}: {exc}") from None
    x = np.array([float(v) for v in header[1:]])
    grid = Grid(float(x[0]), float(x[-1]), x.size - 1)
    return RunRecord(
        grid=grid,
        epsilon=None,
        times=snaps[:, 0],
        fields=snaps[:, 1:],
        energies=diag[:, 1],
        gradient_energies=diag[:, 2],
        dissipation=diag[:, 3],
        min_u=diag[:, 4],
        max_u=diag[:, 5],
        counts=diag[:, 6].astype(int),
        global_min=float(diag[:, 4].min()),
        global_max=float(diag[:, 5].max()),
    )
