"""Self-contained matplotlib scripts that render a run directory.

The scripts only read the CSV/JSON artifacts next to them, so they can be
edited and re-run without this package installed.
"""
import json
import os
import warnings

import numpy as np

from ..errors import IOFailure
from .io import write_text

_SNAPSHOT_SCRIPT = '''"""Field snapshots of {name}."""
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))
TIMES = {times!r}

with open(os.path.join(HERE, "snapshots.csv")) as fh:
    x = np.array([float(v) for v in fh.readline().strip().split(",")[1:]])
data = np.loadtxt(os.path.join(HERE, "snapshots.csv"), delimiter=",", skiprows=1, ndmin=2)
t = data[:, 0]

fig, axes = plt.subplots(len(TIMES), 1, figsize=(6, 2.2 * len(TIMES)), sharex=True)
for ax, target in zip(np.atleast_1d(axes), TIMES):
    k = int(np.argmin(np.abs(t - target)))
    ax.plot(x, data[k, 1:], lw=1.2)
    ax.set_ylabel("u")
    ax.set_title(f"t = {{t[k]:.4g}}", fontsize=9)
np.atleast_1d(axes)[-1].set_xlabel("x")
fig.tight_layout()
fig.savefig(os.path.join(HERE, "snapshots.png"), dpi=150)
'''

_TRAJECTORY_SCRIPT = '''"""Layer trajectories of {name} (log time axis)."""
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))
data = np.loadtxt(os.path.join(HERE, "trajectories.csv"), delimiter=",", skiprows=1, ndmin=2)
t, pos = data[:, 0], data[:, 1:]
keep = t > 0

fig, ax = plt.subplots(figsize=(6, 4))
for j in range(pos.shape[1]):
    ax.semilogx(t[keep], pos[keep, j], lw=1.2)
ax.set_xlabel("t")
ax.set_ylabel("layer position")
fig.tight_layout()
fig.savefig(os.path.join(HERE, "trajectories.png"), dpi=150)
'''

_SCALING_SCRIPT = '''"""log t_collapse against 1/eps with the fitted line."""
import json
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))
with open(os.path.join(HERE, "sweep_fit.json")) as fh:
    fit = json.load(fh)["fit"]
inv = 1.0 / np.asarray(fit["epsilons"])
lt = np.log(np.asarray(fit["times"]))
grid = np.linspace(inv.min(), inv.max(), 50)

fig, ax = plt.subplots(figsize=(5, 4))
ax.plot(inv, lt, "o", label="collapse")
ax.plot(grid, fit["A_fit"] * grid + fit["intercept"], "-", label=f"A_fit = {{fit['A_fit']:.3g}}")
ax.plot(grid, fit["A_check"] * grid, "--", label="A_check / eps")
ax.set_xlabel("1/eps")
ax.set_ylabel("log t_collapse")
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(HERE, "scaling.png"), dpi=150)
'''


def snapshot_times(times):
    """Initial, intermediate and final times for the snapshot panel."""
    times = np.asarray(times, dtype=float)
    t_end = float(times[-1])
    early = times[times <= 2.0 * t_end / 3.0]
    picks = [0.0, float(early[-1]) if early.size else t_end, t_end]
    return sorted(set(picks))


def _write(script, out, name):
    path = os.path.join(out, name)
    write_text(script, path)
    return path


def emit_plots(target, out=None):
    """Write plot scripts for a run or sweep; returns the written paths.

    ``target`` is an experiment record, a sweep result, or a run directory
    written by :func:`~metastable_ac.harness.io.write_outputs`.  A record
    without snapshots yields no files and a warning.
    """
    if isinstance(target, (str, os.PathLike)):
        return _emit_for_dir(os.fspath(target))
    if out is None:
        raise IOFailure("emit_plots needs an output directory for in-memory results")
    if hasattr(target, "fit"):
        if target.fit is None:
            warnings.warn("sweep has no fit; no plot scripts written", stacklevel=2)
            return []
        return [_write(_SCALING_SCRIPT, out, "plot_scaling.py")]
    rec = target.record
    if rec is None or len(rec.times) == 0:
        warnings.warn("record has no snapshots; no plot scripts written", stacklevel=2)
        return []
    name = target.config.name
    paths = [_write(_SNAPSHOT_SCRIPT.format(name=name, times=snapshot_times(rec.times)), out,
                    "plot_snapshots.py")]
    if target.tracks is not None:
        paths.append(_write(_TRAJECTORY_SCRIPT.format(name=name), out, "plot_trajectories.py"))
    return paths


def _emit_for_dir(out):
    if os.path.exists(os.path.join(out, "sweep_fit.json")):
        return [_write(_SCALING_SCRIPT, out, "plot_scaling.py")]
    snap = os.path.join(out, "snapshots.csv")
    if not os.path.exists(snap):
        raise IOFailure(f"{out!r} holds neither run nor sweep outputs")
    t = np.loadtxt(snap, delimiter=",", skiprows=1, usecols=0, ndmin=1)
    if t.size == 0:
        warnings.warn("no snapshots; no plot scripts written", stacklevel=2)
        return []
    name = os.path.basename(os.path.normpath(out))
    summary = os.path.join(out, "summary.json")
    if os.path.exists(summary):
        with open(summary, encoding="utf-8") as fh:
            name = json.load(fh).get("name", name)
    paths = [_write(_SNAPSHOT_SCRIPT.format(name=name, times=snapshot_times(t)), out,
                    "plot_snapshots.py")]
    if os.path.exists(os.path.join(out, "trajectories.csv")):
        paths.append(_write(_TRAJECTORY_SCRIPT.format(name=name), out, "plot_trajectories.py"))
    return paths
