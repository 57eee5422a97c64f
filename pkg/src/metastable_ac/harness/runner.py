"""Execute experiment configs: single runs, presets and epsilon sweeps."""
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..energy import certify_layer_structure, dissipation_audit, energy, layer_datum_energy
from ..errors import ConfigViolation, InsufficientData
from ..fields import Grid
from ..interfaces import interface_of, lifetime_scaling_fit, track_layers
from ..model import model_from_spec
from ..profile import LayerConfiguration, build_layer_datum, build_standing_profile
from ..solver import MAX_PRINCIPLE_TOL, SolverConfig, run
from .config import ExperimentConfig
from .presets import preset_config

log = logging.getLogger(__name__)


@dataclass
class ExperimentRecord:
    """Everything one run produced: the solver record plus its analysis."""

    config: ExperimentConfig
    epsilon: float
    model: object = field(repr=False)
    layers: LayerConfiguration = field(repr=False)
    record: object = field(repr=False)
    tracks: object = field(default=None, repr=False)
    initial_energy: object = None
    datum_energy: float = None
    datum_deficit: float = None
    audit: float = None
    certification: object = None
    initial_interface_error: float = None
    max_principle: dict = None
    checks: dict = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def first_collapse(self):
        """First snapshot time with fewer midlevel crossings than at t = 0."""
        counts = self.record.counts
        drop = np.nonzero(counts < counts[0])[0]
        return float(self.record.times[drop[0]]) if drop.size else None

    @property
    def final_count(self):
        return int(self.record.counts[-1])

    @property
    def passed(self):
        return all(c["ok"] for c in self.checks.values())

    def summary(self):
        rec = self.record
        return {
            "name": self.config.name,
            "epsilon": self.epsilon,
            "model": self.model.describe(),
            "grid": rec.grid.describe(),
            "layers": self.layers.describe(),
            "t_final": float(rec.times[-1]),
            "steps": int(rec.steps),
            "snapshots": int(rec.times.size),
            "stopped_early": bool(rec.stopped_early),
            "initial_count": int(rec.counts[0]),
            "final_count": self.final_count,
            "first_collapse": self.first_collapse,
            "events": [e.to_dict() for e in self.tracks.events] if self.tracks else [],
            "exit_time": self.tracks.exit_time if self.tracks else None,
            "initial_energy": self.initial_energy.to_dict() if self.initial_energy else None,
            "datum_energy": self.datum_energy,
            "datum_deficit": self.datum_deficit,
            "dissipation_audit": self.audit,
            "certification": self.certification.to_dict() if self.certification else None,
            "initial_interface_error": self.initial_interface_error,
            "max_principle": self.max_principle,
            "checks": self.checks,
            "passed": self.passed,
            "wall_time": self.wall_time,
        }


def build_problem(config, epsilon):
    """Model, layer configuration, grid, initial datum and solver config."""
    model = model_from_spec(config.model)
    a, b = config.domain
    lay = config.layers
    layers = LayerConfiguration(tuple(lay["positions"]), a, b,
                                start_phase=lay.get("start_phase", "alpha"),
                                radius=lay.get("radius"))
    solver = dict(config.solver)
    h_factor = float(solver.pop("h_factor", 10))
    grid = Grid.with_spacing(a, b, epsilon / h_factor)
    if "snapshot_times" in solver:
        solver["snapshot_times"] = tuple(solver["snapshot_times"])
    try:
        scfg = SolverConfig(epsilon=epsilon, a=a, b=b, M=grid.M, **solver)
    except TypeError as exc:
        raise ConfigViolation(str(exc)) from None
    profile = build_standing_profile(model, epsilon)
    u0 = build_layer_datum(profile, layers, grid)
    return model, layers, profile, u0, scfg


def _evaluate_expectations(result):
    exp = result.config.expect
    rec = result.record
    checks = {}
    first = result.first_collapse
    if "persist_until" in exp:
        T = exp["persist_until"]
        upto = rec.times <= T * (1 + 1e-12)
        reached = rec.times[-1] >= T * (1 - 1e-12)
        ok = bool(reached and np.all(rec.counts[upto] == rec.counts[0]))
        checks["persist_until"] = {"ok": ok, "target": T, "first_collapse": first,
                                   "t_final": float(rec.times[-1])}
    if "collapse_window" in exp:
        lo, hi = exp["collapse_window"]
        ok = first is not None and lo <= first <= hi
        checks["collapse_window"] = {"ok": bool(ok), "window": [lo, hi], "first_collapse": first}
    if "collapse_before" in exp:
        T = exp["collapse_before"]
        checks["collapse_before"] = {"ok": bool(first is not None and first <= T),
                                     "target": T, "first_collapse": first}
    if "final_count" in exp:
        checks["final_count"] = {"ok": result.final_count == exp["final_count"],
                                 "target": exp["final_count"], "final_count": result.final_count}
    if exp.get("max_principle"):
        checks["max_principle"] = {"ok": bool(result.max_principle["ok"]), **result.max_principle}
    if exp.get("no_exponential_verdict"):
        checks["no_exponential_verdict"] = {
            "ok": bool(result.model.degenerate),
            "reason": "lambda unavailable for a degenerate model",
        }
    return checks


def execute(config, epsilon=None, hooks=()):
    """Run one experiment at ``epsilon`` (default: ``config.epsilon``)."""
    eps = float(epsilon if epsilon is not None else config.epsilon_list[0])
    t0 = time.perf_counter()
    model, layers, profile, u0, scfg = build_problem(config, eps)
    log.info("%s: eps=%g, M=%d, scheme=%s, t_max=%g", config.name, eps, scfg.M,
             scfg.scheme, scfg.t_max)
    rec = run(u0, model, scfg, hooks=hooks)
    an = {**{"audit": True, "certify": True, "track": True}, **config.analysis}

    result = ExperimentRecord(config, eps, model, layers, rec)
    result.initial_energy = energy(u0, model, eps, N=layers.N)
    if layers.N:
        result.datum_energy, result.datum_deficit = layer_datum_energy(profile, layers)
        pos0 = interface_of(u0, model, an.get("K")).positions
        if pos0.size == layers.N:
            result.initial_interface_error = float(np.max(np.abs(pos0 - np.asarray(layers.positions))))
    if an["audit"] and scfg.record_energy:
        result.audit = dissipation_audit(rec)
    if an["certify"] and layers.N and not model.degenerate:
        A = an.get("A") or 0.5 * model.constants.a_ceiling(layers.radius)
        delta = an.get("tolerance_delta") or 0.25 * layers.N * layers.radius * model.width
        result.certification = certify_layer_structure(u0, model, eps, layers, delta, A,
                                                       an.get("C", 1.0))
    if an["track"]:
        result.tracks = track_layers(rec, model, an.get("K"), an.get("delta1"))
    lo, hi = model.alpha - MAX_PRINCIPLE_TOL, model.beta + MAX_PRINCIPLE_TOL
    result.max_principle = {"min_u": rec.global_min, "max_u": rec.global_max,
                            "ok": bool(rec.global_min >= lo and rec.global_max <= hi)}
    result.checks = _evaluate_expectations(result)
    result.wall_time = time.perf_counter() - t0
    return result


def run_preset(name, out=None, full=False, t_max=None, write=True):
    """Execute a named preset and (by default) write its artifacts."""
    from .io import write_outputs

    cfg = preset_config(name, full=full)
    if t_max is not None:
        cfg = cfg.with_overrides(t_max=t_max)
    result = execute(cfg)
    if write and out is not None:
        write_outputs(result, out)
    return result


# --------------------------------------------------------------------------
# sweeps
# --------------------------------------------------------------------------

@dataclass
class SweepResult:
    config: ExperimentConfig
    results: list
    fit: object = None
    error: str = None

    @property
    def samples(self):
        return [(r.epsilon, r.first_collapse) for r in self.results]

    def summary(self):
        return {
            "name": self.config.name,
            "samples": [{"epsilon": e, "t_collapse": t} for e, t in self.samples],
            "fit": self.fit.to_dict() if self.fit else None,
            "error": self.error,
            "runs": [r.summary() for r in self.results],
        }


def _execute_one(args):
    cfg_dict, eps = args
    return execute(ExperimentConfig.from_dict(cfg_dict), eps)


def run_sweep(config, jobs=None, out=None):
    """Run every epsilon of ``config`` (concurrently when ``jobs != 1``) and fit.

    Raises :class:`InsufficientData` for fewer than two epsilon values or
    fewer than two observed collapses.
    """
    from .io import write_outputs, write_sweep

    eps = config.epsilon_list
    if len(set(eps)) < 2:
        raise InsufficientData("a sweep needs at least two distinct epsilon values")
    tasks = [(config.to_dict(), e) for e in eps]
    if jobs == 1:
        results = [_execute_one(t) for t in tasks]
    else:
        workers = min(len(tasks), jobs or os.cpu_count() or 1)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_execute_one, tasks))
    first = results[0]
    sweep = SweepResult(config, results)
    sweep.fit = lifetime_scaling_fit(sweep.samples, first.model, first.layers)
    if out is not None:
        for r in results:
            write_outputs(r, os.path.join(out, f"eps_{r.epsilon:g}"))
        write_sweep(sweep, out)
    return sweep

