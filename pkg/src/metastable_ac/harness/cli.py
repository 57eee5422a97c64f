"""Command line front end: ``metastable-ac {run,preset,sweep,analyze,plot}``.

Successful commands print a JSON summary on stdout and exit with 0; failures
print ``{"error": <kind>, "message": ...}`` on stderr and exit with 1 (2 for
usage errors).  A run that completes but misses one of its ``expect`` checks
(or a sweep with a FAIL verdict) exits with 3.
"""
import argparse
import json
import logging
import os
import sys

from ..errors import ConfigViolation, MetastabilityError
from ..energy import dissipation_audit
from ..interfaces import track_layers
from ..model import model_from_spec
from .config import load_config
from .io import clean_json, load_record, write_json, write_outputs
from .plots import emit_plots
from .presets import preset_config, preset_names
from .runner import execute, run_preset, run_sweep


def _print(obj):
    print(json.dumps(clean_json(obj), indent=2, default=str))


def _config_from_args(args):
    if getattr(args, "config", None):
        cfg = load_config(args.config)
    elif getattr(args, "preset", None):
        cfg = preset_config(args.preset, full=getattr(args, "full", False))
    else:
        raise ConfigViolation("give --config or --preset")
    return cfg


def _out(args, cfg):
    return args.out or cfg.output or os.path.join("runs", cfg.name)


def cmd_run(args):
    cfg = _config_from_args(args)
    if args.eps and len(args.eps) > 1:
        raise ConfigViolation("run takes a single --eps; use sweep for several")
    cfg = cfg.with_overrides(epsilon=args.eps[0] if args.eps else None, t_max=args.tmax_override)
    result = execute(cfg)
    out = _out(args, cfg)
    write_outputs(result, out)
    emit_plots(result, out)
    summary = result.summary()
    summary["out"] = out
    _print(summary)
    return 0 if result.passed else 3


def cmd_preset(args):
    name = args.name or args.preset
    if not name:
        raise ConfigViolation(f"give a preset name: {', '.join(preset_names())}")
    out = args.out or os.path.join("runs", name)
    result = run_preset(name, out=out, full=args.full, t_max=args.tmax_override)
    emit_plots(result, out)
    summary = result.summary()
    summary["out"] = out
    summary["full"] = bool(args.full)
    _print(summary)
    return 0 if result.passed else 3


def cmd_sweep(args):
    cfg = _config_from_args(args)
    cfg = cfg.with_overrides(epsilons=args.eps or None, t_max=args.tmax_override)
    out = _out(args, cfg)
    sweep = run_sweep(cfg, jobs=args.jobs, out=out)
    emit_plots(sweep, out)
    s = sweep.summary()
    _print({"name": s["name"], "samples": s["samples"], "fit": s["fit"], "out": out})
    return 0 if sweep.fit.verdict == "PASS" else 3


def cmd_analyze(args):
    cfg = load_config(os.path.join(args.out, "config.yaml"))
    model = model_from_spec(cfg.model)
    rec = load_record(args.out)
    tracks = track_layers(rec, model, cfg.analysis.get("K"), args.delta1 or cfg.analysis.get("delta1"))
    events = [e.to_dict() for e in tracks.events]
    write_json(events, os.path.join(args.out, "events.json"))
    report = {
        "name": cfg.name,
        "snapshots": int(rec.times.size),
        "t_final": float(rec.times[-1]),
        "initial_count": int(rec.counts[0]),
        "final_count": int(rec.counts[-1]),
        "events": events,
        "exit_time": tracks.exit_time,
        "delta1": tracks.delta1,
        "dissipation_audit": dissipation_audit(rec),
        "min_u": rec.global_min,
        "max_u": rec.global_max,
    }
    _print(report)
    return 0


def cmd_plot(args):
    paths = emit_plots(args.out)
    _print({"scripts": paths})
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="metastable-ac",
                                description="Metastable layer dynamics for Allen-Cahn type equations")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one experiment from a config file")
    r.add_argument("--config", help="YAML experiment config")
    r.add_argument("--preset", help="start from a preset's config")
    r.add_argument("--eps", type=float, action="append", help="override epsilon")
    r.add_argument("--tmax-override", type=float, help="override the horizon")
    r.add_argument("--out", help="output directory")
    r.add_argument("--full", action="store_true", help="full horizon for --preset (slow)")
    r.set_defaults(func=cmd_run)

    pr = sub.add_parser("preset", help="run a named preset: " + ", ".join(preset_names()))
    pr.add_argument("name", nargs="?")
    pr.add_argument("--preset", help="preset name (alternative to the positional)")
    pr.add_argument("--out")
    pr.add_argument("--full", action="store_true", help="use the full horizon (slow)")
    pr.add_argument("--tmax-override", type=float)
    pr.set_defaults(func=cmd_preset)

    s = sub.add_parser("sweep", help="epsilon sweep with lifetime scaling fit")
    s.add_argument("--config")
    s.add_argument("--preset")
    s.add_argument("--eps", type=float, action="append", help="epsilon value (repeatable)")
    s.add_argument("--jobs", type=int, default=None, help="worker processes (default: CPUs)")
    s.add_argument("--tmax-override", type=float)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep, full=False)

    a = sub.add_parser("analyze", help="re-analyse a run directory")
    a.add_argument("--out", required=True, help="run directory")
    a.add_argument("--delta1", type=float, help="interface exit threshold")
    a.set_defaults(func=cmd_analyze)

    pl = sub.add_parser("plot", help="write plot scripts for a run or sweep directory")
    pl.add_argument("--out", required=True)
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (MetastabilityError, OSError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(err), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
