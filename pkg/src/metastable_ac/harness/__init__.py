"""Experiment harness: configs, presets, sweeps, artifacts and the CLI."""
from .config import ExperimentConfig, load_config, save_config
from .io import load_checkpoint, load_record, save_checkpoint, write_outputs
from .plots import emit_plots
from .presets import PRESETS, SWEEPS, preset_config, preset_names
from .runner import ExperimentRecord, SweepResult, execute, run_preset, run_sweep

__all__ = [
    "ExperimentConfig", "load_config", "save_config",
    "load_checkpoint", "save_checkpoint", "load_record", "write_outputs",
    "emit_plots", "PRESETS", "SWEEPS", "preset_config", "preset_names",
    "ExperimentRecord", "SweepResult", "execute", "run_preset", "run_sweep",
]
