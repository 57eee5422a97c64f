"""Named experiments: the five benchmark models on the six-layer datum, plus sweeps.

All single-run presets use the domain ``[-4, 4]``, jumps at
``-3.4, -2, -0.5, 0.8, 2.2, 3.2`` and ``h = eps/10``.  Horizons above ``1e5``
are truncated to a desk-scale default; ``full=True`` restores them.
"""
from ..errors import UnknownPreset
from .config import ExperimentConfig

SIX_LAYERS = [-3.4, -2.0, -0.5, 0.8, 2.2, 3.2]
DOMAIN = [-4.0, 4.0]
H_FACTOR = 10
ANALYSIS = {"audit": True, "certify": True, "track": True}


def _preset(name, model, epsilon, t_max, expect, scheme="imex", full=None):
    return {
        "config": dict(
            name=name,
            model={"builtin": model},
            domain=DOMAIN,
            layers={"positions": SIX_LAYERS, "start_phase": "alpha"},
            epsilon=epsilon,
            solver={"scheme": scheme, "t_max": t_max, "h_factor": H_FACTOR},
            analysis=dict(ANALYSIS),
            expect=expect,
        ),
        "full": full,
    }


PRESETS = {
    "fig1-classical": _preset(
        "fig1-classical", "classical", 0.1, 3.0e4,
        {"persist_until": 1.0e4, "collapse_window": [1.0e4, 3.0e4], "final_count": 4,
         "max_principle": True},
    ),
    "fig2-mullins": _preset(
        "fig2-mullins", "mullins", 0.1, 1.0e5,
        {"persist_until": 1.0e5, "max_principle": True},
        full={"t_max": 2.0e6, "expect": {"persist_until": 1.0e6, "max_principle": True}},
    ),
    "fig3a-exp-eps01": _preset(
        "fig3a-exp-eps01", "exponential", 0.1, 5.0e3,
        {"collapse_before": 5.0e3, "max_principle": True},
    ),
    "fig3b-exp-eps005": _preset(
        "fig3b-exp-eps005", "exponential", 0.05, 5.0e4,
        {"persist_until": 5.0e4, "max_principle": True},
        full={"t_max": 2.0e5, "expect": {"persist_until": 5.0e4, "max_principle": True}},
    ),
    "fig4a-fdeg3": _preset(
        "fig4a-fdeg3", "fdeg3", 0.1, 5.0e3,
        {"collapse_window": [5.0e2, 5.0e3]},
    ),
    "fig4b-fdeg5": _preset(
        "fig4b-fdeg5", "fdeg5", 0.1, 5.0e3,
        {"collapse_window": [6.0e1, 6.0e3]},
    ),
    "fig5a-porous-eps01": _preset(
        "fig5a-porous-eps01", "porous", 0.1, 2.0e3,
        {"no_exponential_verdict": True}, scheme="explicit",
    ),
    "fig5b-porous-eps006": _preset(
        "fig5b-porous-eps006", "porous", 0.06, 2.0e3,
        {"no_exponential_verdict": True}, scheme="explicit",
    ),
}

SWEEPS = {
    # two close layers; the pair annihilates and the run stops there
    "sweep-classical-pair": dict(
        name="sweep-classical-pair",
        model={"builtin": "classical"},
        domain=[-2.0, 2.0],
        layers={"positions": [-0.4, 0.4], "start_phase": "alpha"},
        epsilons=[0.08, 0.1, 0.125],
        solver={"scheme": "imex", "t_max": 1.0e5, "h_factor": H_FACTOR, "stop_below_count": 2},
        analysis={"audit": False, "certify": False, "track": True},
    ),
    "sweep-fdeg3-pair": dict(
        name="sweep-fdeg3-pair",
        model={"builtin": "fdeg3"},
        domain=[-2.0, 2.0],
        layers={"positions": [-0.4, 0.4], "start_phase": "alpha"},
        epsilons=[0.08, 0.1, 0.125],
        solver={"scheme": "imex", "t_max": 1.0e5, "h_factor": H_FACTOR, "stop_below_count": 2},
        analysis={"audit": False, "certify": False, "track": True},
    ),
}


def preset_names():
    return sorted(PRESETS) + sorted(SWEEPS)


def preset_config(name, full=False):
    """The :class:`ExperimentConfig` of a named preset or sweep."""
    if name in SWEEPS:
        return ExperimentConfig.from_dict(dict(SWEEPS[name]))
    if name not in PRESETS:
        raise UnknownPreset(f"unknown preset {name!r}; choose from {', '.join(preset_names())}")
    entry = PRESETS[name]
    cfg = dict(entry["config"])
    if full and entry["full"]:
        cfg["solver"] = dict(cfg["solver"], t_max=entry["full"]["t_max"])
        cfg["expect"] = dict(entry["full"]["expect"])
    return ExperimentConfig.from_dict(cfg)
