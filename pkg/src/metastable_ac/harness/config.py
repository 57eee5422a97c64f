"""Experiment configuration files.

A config is a YAML mapping::

    name: fig1-classical
    model: {builtin: classical}          # or explicit families, see README
    domain: [-4.0, 4.0]
    layers: {positions: [-3.4, -2.0, -0.5, 0.8, 2.2, 3.2], start_phase: alpha}
    epsilon: 0.1                         # single run
    epsilons: [0.08, 0.1, 0.125]         # sweep (used by `sweep`)
    solver: {scheme: imex, t_max: 30000.0, h_factor: 10}
    analysis: {audit: true, certify: true, track: true}
    expect: {persist_until: 1.0e4, collapse_window: [1.0e4, 3.0e4], final_count: 4}
    output: runs/fig1
    seed: 0

``h_factor`` fixes the grid through ``h <= eps / h_factor``; every other
``solver`` key is a :class:`~metastable_ac.solver.SolverConfig` field.
"""
import math
from dataclasses import dataclass, field, fields

import yaml

from ..errors import ConfigViolation
from ..model import BUILTIN_MODELS
from ..solver import SolverConfig

_RUN_KEYS = {"epsilon", "a", "b", "M"}
SOLVER_KEYS = {f.name for f in fields(SolverConfig)} - _RUN_KEYS | {"h_factor"}
ANALYSIS_KEYS = {"audit", "certify", "track", "K", "delta1", "A", "C", "tolerance_delta"}
EXPECT_KEYS = {"persist_until", "collapse_window", "collapse_before", "final_count",
               "max_principle", "no_exponential_verdict"}
DEFAULT_ANALYSIS = {"audit": True, "certify": True, "track": True}


def _plain(obj):
    """Tuples to lists, numpy scalars to floats, recursively."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return obj.item()
    return obj


@dataclass
class ExperimentConfig:
    name: str
    model: dict
    domain: tuple = (-4.0, 4.0)
    layers: dict = field(default_factory=dict)
    epsilon: float = None
    epsilons: tuple = ()
    solver: dict = field(default_factory=dict)
    analysis: dict = field(default_factory=lambda: dict(DEFAULT_ANALYSIS))
    expect: dict = field(default_factory=dict)
    output: str = None
    seed: int = 0  # reserved; runs are deterministic

    def __post_init__(self):
        self.model = _plain(dict(self.model))
        self.domain = tuple(float(v) for v in self.domain)
        self.layers = _plain(dict(self.layers))
        self.epsilons = tuple(float(e) for e in self.epsilons)
        self.solver = _plain(dict(self.solver))
        self.analysis = _plain(dict(self.analysis))
        self.expect = _plain(dict(self.expect))
        if self.epsilon is not None:
            self.epsilon = float(self.epsilon)
        self.validate()

    def validate(self):
        if "builtin" in self.model and self.model["builtin"] not in BUILTIN_MODELS:
            raise ConfigViolation(f"unknown built-in model {self.model['builtin']!r}")
        if "builtin" not in self.model and not {"diffusivity", "reaction"} <= set(self.model):
            raise ConfigViolation("model needs 'builtin' or both 'diffusivity' and 'reaction'")
        if len(self.domain) != 2 or not self.domain[0] < self.domain[1]:
            raise ConfigViolation(f"domain must be [a, b] with a < b, got {list(self.domain)}")
        if "positions" not in self.layers:
            raise ConfigViolation("layers.positions is required")
        eps = ([self.epsilon] if self.epsilon is not None else []) + list(self.epsilons)
        if not eps:
            raise ConfigViolation("give epsilon or epsilons")
        if any(not (e > 0 and math.isfinite(e)) for e in eps):
            raise ConfigViolation(f"epsilon values must be positive, got {eps}")
        for section, allowed in (("solver", SOLVER_KEYS), ("analysis", ANALYSIS_KEYS),
                                 ("expect", EXPECT_KEYS)):
            extra = set(getattr(self, section)) - allowed
            if extra:
                raise ConfigViolation(f"unknown {section} keys: {sorted(extra)}")
        if "t_max" not in self.solver:
            raise ConfigViolation("solver.t_max is required")

    @property
    def epsilon_list(self):
        return list(self.epsilons) if self.epsilons else [self.epsilon]

    def with_overrides(self, epsilon=None, epsilons=None, t_max=None, output=None):
        d = self.to_dict()
        if epsilon is not None:
            d["epsilon"] = float(epsilon)
        if epsilons:
            d["epsilons"] = [float(e) for e in epsilons]
        if t_max is not None:
            d["solver"]["t_max"] = float(t_max)
        if output is not None:
            d["output"] = str(output)
        return ExperimentConfig.from_dict(d)

    def to_dict(self):
        return {
            "name": self.name,
            "model": _plain(self.model),
            "domain": list(self.domain),
            "layers": _plain(self.layers),
            "epsilon": self.epsilon,
            "epsilons": list(self.epsilons),
            "solver": _plain(self.solver),
            "analysis": _plain(self.analysis),
            "expect": _plain(self.expect),
            "output": self.output,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ConfigViolation("config must be a mapping")
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ConfigViolation(f"unknown config keys: {sorted(extra)}")
        if "name" not in d or "model" not in d:
            raise ConfigViolation("config needs 'name' and 'model'")
        return cls(**d)

    def to_yaml(self):
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    @classmethod
    def from_yaml(cls, text):
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigViolation(f"malformed YAML: {exc}") from None
        return cls.from_dict(data)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return ExperimentConfig.from_yaml(fh.read())


def save_config(config, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(config.to_yaml())
