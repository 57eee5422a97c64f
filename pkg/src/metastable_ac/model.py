"""Diffusivity / reaction pairs, their effective potential and derived constants.

A material model is the pair ``(D, f)`` of the equation

    u_t = eps^2 (D(u) u_x)_x - f(u)

together with the two stable zeros ``alpha < beta`` of ``f``.  Everything
else in the package consumes the effective double-well potential
``G(u) = int_alpha^u f(s) D(s) ds`` and the two constants

    lambda = min(f'(alpha)/D(alpha), f'(beta)/D(beta))
    gamma0 = int_alpha^beta sqrt(2 G(s)) D(s) ds
"""
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import (
    BalanceViolation,
    ConfigViolation,
    DegenerateModel,
    ModelError,
    NotBistable,
    SignViolation,
)
from .quadrature import adaptive_simpson, gauss_legendre

BALANCE_RTOL = 1e-8
G_TABLE_ATOL = 1e-10
G_ORDER = 40
_ZERO_RTOL = 1e-12


# --------------------------------------------------------------------------
# profile families
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantDiffusivity:
    D0: float = 1.0
    family = "constant"

    def __call__(self, u):
        return np.full_like(np.asarray(u, dtype=float), self.D0)

    def derivative(self, u):
        return np.zeros_like(np.asarray(u, dtype=float))

    def primitive(self, u):
        return self.D0 * np.asarray(u, dtype=float)

    def params(self):
        return {"D0": self.D0}


@dataclass(frozen=True)
class MullinsDiffusivity:
    """``D(u) = D0 / (1 + u^2)`` (thermal grooving)."""

    D0: float = 1.0
    family = "mullins"

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        return self.D0 / (1.0 + u * u)

    def derivative(self, u):
        u = np.asarray(u, dtype=float)
        return -2.0 * self.D0 * u / (1.0 + u * u) ** 2

    def primitive(self, u):
        return self.D0 * np.arctan(np.asarray(u, dtype=float))

    def params(self):
        return {"D0": self.D0}


@dataclass(frozen=True)
class ExponentialDiffusivity:
    """``D(u) = D0 exp(c0 (u - center))``; ``center`` is the Matano level."""

    D0: float = 1.0
    c0: float = 1.0
    center: float = 0.0
    family = "exponential"

    def __call__(self, u):
        return self.D0 * np.exp(self.c0 * (np.asarray(u, dtype=float) - self.center))

    def derivative(self, u):
        return self.c0 * self(u)

    def primitive(self, u):
        if self.c0 == 0:
            return self.D0 * np.asarray(u, dtype=float)
        return self(u) / self.c0

    def params(self):
        return {"D0": self.D0, "c0": self.c0, "center": self.center}


@dataclass(frozen=True)
class PorousDiffusivity:
    """Porous-medium type ``D(u) = D0 (u - anchor)^power`` (integer power)."""

    D0: float = 1.0
    power: int = 2
    anchor: float = 0.0
    family = "porous"

    def __call__(self, u):
        return self.D0 * (np.asarray(u, dtype=float) - self.anchor) ** self.power

    def derivative(self, u):
        if self.power == 0:
            return np.zeros_like(np.asarray(u, dtype=float))
        z = np.asarray(u, dtype=float) - self.anchor
        return self.D0 * self.power * z ** (self.power - 1)

    def primitive(self, u):
        z = np.asarray(u, dtype=float) - self.anchor
        return self.D0 * z ** (self.power + 1) / (self.power + 1)

    def params(self):
        return {"D0": self.D0, "power": self.power, "anchor": self.anchor}


def _ipow(v, p):
    """``v ** p`` for a small non-negative integer ``p`` by repeated products."""
    if p == 0:
        return np.ones_like(v)
    out = v
    for _ in range(p - 1):
        out = out * v
    return out


@dataclass(frozen=True)
class PolynomialReaction:
    """``f(u) = scale * prod_k (u - roots[k]) ** powers[k]``.

    Values and derivatives are evaluated in product form so that
    high-multiplicity roots keep full relative accuracy next to the wells.
    """

    roots: tuple
    powers: tuple = None
    scale: float = 1.0
    family = "polynomial"

    def __post_init__(self):
        roots = tuple(float(r) for r in self.roots)
        powers = self.powers if self.powers is not None else (1,) * len(roots)
        powers = tuple(int(p) for p in powers)
        if len(powers) != len(roots) or any(p < 1 for p in powers):
            raise ConfigViolation("powers must be positive integers, one per root")
        object.__setattr__(self, "roots", roots)
        object.__setattr__(self, "powers", powers)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        out = self.scale
        for r, p in zip(self.roots, self.powers):
            out = out * _ipow(u - r, p)
        return out + np.zeros_like(u)

    def derivative(self, u):
        u = np.asarray(u, dtype=float)
        total = np.zeros_like(u)
        for k, (rk, pk) in enumerate(zip(self.roots, self.powers)):
            term = self.scale * pk * _ipow(u - rk, pk - 1)
            for j, (rj, pj) in enumerate(zip(self.roots, self.powers)):
                if j != k:
                    term = term * _ipow(u - rj, pj)
            total = total + term
        return total

    def params(self):
        return {"roots": list(self.roots), "powers": list(self.powers), "scale": self.scale}


class CallableProfile:
    """Wraps a user callable; derivatives by central differences."""

    family = "callable"

    def __init__(self, func, derivative=None, step=None):
        self.func = func
        self._derivative = derivative
        self.step = step

    def __call__(self, u):
        return np.asarray(self.func(np.asarray(u, dtype=float)), dtype=float)

    def derivative(self, u):
        if self._derivative is not None:
            return np.asarray(self._derivative(np.asarray(u, dtype=float)), dtype=float)
        if self.step is None:
            raise ModelError("central-difference step not set; build through build_model")
        u = np.asarray(u, dtype=float)
        return (self(u + self.step) - self(u - self.step)) / (2.0 * self.step)

    def params(self):
        return {"callable": getattr(self.func, "__name__", repr(self.func))}


DIFFUSIVITY_FAMILIES = {
    "constant": ConstantDiffusivity,
    "mullins": MullinsDiffusivity,
    "exponential": ExponentialDiffusivity,
    "porous": PorousDiffusivity,
}
REACTION_FAMILIES = {
    "polynomial": PolynomialReaction,
    "custom-polynomial-reaction": PolynomialReaction,
}


def exponential_balanced_ustar():
    """Unstable zero making ``(u - u*)(u^2 - 1)`` balanced against ``D = e^u``."""
    return (math.e ** 2 - 7.0) / 2.0


def _diffusivity_from_spec(spec):
    if callable(spec) and not isinstance(spec, dict):
        return spec if hasattr(spec, "derivative") else CallableProfile(spec)
    spec = dict(spec)
    family = spec.pop("family", None)
    if family not in DIFFUSIVITY_FAMILIES:
        raise ConfigViolation(f"unknown diffusivity family {family!r}")
    return DIFFUSIVITY_FAMILIES[family](**spec)


def _reaction_from_spec(spec):
    if callable(spec) and not isinstance(spec, dict):
        return spec if hasattr(spec, "derivative") else CallableProfile(spec)
    spec = dict(spec)
    family = spec.pop("family", "polynomial")
    if family not in REACTION_FAMILIES:
        raise ConfigViolation(f"unknown reaction family {family!r}")
    if spec.get("u_star") is not None:
        # cubic shorthand (u - u_star)(u - lo)(u - hi)
        u_star = spec.pop("u_star")
        if u_star == "exponential-balanced":
            u_star = exponential_balanced_ustar()
        lo, hi = spec.pop("wells", (-1.0, 1.0))
        spec["roots"] = (lo, float(u_star), hi)
    spec.pop("u_star", None)
    return REACTION_FAMILIES[family](**spec)


# --------------------------------------------------------------------------
# model
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MaterialModel:
    """Validated ``(D, f)`` pair with wells ``alpha < beta``.

    Construct through :func:`build_model`, which runs every structural check.
    """

    diffusivity: object
    reaction: object
    alpha: float
    beta: float
    d_min: float
    diffusivity_degenerate_at_alpha: bool = False
    diffusivity_degenerate_at_beta: bool = False
    reaction_degenerate_at_alpha: bool = False
    reaction_degenerate_at_beta: bool = False
    name: str = "custom"
    balance_residual: float = field(default=0.0, compare=False)

    def D(self, u):
        return self.diffusivity(u)

    def dD(self, u):
        return self.diffusivity.derivative(u)

    def f(self, u):
        return self.reaction(u)

    def df(self, u):
        return self.reaction.derivative(u)

    def fD(self, u):
        return self.reaction(u) * self.diffusivity(u)

    def Psi(self, u):
        """A primitive of ``D`` (Kirchhoff transform): ``(D(u) u_x)_x = Psi(u)_xx``."""
        prim = getattr(self.diffusivity, "primitive", None)
        if prim is not None:
            return prim(u)
        return self._tabulated_primitive(np.asarray(u, dtype=float))

    @cached_property
    def _tabulated_primitive(self):
        # Hermite spline with exact slopes D; Gauss-Legendre increments per cell
        lo, hi = self.clamp_interval
        nodes = np.linspace(lo, hi, 2001)
        inc = gauss_legendre(self.diffusivity, nodes[:-1], nodes[1:], n=8)
        vals = np.concatenate([[0.0], np.cumsum(inc)])
        return CubicHermiteSpline(nodes, vals, self.D(nodes), extrapolate=True)

    @property
    def midpoint(self):
        return 0.5 * (self.alpha + self.beta)

    @property
    def width(self):
        return self.beta - self.alpha

    @property
    def clamp_interval(self):
        w = self.width
        return (self.alpha - 0.5 * w, self.beta + 0.5 * w)

    @property
    def degenerate(self):
        return self.diffusivity_degenerate or self.reaction_degenerate

    @property
    def diffusivity_degenerate(self):
        return self.diffusivity_degenerate_at_alpha or self.diffusivity_degenerate_at_beta

    @property
    def reaction_degenerate(self):
        return self.reaction_degenerate_at_alpha or self.reaction_degenerate_at_beta

    @cached_property
    def potential(self):
        return effective_potential(self)

    @cached_property
    def constants(self):
        lam = None if self.degenerate else compute_lambda(self)
        return ModelConstants(lambda_=lam, gamma0=compute_gamma0(self))

    def max_diffusivity(self, n=2001):
        u = np.linspace(self.alpha, self.beta, n)
        return float(np.max(self.D(u)))

    def max_reaction_slope(self, n=2001):
        u = np.linspace(self.alpha, self.beta, n)
        return float(np.max(np.abs(self.df(u))))

    def describe(self):
        return {
            "name": self.name,
            "diffusivity": {"family": self.diffusivity.family, **self.diffusivity.params()},
            "reaction": {"family": self.reaction.family, **self.reaction.params()},
            "alpha": self.alpha,
            "beta": self.beta,
            "degenerate": {
                "diffusivity_alpha": self.diffusivity_degenerate_at_alpha,
                "diffusivity_beta": self.diffusivity_degenerate_at_beta,
                "reaction_alpha": self.reaction_degenerate_at_alpha,
                "reaction_beta": self.reaction_degenerate_at_beta,
            },
        }


def _flag_set(degenerate):
    if degenerate is None:
        return set()
    if isinstance(degenerate, dict):
        return {k for k, v in degenerate.items() if v}
    return set(degenerate)


_FLAG_NAMES = {"diffusivity_alpha", "diffusivity_beta", "reaction_alpha", "reaction_beta"}


def build_model(diffusivity_spec, reaction_spec, alpha=None, beta=None,
                degenerate=None, name="custom"):
    """Build and validate a :class:`MaterialModel`.

    Parameters
    ----------
    diffusivity_spec, reaction_spec : dict or callable
        Either ``{"family": ..., **coefficients}`` naming a built-in family,
        or a profile object / plain callable.
    alpha, beta : float, optional
        Wells.  Default to the smallest and largest root of a polynomial
        reaction.
    degenerate : iterable or dict, optional
        Declared degeneracies, any of ``diffusivity_alpha``,
        ``diffusivity_beta``, ``reaction_alpha``, ``reaction_beta``.

    Raises
    ------
    NotBistable, DegenerateModel, BalanceViolation, SignViolation
    """
    D = _diffusivity_from_spec(diffusivity_spec)
    f = _reaction_from_spec(reaction_spec)
    if alpha is None or beta is None:
        if not isinstance(f, PolynomialReaction):
            raise ConfigViolation("alpha and beta are required for non-polynomial reactions")
        alpha = min(f.roots) if alpha is None else alpha
        beta = max(f.roots) if beta is None else beta
    alpha, beta = float(alpha), float(beta)
    if not alpha < beta:
        raise ConfigViolation(f"need alpha < beta, got {alpha}, {beta}")
    declared = _flag_set(degenerate)
    unknown = declared - _FLAG_NAMES
    if unknown:
        raise ConfigViolation(f"unknown degeneracy flags {sorted(unknown)}")

    step = 1e-6 * (beta - alpha)
    for prof in (D, f):
        if isinstance(prof, CallableProfile) and prof.step is None:
            prof.step = step

    u = np.linspace(alpha, beta, 4001)
    Dv = D(u)
    fv = f(u)
    d_scale = float(np.max(np.abs(Dv)))
    f_scale = float(np.max(np.abs(fv)))
    if not (np.all(np.isfinite(Dv)) and np.all(np.isfinite(fv))):
        raise ModelError("diffusivity or reaction not finite on [alpha, beta]")
    if f_scale == 0.0:
        raise NotBistable("reaction vanishes identically on [alpha, beta]")

    for well, value in (("alpha", fv[0]), ("beta", fv[-1])):
        if abs(value) > 1e-10 * f_scale:
            raise NotBistable(f"f({well}) = {value:.3e} is not zero")

    detected = set()
    for well, dval in (("alpha", Dv[0]), ("beta", Dv[-1])):
        if abs(dval) <= _ZERO_RTOL * d_scale:
            detected.add(f"diffusivity_{well}")
    slope_scale = max(f_scale / (beta - alpha), 1e-300)
    for well, x in (("alpha", alpha), ("beta", beta)):
        s = float(f.derivative(np.array(x)))
        if abs(s) <= 1e-8 * slope_scale:
            detected.add(f"reaction_{well}")
        elif s < 0:
            raise NotBistable(f"f'({well}) = {s:.3e} < 0: not a stable zero")

    missing = detected - declared
    if any(k.startswith("reaction") for k in missing):
        raise NotBistable(f"undeclared degenerate reaction at {sorted(missing)}")
    if missing:
        raise DegenerateModel(f"undeclared degenerate diffusivity at {sorted(missing)}")
    spurious = declared - detected
    if spurious:
        raise ConfigViolation(f"declared degeneracy not present: {sorted(spurious)}")

    interior = Dv[1:-1]
    if np.any(interior <= 0.0):
        raise DegenerateModel("diffusivity is not positive inside (alpha, beta)")
    d_min = 0.0 if detected & {"diffusivity_alpha", "diffusivity_beta"} else float(np.min(Dv))

    fD = lambda s: f(s) * D(s)
    mass, _ = adaptive_simpson(lambda s: abs(fD(s)), alpha, beta, atol=1e-12 * f_scale * d_scale)
    residual, _ = adaptive_simpson(fD, alpha, beta, atol=1e-3 * BALANCE_RTOL * mass)
    if abs(residual) > BALANCE_RTOL * mass:
        raise BalanceViolation(
            f"int_alpha^beta f D = {residual:.3e} exceeds {BALANCE_RTOL:g} * {mass:.3e}"
        )

    model = MaterialModel(
        diffusivity=D,
        reaction=f,
        alpha=alpha,
        beta=beta,
        d_min=d_min,
        diffusivity_degenerate_at_alpha="diffusivity_alpha" in detected,
        diffusivity_degenerate_at_beta="diffusivity_beta" in detected,
        reaction_degenerate_at_alpha="reaction_alpha" in detected,
        reaction_degenerate_at_beta="reaction_beta" in detected,
        name=name,
        balance_residual=float(residual),
    )
    w = beta - alpha
    probe = np.linspace(alpha + 1e-3 * w, beta - 1e-3 * w, 999)
    G = evaluate_potential(model, probe)
    if np.any(G <= 0.0):
        bad = probe[np.argmin(G)]
        raise SignViolation(f"G({bad:.6g}) = {G.min():.3e} <= 0 inside the wells")
    return model


# --------------------------------------------------------------------------
# effective potential
# --------------------------------------------------------------------------

def evaluate_potential(model, u, order=G_ORDER):
    """``G(u)``, integrated from the nearer well for relative accuracy.

    Under the balance condition both one-sided integrals agree; anchoring at
    the nearer well keeps ``G ~ (u - well)^2`` accurate down to tiny offsets,
    which the profile tails and energy deficits rely on.
    """
    u = np.asarray(u, dtype=float)
    left = u <= model.midpoint
    anchor = np.where(left, model.alpha, model.beta)
    return gauss_legendre(model.fD, anchor, u, order)


@dataclass(frozen=True)
class EffectivePotential:
    """Tabulated ``G`` on ``[alpha, beta]`` plus well curvatures.

    Calling the object evaluates ``G`` anywhere (vectorized); the table is
    the cumulative adaptive-quadrature record kept for inspection/export.
    """

    model: MaterialModel = field(repr=False)
    nodes: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    g2_alpha: float
    g2_beta: float
    tolerance: float
    endpoint_residual: float

    def __call__(self, u):
        return evaluate_potential(self.model, u)

    def derivative(self, u):
        return self.model.fD(u)


def effective_potential(model, n_nodes=201, tol=G_TABLE_ATOL):
    """Tabulate ``G`` by cumulative adaptive Simpson quadrature.

    Each node is accumulated from the nearer well; ``endpoint_residual`` is
    the full ``alpha -> beta`` sum, i.e. the balance residual seen by the
    table.

    Raises
    ------
    QuadratureFailure
        If any panel misses ``tol`` or ``|G(beta)|`` exceeds the accumulated
        tolerance (the balance condition seen through the table).
    """
    nodes = np.linspace(model.alpha, model.beta, n_nodes)
    panels = np.empty(n_nodes - 1)
    err = 0.0
    fD = lambda s: float(model.fD(s))
    for k in range(n_nodes - 1):
        panels[k], e = adaptive_simpson(fD, nodes[k], nodes[k + 1], atol=tol)
        err += e
    forward = np.concatenate([[0.0], np.cumsum(panels)])
    backward = -np.concatenate([np.cumsum(panels[::-1])[::-1], [0.0]])
    endpoint = float(forward[-1])
    # anchor each node at the nearer well, as evaluate_potential does
    values = np.where(nodes <= model.midpoint, forward, backward)
    g2 = lambda x: float(model.df(np.array(x)) * model.D(np.array(x)))
    return EffectivePotential(
        model=model,
        nodes=nodes,
        values=values,
        g2_alpha=g2(model.alpha),
        g2_beta=g2(model.beta),
        tolerance=tol,
        endpoint_residual=endpoint,
    )


# --------------------------------------------------------------------------
# constants
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelConstants:
    lambda_: float
    gamma0: float

    def a_ceiling(self, r):
        """Upper end ``r sqrt(2 lambda)`` of the admissible exponents ``A``."""
        if self.lambda_ is None:
            raise DegenerateModel("lambda unavailable for a degenerate model")
        return r * math.sqrt(2.0 * self.lambda_)


def compute_lambda(model):
    a, b = np.array(model.alpha), np.array(model.beta)
    fa, fb = float(model.df(a)), float(model.df(b))
    Da, Db = float(model.D(a)), float(model.D(b))
    if model.degenerate or min(fa, fb, Da, Db) <= 0.0:
        raise DegenerateModel(
            f"lambda needs f' > 0 and D > 0 at both wells (f'={fa:.3g},{fb:.3g}; D={Da:.3g},{Db:.3g})"
        )
    return min(fa / Da, fb / Db)


def compute_gamma0(model, rtol=1e-12):
    """Energy of one transition layer, ``int sqrt(2G) D`` over the wells."""
    def integrand(s):
        g = float(evaluate_potential(model, np.array([s]))[0])
        return math.sqrt(2.0 * max(g, 0.0)) * float(model.D(s))

    value, _ = adaptive_simpson(integrand, model.alpha, model.beta, atol=1e-14, rtol=rtol)
    return value


# --------------------------------------------------------------------------
# built-ins
# --------------------------------------------------------------------------

BUILTIN_MODELS = {
    "classical": dict(
        diffusivity={"family": "constant", "D0": 1.0},
        reaction={"family": "polynomial", "roots": [-1.0, 0.0, 1.0]},
    ),
    "mullins": dict(
        diffusivity={"family": "mullins", "D0": 1.0},
        reaction={"family": "polynomial", "roots": [-1.0, 0.0, 1.0]},
    ),
    "exponential": dict(
        diffusivity={"family": "exponential", "D0": 1.0, "c0": 1.0, "center": 0.0},
        reaction={"family": "polynomial", "u_star": "exponential-balanced", "wells": [-1.0, 1.0]},
    ),
    "fdeg3": dict(
        diffusivity={"family": "mullins", "D0": 1.0},
        reaction={"family": "polynomial", "roots": [-1.0, 0.0, 1.0], "powers": [3, 1, 3]},
        degenerate=["reaction_alpha", "reaction_beta"],
    ),
    "fdeg5": dict(
        diffusivity={"family": "mullins", "D0": 1.0},
        reaction={"family": "polynomial", "roots": [-1.0, 0.0, 1.0], "powers": [5, 1, 5]},
        degenerate=["reaction_alpha", "reaction_beta"],
    ),
    "porous": dict(
        diffusivity={"family": "porous", "D0": 1.0, "power": 2, "anchor": 0.0},
        reaction={"family": "polynomial", "roots": [0.0, 2.0 / 3.0, 1.0]},
        degenerate=["diffusivity_alpha"],
    ),
}
NON_DEGENERATE_BUILTINS = ("classical", "mullins", "exponential")


def builtin_model(name):
    try:
        spec = BUILTIN_MODELS[name]
    except KeyError:
        raise ConfigViolation(f"unknown built-in model {name!r}") from None
    return model_from_spec({"name": name, **spec})


def model_from_spec(spec):
    """Build a model from a config mapping (``builtin`` or explicit families)."""
    spec = dict(spec)
    if "builtin" in spec:
        base = dict(BUILTIN_MODELS[spec["builtin"]]) if spec["builtin"] in BUILTIN_MODELS else None
        if base is None:
            raise ConfigViolation(f"unknown built-in model {spec['builtin']!r}")
        base.update({k: v for k, v in spec.items() if k != "builtin"})
        base.setdefault("name", spec["builtin"])
        spec = base
    return build_model(
        spec["diffusivity"],
        spec["reaction"],
        alpha=spec.get("alpha"),
        beta=spec.get("beta"),
        degenerate=spec.get("degenerate"),
        name=spec.get("name", "custom"),
    )
