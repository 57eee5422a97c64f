"""Standing-wave profile and N-transition layer initial data.

The increasing standing wave solves ``eps D(Phi) Phi' = sqrt(2 G(Phi))`` with
``Phi(0) = (alpha + beta)/2``, i.e. it is the inverse of

    x(Phi) = eps * int_{mid}^{Phi} D(s) / sqrt(2 G(s)) ds.

We tabulate ``x`` at nodes clustered geometrically towards both wells and
interpolate the log-distance to the approached well as a function of ``x``
with a monotone cubic Hermite spline (node slopes come from the ODE itself).
Outside the table the profile is continued by the decay law that matches the
well: exponential for non-degenerate wells, a power law when ``f'`` vanishes
at the well, and a linear approach to a finite contact point when ``D``
vanishes there.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import ConfigViolation, NonMonotone
from .fields import PhaseField
from .model import evaluate_potential
from .quadrature import adaptive_panels, gauss_legendre

DEFAULT_ETA = 1e-6  # relative to beta - alpha


def _fritsch_carlson(x, y, m):
    """Limit Hermite slopes so that the cubic stays monotone."""
    m = m.copy()
    delta = np.diff(y) / np.diff(x)
    for k, d in enumerate(delta):
        if d == 0.0:
            m[k] = m[k + 1] = 0.0
            continue
        a, b = m[k] / d, m[k + 1] / d
        if a < 0 or b < 0:
            raise NonMonotone("profile slope changes sign inside the table")
        s = a * a + b * b
        if s > 9.0:
            tau = 3.0 / math.sqrt(s)
            m[k], m[k + 1] = tau * a * d, tau * b * d
    return m


@dataclass(frozen=True)
class _Branch:
    """One half of the profile: log-distance to a well as a function of |x|."""

    xs: np.ndarray  # increasing |x|, starting at 0
    dist: np.ndarray  # distance to the well, decreasing
    spline: CubicHermiteSpline = field(repr=False)
    tail: str  # "exponential", "power" or "contact"
    c1: float = 0.0
    c2: float = 0.0
    power: float = 0.0
    contact: float = math.inf

    def distance(self, s):
        """Distance to the well at ``|x| = s`` (``s >= 0``)."""
        s = np.asarray(s, dtype=float)
        out = np.empty_like(s)
        inside = s <= self.xs[-1]
        out[inside] = np.exp(self.spline(s[inside]))
        far = s[~inside]
        if self.tail == "exponential":
            out[~inside] = self.c1 * np.exp(-self.c2 * far)
        elif self.tail == "power":
            out[~inside] = self.dist[-1] * (far / self.xs[-1]) ** self.power
        else:
            frac = (self.contact - far) / (self.contact - self.xs[-1])
            out[~inside] = self.dist[-1] * np.clip(frac, 0.0, 1.0)
        return out


@dataclass(frozen=True)
class StandingProfile:
    """Tabulated increasing standing wave ``Phi_eps`` of a material model.

    Attributes
    ----------
    x_nodes, phi_nodes : ndarray
        The quadrature table, strictly increasing in both columns.
    tail_alpha, tail_beta : tuple
        ``(c1, c2)`` of ``|Phi - well| <= c1 exp(-c2 |x|)`` beyond the table, or
        ``None`` when the well is degenerate.
    finite_support : tuple
        ``(x_minus, x_plus)``: the points where Phi reaches alpha / beta, or
        ``None`` on sides where it only gets there asymptotically.
    """

    model: object = field(repr=False)
    epsilon: float
    eta: float
    x_nodes: np.ndarray = field(repr=False)
    phi_nodes: np.ndarray = field(repr=False)
    left: _Branch = field(repr=False)
    right: _Branch = field(repr=False)

    @property
    def midpoint(self):
        return self.model.midpoint

    @property
    def tail_alpha(self):
        b = self.left
        return (b.c1, b.c2) if b.tail == "exponential" else None

    @property
    def tail_beta(self):
        b = self.right
        return (b.c1, b.c2) if b.tail == "exponential" else None

    @property
    def finite_support(self):
        lo = -self.left.contact if self.left.tail == "contact" else None
        hi = self.right.contact if self.right.tail == "contact" else None
        return (lo, hi)

    @property
    def finite_support_radius(self):
        lo, hi = self.finite_support
        if lo is None and hi is None:
            return None
        return {"alpha": None if lo is None else -lo, "beta": hi}

    def well_distance(self, x):
        """``beta - Phi(x)`` for ``x >= 0`` and ``Phi(x) - alpha`` for ``x < 0``.

        Computed directly from the tail representation, so it keeps full
        relative accuracy where ``Phi`` itself rounds to the well value.
        """
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        pos = x >= 0
        out[pos] = self.right.distance(x[pos])
        out[~pos] = self.left.distance(-x[~pos])
        return out

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        d = self.well_distance(x)
        out = np.where(x >= 0, self.model.beta - d, self.model.alpha + d)
        return np.where(x == 0, self.midpoint, out)

    def derivative(self, x):
        """``Phi'`` from the first-order equation ``eps D Phi' = sqrt(2G)``."""
        phi = self(x)
        G = np.maximum(evaluate_potential(self.model, phi), 0.0)
        D = self.model.D(phi)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.sqrt(2.0 * G) / (self.epsilon * D)
        return np.where(np.isfinite(out), out, 0.0)

    def inverse(self, phi):
        """``x(Phi)`` on the tabulated range (monotone interpolation)."""
        return np.interp(phi, self.phi_nodes, self.x_nodes)

    def to_csv(self, path):
        np.savetxt(path, np.column_stack([self.x_nodes, self.phi_nodes]),
                   delimiter=",", header="x,phi", comments="")


def _distance_nodes(half, eta, q=0.95, max_step=None):
    t = [half]
    while t[-1] * q > eta:
        nxt = t[-1] * q
        if max_step is not None and t[-1] - nxt > max_step:
            nxt = t[-1] - max_step
        t.append(nxt)
    t.append(eta)
    return np.array(t)


def build_standing_profile(model, epsilon, truncation_eta=None):
    """Tabulate and invert the implicit standing-wave quadrature.

    Parameters
    ----------
    model : MaterialModel
    epsilon : float
    truncation_eta : float, optional
        Distance to each well where the table stops; defaults to
        ``1e-6 * (beta - alpha)``.
    """
    if epsilon <= 0:
        raise ConfigViolation("epsilon must be positive")
    width = model.width
    eta = DEFAULT_ETA * width if truncation_eta is None else float(truncation_eta)
    half = 0.5 * width
    if not 0 < eta < 0.1 * half:
        raise ConfigViolation(f"truncation eta={eta} must satisfy 0 < eta << (beta-alpha)/2")
    t = _distance_nodes(half, eta, max_step=0.005 * width)

    def integrand(s):
        G = evaluate_potential(model, s)
        if np.any(G <= 0):
            raise NonMonotone("G <= 0 inside the wells; no monotone standing wave")
        return model.D(s) / np.sqrt(2.0 * G)

    branches = {}
    for side, well, sign in (("right", model.beta, -1.0), ("left", model.alpha, 1.0)):
        phi = well + sign * t  # phi[0] is the midpoint
        # phi = well -/+ t carries ~1e-16/t relative rounding near the wells
        panels = adaptive_panels(integrand, phi, rtol=1e-9, atol=0.0)
        xs = epsilon * np.abs(np.concatenate([[0.0], np.cumsum(panels)]))
        if np.any(np.diff(xs) <= 0):
            raise NonMonotone(f"{side} table is not strictly increasing")
        G = evaluate_potential(model, phi)
        slope = np.sqrt(2.0 * G) / (epsilon * model.D(phi))  # Phi'
        dlog = -slope / t  # d log(distance) / d|x|
        logd = np.log(t)
        m = _fritsch_carlson(xs, logd, dlog)
        spline = CubicHermiteSpline(xs, logd, m)

        if side == "right":
            d_zero = model.diffusivity_degenerate_at_beta
            f_zero = model.reaction_degenerate_at_beta
            g2 = float(model.df(np.array(well)) * model.D(np.array(well)))
        else:
            d_zero = model.diffusivity_degenerate_at_alpha
            f_zero = model.reaction_degenerate_at_alpha
            g2 = float(model.df(np.array(well)) * model.D(np.array(well)))
        if d_zero:
            rest = abs(float(gauss_legendre(integrand, well, phi[-1], 40)))
            branch = _Branch(xs, t, spline, "contact", contact=float(xs[-1] + epsilon * rest))
        elif f_zero:
            branch = _Branch(xs, t, spline, "power", power=float(dlog[-1] * xs[-1]))
        else:
            c2 = math.sqrt(g2) / (float(model.D(np.array(well))) * epsilon)
            c1 = float(t[-1] * math.exp(c2 * xs[-1]))
            branch = _Branch(xs, t, spline, "exponential", c1=c1, c2=c2)
        branches[side] = branch

    L, R = branches["left"], branches["right"]
    x_nodes = np.concatenate([-L.xs[:0:-1], R.xs])
    phi_nodes = np.concatenate([model.alpha + L.dist[:0:-1], model.beta - R.dist])
    phi_nodes[L.xs.size - 1] = model.midpoint
    return StandingProfile(model, float(epsilon), eta, x_nodes, phi_nodes, L, R)


def verify_first_order_ode(profile, model=None):
    """Max over table nodes of ``|eps D(Phi) Phi' - sqrt(2 G(Phi))|``.

    ``Phi'`` is taken by second-order centered differences on the
    (non-uniform) table, independent of the slopes used for interpolation.
    """
    model = profile.model if model is None else model
    x, phi = profile.x_nodes, profile.phi_nodes
    dphi = np.gradient(phi, x)
    G = np.maximum(evaluate_potential(model, phi), 0.0)
    res = np.abs(profile.epsilon * model.D(phi) * dphi - np.sqrt(2.0 * G))
    return float(np.max(res[1:-1]))


# --------------------------------------------------------------------------
# layer configurations and initial data
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LayerConfiguration:
    """Jump set of the step function ``v`` on ``[a, b]``.

    ``radius`` defaults to half the smallest gap, clipped to the distances
    from the outer jumps to the boundary.
    """

    positions: tuple
    a: float
    b: float
    start_phase: str = "alpha"
    radius: float = None

    def __post_init__(self):
        pos = tuple(float(h) for h in self.positions)
        object.__setattr__(self, "positions", pos)
        if self.start_phase not in ("alpha", "beta"):
            raise ConfigViolation(f"start_phase must be 'alpha' or 'beta', not {self.start_phase!r}")
        if not self.a < self.b:
            raise ConfigViolation("empty domain")
        h = np.asarray(pos)
        if h.size and (np.any(np.diff(h) <= 0) or h[0] <= self.a or h[-1] >= self.b):
            raise ConfigViolation(f"jumps {pos} must be strictly increasing inside ({self.a}, {self.b})")
        if self.radius is None:
            object.__setattr__(self, "radius", self._max_radius())
        r = float(self.radius)
        object.__setattr__(self, "radius", r)
        if h.size:
            if r <= 0:
                raise ConfigViolation("radius must be positive")
            if h.size > 1 and 2 * r > np.min(np.diff(h)) * (1 + 1e-12):
                raise ConfigViolation(f"radius {r} overlaps neighbouring jumps")
            if h[0] - r < self.a - 1e-12 or h[-1] + r > self.b + 1e-12:
                raise ConfigViolation(f"radius {r} reaches past the domain boundary")

    def _max_radius(self):
        h = np.asarray(self.positions)
        if h.size == 0:
            return 0.0
        cands = [h[0] - self.a, self.b - h[-1]]
        if h.size > 1:
            cands.append(0.5 * np.min(np.diff(h)))
        return float(min(cands))

    @property
    def N(self):
        return len(self.positions)

    @property
    def midpoints(self):
        h = np.asarray(self.positions)
        return np.concatenate([[self.a], 0.5 * (h[1:] + h[:-1]), [self.b]])

    def orientations(self):
        """+1 where ``v`` jumps alpha -> beta, -1 for beta -> alpha."""
        first = 1 if self.start_phase == "alpha" else -1
        return np.array([first * (-1) ** j for j in range(self.N)])

    def step_values(self, model, x):
        """Evaluate ``v`` (right-continuous at the jumps)."""
        x = np.asarray(x, dtype=float)
        k = np.searchsorted(np.asarray(self.positions), x, side="right")
        start_alpha = self.start_phase == "alpha"
        at_alpha = (k % 2 == 0) == start_alpha
        return np.where(at_alpha, model.alpha, model.beta)

    def describe(self):
        return {"positions": list(self.positions), "a": self.a, "b": self.b,
                "start_phase": self.start_phase, "radius": self.radius}


def build_layer_datum(profile, layers, grid):
    """Paste alternately reflected copies of ``Phi_eps`` between midpoints."""
    if abs(grid.a - layers.a) > 1e-12 or abs(grid.b - layers.b) > 1e-12:
        raise ConfigViolation("grid and layer configuration span different domains")
    model = profile.model
    x = grid.x
    if layers.N == 0:
        value = model.alpha if layers.start_phase == "alpha" else model.beta
        return PhaseField(grid, np.full_like(x, value))
    m = layers.midpoints
    piece = np.clip(np.searchsorted(m, x, side="right") - 1, 0, layers.N - 1)
    h = np.asarray(layers.positions)[piece]
    sgn = layers.orientations()[piece]
    return PhaseField(grid, profile(sgn * (x - h)))
