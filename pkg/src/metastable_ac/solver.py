"""Finite-difference time stepping for ``u_t = eps^2 (D(u) u_x)_x - f(u)``.

Space: the diffusion term is written as ``Psi(u)_xx`` with ``Psi' = D``
and discretized by the three-point Laplacian of the nodal ``Psi`` values, so
the face flux is ``Psi(u_{i+1}) - Psi(u_i)``, i.e. the face diffusivity is
the mean of ``D`` over the values spanned by the face.  Homogeneous Neumann
conditions come from mirrored ghost nodes.  This form is a gradient flow of
a lattice energy whose wells have exactly equal depth for balanced models,
so a standing layer does not acquire a spurious O(h^2) drift.

Time: forward Euler (``explicit``) or linearly implicit diffusion
(``imex``): ``Psi`` is linearized about the old level, with ``D`` frozen
there, and the reaction is explicit; one tridiagonal solve per step.
"""
import math
import time as _time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.linalg.lapack import dgtsv

from .energy import energy_parts
from .errors import BlowUp, ConfigViolation, StabilityViolation
from .fields import Grid, PhaseField

MAX_PRINCIPLE_TOL = 1e-8
IMEX_DT_FACTOR = 0.05  # dt_max = IMEX_DT_FACTOR / max|f'|
EXPLICIT_SAFETY = 0.5  # dt = EXPLICIT_SAFETY * h^2 / (2 eps^2 max D)


@dataclass(frozen=True)
class SolverConfig:
    epsilon: float
    a: float
    b: float
    M: int
    t_max: float
    scheme: str = "imex"
    dt: float = 1e-3
    adaptive: bool = True
    change_target: float = 1e-2
    growth: float = 1.1
    dt_max: float = None
    dt_min: float = 1e-8
    snapshot_start: float = 1.0
    snapshot_ratio: float = 1.1
    snapshot_times: tuple = ()
    snapshot_on_count_change: bool = True
    stop_below_count: int = None
    record_energy: bool = True
    resolution_rule: float = 8.0  # require h <= eps / resolution_rule

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ConfigViolation("epsilon must be positive")
        if self.scheme not in ("imex", "explicit"):
            raise ConfigViolation(f"unknown scheme {self.scheme!r}")
        if self.dt <= 0 or self.t_max < 0:
            raise ConfigViolation("dt must be positive and t_max non-negative")
        if self.snapshot_ratio <= 1.0 or self.snapshot_start <= 0:
            raise ConfigViolation("snapshot schedule must grow geometrically from t0 > 0")
        if self.grid.h > self.epsilon / self.resolution_rule * (1 + 1e-9):
            raise ConfigViolation(
                f"h = {self.grid.h:.4g} violates the layer resolution rule h <= eps/{self.resolution_rule:g}"
            )

    @property
    def grid(self):
        return Grid(self.a, self.b, self.M)

    def explicit_limit(self, model):
        return self.grid.h ** 2 / (2.0 * self.epsilon ** 2 * model.max_diffusivity())

    def resolved_dt_max(self, model):
        if self.dt_max is not None:
            return self.dt_max
        if self.scheme == "explicit":
            return EXPLICIT_SAFETY * self.explicit_limit(model)
        return IMEX_DT_FACTOR / model.max_reaction_slope()

    def validate(self, model):
        if self.scheme == "explicit" and self.resolved_dt_max(model) > self.explicit_limit(model):
            raise StabilityViolation(
                f"explicit dt_max {self.resolved_dt_max(model):.3g} exceeds "
                f"h^2/(2 eps^2 max D) = {self.explicit_limit(model):.3g}"
            )
        if self.scheme == "imex" and model.diffusivity_degenerate:
            raise ConfigViolation("degenerate diffusivities run with the explicit scheme only")

    def snapshot_schedule(self):
        ts = [0.0]
        t = self.snapshot_start
        while t < self.t_max:
            ts.append(t)
            t *= self.snapshot_ratio
        ts.extend(s for s in self.snapshot_times if 0 < s < self.t_max)
        ts.append(self.t_max)
        return np.unique(np.asarray(ts, dtype=float))

    def to_dict(self):
        d = asdict(self)
        d["snapshot_times"] = list(self.snapshot_times)
        return d


@dataclass
class SimulationState:
    u: PhaseField
    t: float = 0.0
    steps: int = 0
    dt: float = None
    min_u: float = math.inf
    max_u: float = -math.inf
    dissipation: float = 0.0
    energy: float = None

    def __post_init__(self):
        if self.min_u == math.inf:
            self.min_u = float(self.u.values.min())
            self.max_u = float(self.u.values.max())


def _imex_matrix(D, k):
    """Bands of ``I - k L diag(D)`` with ``L`` the Neumann Laplacian (times h^2)."""
    diag = 1.0 + 2.0 * k * D
    upper = -k * D[1:]
    upper[0] *= 2.0
    lower = -k * D[:-1]
    lower[-1] *= 2.0
    return lower, diag, upper


def neumann_laplacian(w, h):
    """Three-point second difference with mirrored ghost nodes."""
    d = np.diff(w)
    out = np.empty_like(w)
    out[1:-1] = d[1:] - d[:-1]
    out[0] = 2.0 * d[0]
    out[-1] = -2.0 * d[-1]
    return out / (h * h)


def diffusion_operator(u, model, h):
    """Discrete ``(D(u) u_x)_x = Psi(u)_xx`` on nodal values ``u``."""
    return neumann_laplacian(model.Psi(np.asarray(u, dtype=float)), h)


def discrete_pde_residual(u, model, epsilon, grid=None):
    """``max |eps^2 (D(u) u_x)_x - f(u)|`` under the solver's discretization."""
    if grid is None:
        grid, u = u.grid, u.values
    u = np.asarray(u, dtype=float)
    r = epsilon ** 2 * diffusion_operator(u, model, grid.h) - model.f(u)
    return float(np.max(np.abs(r)))


class _Stepper:
    def __init__(self, model, config, source=None):
        self.model = model
        self.config = config
        self.grid = config.grid
        self.h = self.grid.h
        self.x = self.grid.x
        self.w = self.grid.weights
        self.eps2 = config.epsilon ** 2
        self.source = source
        self.dt_max = config.resolved_dt_max(model)
        self.mid = model.midpoint

    def advance(self, u, t, dt):
        """One step of size ``dt``; returns ``(u_new, nodal D at old level)``."""
        model = self.model
        D = model.D(u)
        incr = dt * (self.eps2 * diffusion_operator(u, model, self.h) - model.f(u))
        if self.source is not None:
            incr = incr + dt * self.source(self.x, t)
        if self.config.scheme == "imex":
            lower, diag, upper = _imex_matrix(D, dt * self.eps2 / (self.h * self.h))
            _, _, _, incr, info = dgtsv(lower, diag, upper, incr, 1, 1, 1, 1)
            if info != 0:
                raise BlowUp(f"tridiagonal solve failed (info={info}) at t={t:.6g}")
        return u + incr, D

    def count(self, u):
        s = u > self.mid
        return int(np.count_nonzero(s[1:] != s[:-1]))


def step(state, model, config, source=None):
    """Advance ``state`` by one step of size ``state.dt`` (or ``config.dt``)."""
    config.validate(model)
    st = _Stepper(model, config, source)
    dt = state.dt if state.dt is not None else config.dt
    u = state.u.values
    new, D = st.advance(u, state.t, dt)
    if not np.all(np.isfinite(new)):
        raise BlowUp(f"non-finite values after step at t={state.t:.6g}")
    diss = float(np.dot(st.w, D * (new - u) ** 2)) / (dt * config.epsilon)
    return SimulationState(
        u=PhaseField(state.u.grid, new),
        t=state.t + dt,
        steps=state.steps + 1,
        dt=dt,
        min_u=min(state.min_u, float(new.min())),
        max_u=max(state.max_u, float(new.max())),
        dissipation=state.dissipation + diss,
    )


@dataclass
class RunRecord:
    """Snapshots and diagnostics of one integration."""

    grid: Grid
    epsilon: float
    times: np.ndarray = field(repr=False)
    fields: np.ndarray = field(repr=False)
    energies: np.ndarray = field(repr=False)
    gradient_energies: np.ndarray = field(repr=False)
    dissipation: np.ndarray = field(repr=False)
    min_u: np.ndarray = field(repr=False)
    max_u: np.ndarray = field(repr=False)
    counts: np.ndarray = field(repr=False)
    steps: int = 0
    stopped_early: bool = False
    wall_time: float = 0.0
    global_min: float = None
    global_max: float = None
    config: dict = field(default_factory=dict)

    @property
    def final(self):
        return PhaseField(self.grid, self.fields[-1])

    def field_at(self, k):
        return PhaseField(self.grid, self.fields[k])


def run(u0, model, config, hooks=(), source=None):
    """Integrate from ``u0`` up to ``config.t_max``.

    Snapshots are taken on the geometric schedule of ``config`` and, when
    ``snapshot_on_count_change`` is set, at every step where the number of
    midlevel crossings changes.  ``hooks`` are callables
    ``hook(state) -> bool`` evaluated at snapshots; returning True stops the
    run.  The step sequence depends only on the inputs.
    """
    config.validate(model)
    if u0.grid != config.grid:
        raise ConfigViolation("initial field is not on the configured grid")
    st = _Stepper(model, config, source)
    schedule = config.snapshot_schedule()
    eps = config.epsilon
    w = st.w

    u = u0.values.astype(float).copy()
    t = 0.0
    dt = min(config.dt, st.dt_max)
    steps = 0
    diss = 0.0
    gmin, gmax = float(u.min()), float(u.max())
    count = st.count(u)

    rec = {k: [] for k in ("t", "u", "E", "Eg", "diss", "min", "max", "count")}

    def snap():
        rec["t"].append(t)
        rec["u"].append(u.copy())
        if config.record_energy:
            g, p = energy_parts(u, st.grid, model, eps)
        else:
            g = p = math.nan
        rec["E"].append(g + p)
        rec["Eg"].append(g)
        rec["diss"].append(diss)
        rec["min"].append(gmin)
        rec["max"].append(gmax)
        rec["count"].append(count)

    def state():
        return SimulationState(PhaseField(st.grid, u.copy()), t, steps, dt, gmin, gmax, diss,
                               rec["E"][-1] if rec["E"] else None)

    wall = _time.perf_counter()
    snap()
    stopped = False
    k_next = 1
    while k_next < schedule.size:
        target = schedule[k_next]
        h_step = dt
        landing = t + h_step >= target * (1 - 1e-14)
        if landing:
            h_step = target - t
        new, D = st.advance(u, t, h_step)
        lo, hi = float(new.min()), float(new.max())
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise BlowUp(f"non-finite values at t={t:.6g} (dt={h_step:.3g})")
        du = new - u
        diss += float(np.dot(w, D * du * du)) / (h_step * eps)
        u = new
        t = target if landing else t + h_step
        steps += 1
        gmin = min(gmin, lo)
        gmax = max(gmax, hi)

        if config.adaptive and not landing:
            change = float(np.max(np.abs(du)))
            factor = config.growth if change == 0 else min(config.growth, max(0.5, config.change_target / change))
            dt = min(max(dt * factor, config.dt_min), st.dt_max)

        new_count = st.count(u)
        changed = new_count != count
        count = new_count
        if landing:
            k_next += 1
        if landing or (changed and config.snapshot_on_count_change):
            snap()
            if config.stop_below_count is not None and count < config.stop_below_count:
                stopped = True
            elif any(hook(state()) for hook in hooks):
                stopped = True
            if stopped:
                break

    return RunRecord(
        grid=st.grid,
        epsilon=eps,
        times=np.asarray(rec["t"]),
        fields=np.asarray(rec["u"]),
        energies=np.asarray(rec["E"]),
        gradient_energies=np.asarray(rec["Eg"]),
        dissipation=np.asarray(rec["diss"]),
        min_u=np.asarray(rec["min"]),
        max_u=np.asarray(rec["max"]),
        counts=np.asarray(rec["count"], dtype=int),
        steps=steps,
        stopped_early=stopped,
        wall_time=_time.perf_counter() - wall,
        global_min=gmin,
        global_max=gmax,
        config=config.to_dict(),
    )
