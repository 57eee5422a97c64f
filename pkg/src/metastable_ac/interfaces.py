"""Interfaces of phase fields, Hausdorff distances and layer tracking.

For a field ``u`` and a closed band ``K`` inside ``(alpha, beta)`` the
interface ``I_K[u] = u^{-1}(K)`` is reported in two ways: the sub-cell
positions where the piecewise-linear interpolant of ``u`` crosses the
midlevel ``(alpha + beta)/2`` (the finite representation used for
distances), and the intervals of ``[a, b]`` on which the interpolant lies in
``K``.
"""
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConfigViolation, EmptyInput, InsufficientData, TrackingAmbiguity


def default_band(model):
    """Middle fifth of ``[alpha, beta]``."""
    w = model.beta - model.alpha
    return (model.alpha + 0.4 * w, model.alpha + 0.6 * w)


def _check_band(K, model):
    lo, hi = float(K[0]), float(K[1])
    if not (model.alpha < lo <= hi < model.beta):
        raise ConfigViolation(
            f"K = [{lo}, {hi}] must be a closed band strictly inside ({model.alpha}, {model.beta})"
        )
    return lo, hi


@dataclass(frozen=True)
class InterfaceSet:
    positions: np.ndarray
    intervals: np.ndarray = field(repr=False)  # shape (k, 2)
    K: tuple = None
    a: float = None
    b: float = None

    def __post_init__(self):
        pos = np.sort(np.asarray(self.positions, dtype=float).ravel())
        object.__setattr__(self, "positions", pos)
        iv = np.asarray(self.intervals, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "intervals", iv)

    def __len__(self):
        return self.positions.size

    @property
    def empty(self):
        return self.positions.size == 0

    def widths(self):
        return self.intervals[:, 1] - self.intervals[:, 0]

    def to_dict(self):
        return {"positions": self.positions.tolist(), "intervals": self.intervals.tolist(),
                "K": list(self.K) if self.K is not None else None}


def midlevel_crossings(x, u, level):
    """Linear-interpolation positions where ``u - level`` changes sign.

    A node sitting exactly on the level counts once, at the node.
    """
    g = np.asarray(u, dtype=float) - level
    above = g > 0
    k = np.nonzero(above[1:] != above[:-1])[0]
    g0, g1 = g[k], g[k + 1]
    theta = g0 / (g0 - g1)
    return x[k] + theta * (x[k + 1] - x[k])


def _band_intervals(x, u, lo, hi):
    """Exact preimage of ``[lo, hi]`` under the piecewise-linear interpolant."""
    u0, u1 = u[:-1], u[1:]
    x0, x1 = x[:-1], x[1:]
    du = u1 - u0
    flat = du == 0
    safe = np.where(flat, 1.0, du)
    t_lo = (lo - u0) / safe
    t_hi = (hi - u0) / safe
    t_a = np.minimum(t_lo, t_hi)
    t_b = np.maximum(t_lo, t_hi)
    hit = np.where(flat, (u0 >= lo) & (u0 <= hi), (t_b >= 0.0) & (t_a <= 1.0))
    t_in = np.where(flat, 0.0, np.clip(t_a, 0.0, 1.0))
    t_out = np.where(flat, 1.0, np.clip(t_b, 0.0, 1.0))
    s = x0[hit] + t_in[hit] * (x1[hit] - x0[hit])
    e = x0[hit] + t_out[hit] * (x1[hit] - x0[hit])
    if s.size == 0:
        return np.empty((0, 2))
    merged = [[s[0], e[0]]]
    for lo_k, hi_k in zip(s[1:], e[1:]):
        if lo_k <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi_k)
        else:
            merged.append([lo_k, hi_k])
    return np.asarray(merged)


def interface_of(u, model, K=None):
    """Interface ``I_K[u]`` of a :class:`PhaseField`.

    ``K`` defaults to the middle fifth of ``[alpha, beta]``.  An empty
    level set is returned as an empty :class:`InterfaceSet`.
    """
    lo, hi = _check_band(default_band(model) if K is None else K, model)
    x = u.grid.x
    vals = u.values
    pos = midlevel_crossings(x, vals, model.midpoint)
    iv = _band_intervals(x, vals, lo, hi)
    return InterfaceSet(pos, iv, (lo, hi), u.grid.a, u.grid.b)


def _points(X):
    if isinstance(X, InterfaceSet):
        return X.positions
    return np.asarray(X, dtype=float).ravel()


def directed_distance(X, Y):
    """``sup_{x in X} inf_{y in Y} |x - y|`` for finite sets."""
    x, y = _points(X), _points(Y)
    if x.size == 0 or y.size == 0:
        raise EmptyInput("directed distance needs two nonempty sets")
    ys = np.sort(y)
    k = np.searchsorted(ys, x)
    left = ys[np.clip(k - 1, 0, ys.size - 1)]
    right = ys[np.clip(k, 0, ys.size - 1)]
    return float(np.max(np.minimum(np.abs(x - left), np.abs(x - right))))


def hausdorff(X, Y):
    """Hausdorff distance between two nonempty finite sets of reals."""
    return max(directed_distance(X, Y), directed_distance(Y, X))


# --------------------------------------------------------------------------
# tracking
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CollapseEvent:
    t_collapse: float
    layers: tuple  # indices of the vanished layers (one index for a boundary exit)
    gap: float  # their separation (or distance to the boundary) one snapshot earlier
    count_before: int
    count_after: int

    def to_dict(self):
        d = asdict(self)
        d["layers"] = list(self.layers)
        return d


@dataclass
class LayerTracks:
    """Trajectories of the initial layers; NaN marks a vanished layer."""

    times: np.ndarray
    positions: np.ndarray  # shape (snapshots, N0)
    counts: np.ndarray
    events: list
    distances: np.ndarray  # d(I_K[u(t)], I_K[u(0)]); inf once no interface is left
    delta1: float
    exit_time: float = None  # first snapshot time with distance > delta1
    ambiguities: int = 0
    nucleations: int = 0

    @property
    def first_collapse(self):
        return self.events[0].t_collapse if self.events else None

    @property
    def N0(self):
        return self.positions.shape[1]


def _match(prev_pos, alive, current, tol):
    """Greedy nearest-neighbour assignment of ``current`` points to live tracks."""
    ids = np.nonzero(alive)[0]
    pairs = []
    for i in ids:
        for j, c in enumerate(current):
            d = abs(c - prev_pos[i])
            if d <= tol:
                pairs.append((d, i, j))
    pairs.sort()
    got_i, got_j = {}, set()
    for d, i, j in pairs:
        if i in got_i or j in got_j:
            continue
        got_i[i] = j
        got_j.add(j)
    return got_i, len(current) - len(got_j)


def track_layers(record, model, K=None, delta1=None):
    """Follow the initial layers of ``record`` through its snapshots.

    Layers are matched to the midlevel crossings of each snapshot by nearest
    neighbour within half the smallest initial gap.  Unmatched layers vanish;
    a :class:`CollapseEvent` is emitted at every snapshot where the count of
    crossings drops.  ``delta1`` defaults to a quarter of the smallest
    initial gap.
    """
    times = np.asarray(record.times)
    if times.size == 0:
        raise EmptyInput("record has no snapshots")
    K = default_band(model) if K is None else K
    grid = record.grid
    x, h = grid.x, grid.h
    level = model.midpoint

    first = interface_of(record.field_at(0), model, K)
    pos0 = first.positions
    N0 = pos0.size
    gaps = np.diff(pos0)
    min_gap = float(gaps.min()) if gaps.size else float(grid.b - grid.a)
    tol = 0.5 * min_gap
    if delta1 is None:
        delta1 = 0.25 * min_gap

    traj = np.full((times.size, N0), np.nan)
    traj[0] = pos0
    alive = np.ones(N0, dtype=bool)
    prev = pos0.copy()
    counts = np.zeros(times.size, dtype=int)
    counts[0] = N0
    dists = np.zeros(times.size)
    events = []
    exit_time = None
    ambiguous = 0
    nucleated = 0

    for k in range(1, times.size):
        cur = midlevel_crossings(x, record.fields[k], level)
        if not events and cur.size > 1 and np.any(np.diff(cur) < h):
            ambiguous += 1
            warnings.warn(
                f"two crossings within one grid cell at t={times[k]:.6g}; merging them",
                TrackingAmbiguity, stacklevel=2,
            )
            keep = np.concatenate([[True], np.diff(cur) >= h])
            groups = np.cumsum(keep) - 1
            cur = np.bincount(groups, cur) / np.bincount(groups)
        counts[k] = cur.size
        assignment, extra = _match(prev, alive, cur, tol)
        nucleated += max(extra, 0)
        lost = [i for i in np.nonzero(alive)[0] if i not in assignment]
        for i, j in assignment.items():
            prev[i] = cur[j]
            traj[k, i] = cur[j]
        if cur.size < counts[k - 1] or lost:
            if lost:
                if len(lost) >= 2:
                    gap = float(prev[lost[-1]] - prev[lost[0]])
                else:
                    i = lost[0]
                    gap = float(min(prev[i] - grid.a, grid.b - prev[i]))
                events.append(CollapseEvent(float(times[k]), tuple(int(i) for i in lost),
                                            abs(gap), int(counts[k - 1]), int(counts[k])))
            alive[lost] = False
        dists[k] = hausdorff(cur, pos0) if cur.size and N0 else math.inf
        if exit_time is None and dists[k] > delta1:
            exit_time = float(times[k])

    return LayerTracks(times, traj, counts, events, dists, float(delta1), exit_time,
                       ambiguous, nucleated)


# --------------------------------------------------------------------------
# lifetime scaling
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalingFit:
    epsilons: tuple
    times: tuple
    A_fit: float
    intercept: float
    ceiling: float  # r sqrt(2 lambda); zero when lambda vanishes
    A_check: float
    bounds: tuple  # exp(A_check / eps) per sample
    bound_ok: tuple
    verdict: str

    def to_dict(self):
        return asdict(self)


def lifetime_scaling_fit(samples, model, r):
    """Fit ``log t_collapse = A_fit / eps + b`` and check the persistence bound.

    Parameters
    ----------
    samples : iterable of (epsilon, t_collapse)
        Samples whose ``t_collapse`` is None (no collapse observed) are
        dropped.
    model : MaterialModel
    r : float or LayerConfiguration
        Layer radius; a configuration contributes its ``radius``.

    The verdict is PASS when ``A_fit > 0`` and every sample satisfies
    ``t >= exp(A_check / eps)`` with ``A_check = r sqrt(2 lambda) / 2``.  For
    degenerate models ``lambda`` is taken as zero, so no admissible exponent
    exists and the verdict is FAIL.
    """
    r = float(getattr(r, "radius", r))
    pts = sorted((float(e), float(t)) for e, t in samples if t is not None)
    eps = np.array([p[0] for p in pts])
    ts = np.array([p[1] for p in pts])
    if np.unique(eps).size < 2:
        raise InsufficientData("the scaling fit needs collapses at two or more distinct epsilons")
    if np.any(ts <= 0):
        raise InsufficientData("collapse times must be positive")
    slope, intercept = np.polyfit(1.0 / eps, np.log(ts), 1)
    lam = model.constants.lambda_
    ceiling = r * math.sqrt(2.0 * lam) if lam else 0.0
    a_check = 0.5 * ceiling
    bounds = np.exp(a_check / eps)
    ok = ts >= bounds
    passed = bool(slope > 0 and a_check > 0 and np.all(ok))
    return ScalingFit(
        epsilons=tuple(eps.tolist()), times=tuple(ts.tolist()),
        A_fit=float(slope), intercept=float(intercept),
        ceiling=ceiling, A_check=a_check,
        bounds=tuple(bounds.tolist()), bound_ok=tuple(bool(v) for v in ok),
        verdict="PASS" if passed else "FAIL",
    )
