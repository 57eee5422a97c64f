"""Ginzburg-Landau type energy, dissipation audit and N*gamma0 bound checks.

The energy of a phase field is

    E_eps[u] = int_a^b  eps/2 [D(u) u_x]^2 + G(u)/eps  dx

and along solutions ``E(0) - E(T) = eps^-1 int_0^T int D(u) u_t^2``.
"""
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidA, MissingDiagnostics
from .model import evaluate_potential
from .quadrature import gauss_legendre


@dataclass(frozen=True)
class EnergyReport:
    value: float
    gradient: float
    potential: float
    N: int = None
    gamma0: float = None
    gap_to_Ngamma0: float = None
    fitted_A: float = None
    fitted_C: float = None

    def to_dict(self):
        return asdict(self)


def energy_parts(values, grid, model, epsilon):
    """Gradient and potential contributions on a grid (trapezoid rule)."""
    u = np.asarray(values, dtype=float)
    # D(u) u_x = Psi(u)_x, differenced the way the solver sees it
    flux = np.gradient(model.Psi(u), grid.h, edge_order=2)
    w = grid.weights
    grad = 0.5 * epsilon * float(np.dot(w, flux ** 2))
    pot = float(np.dot(w, np.maximum(evaluate_potential(model, u), 0.0))) / epsilon
    return grad, pot


def energy(u, model, epsilon, N=None):
    """Energy report for a :class:`PhaseField`.

    When the layer count ``N`` is given, the report carries ``N * gamma0``
    and the gap to it.
    """
    grad, pot = energy_parts(u.values, u.grid, model, epsilon)
    E = grad + pot
    if N is None:
        return EnergyReport(E, grad, pot)
    g0 = model.constants.gamma0
    return EnergyReport(E, grad, pot, N=N, gamma0=g0, gap_to_Ngamma0=N * g0 - E)


# --------------------------------------------------------------------------
# exact energy of pasted standing-wave data
# --------------------------------------------------------------------------

def _well_tail_energy(model, well, sign, delta):
    """``int sqrt(2G) D`` over the strip of width ``delta`` next to a well.

    ``sign`` is +1 for the strip ``[alpha, alpha + delta]`` and -1 for
    ``[beta - delta, beta]``.  Evaluated in the offset variable so that
    strips far below the resolution of ``beta`` itself stay accurate.
    """
    delta = np.asarray(delta, dtype=float)

    def integrand(t):
        s = well + sign * t
        G = np.abs(gauss_legendre(model.fD, np.full_like(s, well), s, 30))
        return np.sqrt(2.0 * G) * model.D(s)

    return gauss_legendre(integrand, np.zeros_like(delta), delta, 30)


def layer_datum_energy(profile, layers):
    """Energy of the continuum pasted datum and its deficit to ``N gamma0``.

    On every piece ``[m_j, m_{j+1}]`` the profile satisfies equipartition, so
    its energy is ``int sqrt(2G) D dPhi`` over the range the piece covers.
    The deficit ``N gamma0 - E`` is therefore the sum of the well strips that
    each piece leaves out; it is summed directly rather than obtained by
    subtraction, which would lose it to rounding once it drops below
    ``1e-16 * N gamma0``.

    Returns
    -------
    energy, deficit : float
    """
    model = profile.model
    h = np.asarray(layers.positions)
    m = layers.midpoints
    sgn = layers.orientations()
    ends = np.concatenate([sgn * (m[:-1] - h), sgn * (m[1:] - h)])
    ends = ends[np.isfinite(ends)]
    d = profile.well_distance(ends)
    lo = ends < 0
    deficit = float(np.sum(_well_tail_energy(model, model.alpha, 1.0, d[lo]))
                    + np.sum(_well_tail_energy(model, model.beta, -1.0, d[~lo])))
    N = layers.N
    return N * model.constants.gamma0 - deficit, deficit


# --------------------------------------------------------------------------
# distances to the step function
# --------------------------------------------------------------------------

def l1_distance(u, layers, model):
    """``||u - v||_L1`` with ``u`` piecewise linear between nodes.

    Cells are cut at the jumps of ``v`` and ``|u - v|`` is integrated exactly
    on every linear piece, zero crossings included.
    """
    x = u.grid.x
    cuts = np.asarray([h for h in layers.positions if x[0] < h < x[-1]])
    pts = np.union1d(x, cuts)
    vals = np.interp(pts, x, u.values)
    mids = 0.5 * (pts[1:] + pts[:-1])
    v = layers.step_values(model, mids)
    g0 = vals[:-1] - v
    g1 = vals[1:] - v
    L = np.diff(pts)
    same = g0 * g1 >= 0
    a0, a1 = np.abs(g0), np.abs(g1)
    denom = np.where(same, 1.0, a0 + a1)
    piece = np.where(same, 0.5 * L * (a0 + a1), 0.5 * L * (g0 ** 2 + g1 ** 2) / denom)
    return float(np.sum(piece))


# --------------------------------------------------------------------------
# bound checks
# --------------------------------------------------------------------------

def _check_A(A, model, layers):
    ceiling = model.constants.a_ceiling(layers.radius)
    if not 0.0 < A < ceiling:
        raise InvalidA(f"A = {A} outside (0, r sqrt(2 lambda)) = (0, {ceiling:.6g})")
    return ceiling


@dataclass(frozen=True)
class Certification:
    certified: bool
    l1_ok: bool
    energy_ok: bool
    l1_distance: float
    energy: float
    upper_bound: float
    A: float
    C: float

    def to_dict(self):
        return asdict(self)


def certify_layer_structure(u, model, epsilon, layers, tolerance_delta, A, C=1.0):
    """Check ``||u - v||_L1 <= delta`` and ``E <= N gamma0 + C exp(-A/eps)``."""
    _check_A(A, model, layers)
    dist = l1_distance(u, layers, model)
    E = energy(u, model, epsilon).value
    bound = layers.N * model.constants.gamma0 + C * math.exp(-A / epsilon)
    l1_ok = dist <= tolerance_delta
    e_ok = E <= bound
    return Certification(l1_ok and e_ok, l1_ok, e_ok, dist, E, bound, A, C)


def lower_bound_check(u, model, epsilon, layers, A, C=1.0, energy_value=None):
    """Margin ``E - (N gamma0 - C exp(-A/eps))``; non-negative means respected.

    ``energy_value`` overrides the grid quadrature (e.g. the exact energy of
    a pasted datum from :func:`layer_datum_energy`).
    """
    if layers.N:
        _check_A(A, model, layers)
    E = energy(u, model, epsilon).value if energy_value is None else energy_value
    return E - (layers.N * model.constants.gamma0 - C * math.exp(-A / epsilon))


def fit_gap_decay(epsilons, gaps):
    """Least-squares fit ``log gap = log C - A / eps``.

    Returns ``(A, C, r2)`` with ``r2`` the coefficient of determination.
    """
    inv = 1.0 / np.asarray(epsilons, dtype=float)
    lg = np.log(np.asarray(gaps, dtype=float))
    slope, intercept = np.polyfit(inv, lg, 1)
    pred = slope * inv + intercept
    ss_res = float(np.sum((lg - pred) ** 2))
    ss_tot = float(np.sum((lg - lg.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return -float(slope), float(math.exp(intercept)), r2


def dissipation_audit(record):
    """Relative residual of ``E(0) - E(T) = eps^-1 int int D(u) u_t^2``.

    Normalized by ``E(0)``; when ``E(0)`` vanishes the absolute residual is
    returned.
    """
    energies = getattr(record, "energies", None)
    dissipation = getattr(record, "dissipation", None)
    if energies is None or dissipation is None or len(energies) == 0:
        raise MissingDiagnostics("record lacks energy series or dissipation accumulator")
    E0, ET = float(energies[0]), float(energies[-1])
    residual = abs(E0 - ET - float(dissipation[-1]))
    return residual / E0 if E0 > 0 else residual
