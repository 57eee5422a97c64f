"""Quadrature rules used by the model and profile builders.

Three rules live here:

* ``adaptive_simpson`` -- classic recursive Simpson refinement on a scalar
  integrand, used for one-off integrals (balance residual, gamma0, tables
  of the effective potential).
* ``gauss_legendre`` -- fixed-order Gauss-Legendre, vectorized over many
  intervals at once.  Used wherever the integrand is smooth on each interval
  and thousands of integrals are needed per call.
* ``adaptive_panels`` -- vectorized panel refinement built on
  ``gauss_legendre``; every panel is bisected until the n-point rule and
  the two-half-panel rule agree.
"""
from functools import lru_cache

import numpy as np

from .errors import QuadratureFailure


@lru_cache(maxsize=None)
def _legendre_nodes(n):
    nodes, weights = np.polynomial.legendre.leggauss(n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_legendre(func, a, b, n=20):
    """Integrate ``func`` over ``[a, b]`` with an ``n``-point rule.

    ``a`` and ``b`` may be arrays of equal shape; ``func`` must accept an
    array of shape ``a.shape + (n,)``.  Reversed limits give negated values.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    nodes, weights = _legendre_nodes(n)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    s = mid[..., None] + half[..., None] * nodes
    return half * np.sum(weights * func(s), axis=-1)


def adaptive_simpson(func, a, b, atol=1e-10, rtol=0.0, max_depth=48):
    """Adaptive Simpson quadrature of a scalar integrand.

    Each subinterval is accepted once the Richardson error estimate
    ``|S2 - S1| / 15`` is below ``max(atol_local, rtol * |S2|)``, where the
    absolute tolerance is split between the two halves on every bisection.

    Returns
    -------
    value : float
    error : float
        Sum of the accepted local error estimates.

    Raises
    ------
    QuadratureFailure
        If some subinterval still fails after ``max_depth`` bisections or the
        integrand produced a non-finite value.
    """
    a = float(a)
    b = float(b)
    if a == b:
        return 0.0, 0.0
    fa, fm, fb = (float(func(a)), float(func(0.5 * (a + b))), float(func(b)))
    whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0
    total = 0.0
    err_total = 0.0
    stack = [(a, b, fa, fm, fb, whole, atol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, s, tol, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        flm = float(func(lm))
        frm = float(func(rm))
        left = (mid - lo) * (flo + 4.0 * flm + fmid) / 6.0
        right = (hi - mid) * (fmid + 4.0 * frm + fhi) / 6.0
        s2 = left + right
        est = abs(s2 - s) / 15.0
        if not np.isfinite(s2):
            raise QuadratureFailure(f"non-finite integrand on [{lo}, {hi}]")
        if est <= max(tol, rtol * abs(s2)) or (hi - lo) <= 1e-15 * max(1.0, abs(lo)):
            total += s2 + (s2 - s) / 15.0
            err_total += est
            continue
        if depth >= max_depth:
            raise QuadratureFailure(
                f"adaptive Simpson did not converge on [{lo}, {hi}] "
                f"(estimate {est:.3e}, tolerance {tol:.3e})"
            )
        stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * tol, depth + 1))
        stack.append((lo, mid, flo, flm, fmid, left, 0.5 * tol, depth + 1))
    return total, err_total


def adaptive_panels(func, edges, rtol=1e-12, atol=0.0, n=12, max_splits=40,
                    max_panels=200_000):
    """Integrals of ``func`` over consecutive panels ``edges[k]..edges[k+1]``.

    Panels whose ``n``-point value disagrees with the two-half-panel value by
    more than ``max(atol, rtol * |value|)`` are bisected; the refined values
    are summed back onto the original panels.  ``func`` must be vectorized.
    """
    edges = np.asarray(edges, dtype=float)
    lo = edges[:-1].copy()
    hi = edges[1:].copy()
    owner = np.arange(lo.size)
    out = np.zeros(lo.size)
    for _ in range(max_splits):
        if lo.size == 0:
            return out
        mid = 0.5 * (lo + hi)
        coarse = gauss_legendre(func, lo, hi, n)
        fine = gauss_legendre(func, lo, mid, n) + gauss_legendre(func, mid, hi, n)
        if not np.all(np.isfinite(fine)):
            raise QuadratureFailure("non-finite integrand in panel quadrature")
        done = np.abs(fine - coarse) <= np.maximum(atol, rtol * np.abs(fine))
        np.add.at(out, owner[done], fine[done])
        keep = ~done
        lo, mid, hi, owner = lo[keep], mid[keep], hi[keep], owner[keep]
        if lo.size > max_panels:
            raise QuadratureFailure(f"panel refinement exceeded {max_panels} panels")
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
        owner = np.concatenate([owner, owner])
    if lo.size:
        raise QuadratureFailure(
            f"{lo.size} panels unresolved after {max_splits} bisections"
        )
    return out
