import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from metastable_ac.errors import (BalanceViolation, ConfigViolation, DegenerateModel,
                                  NotBistable, SignViolation)
from metastable_ac.model import (BUILTIN_MODELS, NON_DEGENERATE_BUILTINS, build_model,
                                 builtin_model, compute_gamma0, compute_lambda,
                                 effective_potential, evaluate_potential,
                                 exponential_balanced_ustar, model_from_spec)
from metastable_ac.quadrature import adaptive_simpson

CUBIC = {"family": "polynomial", "roots": [-1.0, 0.0, 1.0]}


def test_classical_model_fields(classical):
    assert (classical.alpha, classical.beta) == (-1.0, 1.0)
    assert classical.d_min == 1.0
    assert not classical.degenerate


def test_mullins_model_d_min(mullins):
    assert mullins.d_min == pytest.approx(0.5)


def test_exponential_model_is_balanced(exponential):
    assert exponential_balanced_ustar() == pytest.approx((math.e ** 2 - 7) / 2)
    assert abs(exponential.balance_residual) < 1e-12
    assert exponential.reaction.roots[1] == pytest.approx((math.e ** 2 - 7) / 2)


def test_unbalanced_model_rejected():
    with pytest.raises(BalanceViolation):
        build_model({"family": "exponential", "D0": 1.0}, CUBIC)


def test_wrong_slope_at_well_rejected():
    with pytest.raises(NotBistable):
        build_model({"family": "constant"}, {"family": "polynomial", "roots": [-1, 0, 1],
                                             "scale": -1.0})


def test_nonzero_reaction_at_well_rejected():
    with pytest.raises(NotBistable):
        build_model({"family": "constant"}, CUBIC, alpha=-1.0, beta=0.9)


def test_negative_interior_potential_rejected():
    # f = u (u^2 - 1)(u^2 - 0.64) is balanced and bistable but G(0) < 0
    spec = {"family": "polynomial", "roots": [-1.0, -0.8, 0.0, 0.8, 1.0]}
    with pytest.raises(SignViolation):
        build_model({"family": "constant"}, spec)


def test_degeneracy_must_be_declared():
    spec = dict(BUILTIN_MODELS["fdeg3"])
    with pytest.raises(NotBistable):
        build_model(spec["diffusivity"], spec["reaction"])
    spec = dict(BUILTIN_MODELS["porous"])
    with pytest.raises(DegenerateModel):
        build_model(spec["diffusivity"], spec["reaction"])
    with pytest.raises(ConfigViolation):
        build_model({"family": "constant"}, CUBIC, degenerate=["reaction_alpha"])


def test_model_from_spec_builtin_override():
    m = model_from_spec({"builtin": "classical", "name": "renamed"})
    assert m.name == "renamed" and m.alpha == -1.0
    with pytest.raises(ConfigViolation):
        model_from_spec({"builtin": "nope"})


def test_callable_profiles_use_central_differences():
    m = build_model(lambda u: np.ones_like(np.asarray(u, dtype=float)),
                    lambda u: np.asarray(u) ** 3 - np.asarray(u), alpha=-1, beta=1)
    assert compute_lambda(m) == pytest.approx(2.0, rel=1e-8)


# effective potential -------------------------------------------------------

def test_classical_potential_closed_form(classical):
    assert float(evaluate_potential(classical, np.array(0.0))) == pytest.approx(0.25, rel=1e-14)
    assert float(evaluate_potential(classical, np.array(-1.0))) == 0.0
    u = np.linspace(-1, 1, 41)
    np.testing.assert_allclose(classical.potential(u), oracles.classical_G(u), atol=1e-13)


def test_porous_potential_vanishes_at_beta(porous):
    G = porous.potential
    assert abs(G.endpoint_residual) < 1e-12
    assert float(G(np.array(1.0))) == pytest.approx(0.0, abs=1e-14)
    u = np.linspace(0, 1, 33)
    np.testing.assert_allclose(G(u), oracles.porous_G(u), atol=1e-13)


@pytest.mark.parametrize("name", NON_DEGENERATE_BUILTINS)
def test_potential_matches_bruteforce_trapezoid(name):
    m = builtin_model(name)
    x, cum = oracles.cumulative_trapezoid(m.fD, m.alpha, m.beta)
    probes = np.linspace(m.alpha, m.beta, 102)[1:-1]
    want = np.interp(probes, x, cum)
    got = m.potential(probes)
    np.testing.assert_allclose(got, want, rtol=1e-6)


@pytest.mark.parametrize("name", NON_DEGENERATE_BUILTINS)
def test_potential_double_well_shape(name):
    m = builtin_model(name)
    G = m.potential
    assert G.g2_alpha > 0 and G.g2_beta > 0
    assert np.all(G.values >= 0)
    assert abs(float(G(np.array(m.alpha)))) < 1e-14 and abs(float(G(np.array(m.beta)))) < 1e-14
    h = 1e-5
    for well in (m.alpha, m.beta):
        slope = (float(G(np.array(well + h))) - float(G(np.array(well - h)))) / (2 * h)
        assert abs(slope) < 1e-8


@pytest.mark.parametrize("name", NON_DEGENERATE_BUILTINS)
def test_balance_residual_bounded_by_quadrature_tolerance(name):
    m = builtin_model(name)
    for tol in (1e-4, 5e-5, 2.5e-5, 1.25e-5):
        res, _ = adaptive_simpson(m.fD, m.alpha, m.beta, atol=tol)
        assert abs(res) <= tol


# constants -----------------------------------------------------------------

def test_lambda_values(classical, mullins, exponential):
    assert compute_lambda(classical) == pytest.approx(2.0, abs=1e-10)
    assert compute_lambda(mullins) == pytest.approx(4.0, abs=1e-10)
    assert compute_lambda(exponential) == pytest.approx(oracles.EXPONENTIAL_LAMBDA, abs=1e-10)


def test_lambda_unavailable_for_degenerate_models():
    for name in ("fdeg3", "fdeg5", "porous"):
        m = builtin_model(name)
        with pytest.raises(DegenerateModel):
            compute_lambda(m)
        assert m.constants.lambda_ is None
        with pytest.raises(DegenerateModel):
            m.constants.a_ceiling(0.5)


def test_gamma0_classical_closed_form(classical):
    assert compute_gamma0(classical) == pytest.approx(oracles.CLASSICAL_GAMMA0, abs=1e-9)


def test_gamma0_mullins_against_simpson_oracle(mullins):
    want = oracles.simpson(lambda s: np.sqrt(2 * oracles.mullins_G(s)) / (1 + s * s), -1.0, 1.0)
    assert compute_gamma0(mullins) == pytest.approx(want, abs=1e-6)


def test_a_ceiling(classical, mullins):
    assert classical.constants.a_ceiling(0.5) == pytest.approx(1.0)
    assert mullins.constants.a_ceiling(0.5) == pytest.approx(math.sqrt(2.0))


@given(st.floats(-5.0, 5.0))
def test_lambda_invariant_under_phase_shift(c):
    m = build_model({"family": "constant"},
                    {"family": "polynomial", "roots": [-1.0 + c, c, 1.0 + c]})
    assert compute_lambda(m) == pytest.approx(2.0, rel=1e-9)
    roots = [-1.0 + c, exponential_balanced_ustar() + c, 1.0 + c]
    m = build_model({"family": "exponential", "center": c}, {"family": "polynomial", "roots": roots})
    assert compute_lambda(m) == pytest.approx(oracles.EXPONENTIAL_LAMBDA, rel=1e-9)
