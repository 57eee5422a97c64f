import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

import oracles
from conftest import SIX_LAYERS
from metastable_ac.errors import ConfigViolation, EmptyInput, InsufficientData, TrackingAmbiguity
from metastable_ac.fields import Grid, PhaseField
from metastable_ac.interfaces import (default_band, directed_distance, hausdorff, interface_of,
                                      lifetime_scaling_fit, midlevel_crossings, track_layers)
from metastable_ac.model import builtin_model
from metastable_ac.profile import LayerConfiguration, build_layer_datum, build_standing_profile
from metastable_ac.solver import SolverConfig, run

finite_sets = st.lists(st.floats(-100, 100, allow_nan=False), min_size=1, max_size=12)


class Frames:
    """Minimal record built from a list of field arrays."""

    def __init__(self, grid, times, fields):
        self.grid = grid
        self.times = np.asarray(times, dtype=float)
        self.fields = np.asarray(fields, dtype=float)

    def field_at(self, k):
        return PhaseField(self.grid, self.fields[k])


def pair_field(x, d, eps=0.1):
    """Classical pair of layers at -d and d (u = 1 between them)."""
    return oracles.tanh_layer(x + d, eps) - oracles.tanh_layer(x - d, eps) - 1.0


# --------------------------------------------------------------------------
# Hausdorff distance
# --------------------------------------------------------------------------

@given(finite_sets, finite_sets, finite_sets)
def test_hausdorff_is_a_metric(X, Y, Z):
    assert hausdorff(X, X) == 0.0
    assert hausdorff(X, Y) == hausdorff(Y, X)
    assert hausdorff(X, Y) >= 0.0
    assert hausdorff(X, Z) <= hausdorff(X, Y) + hausdorff(Y, Z) + 1e-9


@given(finite_sets, finite_sets)
def test_hausdorff_matches_brute_force(X, Y):
    d = np.abs(np.subtract.outer(X, Y))
    assert hausdorff(X, Y) == pytest.approx(max(d.min(axis=1).max(), d.min(axis=0).max()))


@given(finite_sets, st.floats(-50, 50))
def test_hausdorff_translation_invariant(X, s):
    Y = [v + s for v in X]
    assume(all(math.isfinite(v) for v in Y))
    assert hausdorff(X, Y) == pytest.approx(abs(s), abs=1e-9)


def test_hausdorff_small_cases():
    assert hausdorff([0.0, 10.0], [0.0]) == 10.0
    assert directed_distance([0.0], [0.0, 10.0]) == 0.0
    with pytest.raises(EmptyInput):
        hausdorff([], [1.0])
    with pytest.raises(EmptyInput):
        directed_distance([1.0], np.array([]))


# --------------------------------------------------------------------------
# interface sets
# --------------------------------------------------------------------------

def test_midlevel_crossings_linear_interpolation():
    x = np.array([0.0, 1.0, 2.0, 3.0])
    u = np.array([-1.0, 0.5, 1.0, -3.0])
    np.testing.assert_allclose(midlevel_crossings(x, u, 0.0), [2.0 / 3.0, 2.25])


def test_tanh_interface_interval_width(classical):
    eps = 0.05
    g = Grid(-1.0, 1.0, 4000)
    I = interface_of(PhaseField(g, oracles.tanh_layer(g.x, eps)), classical)
    assert default_band(classical) == pytest.approx((-0.2, 0.2))
    assert len(I) == 1 and I.positions[0] == pytest.approx(0.0, abs=1e-12)
    want = 2 * math.sqrt(2) * eps * math.atanh(0.2)
    assert I.widths()[0] == pytest.approx(want, rel=1e-4)


def test_interface_of_well_state_is_empty(classical):
    g = Grid(-1.0, 1.0, 10)
    I = interface_of(PhaseField(g, np.full(11, 1.0)), classical)
    assert I.empty and I.intervals.shape == (0, 2)
    with pytest.raises(ConfigViolation):
        interface_of(PhaseField(g, np.zeros(11)), classical, K=(-1.0, 0.5))


@pytest.mark.parametrize("name", ["classical", "mullins", "exponential", "fdeg3", "fdeg5", "porous"])
@pytest.mark.parametrize("eps", [0.1, 0.05])
def test_datum_interface_recovered_within_one_cell(name, eps):
    m = builtin_model(name)
    lay = LayerConfiguration(SIX_LAYERS, -4, 4)
    grid = Grid.with_spacing(-4, 4, eps / 10)
    u = build_layer_datum(build_standing_profile(m, eps), lay, grid)
    I = interface_of(u, m)
    assert len(I) == 6
    assert hausdorff(I, SIX_LAYERS) <= grid.h
    # every jump lies in one of the band intervals
    for h in SIX_LAYERS:
        assert np.any((I.intervals[:, 0] <= h + grid.h) & (h - grid.h <= I.intervals[:, 1]))


# --------------------------------------------------------------------------
# tracking
# --------------------------------------------------------------------------

def test_tracking_static_run(classical):
    grid = Grid(-2.0, 2.0, 400)
    lay = LayerConfiguration((-0.8, 0.8), -2, 2)
    u0 = build_layer_datum(build_standing_profile(classical, 0.1), lay, grid)
    rec = run(u0, classical, SolverConfig(epsilon=0.1, a=-2, b=2, M=400, t_max=50.0))
    tr = track_layers(rec, classical)
    assert tr.events == [] and tr.first_collapse is None and tr.exit_time is None
    assert tr.N0 == 2 and np.all(tr.counts == 2)
    assert np.max(tr.distances) <= grid.h
    assert tr.delta1 == pytest.approx(0.25 * 1.6, rel=1e-3)


def test_tracking_synthetic_pair_collapse(classical):
    grid = Grid(-2.0, 2.0, 400)
    ds = [0.6, 0.5, 0.4, 0.3, 0.2]
    fields = [pair_field(grid.x, d) for d in ds] + [np.full(401, -1.0)]
    tr = track_layers(Frames(grid, range(6), fields), classical)
    assert len(tr.events) == 1
    ev = tr.events[0]
    assert ev.t_collapse == 5.0 and ev.layers == (0, 1)
    assert ev.count_before == 2 and ev.count_after == 0
    assert ev.gap == pytest.approx(0.4, abs=grid.h)
    np.testing.assert_allclose(tr.positions[:5, 1], ds, atol=grid.h)
    assert np.all(np.isnan(tr.positions[5]))
    assert math.isinf(tr.distances[5])
    # the layers drift by more than delta1 = 0.3 once d = 0.3
    assert tr.exit_time == 3.0


def test_tracking_boundary_exit(classical):
    grid = Grid(-2.0, 2.0, 400)
    fields = [oracles.tanh_layer(grid.x - c, 0.1) for c in (1.0, 1.5)] + [np.full(401, -1.0)]
    tr = track_layers(Frames(grid, [0, 1, 2], fields), classical)
    assert len(tr.events) == 1 and tr.events[0].layers == (0,)
    assert tr.events[0].gap == pytest.approx(0.5, abs=grid.h)


def test_tracking_warns_on_crossings_inside_one_cell(classical):
    grid = Grid(-2.0, 2.0, 400)
    f0 = pair_field(grid.x, 0.6)
    f1 = f0.copy()
    k = 350
    f1[k] = 0.01  # spike: two crossings well inside one cell
    with pytest.warns(TrackingAmbiguity):
        tr = track_layers(Frames(grid, [0, 1], [f0, f1]), classical)
    assert tr.ambiguities == 1 and tr.nucleations == 1


def test_tracking_needs_snapshots(classical):
    grid = Grid(-1.0, 1.0, 10)
    with pytest.raises(EmptyInput):
        track_layers(Frames(grid, [], np.empty((0, 11))), classical)


# --------------------------------------------------------------------------
# lifetime scaling
# --------------------------------------------------------------------------

def test_scaling_fit_pass(classical):
    eps = [0.08, 0.1, 0.125]
    samples = [(e, 2.0 * math.exp(1.2 / e)) for e in eps]
    fit = lifetime_scaling_fit(samples, classical, 0.4)
    assert fit.A_fit == pytest.approx(1.2, rel=1e-9)
    assert fit.intercept == pytest.approx(math.log(2.0), rel=1e-9)
    assert fit.ceiling == pytest.approx(0.8) and fit.A_check == pytest.approx(0.4)
    assert fit.verdict == "PASS" and all(fit.bound_ok)


def test_scaling_fit_fails_below_the_bound(classical):
    samples = [(0.05, 10.0), (0.1, 100.0)]
    fit = lifetime_scaling_fit(samples, classical, 0.4)
    # exp(0.4 / 0.05) = 2981 > 10 but exp(0.4 / 0.1) = 54.6 < 100
    assert fit.verdict == "FAIL" and fit.bound_ok == (False, True)


def test_scaling_fit_degenerate_model_fails(porous):
    fit = lifetime_scaling_fit([(0.06, 1e9), (0.1, 1e3)], porous, 0.4)
    assert fit.ceiling == 0.0 and fit.verdict == "FAIL"


def test_scaling_fit_insufficient_data(classical):
    with pytest.raises(InsufficientData):
        lifetime_scaling_fit([(0.1, 100.0)], classical, 0.4)
    with pytest.raises(InsufficientData):
        lifetime_scaling_fit([(0.1, 100.0), (0.1, 120.0)], classical, 0.4)
    with pytest.raises(InsufficientData):
        lifetime_scaling_fit([(0.1, 100.0), (0.08, None)], classical, 0.4)


def test_scaling_fit_accepts_layer_configuration(classical):
    lay = LayerConfiguration((-0.4, 0.4), -2, 2)
    fit = lifetime_scaling_fit([(0.1, 1e3), (0.08, 1e4)], classical, lay)
    assert fit.ceiling == pytest.approx(lay.radius * 2.0)
