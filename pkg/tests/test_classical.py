import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from maxdaemon import classical as cl
from maxdaemon.errors import ConfigError, DomainError
from oracles import single_particle_fine

P_R, P_UV = 1.0, 2.0


def test_activation_bands():
    assert cl.activation(P_R / 2, P_R, P_UV) == 1
    assert cl.activation(-P_R / 2, P_R, P_UV) == 0
    # the step algebra gives +1 on (-P_UV, -P_R): the gate closes to leftward fast movers
    assert cl.activation(-(P_R + P_UV) / 2, P_R, P_UV) == 1
    assert cl.activation((P_R + P_UV) / 2, P_R, P_UV) == 0
    for p in (2.5, -2.5, 40.0):
        assert cl.activation(p, P_R, P_UV) == 0
    assert cl.activation(P_R, P_R, P_UV) == 0.5  # theta(0) = 1/2 at the threshold


def test_band_weight_ratio():
    fp, fm = cl.band_weights([0.5, 1.5, 3.0], P_R, P_UV)
    assert fp.tolist() == [0.5, 0.5, 0.0] and fm.tolist() == [0.5, -0.5, 0.0]


@given(st.floats(-10, 10))
def test_activation_is_an_indicator(p):
    v = cl.activation(p, P_R, P_UV)
    inside = (0 < p < P_R) or (-P_UV < p < -P_R)
    edge = abs(p) in (P_R, P_UV) or p == 0
    if not edge:
        assert v == (1.0 if inside else 0.0)


def test_ensemble_validation():
    with pytest.raises(ConfigError):
        cl.ClassicalEnsemble([0.1, 0.2], [1.0])
    with pytest.raises(ConfigError):
        cl.ClassicalEnsemble([2.0], [1.0])
    with pytest.raises(ConfigError):
        cl.ClassicalEnsemble([0.1], [1.0], P_R=2.0, P_UV=1.0)
    ens = cl.ClassicalEnsemble([0.1], [1.0])
    with pytest.raises(DomainError):
        cl.step_ensemble(ens, 0.0, 3)


def test_slow_right_mover_stays_left():
    ens = cl.ClassicalEnsemble([-0.4], [P_R / 2], P_R, P_UV)
    tr = cl.step_ensemble(ens, 0.05, 400)
    assert np.all(tr.x <= 0)


def test_fast_left_mover_stays_right():
    ens = cl.ClassicalEnsemble([0.4], [-2 * P_R], P_R, 3 * P_R)
    tr = cl.step_ensemble(ens, 0.05, 400)
    assert np.all(tr.x >= 0)


def test_above_cutoff_crosses_both_ways():
    ens = cl.ClassicalEnsemble([-0.5], [2.5], P_R, P_UV)
    tr = cl.step_ensemble(ens, 0.1, 40)
    assert (tr.x > 0).any() and (tr.x < 0).any()
    sides = np.sign(tr.x[:, 0])
    assert np.count_nonzero(np.diff(sides[sides != 0])) >= 4


@pytest.mark.parametrize("x0,p0", [(-0.3, 0.7), (0.6, -1.4), (0.2, 0.37), (-0.9, -2.6), (0.5, 1.3)])
def test_event_driven_matches_fine_stepping(x0, p0):
    ens = cl.ClassicalEnsemble([x0], [p0], P_R, P_UV)
    tr = cl.step_ensemble(ens, 0.5, 8)
    fine, p_end = single_particle_fine(x0, p0, P_R, P_UV, 1.0, 4.0, dt=1e-4)
    assert abs(tr.x[-1, 0] - fine[-1]) < 1e-6
    assert tr.p[-1, 0] == p_end


@given(st.integers(0, 2**32 - 1), st.floats(0.05, 3.0), st.integers(1, 20))
def test_speed_conserved_exactly(seed, dt, steps):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1, 1, 50)
    p = rng.uniform(-3, 3, 50)
    tr = cl.step_ensemble(cl.ClassicalEnsemble(x, p, P_R, P_UV), dt, steps)
    assert np.array_equal(np.abs(tr.p), np.broadcast_to(np.abs(p), tr.p.shape))
    assert np.all(np.abs(tr.x) <= 1.0)


def test_free_flight_preserves_phase_space_area():
    # a small cell of right-movers on the right that meets no wall in the window
    x0 = np.array([0.1, 0.11, 0.11, 0.1])
    p0 = np.array([0.20, 0.20, 0.21, 0.21])
    tr = cl.step_ensemble(cl.ClassicalEnsemble(x0, p0, P_R, P_UV), 0.5, 3)

    def area(x, p):
        return 0.5 * abs(np.dot(x, np.roll(p, 1)) - np.dot(p, np.roll(x, 1)))

    a0 = area(x0, p0)
    for k in range(tr.times.size):
        assert abs(area(tr.x[k], tr.p[k]) - a0) < 1e-9


def test_sorting_ensembles_reach_full_sorting():
    ens = cl.sorting_ensembles(2000, P_R, P_UV, seed=5)
    tr = cl.step_ensemble(ens, 1.0, 30)
    occ = cl.occupancy(ens, tr.x[-1], tr.p[-1])
    assert occ.slow_left == 1.0 and occ.fast_right == 1.0
    assert occ.temp_right > occ.temp_left


def test_empty_ensemble():
    ens = cl.sorting_ensembles(0)
    tr = cl.step_ensemble(ens, 1.0, 3)
    assert tr.x.shape == (4, 0)
    assert np.isnan(cl.occupancy(ens).slow_left)
