import numpy as np
import pytest

from maxdaemon import dielectric as di
from maxdaemon.errors import BranchCollapseError, ConfigError, DomainError, StiffnessError
from oracles import epsilon_ivp

W_R = 16 * np.pi


def test_activation_ratio():
    assert di.activation_ratio(W_R / 2, W_R, 40 * np.pi) == 1.0
    assert di.activation_ratio((W_R + 40 * np.pi) / 2, W_R, 40 * np.pi) == -1.0
    assert di.activation_ratio(45 * np.pi, W_R, 40 * np.pi) == 0.0
    assert di.activation_ratio(30 * np.pi, W_R) == -1.0  # no cutoff
    with pytest.raises(DomainError):
        di.activation_ratio(W_R, W_R)


def test_spec_validation():
    with pytest.raises(ConfigError):
        di.InverseProblemSpec(np.pi, x_grid=np.array([0.0, 0.0]))
    with pytest.raises(ConfigError):
        di.InverseProblemSpec(np.pi, eps0=0)
    with pytest.raises(ConfigError):
        di.InverseProblemSpec(-1.0)


@pytest.mark.parametrize("w", [np.pi, 8 * np.pi, 20 * np.pi, 40 * np.pi])
def test_vacuum_fixed_point(w):
    sol = di.solve_epsilon_ode(di.InverseProblemSpec(w, eps0=1, deps0=0))
    assert np.all(sol.eps == 1)


@pytest.mark.parametrize("w,deps0", [(np.pi, 1.0), (4 * np.pi, 2.0), (20 * np.pi, 1.0)])
def test_ode_against_adaptive_solver(w, deps0):
    spec = di.InverseProblemSpec(w, deps0=deps0, x_grid=np.array([-1.0, -0.35, 0.0, 0.5, 1.0]))
    sol = di.solve_epsilon_ode(spec)
    for x, e in zip(spec.x_grid, sol.eps):
        ref = epsilon_ivp(w, spec.ratio, 1.0, 2.0, deps0, x) if x != 0 else 2.0
        assert abs(e - ref) < 1e-6 * max(1, abs(ref))


def test_parity_without_initial_slope():
    spec = di.InverseProblemSpec(4 * np.pi, deps0=0.0)
    sol = di.solve_epsilon_ode(spec)
    rev = sol.eps[::-1]
    assert np.max(np.abs(sol.eps.real - rev.real)) < 1e-7
    assert np.max(np.abs(sol.eps.imag + rev.imag)) < 1e-7


def test_log_derivative_and_vb_columns():
    spec = di.InverseProblemSpec(np.pi)
    sol = di.solve_epsilon_ode(spec)
    i0 = np.argmin(np.abs(spec.x_grid))
    assert sol.dlog[i0] == pytest.approx(0.5)
    assert sol.vb[i0] == pytest.approx(-(1j * np.pi / 0.5) * 0.5)
    inactive = di.solve_epsilon_ode(di.InverseProblemSpec(45 * np.pi, omega_UV_over_c=40 * np.pi))
    assert inactive.ratio == 0 and np.all(np.isnan(inactive.vb))


def test_branch_collapse_and_stiffness_errors():
    with pytest.raises(BranchCollapseError):
        di.solve_epsilon_ode(di.InverseProblemSpec(np.pi, eps0=1e-7, deps0=-1e-3, x_grid=np.linspace(-0.5, 0.5, 11)))
    with pytest.raises(StiffnessError):
        di.solve_epsilon_ode(di.InverseProblemSpec(40 * np.pi, eps0=50, deps0=500, tol=1e-14, max_refine=1))


def test_harmonic_closed_form():
    spec = di.InverseProblemSpec(np.pi, eps0=np.exp(0.01), deps0=0.0)
    h = di.harmonic_approx(np.array([0.0, 1.0, -1.0]), spec)
    assert h.v[0] == pytest.approx(0.01)
    # with v0' = 0 the free-start slope is -i k r v0, so the sine part survives
    q = np.pi * np.sqrt(3)
    v0p = -1j * np.pi * 0.01
    assert h.v[1] == pytest.approx(0.01 * np.cos(q) + v0p * np.sin(q) / q)


def test_harmonic_even_when_slope_parameter_vanishes():
    # v0' = eps0'/eps0 - i k r v0 = 0 when eps0' = i k r eps0 log eps0
    k = 2 * np.pi
    e0 = 1.01
    spec = di.InverseProblemSpec(k, eps0=e0, deps0=1j * k * e0 * np.log(e0))
    x = np.linspace(0, 1, 7)
    a, b = di.harmonic_approx(x, spec).v, di.harmonic_approx(-x, spec).v
    assert np.max(np.abs(a - b)) < 1e-15
    assert abs(di.harmonic_approx(0.5, spec).v - np.log(e0) * np.cos(k * np.sqrt(3) * 0.5)) < 1e-15


def test_small_deviation_matches_harmonic():
    spec = di.InverseProblemSpec(np.pi, eps0=1 + 1e-3, deps0=0.0)
    sol = di.solve_epsilon_ode(spec)
    har = di.harmonic_approx(spec.x_grid, spec).eps
    assert np.max(np.abs(sol.eps - har) / np.abs(har)) < 1e-2


def test_sweep_keys():
    base = di.InverseProblemSpec(np.pi, x_grid=np.linspace(-0.2, 0.2, 5))
    out = di.sweep([np.pi, 2 * np.pi], base)
    assert list(out) == [np.pi, 2 * np.pi]
