import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from maxdaemon import emcavity as em
from maxdaemon.errors import ConfigError, ContractError, PoleError
from oracles import i3_quad, i4_quad, i5_quad

pytestmark = pytest.mark.filterwarnings("ignore::maxdaemon.emcavity.BranchWarning")


def lossless(stack):
    return em.BilayerStack(tuple(em.Layer(l.omega_p, l.omega_0, 0.0) for l in stack.layers), stack.b, stack.L)


def test_lorentz_drude_values():
    lay = em.Layer(3.0, 1.2, 0.05)
    assert em.lorentz_drude(0.0, lay) == pytest.approx(1 + 9 / 1.44)
    assert em.lorentz_drude(1.0, lay) == pytest.approx(21.194 + 2.2947j, abs=1e-3)
    assert em.lorentz_drude(0.7, lay, star=True) == pytest.approx(np.conj(em.lorentz_drude(0.7, lay)))
    with pytest.raises(PoleError):
        em.lorentz_drude(1.2, em.Layer(3.0, 1.2, 0.0))


def test_stack_validation():
    with pytest.raises(ConfigError):
        em.BilayerStack((em.Layer(3, 1, 0.1),) * 2)
    with pytest.raises(ConfigError):
        em.graded_stack(b=1.0)
    with pytest.raises(ConfigError):
        em.BilayerStack((em.Layer(3, 1, -0.1),))


def test_epsilon_profile_windows():
    st_ = em.graded_stack()
    w = 0.8
    a0 = st_.L / 2
    e = em.epsilon_profile([a0 + 0.01, a0 - 0.01, 0.5, a0 + 6 * 0.12 + 0.01], w, st_)
    lay = st_.layers[6]
    assert e[0] == em.lorentz_drude(w, lay)
    assert e[1] == em.lorentz_drude(w, lay, star=True)
    assert e[2] == 1 and e[3] == em.lorentz_drude(w, st_.layers[12])


def test_empty_cavity_d_is_diagonal():
    st_ = em.BilayerStack((), L=12.0)
    D = em.d_matrix(0.9, st_, 8)
    kap = np.arange(8) * np.pi / 12
    assert np.allclose(D, np.diag(kap**2), atol=1e-14)
    assert np.allclose(em.empty_cavity_frequencies(st_, 8), kap)


def test_basis_is_orthonormal():
    x = np.linspace(0, 12, 20001)
    P = em.basis_functions(x, 12.0, 6)
    G = np.trapezoid(P[:, None, :] * P[None, :, :], x, axis=2)
    assert np.max(np.abs(G - np.eye(6))) < 1e-6


@pytest.mark.parametrize("omega", [0.3, 0.95 - 0.02j, 2.1])
def test_integral_blocks_against_quadrature(omega):
    st_ = em.graded_stack(n_half=1)
    I3, I4, I5 = em.integral_blocks(omega, st_, 5)
    assert np.max(np.abs(I3 - i3_quad(st_, omega, 5))) < 1e-8
    assert np.max(np.abs(I4 - i4_quad(st_, omega, 5))) < 1e-8
    assert np.max(np.abs(I5 - i5_quad(st_, omega, 5))) < 1e-8


def test_polynomial_matches_direct_assembly():
    st_ = em.graded_stack()
    poly = em.polynomialize(st_, 6)
    rng = np.random.default_rng(11)
    for w in rng.uniform(0.1, 3, 10) + 1j * rng.uniform(-0.2, 0.2, 10):
        I3, _, _ = em.integral_blocks(w, st_, 6)
        alg = em.stiffness(st_, 6) - w**2 * I3
        ref = poly.denominator(w) * alg
        assert np.linalg.norm(em.evaluate_polynomial(poly, w) - ref) < 1e-9 * np.linalg.norm(ref)


def test_degree_cap():
    with pytest.raises(ConfigError):
        em.polynomialize(em.graded_stack(), 4, max_degree=10)


def test_pencil_scalar_matches_numpy_roots():
    c = np.array([6.0, -5.0, 1.0, 2.0])
    got = np.sort_complex(em.pencil_eigs(c).eigenvalues)
    assert np.allclose(got, np.sort_complex(np.roots(c[::-1])), atol=1e-12)


def test_pencil_block_cubic_residuals():
    rng = np.random.default_rng(2)
    M = rng.normal(size=(4, 3, 3)) + 1j * rng.normal(size=(4, 3, 3))
    res = em.pencil_eigs(M, vectors=True)
    assert res.eigenvalues.size == 9 and not res.generalized
    for lam, v in zip(res.eigenvalues, res.vectors.T):
        P = sum(M[j] * lam**j for j in range(4))
        assert np.linalg.norm(P @ v) < 1e-9 * np.linalg.norm(v) * max(1, abs(lam)) ** 3


def test_pencil_singular_leading_coefficient():
    M = np.zeros((3, 2, 2), complex)
    M[0] = [[2, 0], [0, -3]]
    M[1] = np.eye(2)
    M[2] = [[1, 0], [0, 0]]  # singular top: one root of each block goes to infinity
    res = em.pencil_eigs(M)
    assert res.generalized
    ref = np.sort_complex(np.concatenate([np.roots([1, 1, 2]), [3.0]]))
    assert np.allclose(np.sort_complex(res.eigenvalues), ref, atol=1e-10)


def test_lossless_algebraic_roots_are_real():
    poly = em.polynomialize(lossless(em.graded_stack()), 6)
    lam = em.pencil_eigs(poly.coeffs).eigenvalues
    assert np.max(np.abs(lam.imag)) < 1e-9


def test_lossless_d_is_symmetric():
    # invariant as stated; the derivative block I5 is not symmetric, so this fails
    D = em.d_matrix(0.5, lossless(em.graded_stack()), 12)
    asym = float(np.max(np.abs(D - D.T)))
    assert asym < 1e-10, f"max |D - D^T| = {asym:.3g}"


def test_refine_fixed_point_and_zero_log_weight():
    empty = em.BilayerStack((), L=12.0)
    r = em.refine_mode(np.pi / 12 * 3, empty, 6)
    assert r.converged and r.iterations == 0 and r.omega == r.start
    st_ = em.graded_stack()
    poly = em.polynomialize(st_, 6)
    lam = em.causal(em.pencil_eigs(poly.coeffs).eigenvalues)
    l0 = lam[np.argmin(np.abs(lam - 0.5))]
    r = em.refine_mode(l0, st_, 6, log_weight=0.0)
    assert r.converged and abs(r.omega - l0) < 1e-9


def test_graded_modes(graded_modes):
    stack, modes = graded_modes
    w = modes.omegas
    assert modes.failed.size == 0
    assert np.all(w.imag <= 0)
    assert np.all(modes.residuals < 1e-6)
    for z in w:
        assert np.min(np.abs(w + np.conj(z))) < 1e-12
    for z, v in zip(w[:8], modes.vectors.T[:8]):
        assert np.linalg.norm(em.mode_matrix(z, stack, 12) @ v) < 1e-6
    assert np.allclose(np.linalg.norm(modes.vectors, axis=0), 1)


def test_null_vector_phase_is_deterministic(graded_modes):
    stack, modes = graded_modes
    z = modes.omegas[-3]
    a, b = em.null_vector(z, stack, 12), em.null_vector(z, stack, 12)
    assert np.array_equal(a, b)
    j = np.argmax(np.abs(a))
    assert a[j].imag == 0 and a[j].real > 0


def test_empty_cavity_solve_modes():
    empty = em.BilayerStack((), L=12.0)
    modes = em.solve_modes(empty, 5)
    pos = np.sort(modes.omegas.real[modes.omegas.real >= 0])
    assert np.allclose(pos, np.arange(5) * np.pi / 12, atol=1e-12)


def _single_branch(n, L=12.0):
    w = np.arange(n) * np.pi / L
    return em.ModalSolution(w.astype(complex), np.eye(n, dtype=complex), np.zeros(n))


def test_reconstruct_single_mode_form():
    L, n, m = 12.0, 6, 3
    modes = _single_branch(n, L)
    b = np.zeros(n)
    b[m] = 1
    x = np.linspace(0, L, 41)
    taus = np.array([0.0, 1.3, 7.0])
    f = em.reconstruct_field(modes, b, taus, x, L)
    phi = em.basis_functions(x, L, n)[m]
    for t, frame in zip(taus, f.frames):
        assert np.max(np.abs(frame - np.exp(-1j * m * np.pi / L * t) * phi)) < 1e-12


def test_reconstruct_paired_form_is_standing_wave():
    L, n, m = 12.0, 6, 2
    w = np.arange(1, n) * np.pi / L
    omegas = np.concatenate([[0.0], w, -w]).astype(complex)
    V = np.concatenate([np.eye(n), np.eye(n)[:, 1:]], axis=1).astype(complex)
    modes = em.ModalSolution(omegas, V, np.zeros(omegas.size))
    b = np.zeros(n)
    b[m] = 1
    x = np.linspace(0, L, 33)
    f = em.reconstruct_field(modes, b, [0.0, 2.5], x, L)
    phi = em.basis_functions(x, L, n)[m]
    assert np.max(np.abs(f.frames[1] - np.cos(m * np.pi / L * 2.5) * phi)) < 1e-12
    assert f.residual < 1e-13


def test_reconstruct_left_inverse(graded_modes):
    _, modes = graded_modes
    rng = np.random.default_rng(0)
    b = rng.normal(size=12)
    f = em.reconstruct_field(modes, b, [0.0], np.linspace(0, 12, 11), 12.0)
    V = modes.vectors.T
    Vp = np.linalg.solve(V.conj().T @ V, V.conj().T)
    assert np.max(np.abs(Vp @ V - np.eye(12))) < 1e-10
    assert f.residual < 1e-10 and not f.truncated
    with pytest.raises(ContractError):
        em.reconstruct_field(modes, np.ones(3), [0.0], [0.0], 12.0)


@given(st.floats(0.05, 3.0), st.floats(-0.3, 0.0))
def test_mirror_symmetry_of_t(re, im):
    stack = em.graded_stack(n_half=2)
    w = complex(re, im)
    a = em.mode_matrix(w, stack, 5)
    b = em.mode_matrix(-np.conj(w), stack, 5)
    assert np.max(np.abs(b - np.conj(a))) < 1e-9 * max(1, np.abs(a).max())
