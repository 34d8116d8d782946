"""Dielectric bilayer stack inside a conducting cavity [0, L].

Units: c = 1, frequencies in cm^-1, lengths and times in cm.

Fields are expanded in the Neumann cosine basis.  The basis used internally
is orthonormal (phi_0 = 1/sqrt(L), phi_m = sqrt(2/L) cos(kappa_m x)), so the
identity plays the role of the Gram matrix.  With log eps piecewise constant
the derivative terms reduce to jump sums at the layer edges.

The mode condition is T(w) x = 0 with

    T(w) = K - mu w^2 I3(w) - I4(w) - I5(w),    K = diag(kappa^2) + xi^2,

and D(w) = T(w) + w^2 I, so that D(w) x = w^2 x.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg as sla

from .errors import ConfigError, ContractError, NumericalError, PoleError


class BranchWarning(RuntimeWarning):
    """log(eps) evaluated close to the negative real axis."""


class DegenerateModeWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class Layer:
    omega_p: float
    omega_0: float
    gamma: float


@dataclass(frozen=True)
class BilayerStack:
    """Bilayers k = -N..N centred at a_k = L/2 + k b.

    Bilayer k covers [a_k - b/2, a_k + b/2): the left half [a_k - b/2, a_k)
    uses damping -gamma, the right half [a_k, a_k + b/2) uses +gamma.
    An empty `layers` tuple is the empty cavity.
    """

    layers: tuple = ()
    b: float = 0.12
    L: float = 12.0
    mu_r: float = 1.0
    xi2: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        n = len(self.layers)
        if n and n % 2 == 0:
            raise ConfigError("need an odd number of bilayers (k = -N..N)")
        if not self.L > 0 or not self.b > 0:
            raise ConfigError("L and b must be > 0")
        if n * self.b >= self.L:
            raise ConfigError("stack does not fit: (2N+1) b must be < L")
        for lay in self.layers:
            if not lay.omega_0 > 0 or lay.gamma < 0:
                raise ConfigError("need omega_0 > 0 and gamma >= 0 for every layer")

    @property
    def half(self) -> int:
        return (len(self.layers) - 1) // 2

    @property
    def centers(self) -> np.ndarray:
        k = np.arange(-self.half, self.half + 1) if self.layers else np.zeros(0)
        return self.L / 2 + k * self.b

    def params(self):
        """Arrays (omega_p, omega_0, gamma) in k order."""
        if not self.layers:
            z = np.zeros(0)
            return z, z, z
        a = np.array([(l.omega_p, l.omega_0, l.gamma) for l in self.layers], dtype=float)
        return a[:, 0], a[:, 1], a[:, 2]


def graded_stack(n_half=6, omega_p=3.0, b=0.12, L=12.0, mu_r=1.0, xi2=0.0) -> BilayerStack:
    """13-bilayer reference stack: omega_0 = 1.20 - 0.12|k|, gamma = 0.050 - 0.005|k|."""
    layers = tuple(
        Layer(omega_p, 1.20 - 0.12 * abs(k), 0.050 - 0.005 * abs(k)) for k in range(-n_half, n_half + 1)
    )
    return BilayerStack(layers, b, L, mu_r, xi2)


def lorentz_drude(omega, layer: Layer, star: bool = False):
    """1 + omega_p^2 / (omega_0^2 - omega^2 - i gamma omega), gamma -> -gamma on the star side."""
    g = -layer.gamma if star else layer.gamma
    w = np.asarray(omega, dtype=complex)
    den = layer.omega_0**2 - w**2 - 1j * g * w
    if np.any(np.abs(den) < 1e-12):
        raise PoleError("Lorentz-Drude resonance hit")
    out = 1.0 + layer.omega_p**2 / den
    return out[()] if out.ndim == 0 else out


def _layer_eps(omega, stack: BilayerStack):
    wp, w0, g = stack.params()
    w = complex(omega)
    den_r = w0**2 - w**2 - 1j * g * w
    den_l = w0**2 - w**2 + 1j * g * w
    if np.any(np.abs(den_r) < 1e-12) or np.any(np.abs(den_l) < 1e-12):
        raise PoleError("Lorentz-Drude resonance hit")
    return 1 + wp**2 / den_r, 1 + wp**2 / den_l


def epsilon_profile(x, omega, stack: BilayerStack):
    """Piecewise eps_r(x, omega); 1 outside the stack."""
    x = np.asarray(x, dtype=float)
    out = np.ones(x.shape, dtype=complex)
    if not stack.layers:
        return out[()] if out.ndim == 0 else out
    er, el = _layer_eps(omega, stack)
    hb = stack.b / 2
    for a, r, l in zip(stack.centers, er, el):
        out = np.where((x >= a) & (x < a + hb), r, out)
        out = np.where((x >= a - hb) & (x < a), l, out)
    return out[()] if out.ndim == 0 else out


# --------------------------------------------------------- basis pieces


def basis_scale(n_modes: int) -> np.ndarray:
    s = np.ones(n_modes)
    s[0] = 1 / np.sqrt(2)
    return s


def basis_functions(x, L: float, n_modes: int) -> np.ndarray:
    """Orthonormal Neumann basis, shape (n_modes, len(x))."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    kap = np.arange(n_modes) * np.pi / L
    return np.sqrt(2 / L) * basis_scale(n_modes)[:, None] * np.cos(np.outer(kap, x))


def _f(u, L, n, sign):
    m = np.arange(n)
    kap = m * np.pi / L
    sm, cm = np.sin(kap * u), np.cos(kap * u)
    return m[:, None] * np.outer(sm, cm) + sign * m[None, :] * np.outer(cm, sm)


def _g(u, L, n):
    kap = np.arange(n) * np.pi / L
    return np.outer(np.cos(kap * u), np.sin(kap * u))


def _overlap_antiderivative(u, L, n):
    """F(u) with dF/du = (2/L) cos(kappa_m u) cos(kappa_n u) (unnormalised basis)."""
    m = np.arange(n)
    mm, nn = np.meshgrid(m, m, indexing="ij")
    fm = _f(u, L, n, -1)
    with np.errstate(divide="ignore", invalid="ignore"):
        off = 2.0 / ((mm**2 - nn**2) * np.pi) * fm
    out = np.where(mm != nn, off, 0.0)
    diag = u / L + np.diag(_g(u, L, n)) / np.where(m > 0, m * np.pi, 1.0)
    diag[0] = 2 * u / L
    out[m, m] = diag
    return out


@dataclass(frozen=True)
class WindowMatrices:
    """Per-layer constant matrices in the orthonormal basis.

    right/left : overlap integrals of the two half windows.
    d2_right/d2_left : coefficient of log eps in the second-derivative term.
    d1_right/d1_left : coefficient of log eps in the first-derivative term.
    """

    right: np.ndarray
    left: np.ndarray
    d2_right: np.ndarray
    d2_left: np.ndarray
    d1_right: np.ndarray
    d1_left: np.ndarray


def _window_matrices(stack: BilayerStack, n_modes: int) -> WindowMatrices:
    L, hb = stack.L, stack.b / 2
    S = basis_scale(n_modes)
    SS = np.outer(S, S)
    col = np.arange(n_modes)[None, :]
    F = lambda u: _overlap_antiderivative(u, L, n_modes)
    fp = lambda u: _f(u, L, n_modes, +1)
    g = lambda u: _g(u, L, n_modes)
    c4 = -2 * np.pi / L**2
    c5 = 2 * np.pi / L**2 * col
    acc = {k: [] for k in ("right", "left", "d2_right", "d2_left", "d1_right", "d1_left")}
    for a in stack.centers:
        acc["right"].append(SS * (F(a + hb) - F(a)))
        acc["left"].append(SS * (F(a) - F(a - hb)))
        acc["d2_right"].append(SS * c4 * (fp(a + hb) - fp(a)))
        acc["d2_left"].append(SS * c4 * (fp(a) - fp(a - hb)))
        acc["d1_right"].append(SS * c5 * (g(a + hb) - g(a)))
        acc["d1_left"].append(SS * c5 * (g(a) - g(a - hb)))
    shape = (0, n_modes, n_modes)
    return WindowMatrices(**{k: np.array(v) if v else np.zeros(shape) for k, v in acc.items()})


@lru_cache(maxsize=16)
def window_matrices(stack: BilayerStack, n_modes: int) -> WindowMatrices:
    return _window_matrices(stack, n_modes)


def stiffness(stack: BilayerStack, n_modes: int) -> np.ndarray:
    kap = np.arange(n_modes) * np.pi / stack.L
    return np.diag(kap**2) + stack.xi2 * np.eye(n_modes)


# ---------------------------------------------------------- D(omega)


def _check_branch(er, el):
    z = np.concatenate([er, el])
    if np.any((z.real < 0) & (np.abs(z.imag) < 1e-3 * np.abs(z))):
        warnings.warn("log(eps) evaluated next to the branch cut", BranchWarning, stacklevel=3)


def integral_blocks(omega, stack: BilayerStack, n_modes: int):
    """(I3, I4, I5) at one frequency in the orthonormal basis."""
    I3 = np.eye(n_modes, dtype=complex)
    I4 = np.zeros((n_modes, n_modes), complex)
    I5 = np.zeros((n_modes, n_modes), complex)
    if not stack.layers:
        return I3, I4, I5
    W = window_matrices(stack, n_modes)
    er, el = _layer_eps(omega, stack)
    _check_branch(er, el)
    lr, ll = np.log(er), np.log(el)
    I3 = I3 + np.einsum("k,kij->ij", er - 1, W.right) + np.einsum("k,kij->ij", el - 1, W.left)
    I4 = np.einsum("k,kij->ij", lr, W.d2_right) + np.einsum("k,kij->ij", ll, W.d2_left)
    I5 = np.einsum("k,kij->ij", lr, W.d1_right) + np.einsum("k,kij->ij", ll, W.d1_left)
    return I3, I4, I5


def mode_matrix(omega, stack: BilayerStack, n_modes: int, log_weight: float = 1.0) -> np.ndarray:
    """T(w) = K - mu w^2 I3 - s (I4 + I5); s = log_weight scales the logarithmic part."""
    I3, I4, I5 = integral_blocks(omega, stack, n_modes)
    w = complex(omega)
    T = stiffness(stack, n_modes) - stack.mu_r * w**2 * I3
    if log_weight:
        T = T - log_weight * (I4 + I5)
    return T


def d_matrix(omega, stack: BilayerStack, n_modes: int) -> np.ndarray:
    """D(w) with D(w) x = w^2 x on modes."""
    if n_modes < 1:
        raise ContractError("n_modes must be >= 1")
    w = complex(omega)
    return mode_matrix(w, stack, n_modes) + w**2 * np.eye(n_modes)


def smallest_singular_value(omega, stack, n_modes, log_weight=1.0) -> float:
    return float(np.linalg.svd(mode_matrix(omega, stack, n_modes, log_weight), compute_uv=False)[-1])


# -------------------------------------------------------- polynomial part


@dataclass(frozen=True)
class PolynomialForm:
    coeffs: np.ndarray  # (degree + 1, n, n), coeffs[j] multiplies w^j
    factors: tuple  # distinct (omega_0, gamma) of the cleared denominators

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    def denominator(self, omega) -> complex:
        w = complex(omega)
        return np.prod([w0**2 - w**2 - 1j * g * w for w0, g in self.factors]) if self.factors else 1.0


def polynomialize(stack: BilayerStack, n_modes: int, max_degree: int = 64) -> PolynomialForm:
    """Clear all Lorentz-Drude denominators from the algebraic part of T(w).

    prod_j d_j(w) [K - mu w^2 I3(w)] = sum_j M_j w^j with d_j = w0_j^2 - w^2 - i g_j w
    running over distinct (w0, g) pairs; left halves contribute g -> -g.
    """
    W = window_matrices(stack, n_modes)
    wp, w0, g = stack.params()
    groups: dict = {}
    for i in range(len(stack.layers)):
        for gam, mat in ((g[i], W.right[i]), (-g[i], W.left[i])):
            key = (float(w0[i]), float(gam) + 0.0)
            groups[key] = groups.get(key, 0) + wp[i] ** 2 * mat
    keys = list(groups)
    degree = 2 + 2 * len(keys)
    if degree > max_degree:
        raise ConfigError(f"polynomial degree {degree} exceeds cap {max_degree}")
    polys = [np.array([w0_**2, -1j * g_, -1.0]) for w0_, g_ in keys]

    def product(skip=None):
        out = np.array([1.0 + 0j])
        for j, p in enumerate(polys):
            if j != skip:
                out = np.convolve(out, p)
        return out

    n = n_modes
    mu = stack.mu_r
    K = stiffness(stack, n)
    coeffs = np.zeros((degree + 1, n, n), complex)
    for j, c in enumerate(product()):
        coeffs[j] += c * K
        coeffs[j + 2] += -mu * c * np.eye(n)
    for i, key in enumerate(keys):
        for j, c in enumerate(product(skip=i)):
            coeffs[j + 2] += -mu * c * groups[key]
    return PolynomialForm(coeffs, tuple(keys))


def evaluate_polynomial(poly: PolynomialForm, omega) -> np.ndarray:
    w = complex(omega)
    return sum(c * w**j for j, c in enumerate(poly.coeffs))


@dataclass(frozen=True)
class PencilResult:
    eigenvalues: np.ndarray
    vectors: np.ndarray  # first block of each companion eigenvector, (n, count)
    generalized: bool


def pencil_eigs(coeffs, vectors: bool = False) -> PencilResult:
    """Roots of sum_j M_j w^j via block-companion linearisation.

    Uses M_top^{-1} when the leading coefficient is well conditioned and the
    two-matrix pencil otherwise.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.ndim == 1:
        coeffs = coeffs[:, None, None]
    d = coeffs.shape[0] - 1
    n = coeffs.shape[1]
    if d < 1:
        raise ContractError("need a polynomial of degree >= 1")
    top = coeffs[-1]
    N = n * d
    A = np.zeros((N, N), complex)
    A[:-n, n:] = np.eye(n * (d - 1))
    generalized = np.linalg.cond(top) > 1e12
    if not generalized:
        inv = np.linalg.inv(top)
        for j in range(d):
            A[-n:, j * n : (j + 1) * n] = -inv @ coeffs[j]
        if vectors:
            lam, V = np.linalg.eig(A)
        else:
            lam, V = np.linalg.eigvals(A), None
    else:
        B = np.eye(N, dtype=complex)
        B[-n:, -n:] = top
        for j in range(d):
            A[-n:, j * n : (j + 1) * n] = -coeffs[j]
        if vectors:
            lam, V = sla.eig(A, B)
        else:
            lam, V = sla.eigvals(A, B), None
        keep = np.isfinite(lam)
        lam = lam[keep]
        V = V[:, keep] if V is not None else None
    order = np.lexsort((lam.imag, lam.real))
    lam = lam[order]
    vecs = V[:n, order] if V is not None else np.zeros((n, 0))
    return PencilResult(lam, vecs, bool(generalized))


def causal(lam, tol=1e-9) -> np.ndarray:
    lam = np.asarray(lam)
    return lam[lam.imag <= tol * np.maximum(1.0, np.abs(lam))]


# ------------------------------------------------------------ refinement


@dataclass(frozen=True)
class RefinedMode:
    start: complex
    omega: complex
    converged: bool
    iterations: int
    smin: float


def _xi_step(lam, stack, n_modes, s):
    h = max(abs(lam), 1.0) * 1e-6
    T = mode_matrix(lam, stack, n_modes, s)
    dT = (mode_matrix(lam + h, stack, n_modes, s) - mode_matrix(lam - h, stack, n_modes, s)) / (2 * h)
    xi = sla.eigvals(T, -dT)
    xi = xi[np.isfinite(xi)]
    if xi.size == 0:
        raise NumericalError("local pencil has no finite eigenvalue")
    return xi[np.argmin(np.abs(xi))]


def _newton(lam, stack, n_modes, s, tol, max_iter):
    for it in range(1, max_iter + 1):
        try:
            xi = _xi_step(lam, stack, n_modes, s)
        except (PoleError, NumericalError):
            return lam, False, it
        lam = lam + xi
        if not np.isfinite(lam):
            return lam, False, it
        if abs(xi) < tol * max(1.0, abs(lam)):
            return lam, True, it
    return lam, False, max_iter


def refine_mode(
    lambda1, stack: BilayerStack, n_modes: int, tol=1e-6, max_iter=50, stages=20, log_weight=1.0
) -> RefinedMode:
    """Track a root of the algebraic part onto the full problem.

    The logarithmic part is switched on in `stages` equal steps; at each one
    the first-order expansion T(l + xi) ~ T(l) + xi T'(l) gives a small
    pencil whose smallest eigenvalue xi updates l.  A final Newton pass at
    full weight runs to 1e-12 relative step.  Success means the smallest
    singular value of T is below tol.  max_iter caps every Newton pass.
    log_weight = 0 drops the logarithmic part altogether.
    """
    lam = complex(lambda1)
    lw = float(log_weight)
    try:
        s0 = smallest_singular_value(lam, stack, n_modes, lw)
    except PoleError:
        s0 = np.inf
    if s0 < 1e-3 * tol:
        # already a root of the full problem (empty cavity, double root at 0...)
        return RefinedMode(lam, lam, True, 0, s0)
    total = 0
    if stack.layers and lw:
        for s in np.linspace(0, lw, stages + 1)[1:]:
            lam, _, it = _newton(lam, stack, n_modes, s, 1e-10, max_iter)
            total += it
    lam, _, it = _newton(lam, stack, n_modes, lw, 1e-12, max_iter)
    total += it
    try:
        sm = smallest_singular_value(lam, stack, n_modes, lw)
    except PoleError:
        sm = np.inf
    if not np.isfinite(sm) or sm >= tol:
        return RefinedMode(complex(lambda1), complex(lambda1), False, total, sm)
    return RefinedMode(complex(lambda1), lam, True, total, sm)


def null_vector(omega, stack: BilayerStack, n_modes: int) -> np.ndarray:
    """Unit right singular vector for the smallest singular value of T(w).

    Phase: largest-modulus entry made real positive.  When the two smallest
    singular values are within 1e-8 a warning is raised and both vectors are
    returned as columns of a (n, 2) array.
    """
    _, s, vh = np.linalg.svd(mode_matrix(omega, stack, n_modes))
    vecs = [vh[-1].conj()]
    if n_modes > 1 and s[-2] - s[-1] < 1e-8:
        warnings.warn("near-degenerate mode", DegenerateModeWarning, stacklevel=2)
        vecs.append(vh[-2].conj())
    out = []
    for v in vecs:
        j = np.argmax(np.abs(v))
        out.append(v * abs(v[j]) / v[j])
    return out[0] if len(out) == 1 else np.stack(out, axis=1)


# ------------------------------------------------------------- pipeline


@dataclass(frozen=True)
class ModalSolution:
    omegas: np.ndarray
    vectors: np.ndarray  # column m is v(omega_m)
    residuals: np.ndarray  # smallest singular value at omega_m
    algebraic: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))  # all lambda^(1)
    failed: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))  # starts that did not converge


def empty_cavity_frequencies(stack: BilayerStack, n_modes: int) -> np.ndarray:
    kap = np.arange(n_modes) * np.pi / stack.L
    return np.sqrt((kap**2 + stack.xi2) / stack.mu_r)


def solve_modes(stack: BilayerStack, n_modes: int, tol=1e-6, snap=1e-9, dedupe=1e-7, zero_snap=1e-6) -> ModalSolution:
    """Pencil, causal filter, refinement, mirror completion and null vectors.

    Starts are the causal algebraic roots with Re >= 0; converged distinct
    refined roots with Im <= 0 are kept and completed with their partners
    -conj(w), which are exact roots because T(-conj w) = conj T(w).
    Newton converges slowly onto the double root at w = 0; roots within
    zero_snap of the origin are placed on it when T(0) is singular.
    """
    zero_is_root = smallest_singular_value(0.0, stack, n_modes) < 1e-3 * tol
    poly = polynomialize(stack, n_modes)
    lam = pencil_eigs(poly.coeffs).eigenvalues
    starts = causal(lam)
    starts = starts[starts.real >= -snap]
    kept, failed = [], []
    for l0 in starts:
        r = refine_mode(l0, stack, n_modes, tol=tol) if stack.layers else RefinedMode(l0, l0, True, 0, 0.0)
        if not r.converged:
            failed.append(l0)
            continue
        w = r.omega
        if zero_is_root and abs(w) < zero_snap:
            w = 0j
        if abs(w.imag) < snap:
            w = complex(w.real, 0.0)
        if abs(w.real) < snap:
            w = complex(0.0, w.imag)
        if w.imag > 0 or w.real < 0:
            continue
        if any(abs(w - u) < dedupe * max(1.0, abs(w)) for u in kept):
            continue
        kept.append(w)
    kept.sort(key=lambda z: (z.real, z.imag))
    full = list(kept) + [-np.conj(w) for w in kept if w.real != 0]
    omegas = np.array(sorted(full, key=lambda z: (z.real, z.imag)), dtype=complex)
    vecs, res = [], []
    for w in omegas:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateModeWarning)
            v = null_vector(w, stack, n_modes)
        if v.ndim == 2:
            v = v[:, 0]
        vecs.append(v)
        res.append(smallest_singular_value(w, stack, n_modes))
    V = np.array(vecs).T if vecs else np.zeros((n_modes, 0), complex)
    return ModalSolution(omegas, V, np.array(res), lam, np.array(failed, dtype=complex))


@dataclass(frozen=True)
class FieldReconstruction:
    times: np.ndarray
    x_grid: np.ndarray
    frames: np.ndarray  # (time, x)
    coefficients: np.ndarray  # c
    residual: float  # |c V - b|
    condition: float  # cond(V^dagger V)
    truncated: bool


def reconstruct_field(modes: ModalSolution, b_init, taus, x_grid, L: float) -> FieldReconstruction:
    """Psi(x, tau) = sum_m c_m exp(-i w_m tau) v_m . Phi(x) with c = b V^+.

    Rows of V are the mode vectors.  V^+ = (V^dagger V)^-1 V^dagger; if
    cond(V^dagger V) > 1e12 a truncated-spectrum pseudoinverse is used.
    """
    V = modes.vectors.T  # (modes, basis)
    b = np.asarray(b_init, dtype=complex)
    if V.shape[0] < 1:
        raise ContractError("need at least one mode")
    if b.shape != (V.shape[1],):
        raise ContractError(f"b_init must have length {V.shape[1]}")
    gram = V.conj().T @ V
    cond = float(np.linalg.cond(gram))
    truncated = cond > 1e12
    if truncated:
        Vp = np.linalg.pinv(V, rcond=1e-6)
    else:
        Vp = np.linalg.solve(gram, V.conj().T)
    c = b @ Vp
    resid = float(np.linalg.norm(c @ V - b))
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    Phi = basis_functions(x_grid, L, V.shape[1])
    shapes = V @ Phi  # (modes, x)
    frames = (c * np.exp(-1j * np.outer(taus, modes.omegas))) @ shapes
    return FieldReconstruction(taus, np.asarray(x_grid, float), frames, c, resid, cond, truncated)


def side_asymmetry(field: FieldReconstruction, L: float) -> np.ndarray:
    """(R - L)/(R + L) of int |Psi|^2 over the halves split at L/2, per frame."""
    x = field.x_grid
    d = np.abs(field.frames) ** 2
    left = x <= L / 2
    right = x >= L / 2
    Lw = np.trapezoid(d[:, left], x[left], axis=1)
    Rw = np.trapezoid(d[:, right], x[right], axis=1)
    return (Rw - Lw) / (Rw + Lw)
