"""Green's functions for the non-local momentum-selective point defect.

The box is x in [-L/2, L/2] with Dirichlet walls, kappa_n = n pi / L and
E_n = kappa_n^2 / 2.  Green's functions follow the resolvent convention
G = (H - E)^(-1), i.e. G0 = sum phi phi / (E_n - E).  Evaluations add
+i*eta to the energy.

The perturbed Green's function is assembled from four building blocks
P1(x'), P2(x), Q1, Q2 (overlaps of the defect's Fourier kernel with G0).
Block providers are small classes so the same assembly serves the exact
container sums, their step approximation, and the local-delta reduction.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigError, DomainError, PoleError
from .specfun import si


@dataclass(frozen=True)
class ContainerSpec:
    """Box and defect parameters.

    Params
    ------
    L : box length.
    M : number of terms kept in each parity series.
    P_R : reference momentum of the activation band.
    eta : imaginary offset added to the energy.
    strength : overall coupling g of the defect kernel; P-blocks scale as g,
        Q1 as g^2.  g = 1 is the bare kernel.
    """

    L: float = 2.0
    M: int = 2000
    P_R: float = 20.0 * np.pi
    eta: float = 1e-6
    strength: float = 1.0

    def __post_init__(self):
        if not self.L > 0:
            raise ConfigError(f"L must be > 0, got {self.L}")
        if int(self.M) != self.M or self.M < 1:
            raise ConfigError(f"M must be an integer >= 1, got {self.M}")
        if not self.P_R > 0:
            raise ConfigError(f"P_R must be > 0, got {self.P_R}")
        if self.eta < 0:
            raise ConfigError(f"eta must be >= 0, got {self.eta}")

    @property
    def a(self) -> float:
        return self.P_R * self.L / 2

    @property
    def k_ref(self) -> int:
        """Integer part of a/pi."""
        return int(np.floor(self.a / np.pi + 1e-12))

    @property
    def frac(self) -> float:
        return max(self.a / np.pi - self.k_ref, 0.0)

    def kappa(self, n):
        return np.asarray(n) * np.pi / self.L

    def energy(self, n):
        return 0.5 * self.kappa(n) ** 2


def _shift(E, spec: ContainerSpec):
    return np.asarray(E, dtype=complex) + 1j * spec.eta


@lru_cache(maxsize=32)
def _si_weights(a: float, M: int) -> np.ndarray:
    """C_n = Si(a + n pi) - Si(a - n pi) - Si(n pi), n = 1..M."""
    n = np.arange(1, M + 1) * np.pi
    return si(a + n) - si(a - n) - si(n)


def si_weights(spec: ContainerSpec) -> np.ndarray:
    return _si_weights(float(spec.a), int(spec.M))


# ---------------------------------------------------------------- free box


def g0_container(x, xp, E, spec: ContainerSpec):
    """Truncated parity-split spectral sum for the free box Green's function."""
    x = np.asarray(x, dtype=float)[..., None]
    xp = np.asarray(xp, dtype=float)[..., None]
    Ez = _shift(E, spec)[..., None]
    m = np.arange(1, spec.M + 1)
    ke, ko = spec.kappa(2 * m), spec.kappa(2 * m - 1)
    odd = np.sin(ke * x) * np.sin(ke * xp) / (spec.energy(2 * m) - Ez)
    even = np.cos(ko * x) * np.cos(ko * xp) / (spec.energy(2 * m - 1) - Ez)
    return (2.0 / spec.L) * (odd + even).sum(axis=-1)


def g0_origin(E, spec: ContainerSpec):
    """G0(0, 0, E): only the cosine modes contribute."""
    Ez = _shift(E, spec)[..., None]
    m = np.arange(1, spec.M + 1)
    return (2.0 / spec.L) * (1.0 / (spec.energy(2 * m - 1) - Ez)).sum(axis=-1)


# ---------------------------------------------------------- Fourier kernel


def fourier_activation(y, P_R: float, sign: int = 1, P_UV: float | None = None):
    """V~(+-y) = +-(1 - 2 cos(P_R y)) / (2 i pi y).

    At y = 0 the closed form has no finite value; the defining momentum
    integral over the two activation bands gives +-P_UV/(2 pi) there, which
    needs P_UV.
    """
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1")
    y = np.asarray(y, dtype=float)
    zero = y == 0
    if np.any(zero) and P_UV is None:
        raise DomainError("y = 0 needs the ultraviolet cutoff P_UV")
    ys = np.where(zero, 1.0, y)
    val = sign * (1.0 - 2.0 * np.cos(P_R * ys)) / (2j * np.pi * ys)
    if np.any(zero):
        val = np.where(zero, sign * P_UV / (2 * np.pi) + 0j, val)
    return val[()] if val.ndim == 0 else val


# --------------------------------------------------------------- blocks


@dataclass(frozen=True)
class BlockValues:
    p1: complex
    p2: complex
    q1: complex
    q2: complex


class ContainerBlocks:
    """Exact truncated Si sums.  P2 = -P1 and Q2 = 0 hold by construction."""

    def __init__(self, spec: ContainerSpec):
        self.spec = spec
        self._C = si_weights(spec)
        m = np.arange(1, spec.M + 1)
        self._k = spec.kappa(2 * m)
        self._E = spec.energy(2 * m)

    def p1(self, xp, E):
        s = self.spec
        xp = np.asarray(xp, dtype=float)[..., None]
        Ez = _shift(E, s)[..., None]
        terms = self._C * np.sin(self._k * xp) / (self._E - Ez)
        return -s.strength * 2.0 / (1j * np.pi * s.L) * terms.sum(axis=-1)

    def p2(self, x, E):
        return -self.p1(x, E)

    def q1(self, E):
        s = self.spec
        Ez = _shift(E, s)[..., None]
        terms = self._C**2 / (self._E - Ez)
        return s.strength**2 * 2.0 / (np.pi**2 * s.L) * terms.sum(axis=-1)

    def q2(self, E):
        return np.zeros_like(_shift(E, self.spec))


class ApproxBlocks(ContainerBlocks):
    """Step-function replacement of the Si weights.

    Sign of P1 is chosen to agree with the exact sum: the step form
    approximates Si(n pi + a) - Si(n pi - a), whose bracket differs from
    the exact weight C_n by an overall sign.
    """

    def __init__(self, spec: ContainerSpec):
        if spec.a <= np.pi:
            raise DomainError("step approximation needs a = P_R L / 2 > pi")
        super().__init__(spec)
        k = spec.k_ref
        n = np.arange(1, spec.M + 1)
        # weight multiplying s_n/(E_2n - E) inside the -2/(iL)(...) bracket
        w = np.where(n < k, 1.0, 0.0) - 0.5
        w = np.where(n == k, 0.5 * (1 + 2 * spec.frac) - 0.5, w)
        self._w = w
        self._qmask = np.where(n == k, 0.0, 1.0)

    def p1(self, xp, E):
        s = self.spec
        xp = np.asarray(xp, dtype=float)[..., None]
        Ez = _shift(E, s)[..., None]
        terms = self._w * np.sin(self._k * xp) / (self._E - Ez)
        return s.strength * 2.0 / (1j * s.L) * terms.sum(axis=-1)

    def q1(self, E):
        s = self.spec
        Ez = _shift(E, s)[..., None]
        terms = self._qmask / (self._E - Ez)
        return s.strength**2 / (2.0 * s.L) * terms.sum(axis=-1)


class ConstantPotentialBlocks:
    """Blocks for a kernel collapsed to (V0/2) delta(x) on each side."""

    def __init__(self, spec: ContainerSpec, V0: float):
        self.spec = spec
        self.s = 0.5 * V0

    def p1(self, xp, E):
        return self.s * g0_container(0.0, xp, E, self.spec)

    def p2(self, x, E):
        return self.s * g0_container(x, 0.0, E, self.spec)

    def q1(self, E):
        return self.s**2 * g0_origin(E, self.spec)

    def q2(self, E):
        return self.s * g0_origin(E, self.spec)


class ZeroBlocks:
    def __init__(self, spec: ContainerSpec):
        self.spec = spec

    def p1(self, xp, E):
        return np.zeros(np.broadcast(np.asarray(xp), np.asarray(E)).shape, complex)[()]

    p2 = p1

    def q1(self, E):
        return np.zeros_like(_shift(E, self.spec))[()]

    q2 = q1


def container_blocks(x, E, spec: ContainerSpec) -> BlockValues:
    """P1, P2, Q1, Q2 of the exact container sums at position x."""
    b = ContainerBlocks(spec)
    return BlockValues(b.p1(x, E), b.p2(x, E), b.q1(E), b.q2(E))


def approx_blocks(spec: ContainerSpec, E, x=0.0):
    """Step-approximated (P1(x), Q1)."""
    b = ApproxBlocks(spec)
    return b.p1(x, E), b.q1(E)


# ------------------------------------------------------------- assembly


@dataclass(frozen=True)
class GreenEvaluation:
    value: complex
    g0: complex
    p1_x: complex
    p1_xp: complex
    q1: complex
    q2: complex


def assemble(g0_xxp, g0_x0, g0_0xp, g0_00, p1_xp, p2_x, p2_0, q1, q2):
    """General perturbed Green's function from its building blocks."""
    r1 = p1_xp / (1 + q2)
    q3 = q1 / (1 + q2)
    den = 1 + p2_0 - g0_00 * q3
    if np.any(np.abs(den) < 1e-14):
        raise PoleError("vanishing denominator 1 + P2(0) - G0(0,0) Q3")
    return (
        g0_xxp
        + g0_x0 * g0_0xp * q3 / den
        - g0_x0 * r1 * (1 + p2_0) / den
        - p2_x * (g0_0xp - g0_00 * r1) / den
    )


def green_daemon(x, xp, E, spec: ContainerSpec, blocks=None) -> GreenEvaluation:
    """Perturbed box Green's function; exact container blocks by default."""
    if blocks is None:
        blocks = ContainerBlocks(spec)
    g0 = g0_container(x, xp, E, spec)
    g0_x0 = g0_container(x, 0.0, E, spec)
    g0_0xp = g0_container(0.0, xp, E, spec)
    g0_00 = g0_origin(E, spec)
    p1_xp, p1_x = blocks.p1(xp, E), blocks.p1(x, E)
    q1, q2 = blocks.q1(E), blocks.q2(E)
    val = assemble(g0, g0_x0, g0_0xp, g0_00, p1_xp, blocks.p2(x, E), blocks.p2(0.0, E), q1, q2)
    return GreenEvaluation(val, g0, p1_x, p1_xp, q1, q2)


def green_container_form(x, xp, E, spec: ContainerSpec):
    """The same quantity written out with P2 = -P1, Q2 = 0 and P1(0) = 0."""
    b = ContainerBlocks(spec)
    g0 = g0_container(x, xp, E, spec)
    gx0 = g0_container(x, 0.0, E, spec)
    g0xp = g0_container(0.0, xp, E, spec)
    g00 = g0_origin(E, spec)
    px, pxp, q1 = b.p1(x, E), b.p1(xp, E), b.q1(E)
    den = 1 - g00 * q1
    return g0 + (px * g0xp - gx0 * pxp + gx0 * g0xp * q1 - px * g00 * pxp) / den


def antisymmetric_part(x, xp, E, spec: ContainerSpec):
    """[P1(x) G0(0,x') - G0(x,0) P1(x')]/D, the only antisymmetric source."""
    b = ContainerBlocks(spec)
    den = 1 - g0_origin(E, spec) * b.q1(E)
    cross = b.p1(x, E) * g0_container(0.0, xp, E, spec) - g0_container(x, 0.0, E, spec) * b.p1(xp, E)
    return cross / den


def green_delta(x, xp, E, V0: float, spec: ContainerSpec):
    """Local delta perturbation V0 delta(x)."""
    g0 = g0_container(x, xp, E, spec)
    if V0 == 0:
        return g0
    den = 1 + V0 * g0_origin(E, spec)
    if np.any(np.abs(den) < 1e-14):
        raise PoleError("1 + V0 G0(0,0,E) vanishes")
    return g0 - V0 * g0_container(x, 0.0, E, spec) * g0_container(0.0, xp, E, spec) / den


# ---------------------------------------------------------- Si steps


def si_step_approx(n: int, a: float) -> float:
    """Step form of Si(n pi + a) - Si(n pi - a) with k = floor(a/pi), eps = frac(a/pi).

    pi/2 - pi/2 H(n-k) + pi/2 H(k-n) + pi eps [n == k]; both steps vanish at n == k.
    """
    if n < 1 or a < 0:
        raise DomainError("need n >= 1 and a >= 0")
    k = int(np.floor(a / np.pi + 1e-12))
    eps = max(a / np.pi - k, 0.0)
    if n == k:
        return np.pi / 2 + np.pi * eps
    return np.pi / 2 - (np.pi / 2 if n > k else 0.0) + (np.pi / 2 if k > n else 0.0)


def si_difference(n: int, a: float) -> float:
    return si(n * np.pi + a) - si(n * np.pi - a)


# ----------------------------------------------------------------- poles


@dataclass(frozen=True)
class Pole:
    energy: float
    kind: str  # "bare" or "perturbed"
    parent: int  # index j of the nearest bare pole E_j
    distinguished: bool = False


def pole_denominator(E, spec: ContainerSpec, blocks=None):
    """D(E) = 1 - G0(0,0,E) Q1(E); real for real E when eta = 0."""
    if blocks is None:
        blocks = ContainerBlocks(spec)
    return 1.0 - g0_origin(E, spec) * blocks.q1(E)


def _bracket_grid(lo: float, hi: float, n: int = 60) -> np.ndarray:
    s = np.geomspace(1e-12, 0.5, n)
    w = hi - lo
    return np.unique(np.concatenate([lo + w * s, hi - w * s[::-1]]))


def find_poles(spec: ContainerSpec, E_range) -> list[Pole]:
    """Bare poles E_j in range plus real roots of 1 - G0(0,0) Q1 between them.

    Each bracket between consecutive bare poles is sampled on a grid
    clustered geometrically toward both ends (roots sit very close to the
    bare poles) and sign changes are polished with brentq.
    """
    lo, hi = map(float, E_range)
    if not hi > lo:
        raise DomainError("E_range must be increasing")
    sp = replace(spec, eta=0.0)
    blocks = ContainerBlocks(sp)
    j = np.arange(1, 2 * sp.M + 1)
    Ej = sp.energy(j)
    inside = (Ej > lo) & (Ej < hi)
    poles = [Pole(float(e), "bare", int(i)) for e, i in zip(Ej[inside], j[inside])]
    if sp.strength == 0:
        return poles
    edges = np.concatenate([[lo], Ej[inside], [hi]])
    D = lambda e: float(np.real(pole_denominator(e, sp, blocks)))
    target = 2 * sp.k_ref
    roots = []
    for a, b in zip(edges[:-1], edges[1:]):
        grid = _bracket_grid(a, b)
        vals = np.real(pole_denominator(grid, sp, blocks))
        ok = np.isfinite(vals)
        grid, vals = grid[ok], vals[ok]
        for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
            r = brentq(D, grid[i], grid[i + 1], xtol=1e-14 * max(1.0, abs(grid[i])), rtol=1e-15)
            parent = int(j[np.argmin(np.abs(Ej - r))])
            roots.append(Pole(float(r), "perturbed", parent, parent == target))
    return sorted(poles + roots, key=lambda p: (p.energy, p.kind))
