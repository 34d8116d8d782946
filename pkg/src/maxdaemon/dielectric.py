"""Permittivity profile that reproduces the daemon for a wave of frequency omega.

With u = log eps and k = omega/c the profile obeys

    u'' = 2 i k r u' - 2 mu k^2 (exp(u) - 1),

r = f+/f- being +1 below omega_R and -1 between omega_R and omega_UV.
Outside both bands the daemon is off (r = 0) and only the free part remains.
Lengths are in cm, frequencies in cm^-1 (omega/c).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .classical import band_weights
from .errors import BranchCollapseError, ConfigError, DomainError, NumericalError, StiffnessError


@dataclass(frozen=True)
class InverseProblemSpec:
    """Initial-value problem for eps(x) at one frequency.

    omega_UV_over_c = None means no ultraviolet cutoff.
    """

    omega_over_c: float
    omega_R_over_c: float = 16 * np.pi
    mu_r: float = 1.0
    eps0: complex = 2.0
    deps0: complex = 1.0
    x_grid: np.ndarray = field(default_factory=lambda: np.linspace(-1.0, 1.0, 401))
    omega_UV_over_c: float | None = None
    h: float = 1e-3
    tol: float = 1e-8
    max_refine: int = 12

    def __post_init__(self):
        g = np.asarray(self.x_grid, dtype=float)
        object.__setattr__(self, "x_grid", g)
        if g.ndim != 1 or g.size == 0 or np.any(np.diff(g) <= 0):
            raise ConfigError("x_grid must be strictly increasing")
        if not self.omega_over_c > 0 or not self.omega_R_over_c > 0:
            raise ConfigError("frequencies must be > 0")
        if abs(complex(self.eps0)) == 0:
            raise ConfigError("eps0 must be non-zero")
        if not self.h > 0 or not self.tol > 0:
            raise ConfigError("h and tol must be > 0")

    @property
    def ratio(self) -> float:
        return activation_ratio(self.omega_over_c, self.omega_R_over_c, self.omega_UV_over_c)


@dataclass(frozen=True)
class EpsilonSolution:
    x: np.ndarray
    eps: np.ndarray
    dlog: np.ndarray  # d/dx log eps
    vb: np.ndarray  # -(i k / f-) d/dx log eps; nan when the daemon is off
    ratio: float


def activation_ratio(omega, omega_R, omega_UV=None) -> float:
    """f+/f- at a frequency: +1 below omega_R, -1 in (omega_R, omega_UV), 0 when off.

    A zero return means the daemon is inactive and the free equation applies.
    """
    uv = np.inf if omega_UV is None else omega_UV
    fp, fm = band_weights(omega, omega_R, uv)
    if fm == 0:
        if fp == 0:
            return 0.0
        raise DomainError("f- vanishes at the reference frequency; ratio undefined")
    return float(fp / fm)


def _rhs(k, r, mu):
    a = 2j * k * r
    b = 2.0 * mu * k * k

    def f(u, du):
        return du, a * du - b * (cmath.exp(u) - 1.0)

    return f


def _rk4(f, u, du, h, n):
    for _ in range(n):
        k1u, k1v = f(u, du)
        k2u, k2v = f(u + 0.5 * h * k1u, du + 0.5 * h * k1v)
        k3u, k3v = f(u + 0.5 * h * k2u, du + 0.5 * h * k2v)
        k4u, k4v = f(u + h * k3u, du + h * k3v)
        u = u + h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u)
        du = du + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
    return u, du


_LOG_FLOOR = math.log(1e-8)


def _march(f, k, u, du, x0, x1, h, tol, max_refine, block=100):
    """Fixed-step RK4 from x0 to x1 with a step-doubling check every block."""
    x = x0
    span = x1 - x0
    sgn = 1.0 if span > 0 else -1.0
    while sgn * (x1 - x) > 1e-15:
        for _ in range(max_refine + 1):
            length = min(block * h, sgn * (x1 - x))
            n = max(1, int(math.ceil(length / h - 1e-9)))
            step = sgn * length / n
            uc, dc = _rk4(f, u, du, step, n)
            uf, df = _rk4(f, u, du, step / 2, 2 * n)
            # relative Richardson estimate; u' is measured against k
            err = max(abs(uf - uc) / max(1.0, abs(uf)), abs(df - dc) / max(1.0, k, abs(df))) / 15.0
            if not (cmath.isfinite(uf) and cmath.isfinite(df)):
                err = math.inf
            if err <= tol:
                break
            h /= 2
        else:
            raise StiffnessError(f"no convergence near x={x:.6g} after {max_refine} step halvings")
        u, du = uf, df
        x = x + sgn * length
        if u.real < _LOG_FLOOR:
            raise BranchCollapseError(f"|eps| < 1e-8 near x={x:.6g}")
    return u, du, h


def solve_epsilon_ode(spec: InverseProblemSpec) -> EpsilonSolution:
    """Integrate outward from x = 0 in both directions; returns eps on x_grid."""
    k = spec.omega_over_c
    r = spec.ratio
    f = _rhs(k, r, spec.mu_r)
    eps0 = complex(spec.eps0)
    u0 = cmath.log(eps0)
    du0 = complex(spec.deps0) / eps0
    xs = spec.x_grid
    U = np.empty(xs.size, complex)
    dU = np.empty(xs.size, complex)
    outward = (np.nonzero(xs >= 0)[0], np.nonzero(xs < 0)[0][::-1])
    for order in outward:
        u, du, x, h = u0, du0, 0.0, spec.h
        for i in order:
            u, du, h = _march(f, k, u, du, x, xs[i], h, spec.tol, spec.max_refine)
            x = xs[i]
            U[i], dU[i] = u, du
    eps = np.exp(U)
    if not np.all(np.isfinite(eps)):
        raise NumericalError("permittivity overflowed")
    if r != 0:
        fm = band_weights(k, spec.omega_R_over_c, np.inf if spec.omega_UV_over_c is None else spec.omega_UV_over_c)[1]
        vb = -(1j * k / fm) * dU
    else:
        vb = np.full(xs.size, np.nan + 0j)
    return EpsilonSolution(xs.copy(), eps, dU, vb, r)


@dataclass(frozen=True)
class HarmonicApprox:
    v: np.ndarray
    eps: np.ndarray


def harmonic_approx(x, spec: InverseProblemSpec) -> HarmonicApprox:
    """Closed-form solution of the linearised equation.

    log eps = v(x) exp(i k r x), v = v0 cos(q x) + v0' sin(q x)/q with
    q = k sqrt(r^2 + 2 mu); for the active bands q = k sqrt(1 + 2 mu).
    """
    x = np.asarray(x, dtype=float)
    k = spec.omega_over_c
    r = spec.ratio
    q = k * math.sqrt(r * r + 2 * spec.mu_r)
    eps0 = complex(spec.eps0)
    v0 = cmath.log(eps0)
    v0p = complex(spec.deps0) / eps0 - 1j * k * r * v0
    v = v0 * np.cos(q * x) + v0p / q * np.sin(q * x)
    return HarmonicApprox(v, np.exp(v * np.exp(1j * k * r * x)))


def sweep(omegas, base: InverseProblemSpec) -> dict:
    """Solve at several frequencies sharing all other settings."""
    return {float(w): solve_epsilon_ode(replace(base, omega_over_c=float(w))) for w in omegas}
