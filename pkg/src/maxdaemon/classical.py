"""Classical phase-space daemon: free particles in [-x_L, x_L] with a
momentum-selective wall at x = 0.

Particles move with unit mass.  Outer walls always reflect.  At x = 0 a
particle reflects whenever the activation function is non-zero for its
momentum and transmits otherwise.  Stepping is event driven inside every
dt so reflections are exact and |p| is conserved bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError


def _theta(x):
    return np.heaviside(x, 0.5)


def band_weights(q, P_R: float, P_UV: float):
    """(f_plus, f_minus) as functions of |p| (or of a frequency)."""
    q = np.abs(np.asarray(q, dtype=float))
    a, b, c = _theta(P_R - q), _theta(q - P_R), _theta(q - P_UV)
    return 0.5 * (a + b - c), 0.5 * (a - b + c)


def activation(p, P_R: float, P_UV: float):
    """V_act(p) = f_-(|p|) sgn(p) + f_+(|p|).

    Equals 1 on (0, P_R) and on (-P_UV, -P_R), 0 elsewhere, with 1/2 on
    the thresholds.
    """
    fp, fm = band_weights(p, P_R, P_UV)
    out = fm * np.sign(p) + fp
    return out[()] if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class ClassicalEnsemble:
    x: np.ndarray
    p: np.ndarray
    P_R: float = 1.0
    P_UV: float = 2.0
    x_L: float = 1.0

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        p = np.atleast_1d(np.asarray(self.p, dtype=float))
        if x.shape != p.shape:
            raise ConfigError("x and p must have the same length")
        if not (0 < self.P_R < self.P_UV) or not self.x_L > 0:
            raise ConfigError("need 0 < P_R < P_UV and x_L > 0")
        if np.any(np.abs(x) > self.x_L):
            raise ConfigError("all particles must satisfy |x| <= x_L")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)

    def __len__(self):
        return self.x.size

    def with_state(self, x, p) -> "ClassicalEnsemble":
        return ClassicalEnsemble(x, p, self.P_R, self.P_UV, self.x_L)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    x: np.ndarray  # (time, particle)
    p: np.ndarray


def _advance(x, p, t, P_R, P_UV, x_L):
    """Move every particle for time t, resolving all reflections exactly."""
    x, p = x.copy(), p.copy()
    left = np.full(x.shape, float(t))
    moving = (p != 0) & (left > 0)
    while moving.any():
        idx = np.nonzero(moving)[0]
        xi, pi = x[idx], p[idx]
        blocked = activation(pi, P_R, P_UV) != 0
        toward_gate = blocked & (((xi < 0) & (pi > 0)) | ((xi > 0) & (pi < 0)))
        target = np.where(toward_gate, 0.0, np.sign(pi) * x_L)
        need = np.abs(target - xi) / np.abs(pi)
        hit = need <= left[idx]
        # particles that reach their wall: land on it and flip
        h = idx[hit]
        x[h] = target[hit]
        p[h] = -p[h]
        left[h] -= need[hit]
        # the rest fly free for the remaining time
        f = idx[~hit]
        x[f] = x[f] + p[f] * left[f]
        left[f] = 0.0
        moving = (p != 0) & (left > 0)
    return x, p


def step_ensemble(ens: ClassicalEnsemble, dt: float, n_steps: int) -> Trajectory:
    """Snapshots every dt for n_steps steps (n_steps + 1 frames)."""
    if not dt > 0:
        raise DomainError("dt must be > 0")
    if n_steps < 0:
        raise DomainError("n_steps must be >= 0")
    xs, ps = [ens.x.copy()], [ens.p.copy()]
    x, p = ens.x, ens.p
    for _ in range(int(n_steps)):
        x, p = _advance(x, p, dt, ens.P_R, ens.P_UV, ens.x_L)
        xs.append(x)
        ps.append(p)
    return Trajectory(np.arange(n_steps + 1) * dt, np.array(xs), np.array(ps))


def sorting_ensembles(n_particles: int, P_R=1.0, P_UV=2.0, x_L=1.0, p_min_frac=0.1, seed=0):
    """Two uniform ensembles of n_particles/2 each.

    rho1: x in (0, x_L), p in (p_min, P_R) - slow movers on the right.
    rho2: x in (-x_L, 0), p in (-P_UV, -P_R) - fast movers on the left.
    """
    rng = np.random.default_rng(seed)
    n1 = n_particles // 2
    n2 = n_particles - n1
    p_min = p_min_frac * P_R
    x = np.concatenate([rng.uniform(0, x_L, n1), rng.uniform(-x_L, 0, n2)])
    p = np.concatenate([rng.uniform(p_min, P_R, n1), rng.uniform(-P_UV, -P_R, n2)])
    # keep strictly away from the gate
    x = np.where(x == 0, 0.5 * x_L * np.sign(p), x)
    return ClassicalEnsemble(x, p, P_R, P_UV, x_L)


@dataclass(frozen=True)
class Occupancy:
    slow_left: float  # fraction of |p| < P_R particles with x < 0
    fast_right: float  # fraction of P_R < |p| < P_UV particles with x > 0
    left: float  # fraction of all particles with x < 0
    temp_left: float  # mean p^2 on x < 0
    temp_right: float


def occupancy(ens: ClassicalEnsemble, x=None, p=None) -> Occupancy:
    x = ens.x if x is None else np.asarray(x)
    p = ens.p if p is None else np.asarray(p)
    ap = np.abs(p)
    slow = ap < ens.P_R
    fast = (ap > ens.P_R) & (ap < ens.P_UV)
    frac = lambda mask, sel: float(np.mean(mask[sel])) if sel.any() else float("nan")
    mean_sq = lambda sel: float(np.mean(p[sel] ** 2)) if sel.any() else float("nan")
    return Occupancy(
        slow_left=frac(x < 0, slow),
        fast_right=frac(x > 0, fast),
        left=float(np.mean(x < 0)) if x.size else float("nan"),
        temp_left=mean_sq(x < 0),
        temp_right=mean_sq(x > 0),
    )
