"""Tight-binding lattice with a momentum-selective defect at the origin.

Everything is in rescaled units: energies in hbar^2/(2 m a^2), time
tau = hbar t / (2 m a^2) and the defect strength upsilon0 = m a^2 V0 / hbar^2.
Sites run over n = -N..N and array index i corresponds to site i - N.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ContractError, DomainError


@dataclass(frozen=True)
class DaemonConfig:
    """Lattice size and defect parameters.

    Params
    ------
    half_size : N, the lattice spans sites -N..N.
    upsilon0 : rescaled defect strength (>= 0).
    kappa_R : reference momentum in radians per site, 0 < kappa_R < kappa_D.
    kappa_D : ultraviolet cutoff, kappa_D <= pi.
    """

    half_size: int
    upsilon0: float = 0.1
    kappa_R: float = np.pi / 4
    kappa_D: float = np.pi

    def __post_init__(self):
        if int(self.half_size) != self.half_size or self.half_size < 1:
            raise ConfigError(f"half_size must be an integer >= 1, got {self.half_size}")
        if not np.isfinite(self.upsilon0) or self.upsilon0 < 0:
            raise ConfigError(f"upsilon0 must be finite and >= 0, got {self.upsilon0}")
        if not (0 < self.kappa_R < self.kappa_D <= np.pi):
            raise ConfigError(
                f"need 0 < kappa_R < kappa_D <= pi, got kappa_R={self.kappa_R}, kappa_D={self.kappa_D}"
            )

    @property
    def size(self) -> int:
        return 2 * self.half_size + 1

    @property
    def sites(self) -> np.ndarray:
        return np.arange(-self.half_size, self.half_size + 1)

    def free(self) -> "DaemonConfig":
        """Same lattice with the defect switched off."""
        return DaemonConfig(self.half_size, 0.0, self.kappa_R, self.kappa_D)


@dataclass(frozen=True)
class EigenSystem:
    energies: np.ndarray  # ascending, real
    vectors: np.ndarray  # column m is nu_m


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.ndim != 1 or not np.all(np.isfinite(a)):
            raise ContractError("state must be a finite 1-D vector")
        nrm = np.linalg.norm(a)
        if nrm == 0:
            raise ContractError("state has zero norm")
        object.__setattr__(self, "amplitudes", a / nrm)


@dataclass(frozen=True)
class WaveField:
    taus: np.ndarray
    frames: np.ndarray  # (time, site)


def kinetic_matrix(size: int) -> np.ndarray:
    """Free tight-binding block: 2 on the diagonal, -1 on the first off-diagonals."""
    return 2.0 * np.eye(size) - np.eye(size, k=1) - np.eye(size, k=-1)


def daemon_column(cfg: DaemonConfig, n: np.ndarray) -> np.ndarray:
    """Entries <n|H|0> of the defect column for sites n != 0 (zero at n = 0)."""
    n = np.asarray(n, dtype=float)
    out = np.zeros(n.shape, dtype=complex)
    nz = n != 0
    m = n[nz]
    out[nz] = (
        cfg.upsilon0
        / (2j * np.pi * m)
        * (2 * np.cos(cfg.kappa_R * m) - 1 - np.exp(-1j * cfg.kappa_D * m))
    )
    return out


def build_hamiltonian(cfg: DaemonConfig) -> np.ndarray:
    """Dense rescaled Hamiltonian, Hermitian by construction.

    Column 0 carries the defect coupling, row 0 is set to its conjugate,
    and the centre element takes the finite closed form 2 + upsilon0*kappa_D/pi.
    """
    N = cfg.half_size
    H = kinetic_matrix(cfg.size).astype(complex)
    col = daemon_column(cfg, cfg.sites)
    H[:, N] += col
    H[N, :] += col.conj()
    H[N, N] = 2.0 + cfg.upsilon0 * cfg.kappa_D / np.pi
    return H


def hamiltonian_on_plane_wave(cfg: DaemonConfig, kappa: float, n: int) -> complex:
    """<n|H|kappa> for the plane wave exp(i kappa n)/sqrt(2 pi).

    The dispersion term 2(1 - cos kappa) e^{i kappa n}/sqrt(2 pi) plus the
    defect column (n != 0).  At n = 0 the row sum runs over the finite lattice
    of `cfg` and includes the centre element, so the value equals the
    matrix-vector product away from the edges.
    """
    if abs(kappa) > np.pi:
        raise DomainError(f"|kappa| must be <= pi, got {kappa}")
    norm = 1.0 / np.sqrt(2 * np.pi)
    val = 2.0 * (1.0 - np.cos(kappa)) * np.exp(1j * kappa * n) * norm
    if cfg.upsilon0 == 0:
        return complex(val)
    if n != 0:
        val += daemon_column(cfg, np.array([n]))[0] * norm
    else:
        sites = cfg.sites
        row = daemon_column(cfg, sites).conj()
        val += np.sum(row * np.exp(1j * kappa * sites)) * norm
        val += cfg.upsilon0 * cfg.kappa_D / np.pi * norm
    return complex(val)


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Make the first component with modulus > 1e-8 of each column real positive."""
    vecs = vecs.copy()
    big = np.abs(vecs) > 1e-8
    first = np.argmax(big, axis=0)
    ref = vecs[first, np.arange(vecs.shape[1])]
    vecs *= (np.abs(ref) / ref)[None, :]
    return vecs


def diagonalize(H: np.ndarray) -> EigenSystem:
    """Hermitian eigensolve with ascending energies and phase-fixed vectors."""
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ContractError(f"expected a square matrix, got shape {H.shape}")
    scale = max(1.0, float(np.max(np.abs(H))) if H.size else 1.0)
    if np.max(np.abs(H - H.conj().T), initial=0.0) > 1e-12 * scale:
        raise ContractError("matrix is not Hermitian within 1e-12")
    w, v = np.linalg.eigh(H.astype(complex))
    return EigenSystem(energies=w, vectors=_fix_phases(v))


def boltzmann_state(cfg: DaemonConfig, beta: float) -> StateVector:
    """Thermal-like superposition of box modes sin(q (n+N) pi / 2N), q = 1..2N+1."""
    if not beta > 0:
        raise DomainError(f"beta must be > 0, got {beta}")
    N = cfg.half_size
    q = np.arange(1, cfg.size + 1)
    weights = np.exp(-beta * (q**2 - 1.0))
    modes = np.sin(np.outer(q, cfg.sites + N) * np.pi / (2 * N))
    return StateVector(weights @ modes)


def uniform_state(cfg: DaemonConfig) -> StateVector:
    return StateVector(np.ones(cfg.size))


def evolve(eig: EigenSystem, psi0: StateVector, taus) -> WaveField:
    """Psi(n, tau) = sum_m exp(-i tau Xi_m) (nu_m^dagger psi0) nu_m(n)."""
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    psi = psi0.amplitudes if isinstance(psi0, StateVector) else np.asarray(psi0, complex)
    V = eig.vectors
    if psi.shape[0] != V.shape[0]:
        raise ContractError(f"state length {psi.shape[0]} does not match basis size {V.shape[0]}")
    if not np.all(np.isfinite(taus)):
        raise ContractError("times must be finite")
    coeff = V.conj().T @ psi
    phases = np.exp(-1j * np.outer(taus, eig.energies))
    frames = (phases * coeff) @ V.T
    return WaveField(taus=taus, frames=frames)
