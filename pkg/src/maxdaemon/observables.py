"""Diagnostics computed from an evolved WaveField."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .lattice import DaemonConfig, EigenSystem, WaveField, build_hamiltonian, diagonalize


@dataclass(frozen=True)
class EntropyTrace:
    taus: np.ndarray
    sigma: np.ndarray


@dataclass(frozen=True)
class LateralTrace:
    taus: np.ndarray
    left: np.ndarray
    right: np.ndarray
    center: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.left + self.center + self.right


@dataclass(frozen=True)
class PotentialTrace:
    taus: np.ndarray
    potential: np.ndarray  # <V>(tau)
    running_mean: np.ndarray  # (1/tau) int_0^tau <V>


def _halves(size: int):
    N = (size - 1) // 2
    return slice(0, N), N, slice(N + 1, size)


def free_energy_basis(cfg: DaemonConfig) -> EigenSystem:
    """Eigenbasis of the defect-free lattice of the same size."""
    return diagonalize(build_hamiltonian(cfg.free()))


def occupations(field: WaveField, basis: EigenSystem) -> np.ndarray:
    """rho_m(tau) = |nu_m^dagger Psi(tau)|^2, shape (time, mode)."""
    if field.frames.shape[1] != basis.vectors.shape[0]:
        raise ContractError("field and basis sizes differ")
    return np.abs(field.frames @ basis.vectors.conj()) ** 2


def shannon_entropy(field: WaveField, basis: EigenSystem) -> EntropyTrace:
    """sigma = -sum rho log rho in nats, with 0 log 0 = 0."""
    rho = occupations(field, basis)
    logs = np.log(np.where(rho > 0, rho, 1.0))
    return EntropyTrace(field.taus, -(rho * logs).sum(axis=1))


def lateral_probability(field: WaveField) -> LateralTrace:
    dens = np.abs(field.frames) ** 2
    left, c, right = _halves(dens.shape[1])
    return LateralTrace(field.taus, dens[:, left].sum(1), dens[:, right].sum(1), dens[:, c])


def lateral_energy(field: WaveField, H: np.ndarray) -> LateralTrace:
    """Re(Psi^dagger Pi H Psi) for the site projectors on n<0, n=0 and n>0."""
    if H.shape[0] != field.frames.shape[1]:
        raise ContractError("Hamiltonian and field sizes differ")
    HPsi = field.frames @ H.T
    local = np.real(field.frames.conj() * HPsi)
    left, c, right = _halves(local.shape[1])
    return LateralTrace(field.taus, local[:, left].sum(1), local[:, right].sum(1), local[:, c])


def expectation(field: WaveField, A: np.ndarray) -> np.ndarray:
    return np.real(np.einsum("ti,ij,tj->t", field.frames.conj(), A, field.frames))


def potential_work_trace(field: WaveField, cfg: DaemonConfig) -> PotentialTrace:
    """<V>(tau) with V = H - H_free and its running time average (trapezoid)."""
    V = build_hamiltonian(cfg) - build_hamiltonian(cfg.free())
    pot = expectation(field, V)
    t = field.taus
    integral = np.concatenate([[0.0], np.cumsum(0.5 * (pot[1:] + pot[:-1]) * np.diff(t))])
    span = t - t[0]
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(span > 0, integral / np.where(span > 0, span, 1.0), pot)
    return PotentialTrace(t, pot, mean)


def density_carpet(field: WaveField) -> np.ndarray:
    return np.abs(field.frames) ** 2
