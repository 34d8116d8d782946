"""Sine integral Si(x) = int_0^x sin(t)/t dt.

Power series for |x| <= 4; above that Si(x) = pi/2 + Im E1(i x) with E1 from
its continued fraction (modified Lentz).  Absolute error is around 1e-15.
"""

from __future__ import annotations

import numpy as np

_SERIES_CUT = 4.0
_TINY = 1e-300
_EPS = 1e-16


def _si_series(x: np.ndarray) -> np.ndarray:
    # sum_k (-1)^k x^(2k+1) / ((2k+1) (2k+1)!)
    x2 = x * x
    term = x.copy()  # x^(2k+1)/(2k+1)!
    total = x.copy()
    for k in range(1, 40):
        term = -term * x2 / ((2 * k) * (2 * k + 1))
        total = total + term / (2 * k + 1)
        if np.all(np.abs(term) < 1e-18):
            break
    return total


def _e1_imag_axis(x: np.ndarray) -> np.ndarray:
    """E1(i x) for x > 0 by continued fraction."""
    b = 1.0 + 1j * x
    c = np.full(x.shape, 1.0 / _TINY, dtype=complex)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for i in range(2, 2000):
        a = -((i - 1) ** 2)
        b = b + 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) >= _EPS
        if not active.any():
            break
    return h * np.exp(-1j * x)


def si(x):
    """Sine integral, odd in x. Accepts scalars or arrays."""
    xa = np.asarray(x, dtype=float)
    ax = np.abs(np.atleast_1d(xa))
    out = np.empty(ax.shape)
    small = ax <= _SERIES_CUT
    if small.any():
        out[small] = _si_series(ax[small])
    if (~small).any():
        out[~small] = np.pi / 2 + _e1_imag_axis(ax[~small]).imag
    out = np.sign(np.atleast_1d(xa)) * out
    if xa.ndim == 0:
        return float(out[0])
    return out.reshape(xa.shape)
