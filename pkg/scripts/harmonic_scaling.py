"""Error of the linearised permittivity profile against the full ODE as v0 = log eps0 shrinks."""

import numpy as np

from maxdaemon import dielectric as di

for w in (np.pi, 4 * np.pi, 20 * np.pi):
    prev = None
    print(f"omega/c = {w / np.pi:g} pi")
    for v0 in (0.08, 0.04, 0.02, 0.01, 0.005):
        sp = di.InverseProblemSpec(w, eps0=np.exp(v0), deps0=0.0)
        err = np.max(np.abs(di.solve_epsilon_ode(sp).eps - di.harmonic_approx(sp.x_grid, sp).eps))
        ratio = "" if prev is None else f"  ratio {prev / err:.2f}"
        print(f"  v0={v0:<6g} max error {err:.3e}{ratio}")
        prev = err
