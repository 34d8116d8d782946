import os
import sys
import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# tau grid of the lattice reference runs: 0..20000, i.e. 0..20 in units of 1e3
TAUS = np.linspace(0.0, 20000.0, 2001)


@pytest.fixture(scope="session")
def reference_run():
    from maxdaemon import lattice as lat

    cfg = lat.DaemonConfig(124, 0.1, np.pi / 4, np.pi)
    H = lat.build_hamiltonian(cfg)
    eig = lat.diagonalize(H)
    psi0 = lat.boltzmann_state(cfg, 1 / 100)
    return cfg, H, eig, psi0, lat.evolve(eig, psi0, TAUS)


@pytest.fixture(scope="session")
def graded_modes():
    from maxdaemon import emcavity as em

    stack = em.graded_stack()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", em.BranchWarning)
        modes = em.solve_modes(stack, 12)
    return stack, modes


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
