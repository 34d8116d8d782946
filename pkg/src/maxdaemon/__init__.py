"""Dynamical Maxwell daemon: lattice dynamics, Green's functions and a dielectric cavity analogue."""

__version__ = "0.1.0"
