"""Numerical lab for pointwise Weyl laws of Schroedinger operators with a
radial singular potential on the flat torus."""

__version__ = "0.1.0"
