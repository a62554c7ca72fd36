"""Spectral toolkit for the fast-rotation limit of the compressible Euler system.

Modules: ``grid`` (periodic lattice), ``rotor`` (symbol and propagator),
``lp`` (Littlewood-Paley calculus), ``cutoff`` (frequency split),
``freewave`` (dispersion), ``nonlinear`` (evolution and lifespan),
``cli`` (experiment drivers).
"""

__version__ = "0.1.0"

from .grid import Grid, StateField  # noqa: E402
from .cutoff import CutoffSpec, schedule  # noqa: E402

__all__ = ["Grid", "StateField", "CutoffSpec", "schedule", "__version__"]
