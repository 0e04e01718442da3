"""Symmetry-reduced hyperkähler Monge-Ampère systems: jets, brackets, residuals and a solver."""

from . import brackets, coords, forms, jets, potentials, residuals, solver

__all__ = ["brackets", "coords", "forms", "jets", "potentials", "residuals", "solver"]
__version__ = "0.1.0"
