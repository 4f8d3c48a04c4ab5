"""Spectra and eigenfunction statistics of a point scatterer on flat 3-tori."""

from .lattice import TorusSpec
from .presets import PRESETS, get_preset
from .spectral import make_context, solve_eigenvalues, matrix_element

__all__ = ["TorusSpec", "PRESETS", "get_preset", "make_context", "solve_eigenvalues", "matrix_element"]
__version__ = "0.1.0"
