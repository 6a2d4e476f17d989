"""Pseudo-spectral Navier-Stokes-Voigt simulator and statistics laboratory."""

__version__ = "0.1.0"

from .kernels import HAVE_COMPILED

__all__ = ["HAVE_COMPILED", "__version__"]
