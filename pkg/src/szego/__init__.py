"""Nonlinear Fourier transform for the cubic Szegő equation on the circle."""

from .hardy import HardySymbol, GridValues, from_rational, sobolev_norm, eval_grid
from .blaschke import BlaschkeProduct
from .nlft import SpectralData, forward, inverse, norming_constants

__all__ = ["HardySymbol", "GridValues", "from_rational", "sobolev_norm", "eval_grid",
           "BlaschkeProduct", "SpectralData", "forward", "inverse", "norming_constants"]
__version__ = "0.1.0"
