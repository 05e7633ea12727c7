"""Direct and inverse spectral problems for Dirac operators on (0, 1) with
r x r matrix potentials: spectral data, accelerants, the Krein equation and
finite-truncation diagnostics."""

from .model import PotentialGrid, SpectralData, SpectralDatum, lp_norm, make_test_potential
from .forward import spectral_data, weyl_m
from .accelerant import AccelerantGrid, build_H, is_accelerant
from .krein import solve_krein, theta
from .pipeline import Config, reconstruct, roundtrip

__version__ = "0.1.0"

__all__ = [
    "PotentialGrid", "SpectralData", "SpectralDatum", "lp_norm", "make_test_potential",
    "spectral_data", "weyl_m", "AccelerantGrid", "build_H", "is_accelerant",
    "solve_krein", "theta", "Config", "reconstruct", "roundtrip",
]
