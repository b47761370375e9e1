"""Semiclassical tunneling analysis of the triple-well potential.

Instanton construction, Gelfand-Yaglom fluctuation determinants, the
dilute instanton gas and brute-force diagonalization oracles.
"""

__version__ = "0.1.0"

from .dilute_gas import SpectrumTriplet, energy_levels, instanton_density
from .instanton import InstantonProfile, closed_form_profile, solve_bogomolny
from .potential import PotentialSpec, double_well, harmonic, triple_well

__all__ = [
    "InstantonProfile",
    "PotentialSpec",
    "SpectrumTriplet",
    "closed_form_profile",
    "double_well",
    "energy_levels",
    "harmonic",
    "instanton_density",
    "solve_bogomolny",
    "triple_well",
]
