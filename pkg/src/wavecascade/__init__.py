"""Coherent control of two-photon cascade emission after electron-atom collisions.

Pipeline: multicolor field -> photoelectron wave packet (ionization) ->
sublevel density matrix of the collision target (collision) -> coincidence
angular distribution of the cascade photon pair (cascade). ``oracle`` holds
an independent truncated-basis propagator for the emission stage.
"""

from .cascade import (
    CascadeChannel,
    DetectorSpec,
    PhotonMode,
    coincidence_probability,
    e1_amplitude,
    emission_polarization_basis,
)
from .collision import CollisionGeometry, SublevelDensityMatrix, TargetManifold, excited_density_matrix
from .field import FieldSpec, FrequencyComponent, Polarization
from .ionization import EnergyGrid, Pathway, PhotoelectronWavePacket, combine_pathways

__version__ = "0.1.0"

__all__ = [
    "CascadeChannel",
    "CollisionGeometry",
    "DetectorSpec",
    "EnergyGrid",
    "FieldSpec",
    "FrequencyComponent",
    "Pathway",
    "PhotoelectronWavePacket",
    "PhotonMode",
    "Polarization",
    "SublevelDensityMatrix",
    "TargetManifold",
    "coincidence_probability",
    "combine_pathways",
    "e1_amplitude",
    "emission_polarization_basis",
    "excited_density_matrix",
    "__version__",
]
