"""Physical constants and unit conversions (eV, fs, atomic units)."""

from scipy import constants as _c

HBAR_EV_FS = _c.hbar / _c.e * 1e15
PLANCK_EV_FS = _c.h / _c.e * 1e15
HARTREE_EV = _c.physical_constants["Hartree energy in eV"][0]
RYDBERG_EV = HARTREE_EV / 2.0
AU_TIME_FS = _c.physical_constants["atomic unit of time"][0] * 1e15
ALPHA = _c.fine_structure


def ev_to_hartree(energy_ev):
    return energy_ev / HARTREE_EV


def momentum_au(energy_ev):
    """Free-electron wave number (a.u.) for a kinetic energy in eV."""
    return (2.0 * energy_ev / HARTREE_EV) ** 0.5
