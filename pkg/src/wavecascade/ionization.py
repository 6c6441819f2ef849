"""Photoelectron wave packets from interfering one- and two-photon pathways.

Amplitudes ``a(eps, l, m)`` are the coefficients of the momentum-space
amplitude on ``Y_l^m(k_hat)``; the incoming-wave factor ``(-i)^l exp(i delta_l)``
is folded in, so ``|sum_lm a Y_lm|^2`` is directly the angular distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .angular import sph_harm, tensor_matrix_element
from .atoms import AtomModel, BoundState
from .errors import SelectionRuleError
from .field import FrequencyComponent, spectral_amplitude
from .units import HBAR_EV_FS

PAPER_PEAK_ENERGY = 15.755


@dataclass(frozen=True)
class Pathway:
    label: str
    steps: tuple[FrequencyComponent, ...]
    intermediate: BoundState | None = None
    weight: complex = 1.0

    def __post_init__(self):
        steps = tuple(self.steps)
        object.__setattr__(self, "steps", steps)
        if len(steps) not in (1, 2):
            raise ValueError(f"pathway {self.label!r}: only one- and two-photon pathways are supported")
        if len(steps) == 2 and self.intermediate is None:
            raise ValueError(f"pathway {self.label!r}: two-photon pathway needs a resonant intermediate")

    @property
    def parity(self) -> int:
        return len(self.steps) % 2

    def with_weight(self, weight: complex) -> "Pathway":
        return replace(self, weight=weight)


class EnergyGrid:
    """Uniform photoelectron energy grid with trapezoid weights."""

    def __init__(self, energies):
        e = np.array(energies, dtype=float)
        if e.ndim != 1 or e.size < 2 or np.any(np.diff(e) <= 0):
            raise ValueError("energy grid must be a strictly increasing 1-D array of >= 2 points")
        w = np.empty_like(e)
        d = np.diff(e)
        w[0], w[-1] = d[0] / 2, d[-1] / 2
        w[1:-1] = (d[:-1] + d[1:]) / 2
        e.setflags(write=False)
        w.setflags(write=False)
        self.energies = e
        self.weights = w

    def __len__(self):
        return self.energies.size

    def __eq__(self, other):
        return isinstance(other, EnergyGrid) and np.array_equal(self.energies, other.energies)

    def __hash__(self):
        return hash(self.energies.tobytes())

    @classmethod
    def around(cls, center: float = PAPER_PEAK_ENERGY, sigma: float = 0.0548, span: float = 3.0,
               points: int = 64) -> "EnergyGrid":
        return cls(np.linspace(center - span * sigma, center + span * sigma, points))


def partial_wave_channels(lmax: int) -> tuple[tuple[int, int], ...]:
    return tuple((l, m) for l in range(lmax + 1) for m in range(-l, l + 1))


@dataclass(frozen=True)
class PhotoelectronWavePacket:
    grid: EnergyGrid
    channels: tuple[tuple[int, int], ...]
    amplitudes: np.ndarray  # (n_energy, n_channel)

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.shape != (len(self.grid), len(self.channels)):
            raise ValueError(f"amplitude shape {a.shape} does not match grid/channels")
        object.__setattr__(self, "amplitudes", a)

    def channel(self, l: int, m: int) -> np.ndarray:
        return self.amplitudes[:, self.channels.index((l, m))]

    def support(self, tol: float = 0.0) -> set[tuple[int, int]]:
        mags = np.abs(self.amplitudes).max(axis=0)
        return {ch for ch, v in zip(self.channels, mags) if v > tol}

    def norm(self) -> float:
        return float(np.sum(self.grid.weights[:, None] * np.abs(self.amplitudes) ** 2))

    def rotated_z(self, beta: float) -> "PhotoelectronWavePacket":
        """Packet rotated by ``beta`` about z: a_lm -> a_lm exp(-i m beta)."""
        ms = np.array([m for _, m in self.channels])
        return replace(self, amplitudes=self.amplitudes * np.exp(-1j * ms * beta))

    def scaled(self, factor: complex) -> "PhotoelectronWavePacket":
        return replace(self, amplitudes=self.amplitudes * factor)


def _continuum_phase(atom: AtomModel, l: int) -> complex:
    return (-1j) ** l * np.exp(1j * atom.phase(l))


def one_photon_amplitude(pathway: Pathway, epsilon, l: int, m: int, atom: AtomModel):
    """First-order amplitude into the continuum channel (eps, l, m)."""
    if len(pathway.steps) != 1:
        raise ValueError(f"pathway {pathway.label!r} is not a one-photon pathway")
    eps = np.asarray(epsilon, dtype=float)
    (comp,) = pathway.steps
    g = atom.ground
    ang = tensor_matrix_element(l, m, 1, comp.polarization.q, g.l, g.m)
    if ang == 0.0:
        return np.zeros(eps.shape, dtype=complex)[()]
    radial = atom.continuum_radial(eps, l, g)
    e_field = spectral_amplitude(comp, eps + atom.ionization_potential)
    amp = pathway.weight * (-1j / HBAR_EV_FS) * e_field * ang * radial * _continuum_phase(atom, l)
    amp = np.where(eps > 0, amp, 0.0)
    return amp[()]


def _intermediate_projection(pathway: Pathway, atom: AtomModel) -> tuple[int, float]:
    g = atom.ground
    inter = pathway.intermediate
    q1 = pathway.steps[0].polarization.q
    m_int = g.m + q1
    if abs(inter.l - g.l) != 1 or abs(m_int) > inter.l:
        raise SelectionRuleError(
            f"pathway {pathway.label!r}: {inter.label} is not E1-reachable from {g.label} "
            f"with q={q1}"
        )
    ang1 = tensor_matrix_element(inter.l, m_int, 1, q1, g.l, g.m)
    if ang1 == 0.0:
        raise SelectionRuleError(f"pathway {pathway.label!r}: vanishing dipole factor to {inter.label}")
    return m_int, ang1


def two_photon_amplitude(pathway: Pathway, epsilon, l: int, m: int, atom: AtomModel):
    """Resonantly enhanced second-order amplitude, on-resonance pole term only.

    Both spectral amplitudes are evaluated at the Bohr frequencies of the
    two steps (intermediate excitation energy, then the remainder up to the
    final continuum energy); the (1/2) is the delta-function half of the
    resonant energy denominator.
    """
    if len(pathway.steps) != 2:
        raise ValueError(f"pathway {pathway.label!r} is not a two-photon pathway")
    eps = np.asarray(epsilon, dtype=float)
    m_int, ang1 = _intermediate_projection(pathway, atom)
    inter = pathway.intermediate
    c1, c2 = pathway.steps
    if abs(m_int + c2.polarization.q) > l or m != m_int + c2.polarization.q:
        return np.zeros(eps.shape, dtype=complex)[()]
    ang2 = tensor_matrix_element(l, m, 1, c2.polarization.q, inter.l, m_int)
    if ang2 == 0.0:
        return np.zeros(eps.shape, dtype=complex)[()]
    r1 = atom.bound_radial(atom.ground, inter)
    r2 = atom.continuum_radial(eps, l, inter)
    e1 = spectral_amplitude(c1, inter.energy)
    e2 = spectral_amplitude(c2, eps + atom.ionization_potential - inter.energy)
    pref = pathway.weight * 0.5 * (-1j / HBAR_EV_FS) ** 2
    amp = pref * e1 * e2 * ang1 * ang2 * r1 * r2 * _continuum_phase(atom, l)
    amp = np.where(eps > 0, amp, 0.0)
    return amp[()]


def pathway_amplitude(pathway: Pathway, epsilon, l: int, m: int, atom: AtomModel):
    if len(pathway.steps) == 1:
        return one_photon_amplitude(pathway, epsilon, l, m, atom)
    return two_photon_amplitude(pathway, epsilon, l, m, atom)


def pathway_packet(pathway: Pathway, grid: EnergyGrid, atom: AtomModel, lmax: int = 2) -> PhotoelectronWavePacket:
    channels = partial_wave_channels(lmax)
    amps = np.zeros((len(grid), len(channels)), dtype=complex)
    for j, (l, m) in enumerate(channels):
        amps[:, j] = pathway_amplitude(pathway, grid.energies, l, m, atom)
    return PhotoelectronWavePacket(grid, channels, amps)


def combine_pathways(pathways: Sequence, grid: EnergyGrid, atom: AtomModel | None = None,
                     lmax: int = 2) -> PhotoelectronWavePacket:
    """Coherent sum of pathway amplitudes on a shared energy grid.

    Items may be :class:`Pathway` objects (evaluated on ``grid``) or
    already-evaluated packets, which must live on the same grid and channels.
    """
    if not pathways:
        raise ValueError("combine_pathways needs at least one pathway")
    channels = partial_wave_channels(lmax)
    total = np.zeros((len(grid), len(channels)), dtype=complex)
    for item in pathways:
        if isinstance(item, PhotoelectronWavePacket):
            if item.grid != grid or item.channels != channels:
                raise ValueError("wave packet grid or channel set does not match the combination grid")
            packet = item
        else:
            if atom is None:
                raise ValueError("an AtomModel is required to evaluate pathways")
            packet = pathway_packet(item, grid, atom, lmax)
        total = total + packet.amplitudes
    return PhotoelectronWavePacket(grid, channels, total)


def equalize_pathway_weights(pathways: Sequence[Pathway], grid: EnergyGrid, atom: AtomModel,
                             lmax: int = 2) -> list[Pathway]:
    """Rescale each pathway weight so its peak |a| on the grid equals |weight|."""
    out = []
    for p in pathways:
        probe = p.with_weight(1.0)
        peak = np.abs(pathway_packet(probe, grid, atom, lmax).amplitudes).max()
        if peak == 0.0:
            raise ValueError(f"pathway {p.label!r} has no amplitude on the energy grid")
        out.append(p.with_weight(p.weight / peak))
    return out


def apply_pump_probe_delay(pathways: Sequence[Pathway], tau: float) -> list[Pathway]:
    """Delay the probe (second) step of every two-photon pathway by ``tau`` fs."""
    out = []
    for p in pathways:
        if len(p.steps) != 2:
            raise ValueError(f"pathway {p.label!r}: pump-probe delay needs two-photon pathways")
        if tau == 0:
            out.append(p)
        else:
            out.append(replace(p, steps=(p.steps[0], p.steps[1].shifted(tau))))
    return out


def momentum_distribution(packet: PhotoelectronWavePacket, theta, phi):
    """Energy-integrated |sum_lm a(eps, l, m) Y_lm(theta, phi)|^2."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    ylm = np.stack([sph_harm(l, m, theta, phi) for l, m in packet.channels], axis=-1)
    amp = np.tensordot(ylm, packet.amplitudes, axes=([-1], [1]))  # (..., n_energy)
    out = np.sum(np.abs(amp) ** 2 * packet.grid.weights, axis=-1)
    return out[()] if out.ndim == 0 else out


def intermediate_splitting_period(e_a: float, e_b: float) -> float:
    """Period (fs) of the pump-probe interference between two intermediates."""
    from .units import PLANCK_EV_FS

    return PLANCK_EV_FS / abs(e_b - e_a)
