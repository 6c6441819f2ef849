"""Two-step E1 cascade emission from the excited target manifold.

Photon modes carry a wave vector direction and a transverse polarization
vector. In the long-wavelength limit the emission amplitude of a photon in a
mode is ``A0(k) conj(eps) . <lower| r |upper>``, with the dipole decomposed on
the spherical basis (angular part) times the hydrogen radial integral.

The coincidence probability for the default 4d -> 3p -> 1s cascade sums the
intermediate sublevel paths coherently, the final sublevels incoherently, and
is bilinear in the upper-manifold density matrix. Modes are evaluated on
resonance; the Weisskopf-Wigner line factors reduce to the product of the two
channel widths, which is divided out so that the polarization-summed
probability integrated over both photon directions equals ``Tr rho``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .angular import covariant_unit_vectors, tensor_matrix_element, unit_vector
from .atoms import BoundState, hydrogen_radial_dipole, hydrogen_state
from .errors import ChannelError, SelectionRuleError, SingularGeometryError
from .units import ALPHA, HARTREE_EV

CHANNEL_WINDOW = 0.05  # eV
E0 = np.array([0.0, 0.0, 1.0])


def emission_polarization_basis(direction, reference_e0=E0) -> tuple[np.ndarray, np.ndarray]:
    """Transverse pair e_sigma = k x e0 / |k x e0|, e_sigma' = k x e_sigma / |k x e_sigma|."""
    k = np.asarray(direction, dtype=float)
    e0 = np.asarray(reference_e0, dtype=float)
    for name, v in (("direction", k), ("reference", e0)):
        if v.shape != (3,) or abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise ValueError(f"{name} must be a unit 3-vector")
    c = np.cross(k, e0)
    norm = np.linalg.norm(c)
    if norm < 1e-12:
        raise SingularGeometryError("photon direction is parallel to the polarization reference axis")
    e_s = c / norm
    e_sp = np.cross(k, e_s)
    return e_s, e_sp / np.linalg.norm(e_sp)


def detector_basis(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """Polarization pair for a detector at (theta, phi) with the z reference.

    On the z axis the cross-product construction is undefined; there the
    pair is continued from its limit along the meridian at azimuth ``phi``,
    ``e_sigma -> (sin phi, -cos phi, 0)``, so polar scans stay continuous.
    """
    k = unit_vector(theta, phi)
    if math.hypot(k[0], k[1]) > 1e-12:
        return emission_polarization_basis(k)
    e_s = np.array([math.sin(phi), -math.cos(phi), 0.0])
    return e_s, np.cross(k, e_s)


def mode_coupling(energy_ev: float) -> float:
    """Density-of-states normalization A0(k) = sqrt(alpha^3 omega^3 / 2 pi) in atomic units.

    ``A0^2 |eps* . d|^2`` is the emission rate per unit solid angle, so
    its integral over directions and polarizations gives the E1 rate.
    """
    if not energy_ev > 0:
        raise ValueError("photon energy must be positive")
    omega = energy_ev / HARTREE_EV
    return math.sqrt(ALPHA**3 * omega**3 / (2.0 * math.pi))


@dataclass(frozen=True)
class PhotonMode:
    """Photon mode (k_hat, sigma) at a given energy.

    ``sigma`` is 1 (e_sigma), 2 (e_sigma'), or None for a polarization
    unresolved detector. ``analyzer`` overrides the polarization with an
    explicit (possibly complex) vector, which is projected onto the
    transverse plane.
    """

    theta: float
    phi: float
    energy: float
    sigma: int | None = 1
    occupation: int = 1
    analyzer: tuple | None = None

    def __post_init__(self):
        if self.sigma not in (1, 2, None):
            raise ValueError(f"polarization index must be 1, 2 or None, got {self.sigma!r}")
        if self.occupation < 0:
            raise ValueError("mode occupation must be non-negative")
        if not self.energy > 0:
            raise ValueError("mode energy must be positive")
        if self.analyzer is not None:
            object.__setattr__(self, "analyzer", tuple(complex(x) for x in self.analyzer))

    @cached_property
    def direction(self) -> np.ndarray:
        return unit_vector(self.theta, self.phi)

    @property
    def resolved(self) -> bool:
        return self.sigma is not None or self.analyzer is not None

    def basis(self) -> tuple[np.ndarray, np.ndarray]:
        return detector_basis(self.theta, self.phi)

    def polarization_vector(self) -> np.ndarray:
        if self.analyzer is not None:
            a = np.asarray(self.analyzer, dtype=complex)
            k = self.direction
            return a - k * (k @ a)
        if self.sigma is None:
            raise ValueError("unresolved mode has no single polarization vector")
        return self.basis()[self.sigma - 1].astype(complex)

    def projector(self) -> np.ndarray:
        """P_ij with |M|^2 summed over analyzed polarizations = sum_ij P_ij T_i conj(T_j) for M = conj(eps).T."""
        if not self.resolved:
            k = self.direction
            return (np.eye(3) - np.outer(k, k)).astype(complex)
        e = self.polarization_vector()
        return np.outer(np.conj(e), e)

    def with_sigma(self, sigma) -> "PhotonMode":
        return PhotonMode(self.theta, self.phi, self.energy, sigma, self.occupation)


@dataclass(frozen=True)
class DetectorSpec:
    """Detector geometry, analyzer and energy channel.

    ``analyzer`` is ``"sigma"``, ``"sigma_prime"``, ``"unresolved"``, or
    one of ``"x"``, ``"y"``, ``"z"`` for a fixed laboratory axis.
    """

    theta: float
    phi: float
    analyzer: str
    energy: float

    _AXES = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}

    def __post_init__(self):
        if self.analyzer not in ("sigma", "sigma_prime", "unresolved", *self._AXES):
            raise ValueError(f"unknown analyzer {self.analyzer!r}")

    def mode(self, theta: float | None = None, phi: float | None = None) -> PhotonMode:
        theta = self.theta if theta is None else theta
        phi = self.phi if phi is None else phi
        if self.analyzer in self._AXES:
            return PhotonMode(theta, phi, self.energy, None, analyzer=self._AXES[self.analyzer])
        sigma = {"sigma": 1, "sigma_prime": 2, "unresolved": None}[self.analyzer]
        return PhotonMode(theta, phi, self.energy, sigma)


def dipole_matrix(upper: BoundState, lower: BoundState, radial: float | None = None) -> np.ndarray:
    """Cartesian <lower m'| r |upper m> as an array [m', m, i] (atomic units)."""
    if abs(upper.l - lower.l) != 1:
        raise SelectionRuleError(f"{upper.label} -> {lower.label} is not an E1 pair")
    if radial is None:
        radial = hydrogen_radial_dipole(upper.n, upper.l, lower.n, lower.l)
    conj_e = np.conj(covariant_unit_vectors())
    out = np.zeros((2 * lower.l + 1, 2 * upper.l + 1, 3), dtype=complex)
    for i, ml in enumerate(range(-lower.l, lower.l + 1)):
        for j, mu in enumerate(range(-upper.l, upper.l + 1)):
            q = ml - mu
            if abs(q) <= 1:
                out[i, j] = radial * tensor_matrix_element(lower.l, ml, 1, q, upper.l, mu) * conj_e[q + 1]
    return out


@dataclass(frozen=True)
class CascadeChannel:
    """Upper -> middle -> lower E1 cascade in hydrogen (default 4d -> 3p -> 1s)."""

    upper: BoundState = field(default_factory=lambda: hydrogen_state(4, 2))
    middle: BoundState = field(default_factory=lambda: hydrogen_state(3, 1))
    lower: BoundState = field(default_factory=lambda: hydrogen_state(1, 0))
    window: float = CHANNEL_WINDOW

    def __post_init__(self):
        for a, b in ((self.upper, self.middle), (self.middle, self.lower)):
            if abs(a.l - b.l) != 1:
                raise SelectionRuleError(f"{a.label} -> {b.label} is not an E1 transition")
            if not a.energy > b.energy:
                raise ValueError(f"{a.label} must lie above {b.label}")

    @property
    def energy1(self) -> float:
        return self.upper.energy - self.middle.energy

    @property
    def energy2(self) -> float:
        return self.middle.energy - self.lower.energy

    @cached_property
    def radial1(self) -> float:
        return hydrogen_radial_dipole(self.upper.n, self.upper.l, self.middle.n, self.middle.l)

    @cached_property
    def radial2(self) -> float:
        return hydrogen_radial_dipole(self.middle.n, self.middle.l, self.lower.n, self.lower.l)

    @cached_property
    def two_step_tensor(self) -> np.ndarray:
        """T[m_low, m_up, i, j] = sum_m1 d2_j(m_low, m1) d1_i(m1, m_up), unit radial integrals."""
        d1 = dipole_matrix(self.upper, self.middle, 1.0)
        d2 = dipole_matrix(self.middle, self.lower, 1.0)
        t = np.einsum("cbj,bai->caij", d2, d1)
        t.setflags(write=False)
        return t

    @cached_property
    def normalization(self) -> float:
        # A0^2 / Gamma per step with unit radial integral: 3 (2 l_u + 1) / (8 pi l_>)
        def step(u, l):
            return 3.0 * (2 * u.l + 1) / (8.0 * math.pi * max(u.l, l.l))

        return step(self.upper, self.middle) * step(self.middle, self.lower)

    def check_channels(self, mode1: PhotonMode, mode2: PhotonMode):
        for name, mode, target in (("mode1", mode1, self.energy1), ("mode2", mode2, self.energy2)):
            if abs(mode.energy - target) > self.window:
                raise ChannelError(
                    f"{name} energy {mode.energy:.4f} eV is outside the {target:.4f} +- {self.window} eV channel"
                )

    def select(self, energy: float) -> tuple[BoundState, BoundState]:
        for u, l in ((self.upper, self.middle), (self.middle, self.lower)):
            if abs(energy - (u.energy - l.energy)) <= self.window:
                return u, l
        raise ChannelError(f"no cascade transition within {self.window} eV of {energy:.4f} eV")


DEFAULT_CASCADE = CascadeChannel()


def e1_amplitude(upper_state: BoundState, lower_state: BoundState, mode: PhotonMode,
                 window: float = CHANNEL_WINDOW, radial: float | None = None) -> complex:
    """Single-photon emission amplitude A0(k) conj(eps) . <lower| r |upper> (atomic units).

    Transitions forbidden by E1 selection rules give zero. The mode energy
    must lie within ``window`` of the transition energy.
    """
    de = upper_state.energy - lower_state.energy
    if abs(mode.energy - de) > window:
        raise ChannelError(
            f"mode energy {mode.energy:.4f} eV is outside the {upper_state.label}->{lower_state.label} "
            f"channel at {de:.4f} +- {window} eV"
        )
    if abs(upper_state.l - lower_state.l) != 1 or abs(upper_state.m - lower_state.m) > 1:
        return 0j
    if radial is None:
        radial = hydrogen_radial_dipole(upper_state.n, upper_state.l, lower_state.n, lower_state.l)
    q = lower_state.m - upper_state.m
    ang = tensor_matrix_element(lower_state.l, lower_state.m, 1, q, upper_state.l, upper_state.m)
    d = radial * ang * np.conj(covariant_unit_vectors()[q + 1])
    eps = mode.polarization_vector()
    return complex(mode_coupling(mode.energy) * (np.conj(eps) @ d))


def _as_matrix(rho) -> np.ndarray:
    return np.asarray(getattr(rho, "matrix", rho), dtype=complex)


def coincidence_value(rho, mode1: PhotonMode, mode2: PhotonMode,
                      cascade: CascadeChannel = DEFAULT_CASCADE) -> complex:
    """Complex value of the bilinear form; its imaginary part is rounding noise."""
    cascade.check_channels(mode1, mode2)
    r = _as_matrix(rho)
    dim = 2 * cascade.upper.l + 1
    if r.shape != (dim, dim):
        raise ValueError(f"density matrix must be {dim}x{dim} for {cascade.upper.label}")
    t = cascade.two_step_tensor
    val = np.einsum("mn,ik,jl,cmij,cnkl->", r, mode1.projector(), mode2.projector(), t, np.conj(t))
    return complex(cascade.normalization * val)


def coincidence_probability(rho, mode1: PhotonMode, mode2: PhotonMode,
                            cascade: CascadeChannel = DEFAULT_CASCADE) -> float:
    """Joint emission probability density for photon 1 in ``mode1`` and photon 2 in ``mode2``.

    Normalized per unit solid angle of each photon and per channel so that
    summing polarizations and integrating both directions yields ``Tr rho``.
    """
    return coincidence_value(rho, mode1, mode2, cascade).real


def coincidence_map(rho, modes1, mode2: PhotonMode, cascade: CascadeChannel = DEFAULT_CASCADE) -> np.ndarray:
    """Coincidence probability for a list of first-photon modes against a fixed second mode."""
    r = _as_matrix(rho)
    t = cascade.two_step_tensor
    # contract the fixed detector and the density matrix once
    half = np.einsum("mn,jl,cmij,cnkl->ik", r, mode2.projector(), t, np.conj(t))
    out = np.empty(len(modes1))
    for n, m1 in enumerate(modes1):
        cascade.check_channels(m1, mode2)
        out[n] = cascade.normalization * np.einsum("ik,ik->", m1.projector(), half).real
    return out
