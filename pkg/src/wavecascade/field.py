"""Classical multicolor ionizing field.

Each frequency component carries a Gaussian envelope. ``envelope`` is the
intensity profile (FWHM convention for pulse durations); the field amplitude
profile is its square root. The complex positive-frequency field of one
component is

    E(t) = A exp(i phase) sqrt(envelope(t)) exp(-i omega (t - t_c) / hbar),

and ``spectral_amplitude`` is its Fourier transform
``int E(t) exp(i w t / hbar) dt`` (units: field x fs).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .units import HBAR_EV_FS

FOUR_LN2 = 4.0 * math.log(2.0)


class Polarization(str, Enum):
    LEFT_CIRCULAR = "left-circular"
    RIGHT_CIRCULAR = "right-circular"
    LINEAR_Z = "linear-z"

    @property
    def q(self) -> int:
        """Spherical tensor component absorbed from this polarization."""
        return {"left-circular": 1, "right-circular": -1, "linear-z": 0}[self.value]


@dataclass(frozen=True)
class FrequencyComponent:
    label: str
    omega: float
    amplitude: float = 1.0
    polarization: Polarization = Polarization.LINEAR_Z
    phase: float = 0.0
    center_time: float = 0.0
    fwhm: float = 20.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"component {self.label!r}: omega must be positive")
        if not self.fwhm > 0:
            raise ValueError(f"component {self.label!r}: fwhm must be positive")
        object.__setattr__(self, "polarization", Polarization(self.polarization))

    @property
    def reduced_phase(self) -> float:
        return math.fmod(self.phase, 2.0 * math.pi) % (2.0 * math.pi)

    @property
    def sigma_t(self) -> float:
        """Standard deviation (fs) of the Gaussian field-amplitude profile."""
        return self.fwhm / (2.0 * math.sqrt(math.log(2.0)))

    @property
    def sigma_omega(self) -> float:
        """Standard deviation (eV) of the Gaussian spectral amplitude."""
        return HBAR_EV_FS / self.sigma_t

    def with_phase(self, phase: float) -> "FrequencyComponent":
        return replace(self, phase=phase)

    def shifted(self, tau: float) -> "FrequencyComponent":
        return replace(self, center_time=self.center_time + tau)


@dataclass(frozen=True)
class FieldSpec:
    components: tuple[FrequencyComponent, ...] = field(default_factory=tuple)

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ValueError("FieldSpec needs at least one frequency component")
        labels = [c.label for c in comps]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate component labels: {labels}")
        object.__setattr__(self, "components", comps)

    def __getitem__(self, label: str) -> FrequencyComponent:
        for c in self.components:
            if c.label == label:
                return c
        raise KeyError(label)

    @property
    def labels(self) -> list[str]:
        return [c.label for c in self.components]

    def replace_component(self, component: FrequencyComponent) -> "FieldSpec":
        self[component.label]
        return FieldSpec(tuple(component if c.label == component.label else c for c in self.components))


def envelope(component: FrequencyComponent, t):
    """Gaussian intensity envelope, 1 at the pulse center and 1/2 at +-fwhm/2."""
    t = np.asarray(t, dtype=float)
    return np.exp(-FOUR_LN2 * (t - component.center_time) ** 2 / component.fwhm**2)


def field_amplitude(component: FrequencyComponent, t):
    """Complex positive-frequency field E(t) of a single component."""
    t = np.asarray(t, dtype=float)
    carrier = np.exp(-1j * component.omega * (t - component.center_time) / HBAR_EV_FS)
    return component.amplitude * np.exp(1j * component.phase) * np.sqrt(envelope(component, t)) * carrier


def spectral_amplitude(component: FrequencyComponent, omega_eval):
    """Analytic Fourier transform of :func:`field_amplitude` at photon energy ``omega_eval`` (eV)."""
    w = np.asarray(omega_eval, dtype=float)
    gauss = np.exp(-((w - component.omega) ** 2) / (2.0 * component.sigma_omega**2))
    norm = math.sqrt(2.0 * math.pi) * component.sigma_t
    phase = np.exp(1j * (component.phase + w * component.center_time / HBAR_EV_FS))
    out = component.amplitude * norm * gauss * phase
    return out[()] if out.ndim == 0 else out


def spectral_fwhm(component: FrequencyComponent) -> float:
    """FWHM (eV) of the spectral intensity |E(w)|^2; equals 4 ln2 hbar / fwhm."""
    return 2.0 * math.sqrt(math.log(2.0)) * component.sigma_omega
