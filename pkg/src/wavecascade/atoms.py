"""Model atomic structure for the source atom (Ca-like) and the target (hydrogen).

Radial dipole integrals are in atomic units; energies in eV; rates in 1/fs.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import integrate
from scipy.special import eval_genlaguerre

from .errors import QuadratureError, SelectionRuleError
from .units import ALPHA, AU_TIME_FS, HARTREE_EV, RYDBERG_EV

L_LETTERS = "spdfghik"


@dataclass(frozen=True)
class BoundState:
    label: str
    n: int
    l: int
    m: int = 0
    energy: float = 0.0

    def __post_init__(self):
        if self.n < 1 or self.l < 0:
            raise ValueError(f"invalid quantum numbers in {self.label!r}")
        if abs(self.m) > self.l:
            raise ValueError(f"|m| > l in state {self.label!r}")


def hydrogen_energy(n: int) -> float:
    """Bound hydrogen level energy in eV (infinite nuclear mass)."""
    if n < 1:
        raise ValueError(f"principal quantum number must be >= 1, got {n}")
    return -RYDBERG_EV / n**2


def hydrogen_state(n: int, l: int, m: int = 0) -> BoundState:
    """Hydrogen level with energy measured from the 1s ground state."""
    if not 0 <= l < n:
        raise ValueError(f"no hydrogen state with n={n}, l={l}")
    return BoundState(f"{n}{L_LETTERS[l]}", n, l, m, hydrogen_energy(n) - hydrogen_energy(1))


def hydrogen_radial(n: int, l: int, r):
    """Normalized hydrogen radial function R_nl(r), r in Bohr."""
    if not 0 <= l < n:
        raise ValueError(f"no hydrogen state with n={n}, l={l}")
    r = np.asarray(r, dtype=float)
    log_norm = 0.5 * (3.0 * math.log(2.0 / n) + math.lgamma(n - l) - math.log(2.0 * n) - math.lgamma(n + l + 1))
    x = 2.0 * r / n
    return math.exp(log_norm) * x**l * np.exp(-x / 2.0) * eval_genlaguerre(n - l - 1, 2 * l + 1, x)


def _check_dipole_pair(l1: int, l2: int):
    if abs(l1 - l2) != 1:
        raise SelectionRuleError(f"E1 radial element needs |delta l| = 1, got l={l1} -> l={l2}")


@lru_cache(maxsize=None)
def _radial_dipole_cached(n1: int, l1: int, n2: int, l2: int) -> float:
    def integrand(r):
        return hydrogen_radial(n1, l1, r) * hydrogen_radial(n2, l2, r) * r**3

    scale = 4.0 * max(n1, n2) ** 2
    total = 0.0
    err_total = 0.0
    for a, b in ((0.0, scale), (scale, np.inf)):
        val, err = integrate.quad(integrand, a, b, epsabs=1e-14, epsrel=1e-13, limit=400)
        total += val
        err_total += err
    if err_total > 1e-9 * max(1.0, abs(total)):
        raise QuadratureError(
            f"radial dipole ({n1}{L_LETTERS[l1]}|r|{n2}{L_LETTERS[l2]}) did not converge: "
            f"value={total:.3e}, error estimate={err_total:.3e}"
        )
    return total


def hydrogen_radial_dipole(n1: int, l1: int, n2: int, l2: int) -> float:
    """int R_{n1 l1} r R_{n2 l2} r^2 dr by adaptive quadrature (atomic units)."""
    _check_dipole_pair(l1, l2)
    a, b = sorted([(n1, l1), (n2, l2)])
    return _radial_dipole_cached(*a, *b)


def e1_rate(energy_ev: float, radial: float, l_upper: int, l_lower: int) -> float:
    """E1 spontaneous emission rate (1/fs) summed over lower sublevels."""
    _check_dipole_pair(l_upper, l_lower)
    if energy_ev <= 0:
        raise ValueError("transition energy must be positive")
    omega = energy_ev / HARTREE_EV
    angular = max(l_upper, l_lower) / (2.0 * l_upper + 1.0)
    rate_au = 4.0 / 3.0 * ALPHA**3 * omega**3 * radial**2 * angular
    return rate_au / AU_TIME_FS


def einstein_A(upper: BoundState, lower: BoundState, energy: float | None = None) -> float:
    """Hydrogen E1 Einstein coefficient in 1/fs.

    ``energy`` overrides the transition energy (eV) while keeping the radial
    dipole fixed.
    """
    _check_dipole_pair(upper.l, lower.l)
    if energy is None:
        energy = hydrogen_energy(upper.n) - hydrogen_energy(lower.n)
    radial = hydrogen_radial_dipole(upper.n, upper.l, lower.n, lower.l)
    return e1_rate(energy, radial, upper.l, lower.l)


_INT_RE = re.compile(r"^[+-]?\d+$")


@dataclass
class RadialMatrixElementTable:
    """Radial dipole integrals keyed by bound (n1, l1, n2, l2) or continuum (eps, l, n2, l2).

    Bound entries are symmetric under exchange of the two states. Missing
    bound entries fall back to hydrogenic values when ``hydrogenic`` is set;
    missing continuum entries fall back to ``continuum_default``.
    """

    bound: dict = field(default_factory=dict)
    continuum: dict = field(default_factory=dict)
    hydrogenic: bool = True
    continuum_default: float = 1.0

    def add_bound(self, n1, l1, n2, l2, value):
        _check_dipole_pair(l1, l2)
        key = tuple(sorted([(int(n1), int(l1)), (int(n2), int(l2))]))
        self.bound[key] = float(value)

    def add_continuum(self, eps, l, n2, l2, value):
        _check_dipole_pair(l, l2)
        self.continuum.setdefault((int(l), int(n2), int(l2)), {})[float(eps)] = float(value)

    def radial(self, n1, l1, n2, l2) -> float:
        _check_dipole_pair(l1, l2)
        key = tuple(sorted([(n1, l1), (n2, l2)]))
        if key in self.bound:
            return self.bound[key]
        if self.hydrogenic:
            return hydrogen_radial_dipole(n1, l1, n2, l2)
        raise KeyError(f"no radial element for ({n1},{l1}) <-> ({n2},{l2})")

    def continuum_radial(self, eps, l, n2, l2):
        """Continuum-bound element; linear interpolation in energy between table rows."""
        _check_dipole_pair(l, l2)
        eps = np.asarray(eps, dtype=float)
        rows = self.continuum.get((l, n2, l2))
        if not rows:
            return np.full(eps.shape, self.continuum_default)[()]
        e = np.array(sorted(rows))
        v = np.array([rows[x] for x in e])
        return np.interp(eps, e, v)[()]

    @classmethod
    def from_file(cls, path, **kwargs) -> "RadialMatrixElementTable":
        """Parse ``n1 l1 n2 l2 value`` / ``eps l n2 l2 value`` lines.

        A first column written as an integer is a principal quantum number;
        anything else (``15.0``, ``1.5e1``) is a continuum energy in eV.
        """
        table = cls(**kwargs)
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 5:
                raise ValueError(f"{path}:{lineno}: expected 5 columns, got {len(parts)}")
            try:
                l1, n2, l2 = int(parts[1]), int(parts[2]), int(parts[3])
                value = float(parts[4])
                if _INT_RE.match(parts[0]):
                    table.add_bound(int(parts[0]), l1, n2, l2, value)
                else:
                    table.add_continuum(float(parts[0]), l1, n2, l2, value)
            except SelectionRuleError as exc:
                raise SelectionRuleError(f"{path}:{lineno}: {exc}") from None
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
        return table


@dataclass(frozen=True)
class AtomModel:
    name: str
    ground: BoundState
    intermediates: tuple[BoundState, ...]
    ionization_potential: float
    continuum_phase: tuple[float, ...] = (0.0, 0.0, 0.0, 0.0)
    radial_table: RadialMatrixElementTable = field(default_factory=RadialMatrixElementTable, compare=False)

    def __post_init__(self):
        if not self.ionization_potential > 0:
            raise ValueError("ionization potential must be positive")
        energies = [s.energy for s in (self.ground, *self.intermediates)]
        if any(b <= a for a, b in zip(energies, energies[1:])):
            raise ValueError(f"{self.name}: state energies must be strictly increasing")

    def intermediate(self, label: str) -> BoundState:
        for s in self.intermediates:
            if s.label == label:
                return s
        raise KeyError(f"{self.name} has no intermediate state {label!r}")

    def phase(self, l: int) -> float:
        return self.continuum_phase[l] if l < len(self.continuum_phase) else 0.0

    def bound_radial(self, a: BoundState, b: BoundState) -> float:
        return self.radial_table.radial(a.n, a.l, b.n, b.l)

    def continuum_radial(self, eps, l: int, state: BoundState):
        return self.radial_table.continuum_radial(eps, l, state.n, state.l)


def calcium_model(radial_table: RadialMatrixElementTable | None = None,
                  continuum_phase=(0.0, 0.0, 0.0, 0.0),
                  ionization_potential: float = 6.113) -> AtomModel:
    """Single-active-electron Ca: 4s ground, (4s5p) and (4s6p) 1P intermediates."""
    if radial_table is None:
        radial_table = RadialMatrixElementTable(hydrogenic=False)
        radial_table.add_bound(4, 0, 5, 1, 1.0)
        radial_table.add_bound(4, 0, 6, 1, 1.0)
    return AtomModel(
        name="Ca",
        ground=BoundState("4s", 4, 0, 0, 0.0),
        intermediates=(
            BoundState("5p", 5, 1, 0, 4.554),
            BoundState("6p", 6, 1, 0, 5.167),
        ),
        ionization_potential=ionization_potential,
        continuum_phase=tuple(continuum_phase),
        radial_table=radial_table,
    )
