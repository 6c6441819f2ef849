"""First-Born inelastic excitation of hydrogen by a tailored electron wave packet.

The packet is resynthesized as a superposition of plane waves over incident
directions, ``f(k_hat) = sum_lm a(eps, l, m) Y_lm(k_hat)``. Each plane-wave
component excites the target through the direct Born amplitude

    T_m(k_i, k_f) = -(2 / q^2) <n l m| exp(i q.r) |1s> exp(i q.r0),   q = k_i - k_f,

and the scattered electron is traced out over all final directions. Only the
direct (non-exchange), spinless term is kept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import spherical_jn

from . import _kernels
from .angular import sph_harm, sph_harm_vec, sphere_quadrature, unit_vector
from .atoms import L_LETTERS, hydrogen_energy, hydrogen_radial
from .errors import EmptyResultError, QuadratureError
from .ionization import EnergyGrid, PhotoelectronWavePacket, partial_wave_channels
from .units import momentum_au


@dataclass(frozen=True)
class TargetManifold:
    """Excited hydrogen manifold (n, l) reached from 1s."""

    n: int = 4
    l: int = 2
    excitation_energy: float | None = None

    def __post_init__(self):
        if not 0 <= self.l < self.n:
            raise ValueError(f"no hydrogen manifold n={self.n}, l={self.l}")

    @property
    def energy(self) -> float:
        if self.excitation_energy is not None:
            return self.excitation_energy
        return hydrogen_energy(self.n) - hydrogen_energy(1)

    @property
    def label(self) -> str:
        return f"{self.n}{L_LETTERS[self.l]}"

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(-self.l, self.l + 1)


DEFAULT_TARGET_DISTANCE = 2.0


@dataclass(frozen=True)
class CollisionGeometry:
    """Target B sits at ``r0 = distance * incident_direction`` from atom A (Bohr).

    The offset enters only through the propagation phase exp(i q.r0). With
    r0 = 0 the trace over scattered-electron directions is inversion
    symmetric and removes every coherence between opposite-parity partial
    waves, so the default keeps B a short distance downstream along +z.
    """

    distance: float = DEFAULT_TARGET_DISTANCE
    incident_direction: tuple[float, float, float] = (0.0, 0.0, 1.0)

    def __post_init__(self):
        d = np.asarray(self.incident_direction, dtype=float)
        if d.shape != (3,) or not np.all(np.isfinite(d)) or abs(np.linalg.norm(d) - 1.0) > 1e-12:
            raise ValueError("incident direction must be a finite unit 3-vector")
        if not math.isfinite(self.distance) or self.distance < 0:
            raise ValueError("target distance must be finite and non-negative")
        object.__setattr__(self, "incident_direction", tuple(float(x) for x in d))
        object.__setattr__(self, "distance", float(self.distance))

    @classmethod
    def from_offset(cls, r0) -> "CollisionGeometry":
        r0 = np.asarray(r0, dtype=float)
        dist = float(np.linalg.norm(r0))
        if dist == 0.0:
            return cls(0.0)
        return cls(dist, tuple(r0 / dist))

    @property
    def r0(self) -> tuple[float, float, float]:
        return tuple(self.distance * x for x in self.incident_direction)

    @property
    def axial(self) -> bool:
        x, y, _ = self.r0
        return x == 0.0 and y == 0.0


@dataclass(frozen=True)
class SublevelDensityMatrix:
    label: str
    l: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        rho = np.asarray(self.matrix, dtype=complex)
        dim = 2 * self.l + 1
        if rho.shape != (dim, dim):
            raise ValueError(f"density matrix for l={self.l} must be {dim}x{dim}")
        object.__setattr__(self, "matrix", rho)

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(-self.l, self.l + 1)

    def element(self, m: int, mp: int) -> complex:
        return complex(self.matrix[m + self.l, mp + self.l])

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T))

    def hermiticity_error(self) -> float:
        return float(np.abs(self.matrix - self.matrix.conj().T).max())

    def normalized(self) -> "SublevelDensityMatrix":
        tr = self.trace()
        if not tr > 0:
            raise EmptyResultError("density matrix has zero trace")
        return SublevelDensityMatrix(self.label, self.l, self.matrix / tr)

    @classmethod
    def pure(cls, l: int, coefficients, label: str = "") -> "SublevelDensityMatrix":
        c = np.asarray(coefficients, dtype=complex)
        c = c / np.linalg.norm(c)
        return cls(label or f"l={l}", l, np.outer(c, c.conj()))


# ---------------------------------------------------------------------------
# form factors


def _radial_nodes(n: int, count: int):
    r_max = 25.0 * n + 20.0
    x, w = np.polynomial.legendre.leggauss(count)
    return 0.5 * r_max * (x + 1.0), 0.5 * r_max * w


def radial_form_factor(q, n: int, l: int, nodes: int = 600, tol: float = 1e-11):
    """I(q) = int R_nl(r) j_l(q r) R_10(r) r^2 dr, checked against a doubled rule."""
    q = np.atleast_1d(np.asarray(q, dtype=float))

    def rule(count):
        r, w = _radial_nodes(n, count)
        base = w * hydrogen_radial(n, l, r) * hydrogen_radial(1, 0, r) * r**2
        return spherical_jn(l, np.outer(q, r)) @ base

    coarse = rule(nodes)
    fine = rule(2 * nodes)
    err = np.abs(fine - coarse)
    scale = max(1.0, float(np.abs(fine).max()))
    if err.max() > tol * scale:
        bad = int(np.argmax(err))
        raise QuadratureError(
            f"form factor 1s->{n}{L_LETTERS[l]} unconverged at q={q[bad]:.4g}: "
            f"|I_{nodes}-I_{2 * nodes}|={err[bad]:.3e} with {nodes} nodes"
        )
    return fine


def born_form_factor(q_vector, n: int, l: int, m: int) -> complex:
    """<n l m| exp(i q.r) |1s> via the Rayleigh expansion (atomic units)."""
    q_vector = np.asarray(q_vector, dtype=float)
    qn = float(np.linalg.norm(q_vector))
    if qn == 0.0:
        return complex(1.0 if (n, l) == (1, 0) else 0.0)
    radial = radial_form_factor(qn, n, l)[0]
    return complex(math.sqrt(4.0 * math.pi) * (1j**l) * radial * np.conj(sph_harm_vec(l, m, q_vector)))


@lru_cache(maxsize=16)
def _born_table(n: int, l: int, q_lo: float, q_hi: float, points: int):
    q = np.linspace(q_lo, q_hi, points)
    radial = radial_form_factor(q, n, l)
    g = -(2.0 / q**2) * math.sqrt(4.0 * math.pi) * (1j**l) * radial
    g.setflags(write=False)
    return q_lo, q[1] - q[0], g


# ---------------------------------------------------------------------------
# kernel


class CollisionKernel:
    """Transfer amplitudes from packet partial waves to target sublevels.

    For each open incident energy and final direction ``f`` the kernel stores
    ``T[f, a, m]``: the Born amplitude for exciting sublevel ``m`` from the unit
    partial-wave packet ``Y_a`` (flux factor sqrt(k_f/k_i) included). When the
    target offset lies on the z axis, only ``phi_f = 0`` is computed and the
    azimuthal dependence ``exp(i (m_a - m) phi_f)`` is applied analytically;
    ``brute=True`` forces the full direction grid.
    """

    def __init__(self, grid: EnergyGrid, target: TargetManifold = TargetManifold(),
                 geometry: CollisionGeometry = CollisionGeometry(), lmax: int = 2,
                 n_theta: int = 32, n_phi: int = 64, brute: bool = False, table_points: int = 4096):
        self.grid = grid
        self.target = target
        self.geometry = geometry
        self.channels = partial_wave_channels(lmax)
        self.n_theta = n_theta
        self.n_phi = n_phi
        self.reduced = geometry.axial and not brute

        eps_out = grid.energies - target.energy
        self.open = eps_out > 0
        if not self.open.any():
            raise EmptyResultError(
                f"all excitation channels closed: {target.label} at {target.energy:.4f} eV lies above "
                f"every packet energy (max {grid.energies.max():.4f} eV)"
            )
        k_in = momentum_au(grid.energies[self.open])
        k_out = momentum_au(eps_out[self.open])
        margin = 0.05
        q_lo = max(float((k_in - k_out).min()) - margin, 1e-3)
        q_hi = float((k_in + k_out).max()) + margin
        q0, dq, g_table = _born_table(target.n, target.l, round(q_lo, 6), round(q_hi, 6), table_points)

        theta_i, phi_i, w_i = sphere_quadrature(n_theta, n_phi)
        n_in = unit_vector(theta_i, phi_i)
        ya = np.array([sph_harm(l, m, theta_i, phi_i) for l, m in self.channels])
        x, self.theta_weights = np.polynomial.legendre.leggauss(n_theta)
        self.theta_out = np.arccos(x)
        if self.reduced:
            n_out = unit_vector(self.theta_out, np.zeros(n_theta))
        else:
            theta_f, phi_f, self.out_weights = sphere_quadrature(n_theta, n_phi)
            n_out = unit_vector(theta_f, phi_f)
            self.phi_out = phi_f
        r0 = np.array(geometry.r0)

        n_m = 2 * target.l + 1
        self.transfer = np.zeros((len(grid), n_out.shape[0], len(self.channels), n_m), dtype=complex)
        for j, e_idx in enumerate(np.flatnonzero(self.open)):
            t = _kernels.transfer_amplitudes(k_in[j], k_out[j], n_in, w_i, ya, n_out, q0, dq, g_table,
                                             target.l, r0)
            self.transfer[e_idx] = math.sqrt(k_out[j] / k_in[j]) * t
        self._gram = None

    @property
    def gram(self) -> np.ndarray:
        """K[e, a, m, b, m'] = sum_f w_f T[e, f, a, m] conj(T[e, f, b, m'])."""
        if self._gram is None:
            t = self.transfer
            if self.reduced:
                k = np.einsum("f,efam,efbn->eambn", self.theta_weights, t, t.conj())
                ma = np.array([m for _, m in self.channels])
                mt = self.target.m_values
                shift_a = ma[:, None] - mt[None, :]
                keep = shift_a[:, :, None, None] == shift_a[None, None, :, :]
                k = 2.0 * math.pi * k * keep[None]
            else:
                k = np.einsum("f,efam,efbn->eambn", self.out_weights, t, t.conj())
            self._gram = k
        return self._gram

    def _check_packet(self, packet: PhotoelectronWavePacket):
        if packet.grid != self.grid or packet.channels != self.channels:
            raise ValueError("wave packet does not match the kernel's energy grid or partial waves")

    def raw_density_matrix(self, packet: PhotoelectronWavePacket) -> np.ndarray:
        self._check_packet(packet)
        a = packet.amplitudes
        x = self.grid.weights[:, None, None] * a[:, :, None] * a[:, None, :].conj()
        rho = np.einsum("eab,eambn->mn", x, self.gram)
        return 0.5 * (rho + rho.conj().T)

    def resynthesized_amplitudes(self, packet: PhotoelectronWavePacket) -> tuple[np.ndarray, np.ndarray]:
        """Excitation amplitudes v[e, f, m] on the full final-direction grid and their weights."""
        self._check_packet(packet)
        a = packet.amplitudes
        if self.reduced:
            phi = 2.0 * math.pi * np.arange(self.n_phi) / self.n_phi
            ma = np.array([m for _, m in self.channels])
            phase = np.exp(1j * (ma[None, :, None] - self.target.m_values[None, None, :]) * phi[:, None, None])
            v = np.einsum("ea,pam,etam->etpm", a, phase, self.transfer)
            v = v.reshape(len(self.grid), -1, v.shape[-1])
            w = np.outer(self.theta_weights, np.full(self.n_phi, 2.0 * math.pi / self.n_phi)).ravel()
        else:
            v = np.einsum("ea,efam->efm", a, self.transfer)
            w = self.out_weights
        return v, w

    def density_matrix(self, packet: PhotoelectronWavePacket) -> SublevelDensityMatrix:
        rho = self.raw_density_matrix(packet)
        tr = float(np.trace(rho).real)
        if not tr > 0:
            raise EmptyResultError("wave packet has no amplitude in any open excitation channel")
        return SublevelDensityMatrix(self.target.label, self.target.l, rho / tr)


@lru_cache(maxsize=8)
def collision_kernel(grid: EnergyGrid, target: TargetManifold, geometry: CollisionGeometry, lmax: int = 2,
                     n_theta: int = 32, n_phi: int = 64) -> CollisionKernel:
    """Memoized :class:`CollisionKernel`; the kernel depends only on its arguments."""
    return CollisionKernel(grid, target, geometry, lmax, n_theta, n_phi)


def excited_density_matrix(packet: PhotoelectronWavePacket, geometry: CollisionGeometry = CollisionGeometry(),
                           target: TargetManifold = TargetManifold(), n_theta: int = 32,
                           n_phi: int = 64) -> SublevelDensityMatrix:
    """Trace-normalized sublevel density matrix of ``target`` after the collision."""
    lmax = max(l for l, _ in packet.channels)
    if partial_wave_channels(lmax) != packet.channels:
        raise ValueError("packet channels must be a complete set l <= lmax")
    kernel = collision_kernel(packet.grid, target, geometry, lmax, n_theta, n_phi)
    return kernel.density_matrix(packet)
