"""Validation propagator on a truncated photon-mode grid.

The state space is spanned by ``|level; n_1 ... n_M>`` with at most one photon
per mode and two photons in total. Interaction-picture coefficients obey

    i hbar dS_a/dt = sum_b V_ab exp(i (E_a - E_b) t / hbar) S_b,

solved as an iterated (Dyson) series truncated at a given order: order ``n``
is driven by order ``n - 1`` over each time step, with the oscillating phase
integrated exactly and the driving coefficient interpolated linearly
(Filon-type rule). Couplings are rotating-wave E1 emission/absorption
restricted to the transition whose energy channel contains the mode.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .atoms import BoundState
from .cascade import CHANNEL_WINDOW, CascadeChannel, PhotonMode, dipole_matrix
from .errors import BasisSizeError, StabilityError
from .units import HBAR_EV_FS

MAX_BASIS = 100_000
DEFAULT_ORDER = 6
DEFAULT_COUPLING = 1e-4  # eV
DEFAULT_DETUNING = 0.01  # eV


def icosahedron_directions() -> list[tuple[float, float]]:
    """(theta, phi) of the 12 icosahedron vertices."""
    g = (1.0 + math.sqrt(5.0)) / 2.0
    verts = []
    for a in (-1.0, 1.0):
        for b in (-g, g):
            verts += [(0.0, a, b), (a, b, 0.0), (b, 0.0, a)]
    out = []
    for v in verts:
        v = np.array(v) / math.sqrt(1.0 + g * g)
        out.append((math.acos(max(-1.0, min(1.0, v[2]))), math.atan2(v[1], v[0])))
    return out


def mode_grid(directions: Sequence[tuple[float, float]], energies: Sequence[float]) -> list[PhotonMode]:
    return [PhotonMode(t, p, e, s) for (t, p) in directions for s in (1, 2) for e in energies]


def default_mode_grid(cascade: CascadeChannel | None = None, detuning: float = DEFAULT_DETUNING,
                      directions=None) -> list[PhotonMode]:
    """12 directions x 2 polarizations x 3 energies (E - d, E, E + d) per cascade channel."""
    cascade = cascade or CascadeChannel()
    directions = directions or icosahedron_directions()
    modes = []
    for e in (cascade.energy1, cascade.energy2):
        modes += mode_grid(directions, (e - detuning, e, e + detuning))
    return modes


def lorentzian_line(energy, center: float, width: float):
    """Normalized Lorentzian (1/eV) with FWHM ``width`` (eV)."""
    if not width > 0:
        raise ValueError("line width must be positive")
    x = np.asarray(energy, dtype=float) - center
    out = (width / (2.0 * math.pi)) / (x * x + 0.25 * width * width)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class IterationOrder:
    k: int = DEFAULT_ORDER

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("iteration order must be >= 1")


@dataclass
class TruncatedSystem:
    """Levels x photon occupations with a sparse Hermitian coupling matrix."""

    levels: tuple[BoundState, ...]
    modes: tuple[PhotonMode, ...]
    states: list[tuple[int, tuple[int, ...]]]
    energies: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    values: np.ndarray
    initial: list[tuple[float, np.ndarray]] = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.states)

    @property
    def photon_number(self) -> np.ndarray:
        return np.array([len(p) for _, p in self.states])

    def index(self, level: int, photons: Sequence[int]) -> int:
        return self._lookup[(level, tuple(sorted(photons)))]

    def __post_init__(self):
        self._lookup = {s: i for i, s in enumerate(self.states)}

    def max_frequency(self) -> float:
        """Largest bare transition frequency |E_u - E_l| / hbar over coupled level pairs (1/fs)."""
        rows = np.repeat(np.arange(self.size), np.diff(self.indptr))
        if rows.size == 0:
            return 0.0
        lev = np.array([self.levels[l].energy for l, _ in self.states])
        return float(np.abs(lev[rows] - lev[self.indices]).max() / HBAR_EV_FS)

    def mode_index(self, mode: PhotonMode) -> int:
        for j, m in enumerate(self.modes):
            if (abs(m.theta - mode.theta) < 1e-12 and abs(m.phi - mode.phi) < 1e-12
                    and abs(m.energy - mode.energy) < 1e-12 and m.sigma == mode.sigma):
                return j
        raise ValueError(f"mode {mode} is not in the grid")

    @classmethod
    def build(cls, levels: Sequence[BoundState], modes: Sequence[PhotonMode],
              coupling: Callable[[int, int, int], complex], initial, max_photons: int = 2,
              max_basis: int = MAX_BASIS) -> "TruncatedSystem":
        """Enumerate states reachable from ``initial`` by single emissions/absorptions.

        ``coupling(u, l, j)`` is the emission matrix element <l; 1_j| V |u; 0>
        in eV (zero for uncoupled triples); absorption uses its conjugate.
        ``initial`` is a list of ``(weight, {level: amplitude})`` pure
        components.
        """
        levels = tuple(levels)
        modes = tuple(modes)
        n_lev = len(levels)
        # emission edges per upper level: (lower, mode, value)
        emit = {u: [] for u in range(n_lev)}
        absorb = {l: [] for l in range(n_lev)}
        for u in range(n_lev):
            for l in range(n_lev):
                if levels[u].energy <= levels[l].energy:
                    continue
                for j in range(len(modes)):
                    v = coupling(u, l, j)
                    if v != 0:
                        emit[u].append((l, j, v))
                        absorb[l].append((u, j, np.conj(v)))

        starts = {(lvl, ()) for _, comp in initial for lvl in comp}
        states = sorted(starts)
        lookup = {s: i for i, s in enumerate(states)}
        queue = deque(states)
        rows, cols, vals = [], [], []
        while queue:
            s = queue.popleft()
            lvl, photons = s
            nbrs = []
            if len(photons) < max_photons:
                for l, j, v in emit[lvl]:
                    if j not in photons:
                        nbrs.append(((l, tuple(sorted(photons + (j,)))), v))
            for u, j, v in absorb[lvl]:
                if j in photons:
                    nbrs.append(((u, tuple(p for p in photons if p != j)), v))
            for t, v in nbrs:
                if t not in lookup:
                    if len(states) >= max_basis:
                        raise BasisSizeError(f"truncated basis exceeds {max_basis} states")
                    lookup[t] = len(states)
                    states.append(t)
                    queue.append(t)
                rows.append(lookup[t])
                cols.append(lookup[s])
                vals.append(v)

        n = len(states)
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=complex)
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        indptr = np.cumsum(indptr)
        energies = np.array([levels[l].energy + sum(modes[j].energy for j in p) for l, p in states])

        init = []
        for w, comp in initial:
            s0 = np.zeros(n, dtype=complex)
            for lvl, amp in comp.items():
                s0[lookup[(lvl, ())]] = amp
            norm = np.linalg.norm(s0)
            if norm == 0:
                raise ValueError("initial component has zero norm")
            init.append((float(w), s0 / norm))
        total = sum(w for w, _ in init)
        if not total > 0:
            raise ValueError("initial weights must sum to a positive value")
        init = [(w / total, s) for w, s in init]
        return cls(levels, modes, states, energies, indptr, cols, vals, init)


def _channel_coupling(cascade: CascadeChannel, levels, modes, coupling_scale: float):
    """Emission couplings for the two cascade channels with unit-width normalization."""
    d1 = dipole_matrix(cascade.upper, cascade.middle, 1.0)
    d2 = dipole_matrix(cascade.middle, cascade.lower, 1.0)

    def step_norm(u, l):
        return math.sqrt(3.0 * (2 * u.l + 1) / (8.0 * math.pi * max(u.l, l.l)))

    n1, n2 = step_norm(cascade.upper, cascade.middle), step_norm(cascade.middle, cascade.lower)
    pol = [np.conj(m.polarization_vector()) for m in modes]

    def coupling(u: int, l: int, j: int) -> complex:
        up, lo, mode = levels[u], levels[l], modes[j]
        if (up.label, lo.label) == (cascade.upper.label, cascade.middle.label):
            if abs(mode.energy - cascade.energy1) > cascade.window:
                return 0.0
            d, nn = d1[lo.m + lo.l, up.m + up.l], n1
        elif (up.label, lo.label) == (cascade.middle.label, cascade.lower.label):
            if abs(mode.energy - cascade.energy2) > cascade.window:
                return 0.0
            d, nn = d2[lo.m + lo.l, up.m + up.l], n2
        else:
            return 0.0
        return coupling_scale * nn * complex(pol[j] @ d)

    return coupling


def cascade_system(rho, modes: Sequence[PhotonMode] | None = None, cascade: CascadeChannel | None = None,
                   coupling_scale: float = DEFAULT_COUPLING, max_basis: int = MAX_BASIS) -> TruncatedSystem:
    """Truncated system for the hydrogen cascade starting from ``rho`` over the upper manifold.

    Mixed states are represented by their eigen-decomposition; each
    eigenvector is propagated separately and weighted by its eigenvalue.
    """
    cascade = cascade or CascadeChannel()
    modes = tuple(modes) if modes is not None else tuple(default_mode_grid(cascade))
    for m in modes:
        if m.sigma is None and m.analyzer is None:
            raise ValueError("oracle modes need a definite polarization")
    levels = []
    for s in (cascade.upper, cascade.middle, cascade.lower):
        for m in range(-s.l, s.l + 1):
            levels.append(BoundState(s.label, s.n, s.l, m, s.energy))
    r = np.asarray(getattr(rho, "matrix", rho), dtype=complex)
    dim = 2 * cascade.upper.l + 1
    if r.shape != (dim, dim):
        raise ValueError(f"density matrix must be {dim}x{dim}")
    vals, vecs = np.linalg.eigh(0.5 * (r + r.conj().T))
    if vals.min() < -1e-10 * max(1.0, vals.max()):
        raise ValueError("density matrix is not positive semidefinite")
    initial = []
    for lam, v in zip(vals, vecs.T):
        if lam > 1e-14 * vals.max():
            initial.append((lam, {i: v[i] for i in range(dim) if v[i] != 0}))
    coupling = _channel_coupling(cascade, levels, modes, coupling_scale)
    return TruncatedSystem.build(levels, modes, coupling, initial, max_basis=max_basis)


def two_level_system(energy: float, mode_energy: float, coupling: float) -> TruncatedSystem:
    """Single emitter (ground at 0, excited at ``energy``) and a single mode."""
    levels = (BoundState("g", 1, 0, 0, 0.0), BoundState("e", 2, 1, 0, energy))
    modes = (PhotonMode(0.0, 0.0, mode_energy, 1),)
    return TruncatedSystem.build(levels, modes, lambda u, l, j: coupling if (u, l) == (1, 0) else 0.0,
                                 [(1.0, {1: 1.0})], max_photons=1)


@dataclass
class CoefficientHistory:
    system: TruncatedSystem
    order: int
    times: np.ndarray
    sector_population: np.ndarray  # (n_times, max_photons + 1), weighted over initial components
    final: list[tuple[float, np.ndarray]]  # (weight, summed coefficients at t_final)
    final_by_order: list[np.ndarray]  # (order + 1, N) per component
    saved_times: np.ndarray
    saved: list[np.ndarray]  # per component, (n_saved, N)

    def population(self, state_index: int) -> float:
        return float(sum(w * abs(s[state_index]) ** 2 for w, s in self.final))

    def first_crossing(self, sector: int, threshold: float = 1e-12) -> float:
        hit = np.nonzero(self.sector_population[:, sector] > threshold)[0]
        return float(self.times[hit[0]]) if hit.size else math.inf


def propagate(system: TruncatedSystem, order: int | IterationOrder = DEFAULT_ORDER, t_final: float = 5.0,
              dt: float | None = None, save_every: int | None = None) -> CoefficientHistory:
    """Iterate the coefficient hierarchy to ``order`` from t = 0 to ``t_final`` (fs)."""
    k = order.k if isinstance(order, IterationOrder) else IterationOrder(int(order)).k
    w_max = system.max_frequency()
    limit = 0.1 / w_max if w_max > 0 else t_final
    if dt is None:
        n_steps = max(1, math.ceil(t_final / limit))
    else:
        if not dt > 0:
            raise ValueError("dt must be positive")
        if dt > limit * (1 + 1e-12):
            raise StabilityError(f"dt = {dt:.4g} fs exceeds 0.1/omega_max = {limit:.4g} fs")
        n_steps = max(1, round(t_final / dt))
    h = t_final / n_steps
    save_every = save_every or n_steps

    rows = np.repeat(np.arange(system.size), np.diff(system.indptr))
    theta = (system.energies[rows] - system.energies[system.indices]) * h / HBAR_EV_FS
    alpha, beta = _kernels.filon_weights(theta)
    sector = system.photon_number
    n_sectors = int(sector.max()) + 1 if sector.size else 1

    pops = np.zeros((n_steps + 1, n_sectors))
    final, by_order, saved = [], [], []
    for weight, s0 in system.initial:
        cur, p, sv = _kernels.dyson_sweep(system.indptr, system.indices, system.values * alpha,
                                          system.values * beta, system.energies, HBAR_EV_FS, s0, k, h,
                                          n_steps, sector, n_sectors, save_every)
        pops += weight * p
        final.append((weight, cur.sum(axis=0)))
        by_order.append(cur)
        saved.append(sv)
    times = h * np.arange(n_steps + 1)
    saved_times = h * save_every * np.arange(n_steps // save_every + 1)
    return CoefficientHistory(system, k, times, pops, final, by_order, saved_times, saved)


def extract_coincidence(history: CoefficientHistory, mode1: PhotonMode, mode2: PhotonMode) -> float:
    """Joint occupation probability of two modes at t_final over the two-photon sector."""
    system = history.system
    j1, j2 = system.mode_index(mode1), system.mode_index(mode2)
    if j1 == j2:
        raise ValueError("coincidence needs two distinct modes")
    key = tuple(sorted((j1, j2)))
    idx = [i for i, (_, p) in enumerate(system.states) if p == key]
    sector = history.sector_population[-1, 2] if history.sector_population.shape[1] > 2 else 0.0
    if not idx or sector == 0.0:
        return 0.0
    joint = sum(history.population(i) for i in idx)
    return joint / sector


__all__ = [
    "CHANNEL_WINDOW",
    "CoefficientHistory",
    "IterationOrder",
    "TruncatedSystem",
    "cascade_system",
    "default_mode_grid",
    "extract_coincidence",
    "icosahedron_directions",
    "lorentzian_line",
    "mode_grid",
    "propagate",
    "two_level_system",
]
