import math

import numpy as np
import pytest
from scipy.integrate import quad

from wavecascade.angular import unit_vector
from wavecascade.cascade import DEFAULT_CASCADE, PhotonMode, coincidence_probability
from wavecascade.errors import BasisSizeError, StabilityError
from wavecascade.oracle import (
    IterationOrder,
    cascade_system,
    default_mode_grid,
    extract_coincidence,
    icosahedron_directions,
    lorentzian_line,
    mode_grid,
    propagate,
    two_level_system,
)
from wavecascade.units import HBAR_EV_FS

E1, E2 = DEFAULT_CASCADE.energy1, DEFAULT_CASCADE.energy2
DIRS = icosahedron_directions()
SMALL_GRID = mode_grid(DIRS, (E1,)) + mode_grid(DIRS, (E2,))


def rho_m0():
    rho = np.zeros((5, 5), complex)
    rho[2, 2] = 1.0
    return rho


def resonant_pairs(modes):
    upper = [m for m in modes if m.energy == E1]
    lower = [m for m in modes if m.energy == E2]
    return [(a, b) for a in upper for b in lower]


def test_icosahedron_grid():
    assert len(DIRS) == 12
    vecs = np.array([unit_vector(t, p) for t, p in DIRS])
    assert np.allclose(np.linalg.norm(vecs, axis=1), 1)
    # inversion symmetric
    for v in vecs:
        assert np.min(np.linalg.norm(vecs + v, axis=1)) < 1e-12
    assert len(default_mode_grid()) == 12 * 2 * 3 * 2


def test_zero_coupling_is_static():
    system = cascade_system(rho_m0(), SMALL_GRID, coupling_scale=0.0)
    assert system.size == 1
    hist = propagate(system, 6, 5.0)
    assert np.array_equal(hist.final[0][1], system.initial[0][1])
    tl = two_level_system(2.0, 1.95, 0.0)
    hist = propagate(tl, 4, 3.0, dt=0.01)
    assert hist.population(tl.index(1, ())) == 1.0
    assert np.all(hist.sector_population[:, 1:] == 0)


def test_two_level_second_order_transfer():
    energy, mode_energy, g, t_final = 2.0, 1.95, 1e-5, 5.0
    system = two_level_system(energy, mode_energy, g)
    hist = propagate(system, 2, t_final)
    det = energy - mode_energy
    analytic = 4 * g**2 * math.sin(det * t_final / (2 * HBAR_EV_FS)) ** 2 / det**2
    excited_loss = 1 - hist.population(system.index(1, ()))
    assert excited_loss == pytest.approx(analytic, rel=1e-6)
    assert hist.population(system.index(0, (0,))) == pytest.approx(analytic, rel=1e-6)


@pytest.fixture(scope="module")
def m0_history():
    system = cascade_system(rho_m0())
    return system, propagate(system, 6, 5.0)


def test_matches_factorized_cascade(m0_history):
    system, hist = m0_history
    pairs = resonant_pairs(system.modes)
    ora = np.array([extract_coincidence(hist, a, b) for a, b in pairs])
    fac = np.array([coincidence_probability(rho_m0(), a, b) for a, b in pairs])
    assert np.abs(ora / ora.max() - fac / fac.max()).max() < 1e-3


def test_energy_mismatched_modes_give_zero(m0_history):
    system, hist = m0_history
    upper = [m for m in system.modes if abs(m.energy - E1) < 0.05]
    lower = [m for m in system.modes if abs(m.energy - E2) < 0.05]
    assert extract_coincidence(hist, upper[0], upper[5]) == 0.0
    assert extract_coincidence(hist, lower[1], lower[7]) == 0.0


def test_sector_ordering_and_norm():
    # at 1e-4 eV the two-photon sector stays below 1e-12 for 5 fs; use a stronger coupling
    hist = propagate(cascade_system(rho_m0(), SMALL_GRID, coupling_scale=1e-3), 6, 5.0)
    assert 0 < hist.first_crossing(1) < hist.first_crossing(2) < math.inf
    assert abs(hist.sector_population[-1].sum() - 1) < 1e-12


def test_mirror_pairs_equal_for_isotropic_state():
    system = cascade_system(np.eye(5) / 5, SMALL_GRID)
    hist = propagate(system, 6, 2.0)
    vecs = [m.direction for m in system.modes]

    def mirror(mode):
        j = int(np.argmin([np.linalg.norm(v + mode.direction) + abs(m.energy - mode.energy) + (m.sigma != mode.sigma)
                           for v, m in zip(vecs, system.modes)]))
        return system.modes[j]

    pairs = resonant_pairs(system.modes)
    vals = np.array([extract_coincidence(hist, a, b) for a, b in pairs])
    mirrored = np.array([extract_coincidence(hist, mirror(a), mirror(b)) for a, b in pairs])
    assert np.abs(vals - mirrored).max() < 1e-10 * vals.max()
    assert np.ptp(vals) > 1e-3 * vals.max()


def test_order_difference_scales_with_coupling_squared():
    def rel_diff(g):
        system = cascade_system(rho_m0(), SMALL_GRID, coupling_scale=g)
        two = system.photon_number == 2
        lo = propagate(system, 2, 5.0).final[0][1][two]
        hi = propagate(system, 4, 5.0).final[0][1][two]
        return np.linalg.norm(hi - lo) / np.linalg.norm(lo)

    ratio = rel_diff(4e-3) / rel_diff(2e-3)
    assert ratio == pytest.approx(4.0, rel=0.2)


def test_grid_refinement_preserves_ratios():
    coarse = SMALL_GRID
    shifted = [(t, p + 0.37) for t, p in DIRS]
    fine = mode_grid(DIRS + shifted, (E1,)) + mode_grid(DIRS + shifted, (E2,))
    ratios = []
    for modes in (coarse, fine):
        hist = propagate(cascade_system(rho_m0(), modes), 6, 5.0)
        pairs = resonant_pairs(coarse)
        vals = np.array([extract_coincidence(hist, a, b) for a, b in pairs])
        ratios.append(vals / vals.max())
    assert np.abs(ratios[0] - ratios[1]).max() < 1e-2


def test_stability_and_size_errors():
    system = cascade_system(rho_m0(), SMALL_GRID)
    limit = 0.1 / system.max_frequency()
    with pytest.raises(StabilityError):
        propagate(system, 2, 1.0, dt=2 * limit)
    with pytest.raises(BasisSizeError):
        cascade_system(rho_m0(), SMALL_GRID, max_basis=50)
    with pytest.raises(ValueError):
        propagate(system, 2, 1.0, dt=-1.0)


def test_invalid_arguments(m0_history):
    system, hist = m0_history
    with pytest.raises(ValueError, match="not in the grid"):
        extract_coincidence(hist, PhotonMode(0.123, 0.0, E1, 1), system.modes[0])
    with pytest.raises(ValueError):
        extract_coincidence(hist, system.modes[0], system.modes[0])
    with pytest.raises(ValueError):
        IterationOrder(0)
    with pytest.raises(ValueError):
        cascade_system(rho_m0(), [PhotonMode(0.3, 0.0, E1, None)])
    with pytest.raises(ValueError):
        cascade_system(np.diag([1.0, -0.5, 0.5, 0, 0]), SMALL_GRID)
    with pytest.raises(ValueError):
        cascade_system(np.eye(3), SMALL_GRID)


def test_lorentzian_line():
    total, _ = quad(lorentzian_line, -np.inf, np.inf, args=(1.0, 0.02))
    assert total == pytest.approx(1.0, rel=1e-8)
    assert lorentzian_line(1.01, 1.0, 0.02) == pytest.approx(0.5 * lorentzian_line(1.0, 1.0, 0.02))
    with pytest.raises(ValueError):
        lorentzian_line(1.0, 1.0, 0.0)
