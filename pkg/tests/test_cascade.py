import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import roots_legendre

from wavecascade.angular import unit_vector, wigner_D
from wavecascade.atoms import hydrogen_state
from wavecascade.cascade import (
    DEFAULT_CASCADE,
    CascadeChannel,
    DetectorSpec,
    PhotonMode,
    coincidence_map,
    coincidence_probability,
    coincidence_value,
    detector_basis,
    dipole_matrix,
    e1_amplitude,
    emission_polarization_basis,
    mode_coupling,
)
from wavecascade.errors import ChannelError, SelectionRuleError, SingularGeometryError

from .helpers import random_density_matrix, random_rotation

E1 = DEFAULT_CASCADE.energy1
E2 = DEFAULT_CASCADE.energy2
H4D = hydrogen_state(4, 2)
H3P = hydrogen_state(3, 1)
H1S = hydrogen_state(1, 0)


def state(base, m):
    return hydrogen_state(base.n, base.l, m)


def sphere_rule(n=8):
    x, w = roots_legendre(n)
    phi = 2 * math.pi * np.arange(2 * n) / (2 * n)
    t, p = np.meshgrid(np.arccos(x), phi, indexing="ij")
    wt = np.outer(w, np.full(2 * n, 2 * math.pi / (2 * n)))
    return t.ravel(), p.ravel(), wt.ravel()


def angles(v):
    v = np.asarray(v, dtype=float)
    return math.acos(max(-1.0, min(1.0, v[2]))), math.atan2(v[1], v[0])


# --- polarization basis ----------------------------------------------------------


def test_basis_example_x_direction():
    e_s, e_sp = emission_polarization_basis([1.0, 0.0, 0.0])
    assert np.allclose(e_s, [0, -1, 0], atol=1e-15)
    assert np.allclose(e_sp, [0, 0, -1], atol=1e-15)


def test_basis_singular():
    with pytest.raises(SingularGeometryError):
        emission_polarization_basis([0.0, 0.0, 1.0])
    with pytest.raises(SingularGeometryError):
        emission_polarization_basis([0.0, 0.0, -1.0])
    with pytest.raises(ValueError):
        emission_polarization_basis([0.0, 0.0, 2.0])


@given(st.floats(1e-3, math.pi - 1e-3), st.floats(0, 2 * math.pi), st.floats(0.05, math.pi - 0.05),
       st.floats(0, 2 * math.pi))
def test_basis_orthonormal(theta, phi, t0, p0):
    k = unit_vector(theta, phi)
    e0 = unit_vector(t0, p0)
    if np.linalg.norm(np.cross(k, e0)) < 1e-6:
        return
    e_s, e_sp = emission_polarization_basis(k, e0)
    for a, b in ((e_s, k), (e_sp, k), (e_s, e_sp)):
        assert abs(a @ b) < 1e-14
    assert abs(np.linalg.norm(e_s) - 1) < 1e-14 and abs(np.linalg.norm(e_sp) - 1) < 1e-14


def test_detector_basis_continuous_at_pole():
    for phi in (0.3, math.pi / 2, -2.0):
        near = detector_basis(1e-7, phi)
        at = detector_basis(0.0, phi)
        assert np.allclose(near[0], at[0], atol=1e-6) and np.allclose(near[1], at[1], atol=1e-6)
        near = detector_basis(math.pi - 1e-7, phi)
        at = detector_basis(math.pi, phi)
        assert np.allclose(near[0], at[0], atol=1e-6) and np.allclose(near[1], at[1], atol=1e-6)


# --- single-photon amplitudes --------------------------------------------------------


def test_delta_m_two_forbidden():
    for theta, phi, sigma in ((0.3, 1.0, 1), (1.2, -0.5, 2), (math.pi / 2, 0.0, None)):
        mode = PhotonMode(theta, phi, E1, sigma, analyzer=(0.3, 0.5j, 0.8) if sigma is None else None)
        assert e1_amplitude(state(H4D, 2), state(H3P, 0), mode) == 0


def test_pi_component_selected_by_z_analyzer():
    along_z = [PhotonMode(0.0, 0.0, E2, s) for s in (1, 2)]
    assert all(abs(e1_amplitude(H3P, H1S, m)) < 1e-18 for m in along_z)
    side = DetectorSpec(math.pi / 2, -math.pi / 2, "z", E2).mode()
    pi_amp = e1_amplitude(H3P, H1S, side)
    assert abs(pi_amp) > 0
    # a z analyzer does not see the sigma components
    for m in (1, -1):
        assert abs(e1_amplitude(state(H3P, m), H1S, side)) < 1e-14 * abs(pi_amp)
    # |A|^2 = A0^2 (R / sqrt 3)^2 for a pure z dipole viewed side-on
    expected = mode_coupling(E2) * DEFAULT_CASCADE.radial2 / math.sqrt(3)
    assert abs(pi_amp) == pytest.approx(expected, rel=1e-12)


def test_amplitude_linear_in_radial():
    mode = PhotonMode(0.7, 0.2, E1, 2)
    a = e1_amplitude(state(H4D, 1), state(H3P, 0), mode, radial=1.0)
    b = e1_amplitude(state(H4D, 1), state(H3P, 0), mode, radial=2.5)
    assert b == pytest.approx(2.5 * a, rel=1e-14)


def test_channel_window():
    with pytest.raises(ChannelError, match="outside"):
        e1_amplitude(H4D, H3P, PhotonMode(0.3, 0.0, E2))
    with pytest.raises(ChannelError):
        coincidence_probability(np.eye(5) / 5, PhotonMode(0.3, 0, E2), PhotonMode(1, 0, E2))
    assert DEFAULT_CASCADE.select(0.661) == (H4D, H3P)
    assert DEFAULT_CASCADE.select(12.078) == (H3P, H1S)
    with pytest.raises(ChannelError):
        DEFAULT_CASCADE.select(5.0)


def test_cascade_channel_validation():
    with pytest.raises(SelectionRuleError):
        CascadeChannel(hydrogen_state(4, 2), hydrogen_state(3, 2))
    with pytest.raises(ValueError):
        CascadeChannel(hydrogen_state(2, 1), hydrogen_state(3, 0), hydrogen_state(1, 0))
    with pytest.raises(SelectionRuleError):
        dipole_matrix(H4D, H1S)
    assert E1 == pytest.approx(0.6614, abs=1e-4) and E2 == pytest.approx(12.0940, abs=1e-4)


def test_dipole_matrix_matches_amplitudes():
    d = dipole_matrix(H4D, H3P)
    mode = PhotonMode(1.1, 0.4, E1, 1)
    eps = mode.polarization_vector()
    for i, ml in enumerate(range(-1, 2)):
        for j, mu in enumerate(range(-2, 3)):
            amp = e1_amplitude(state(H4D, mu), state(H3P, ml), mode)
            assert amp == pytest.approx(mode_coupling(E1) * (np.conj(eps) @ d[i, j]), abs=1e-20)


# --- coincidence probability ------------------------------------------------------


def test_total_probability_is_trace():
    t, p, w = sphere_rule()
    rho = np.zeros((5, 5), complex)
    rho[2, 2] = 1.0
    m2 = [PhotonMode(a, b, E2, None) for a, b in zip(t, p)]
    total = 0.0
    for a, b, wa in zip(t, p, w):
        vals = np.array([coincidence_probability(rho, PhotonMode(a, b, E1, None), m) for m in m2])
        total += wa * (vals @ w)
    assert total == pytest.approx(1.0, abs=1e-12)


def test_zero_one_zero_cascade_angular_correlation():
    cas = CascadeChannel(hydrogen_state(3, 0), hydrogen_state(2, 1), hydrogen_state(1, 0))
    rho = np.array([[1.0]])
    m2 = PhotonMode(0.0, 0.0, cas.energy2, None)
    thetas = np.linspace(0, math.pi, 13)
    vals = np.array([coincidence_probability(rho, PhotonMode(t, 0.4, cas.energy1, None), m2, cas) for t in thetas])

    # brute force: Cartesian p orbitals, explicit intermediate sum and transverse polarizations
    def brute(theta):
        k1 = unit_vector(theta, 0.4)
        pol1 = emission_polarization_basis(k1, [1.0, 0, 0])  # k1 never parallel to x at phi = 0.4
        pol2 = [np.array([1.0, 0, 0]), np.array([0, 1.0, 0])]  # transverse to k2 = z
        total = 0.0
        for e1 in pol1:
            for e2 in pol2:
                amp = sum(e2[c] * e1[c] for c in range(3))  # sum over p_x, p_y, p_z
                total += abs(amp) ** 2
        return total

    ref = np.array([brute(t) for t in thetas])
    assert np.allclose(vals / vals[0], ref / ref[0], atol=1e-12)
    assert np.allclose(ref / ref[0], (1 + np.cos(thetas) ** 2) / 2, atol=1e-12)


def _random_mode(rng, energy):
    theta, phi = math.acos(rng.uniform(-1, 1)), rng.uniform(0, 2 * math.pi)
    kind = rng.integers(4)
    if kind == 3:
        return PhotonMode(theta, phi, energy, None, analyzer=tuple(rng.normal(size=3) + 1j * rng.normal(size=3)))
    return PhotonMode(theta, phi, energy, (1, 2, None)[kind])


def test_positivity_and_realness(rng):
    worst, worst_imag = 0.0, 0.0
    for _ in range(10_000):
        rho = random_density_matrix(rng, rank=int(rng.integers(1, 6)))
        val = coincidence_value(rho, _random_mode(rng, E1), _random_mode(rng, E2))
        worst = min(worst, val.real)
        worst_imag = max(worst_imag, abs(val.imag))
    assert worst >= -1e-12
    assert worst_imag < 1e-12


@given(st.floats(0, 1), st.integers(0, 2**32 - 1))
def test_linearity_in_rho(alpha, seed):
    rng = np.random.default_rng(seed)
    r1, r2 = random_density_matrix(rng), random_density_matrix(rng)
    m1, m2 = _random_mode(rng, E1), _random_mode(rng, E2)
    lhs = coincidence_probability(alpha * r1 + (1 - alpha) * r2, m1, m2)
    rhs = alpha * coincidence_probability(r1, m1, m2) + (1 - alpha) * coincidence_probability(r2, m1, m2)
    assert lhs == pytest.approx(rhs, abs=1e-15)


def _rotated(mode, rot):
    k = rot @ mode.direction
    theta, phi = angles(k)
    if not mode.resolved:
        return PhotonMode(theta, phi, mode.energy, None)
    return PhotonMode(theta, phi, mode.energy, None, analyzer=tuple(rot @ mode.polarization_vector()))


def test_joint_rotation_invariance(rng):
    for _ in range(100):
        rot = random_rotation(rng)
        d = wigner_D(2, rot)
        rho = random_density_matrix(rng)
        m1, m2 = _random_mode(rng, E1), _random_mode(rng, E2)
        before = coincidence_probability(rho, m1, m2)
        after = coincidence_probability(d @ rho @ d.conj().T, _rotated(m1, rot), _rotated(m2, rot))
        assert after == pytest.approx(before, abs=1e-10 * max(1.0, abs(before)))


def test_polarization_completeness(rng):
    for _ in range(50):
        rho = random_density_matrix(rng)
        t1, p1, t2, p2 = rng.uniform(0.1, 3.0), rng.uniform(0, 6), rng.uniform(0.1, 3.0), rng.uniform(0, 6)
        other = PhotonMode(t2, p2, E2, int(rng.integers(1, 3)))
        summed = sum(coincidence_probability(rho, PhotonMode(t1, p1, E1, s), other) for s in (1, 2))
        assert summed == pytest.approx(coincidence_probability(rho, PhotonMode(t1, p1, E1, None), other), abs=1e-12)
        first = PhotonMode(t1, p1, E1, 2)
        summed = sum(coincidence_probability(rho, first, PhotonMode(t2, p2, E2, s)) for s in (1, 2))
        assert summed == pytest.approx(coincidence_probability(rho, first, PhotonMode(t2, p2, E2, None)), abs=1e-12)


def test_coincidence_map_matches_pointwise(rng):
    rho = random_density_matrix(rng)
    d1 = DetectorSpec(0.0, math.pi / 2, "sigma_prime", 0.661)
    d2 = DetectorSpec(math.pi / 2, -math.pi / 2, "z", 12.078)
    modes = [d1.mode(theta=t) for t in np.linspace(0, math.pi, 9)]
    ref = [coincidence_probability(rho, m, d2.mode()) for m in modes]
    assert np.allclose(coincidence_map(rho, modes, d2.mode()), ref, rtol=1e-12, atol=1e-18)


def test_mode_validation():
    with pytest.raises(ValueError):
        PhotonMode(0.1, 0.0, E1, 3)
    with pytest.raises(ValueError):
        PhotonMode(0.1, 0.0, -1.0)
    with pytest.raises(ValueError):
        PhotonMode(0.1, 0.0, E1, occupation=-1)
    with pytest.raises(ValueError):
        PhotonMode(0.1, 0.0, E1, None).polarization_vector()
    with pytest.raises(ValueError):
        DetectorSpec(0.0, 0.0, "circular", E1)
    with pytest.raises(ValueError):
        coincidence_probability(np.eye(3), PhotonMode(1, 0, E1), PhotonMode(1, 0, E2))
    mode = PhotonMode(1.0, 0.5, E1, 1)
    assert mode.with_sigma(2).sigma == 2 and mode.with_sigma(None).resolved is False
    assert mode_coupling(E1) > 0
    with pytest.raises(ValueError):
        mode_coupling(0.0)


def test_sigma_prime_pole_traces_coincide(rng):
    # at theta = 0 and pi the sigma' analyzer is +-y; E1 rates see only the polarization, so the traces match
    d1 = DetectorSpec(0.0, math.pi / 2, "sigma_prime", 0.661)
    m2 = DetectorSpec(math.pi / 2, -math.pi / 2, "z", 12.078).mode()
    assert np.allclose(np.abs(d1.mode(theta=0.0).polarization_vector()), [0, 1, 0])
    for _ in range(100):
        rho = random_density_matrix(rng)
        a = coincidence_probability(rho, d1.mode(theta=0.0), m2)
        b = coincidence_probability(rho, d1.mode(theta=math.pi), m2)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-20)
