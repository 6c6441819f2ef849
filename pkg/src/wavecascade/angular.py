"""Angular-momentum algebra and multipole helpers.

Conventions: Condon-Shortley phase for spherical harmonics, covariant
spherical unit vectors

    e_{+1} = -(x + i y)/sqrt(2),   e_0 = z,   e_{-1} = (x - i y)/sqrt(2),

so that any vector is ``v = sum_q v_q conj(e_q)`` with ``v_q = e_q . v``.
Three-component arrays indexed by ``q`` are stored in the order
``q = -1, 0, +1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

_LOG_FACT = np.array([math.lgamma(n + 1.0) for n in range(65)])

Q_VALUES = (-1, 0, 1)


@dataclass(frozen=True)
class AngularQuantumNumbers:
    l: int
    m: int

    def __post_init__(self):
        if self.l < 0 or abs(self.m) > self.l:
            raise ValueError(f"invalid (l, m) = ({self.l}, {self.m})")


def _twice(x) -> int:
    t = 2.0 * float(x)
    n = int(round(t))
    if abs(t - n) > 1e-9:
        raise ValueError(f"{x} is not an integer or half-integer")
    return n


def _logfact(n2: int) -> float:
    # n2 is twice an integer argument
    return _LOG_FACT[n2 // 2]


def wigner3j(j1, j2, j3, m1, m2, m3) -> float:
    """Wigner 3j symbol via the Racah sum over a log-factorial table."""
    J1, J2, J3 = _twice(j1), _twice(j2), _twice(j3)
    M1, M2, M3 = _twice(m1), _twice(m2), _twice(m3)
    for J, M in ((J1, M1), (J2, M2), (J3, M3)):
        if J < 0 or abs(M) > J or (J - M) % 2:
            raise ValueError(f"non-physical angular momentum pair j={J / 2}, m={M / 2}")
    if M1 + M2 + M3 != 0:
        return 0.0
    if (J1 + J2 + J3) % 2 or J3 > J1 + J2 or J3 < abs(J1 - J2):
        return 0.0
    if max(J1, J2, J3) > 2 * 30:
        raise ValueError("angular momenta beyond factorial table")

    a = J1 + J2 - J3
    b = J1 - J2 + J3
    c = -J1 + J2 + J3
    log_pre = 0.5 * (
        _logfact(a) + _logfact(b) + _logfact(c) - _logfact(J1 + J2 + J3 + 2)
        + _logfact(J1 + M1) + _logfact(J1 - M1)
        + _logfact(J2 + M2) + _logfact(J2 - M2)
        + _logfact(J3 + M3) + _logfact(J3 - M3)
    )
    # summation bounds in doubled units
    kmin = max(0, J2 - J3 - M1, J1 - J3 + M2)
    kmax = min(a, J1 - M1, J2 + M2)
    total = 0.0
    for k in range(kmin, kmax + 1, 2):
        log_den = (
            _logfact(k) + _logfact(J3 - J2 + k + M1) + _logfact(J3 - J1 + k - M2)
            + _logfact(a - k) + _logfact(J1 - k - M1) + _logfact(J2 - k + M2)
        )
        term = math.exp(log_pre - log_den)
        total += -term if (k // 2) % 2 else term
    phase_exp = (J1 - J2 - M3) // 2
    return -total if phase_exp % 2 else total


def clebsch_gordan(j1, m1, j2, m2, J, M) -> float:
    """<j1 m1; j2 m2 | J M>."""
    if _twice(m1) + _twice(m2) != _twice(M):
        # still validate the arguments
        wigner3j(j1, j2, J, m1, m2, -M)
        return 0.0
    phase_exp = (_twice(j1) - _twice(j2) + _twice(M)) // 2
    sign = -1.0 if phase_exp % 2 else 1.0
    return sign * math.sqrt(_twice(J) + 1) * wigner3j(j1, j2, J, m1, m2, -M)


def _normalized_legendre(l: int, m: int, x):
    """Orthonormal associated Legendre function with Condon-Shortley phase, m >= 0."""
    x = np.asarray(x, dtype=float)
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    pmm = np.full_like(x, 1.0 / math.sqrt(4.0 * math.pi))
    for k in range(1, m + 1):
        pmm = -math.sqrt((2 * k + 1) / (2.0 * k)) * s * pmm
    if l == m:
        return pmm
    p_prev = pmm
    p_cur = x * math.sqrt(2 * m + 3.0) * pmm
    for ll in range(m + 2, l + 1):
        a = math.sqrt((4.0 * ll * ll - 1.0) / (ll * ll - m * m))
        b = math.sqrt(((ll - 1.0) ** 2 - m * m) / (4.0 * (ll - 1.0) ** 2 - 1.0))
        p_prev, p_cur = p_cur, a * (x * p_cur - b * p_prev)
    return p_cur


def sph_harm(l: int, m: int, theta, phi):
    """Complex spherical harmonic Y_l^m(theta, phi); theta polar, phi azimuth."""
    if l < 0 or abs(m) > l:
        raise ValueError(f"|m| must not exceed l (got l={l}, m={m})")
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    p = _normalized_legendre(l, abs(m), np.cos(theta))
    y = p * np.exp(1j * abs(m) * phi)
    if m < 0:
        y = (-1) ** (-m) * np.conj(y)
    return y[()] if y.ndim == 0 else y


def sph_harm_vec(l: int, m: int, v):
    """Spherical harmonic of the direction of Cartesian vector(s) v (..., 3)."""
    v = np.asarray(v, dtype=float)
    r = np.linalg.norm(v, axis=-1)
    cos_t = np.divide(v[..., 2], r, out=np.ones_like(r), where=r > 0)
    theta = np.arccos(np.clip(cos_t, -1.0, 1.0))
    phi = np.arctan2(v[..., 1], v[..., 0])
    return sph_harm(l, m, theta, phi)


@lru_cache(maxsize=None)
def covariant_unit_vectors() -> np.ndarray:
    """Rows e_q for q = -1, 0, +1 as complex Cartesian vectors."""
    r2 = math.sqrt(2.0)
    e = np.array(
        [
            [1.0 / r2, -1j / r2, 0.0],
            [0.0, 0.0, 1.0],
            [-1.0 / r2, -1j / r2, 0.0],
        ],
        dtype=complex,
    )
    e.setflags(write=False)
    return e


def spherical_components(v) -> np.ndarray:
    """Covariant components v_q = e_q . v for q = -1, 0, +1."""
    return covariant_unit_vectors() @ np.asarray(v, dtype=complex)


def from_spherical_components(c) -> np.ndarray:
    """Inverse of :func:`spherical_components`: sum_q c_q conj(e_q)."""
    return np.asarray(c, dtype=complex) @ np.conj(covariant_unit_vectors())


def spherical_basis_decompose(theta: float, phi: float) -> np.ndarray:
    """Coefficients (4 pi / 3)^(1/2) Y_1^q(theta, phi) of a unit direction, q = -1, 0, +1.

    ``from_spherical_components`` of the result reconstructs the Cartesian
    direction.
    """
    pref = math.sqrt(4.0 * math.pi / 3.0)
    return np.array([pref * sph_harm(1, q, theta, phi) for q in Q_VALUES], dtype=complex)


def unit_vector(theta, phi) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def double_factorial(n: int) -> int:
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def multipole_weight(lam: int, k: float, r: float) -> float:
    """Long-wavelength limit (kr)^lam / (2 lam + 1)!! of the spherical Bessel function j_lam(kr)."""
    if lam < 0 or k < 0 or r < 0:
        raise ValueError("multipole_weight needs lam, k, r >= 0")
    return (k * r) ** lam / double_factorial(2 * lam + 1)


def multipole_ratio_ok(lam: int, kr: float, tol: float = 1e-4) -> bool:
    """Whether the long-wavelength weight matches j_lam(kr) to relative ``tol``."""
    from scipy.special import spherical_jn

    exact = spherical_jn(lam, kr)
    approx = multipole_weight(lam, kr, 1.0)
    return abs(approx - exact) <= tol * abs(exact)


def tensor_matrix_element(l_f: int, m_f: int, k: int, q: int, l_i: int, m_i: int) -> float:
    """<l_f m_f | C^k_q | l_i m_i> with C^k_q = sqrt(4 pi / (2k+1)) Y_k^q."""
    if m_f != q + m_i:
        return 0.0
    red = wigner3j(l_f, k, l_i, 0, 0, 0)
    if red == 0.0:
        return 0.0
    sign = -1.0 if m_f % 2 else 1.0
    return sign * math.sqrt((2 * l_f + 1) * (2 * l_i + 1)) * wigner3j(l_f, k, l_i, -m_f, q, m_i) * red


@lru_cache(maxsize=None)
def sphere_quadrature(n_theta: int = 32, n_phi: int = 64):
    """Gauss-Legendre in cos(theta) times uniform phi.

    Returns flattened ``(theta, phi, weights)``; the weights sum to 4 pi.
    """
    x, wx = np.polynomial.legendre.leggauss(n_theta)
    theta_1d = np.arccos(x)
    phi_1d = 2.0 * math.pi * np.arange(n_phi) / n_phi
    theta, phi = np.meshgrid(theta_1d, phi_1d, indexing="ij")
    w = np.outer(wx, np.full(n_phi, 2.0 * math.pi / n_phi))
    out = (theta.ravel(), phi.ravel(), w.ravel())
    for a in out:
        a.setflags(write=False)
    return out


def rotation_matrix(alpha: float, beta: float, gamma: float) -> np.ndarray:
    """Active z-y-z Euler rotation R = Rz(alpha) Ry(beta) Rz(gamma)."""

    def rz(a):
        c, s = math.cos(a), math.sin(a)
        return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])

    c, s = math.cos(beta), math.sin(beta)
    ry = np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    return rz(alpha) @ ry @ rz(gamma)


def wigner_D(l: int, rot: np.ndarray) -> np.ndarray:
    """D^l_{m'm}(R) = <l m'| U(R) |l m>, projected on the sphere quadrature.

    The quadrature integrates products of degree-l harmonics exactly, so the
    result is exact to rounding for l <= 15.
    """
    theta, phi, w = sphere_quadrature(32, 64)
    pts = unit_vector(theta, phi)
    back = pts @ rot  # rows are R^{-1} r for orthogonal R
    ms = range(-l, l + 1)
    y_here = np.array([sph_harm(l, m, theta, phi) for m in ms])
    y_back = np.array([sph_harm_vec(l, m, back) for m in ms])
    return (np.conj(y_here) * w) @ y_back.T
