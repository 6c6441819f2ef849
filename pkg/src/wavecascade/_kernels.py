"""Hot numeric kernels with numba and pure-numpy implementations.

The numba path is used when numba imports and ``WAVECASCADE_DISABLE_NUMBA``
is unset (or ``0``). Both paths take identical inputs and agree to rounding;
``set_backend`` switches at runtime (tests and benchmarks use it).
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

_DISABLED = os.environ.get("WAVECASCADE_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")
_backend = "numba" if HAVE_NUMBA and not _DISABLED else "numpy"


def backend() -> str:
    return _backend


def set_backend(name: str) -> str:
    """Select ``"numba"`` or ``"numpy"``; returns the previous backend."""
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    prev, _backend = _backend, name
    return prev


def _njit(fn):
    if HAVE_NUMBA:
        return numba.njit(cache=True, fastmath=False)(fn)
    return fn


# ---------------------------------------------------------------------------
# uniform-grid cubic interpolation (shared by both backends)


def cubic_table_eval_numpy(x, x0, dx, table):
    """Four-point Lagrange interpolation on a uniform table starting at x0."""
    n = table.shape[0]
    s = (np.asarray(x, dtype=float) - x0) / dx
    j = np.clip(np.floor(s).astype(np.int64), 1, n - 3)
    u = s - j
    w0 = -u * (u - 1.0) * (u - 2.0) / 6.0
    w1 = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0
    w2 = -(u + 1.0) * u * (u - 2.0) / 2.0
    w3 = (u + 1.0) * u * (u - 1.0) / 6.0
    return w0 * table[j - 1] + w1 * table[j] + w2 * table[j + 1] + w3 * table[j + 2]


@_njit
def _cubic_scalar(x, x0, dx, table):
    n = table.shape[0]
    s = (x - x0) / dx
    j = int(math.floor(s))
    if j < 1:
        j = 1
    if j > n - 3:
        j = n - 3
    u = s - j
    w0 = -u * (u - 1.0) * (u - 2.0) / 6.0
    w1 = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0
    w2 = -(u + 1.0) * u * (u - 2.0) / 2.0
    w3 = (u + 1.0) * u * (u - 1.0) / 6.0
    return w0 * table[j - 1] + w1 * table[j] + w2 * table[j + 1] + w3 * table[j + 2]


# ---------------------------------------------------------------------------
# collision transfer amplitudes
#
# T[f, a, m] = sum_i w_i Ya[a, i] g(|q|) conj(Y_{l m}(q_hat)) exp(i q . r0),
# q = k_in n_i - k_out n_f, m = -l..l.


@_njit
def _ylm_row_conj(l, x, y, z, out):
    """conj(Y_{l m}) of direction (x, y, z) for m = -l..l into out[0..2l]."""
    r = math.sqrt(x * x + y * y + z * z)
    ct = z / r
    rho = math.sqrt(x * x + y * y)
    st = rho / r
    if rho > 0.0:
        eph = complex(x / rho, y / rho)
    else:
        eph = complex(1.0, 0.0)
    for m in range(0, l + 1):
        pmm = 1.0 / math.sqrt(4.0 * math.pi)
        for k in range(1, m + 1):
            pmm = -math.sqrt((2 * k + 1) / (2.0 * k)) * st * pmm
        if l == m:
            p = pmm
        else:
            p_prev = pmm
            p_cur = ct * math.sqrt(2 * m + 3.0) * pmm
            for ll in range(m + 2, l + 1):
                a = math.sqrt((4.0 * ll * ll - 1.0) / (ll * ll - m * m))
                b = math.sqrt(((ll - 1.0) ** 2 - m * m) / (4.0 * (ll - 1.0) ** 2 - 1.0))
                p_new = a * (ct * p_cur - b * p_prev)
                p_prev = p_cur
                p_cur = p_new
            p = p_cur
        ypos = p * eph**m
        out[l + m] = ypos.conjugate()
        if m > 0:
            sign = -1.0 if m % 2 else 1.0
            out[l - m] = sign * ypos


@_njit
def _transfer_numba(k_in, k_out, n_in, w_in, ya, n_out, q0, dq, g_table, l_t, r0):
    n_f = n_out.shape[0]
    n_i = n_in.shape[0]
    n_a = ya.shape[0]
    n_m = 2 * l_t + 1
    out = np.zeros((n_f, n_a, n_m), dtype=np.complex128)
    yrow = np.zeros(n_m, dtype=np.complex128)
    has_r0 = r0[0] != 0.0 or r0[1] != 0.0 or r0[2] != 0.0
    for f in range(n_f):
        for i in range(n_i):
            qx = k_in * n_in[i, 0] - k_out * n_out[f, 0]
            qy = k_in * n_in[i, 1] - k_out * n_out[f, 1]
            qz = k_in * n_in[i, 2] - k_out * n_out[f, 2]
            qn = math.sqrt(qx * qx + qy * qy + qz * qz)
            g = _cubic_scalar(qn, q0, dq, g_table) * w_in[i]
            if has_r0:
                ph = qx * r0[0] + qy * r0[1] + qz * r0[2]
                g = g * complex(math.cos(ph), math.sin(ph))
            _ylm_row_conj(l_t, qx, qy, qz, yrow)
            for a in range(n_a):
                c = ya[a, i] * g
                for m in range(n_m):
                    out[f, a, m] += c * yrow[m]
    return out


def _transfer_numpy(k_in, k_out, n_in, w_in, ya, n_out, q0, dq, g_table, l_t, r0):
    from .angular import sph_harm_vec

    q = k_in * n_in[:, None, :] - k_out * n_out[None, :, :]
    qn = np.linalg.norm(q, axis=-1)
    g = cubic_table_eval_numpy(qn, q0, dq, g_table) * w_in[:, None]
    if np.any(r0 != 0.0):
        g = g * np.exp(1j * (q @ r0))
    ycj = np.stack([np.conj(sph_harm_vec(l_t, m, q)) for m in range(-l_t, l_t + 1)], axis=-1)
    b = g[..., None] * ycj  # (i, f, m)
    n_i, n_f, n_m = b.shape
    out = ya @ b.reshape(n_i, n_f * n_m)  # (a, f*m)
    return np.ascontiguousarray(out.reshape(ya.shape[0], n_f, n_m).transpose(1, 0, 2))


def transfer_amplitudes(k_in, k_out, n_in, w_in, ya, n_out, q0, dq, g_table, l_t, r0):
    args = (
        float(k_in),
        float(k_out),
        np.ascontiguousarray(n_in, dtype=np.float64),
        np.ascontiguousarray(w_in, dtype=np.float64),
        np.ascontiguousarray(ya, dtype=np.complex128),
        np.ascontiguousarray(n_out, dtype=np.float64),
        float(q0),
        float(dq),
        np.ascontiguousarray(g_table, dtype=np.complex128),
        int(l_t),
        np.ascontiguousarray(r0, dtype=np.float64),
    )
    if _backend == "numba":
        return _transfer_numba(*args)
    return _transfer_numpy(*args)


# ---------------------------------------------------------------------------
# order-by-order time stepping of the interaction-picture coefficient equations
#
# S_n(t+h)[a] = S_n(t)[a] - i h / hbar * p_a(t) * sum_b V_ab conj(p_b(t))
#               * (alpha_ab S_{n-1}(t)[b] + beta_ab S_{n-1}(t+h)[b]),
# with p_a(t) = exp(i E_a t / hbar) and Filon weights alpha, beta for the
# linear interpolation of S_{n-1} across the step.


@_njit
def _dyson_numba(indptr, indices, v_alpha, v_beta, energies, hbar, s0, order, h, n_steps, sector, n_sectors,
                 save_every):
    n = s0.shape[0]
    cur = np.zeros((order + 1, n), dtype=np.complex128)
    new = np.zeros((order + 1, n), dtype=np.complex128)
    cur[0, :] = s0
    new[0, :] = s0
    n_saved = n_steps // save_every + 1
    pops = np.zeros((n_steps + 1, n_sectors))
    saved = np.zeros((n_saved, n), dtype=np.complex128)
    y_old = np.zeros(n, dtype=np.complex128)
    y_new = np.zeros(n, dtype=np.complex128)
    p = np.zeros(n, dtype=np.complex128)
    for a in range(n):
        pops[0, sector[a]] += abs(s0[a]) ** 2
        saved[0, a] = s0[a]
    for step in range(n_steps):
        t = step * h
        for a in range(n):
            ph = energies[a] * t / hbar
            p[a] = complex(math.cos(ph), math.sin(ph))
        for k in range(1, order + 1):
            for b in range(n):
                pc = p[b].conjugate()
                y_old[b] = pc * cur[k - 1, b]
                y_new[b] = pc * new[k - 1, b]
            for a in range(n):
                acc = 0.0 + 0.0j
                for jj in range(indptr[a], indptr[a + 1]):
                    b = indices[jj]
                    acc += v_alpha[jj] * y_old[b] + v_beta[jj] * y_new[b]
                new[k, a] = cur[k, a] - 1j * h / hbar * p[a] * acc
        for k in range(1, order + 1):
            for a in range(n):
                cur[k, a] = new[k, a]
        for a in range(n):
            tot = 0.0 + 0.0j
            for k in range(order + 1):
                tot += cur[k, a]
            pops[step + 1, sector[a]] += tot.real * tot.real + tot.imag * tot.imag
        if (step + 1) % save_every == 0:
            idx = (step + 1) // save_every
            for a in range(n):
                tot = 0.0 + 0.0j
                for k in range(order + 1):
                    tot += cur[k, a]
                saved[idx, a] = tot
    return cur, pops, saved


def _dyson_numpy(indptr, indices, v_alpha, v_beta, energies, hbar, s0, order, h, n_steps, sector, n_sectors,
                 save_every):
    from scipy.sparse import csr_matrix

    n = s0.shape[0]
    va = csr_matrix((v_alpha, indices, indptr), shape=(n, n))
    vb = csr_matrix((v_beta, indices, indptr), shape=(n, n))
    cur = np.zeros((order + 1, n), dtype=np.complex128)
    cur[0] = s0
    n_saved = n_steps // save_every + 1
    pops = np.zeros((n_steps + 1, n_sectors))
    saved = np.zeros((n_saved, n), dtype=np.complex128)
    pops[0] = np.bincount(sector, weights=np.abs(s0) ** 2, minlength=n_sectors)
    saved[0] = s0
    for step in range(n_steps):
        t = step * h
        p = np.exp(1j * energies * t / hbar)
        pc = np.conj(p)
        new = cur.copy()
        for k in range(1, order + 1):
            acc = va @ (pc * cur[k - 1]) + vb @ (pc * new[k - 1])
            new[k] = cur[k] - 1j * h / hbar * p * acc
        cur = new
        tot = cur.sum(axis=0)
        pops[step + 1] = np.bincount(sector, weights=np.abs(tot) ** 2, minlength=n_sectors)
        if (step + 1) % save_every == 0:
            saved[(step + 1) // save_every] = tot
    return cur, pops, saved


def dyson_sweep(indptr, indices, v_alpha, v_beta, energies, hbar, s0, order, h, n_steps, sector, n_sectors,
                save_every):
    args = (
        np.ascontiguousarray(indptr, dtype=np.int64),
        np.ascontiguousarray(indices, dtype=np.int64),
        np.ascontiguousarray(v_alpha, dtype=np.complex128),
        np.ascontiguousarray(v_beta, dtype=np.complex128),
        np.ascontiguousarray(energies, dtype=np.float64),
        float(hbar),
        np.ascontiguousarray(s0, dtype=np.complex128),
        int(order),
        float(h),
        int(n_steps),
        np.ascontiguousarray(sector, dtype=np.int64),
        int(n_sectors),
        int(save_every),
    )
    if _backend == "numba":
        return _dyson_numba(*args)
    return _dyson_numpy(*args)


def filon_weights(theta):
    """Weights (alpha, beta) with int_0^1 exp(i theta u) [(1-u) f0 + u f1] du = alpha f0 + beta f1."""
    theta = np.asarray(theta, dtype=float)
    small = np.abs(theta) < 0.5
    ts = np.where(small, theta, 0.0)
    tl = np.where(small, 1.0, theta)
    # series: int_0^1 u^n e^{i t u} du = sum_k (i t)^k / (k! (n + k + 1))
    i0 = np.zeros(theta.shape, dtype=complex)
    i1 = np.zeros(theta.shape, dtype=complex)
    term = np.ones(theta.shape, dtype=complex)
    for k in range(0, 25):
        if k:
            term = term * (1j * ts) / k
        i0 = i0 + term / (k + 1)
        i1 = i1 + term / (k + 2)
    e = np.exp(1j * tl)
    i0_l = (e - 1.0) / (1j * tl)
    i1_l = e / (1j * tl) - (e - 1.0) / (1j * tl) ** 2
    i0 = np.where(small, i0, i0_l)
    i1 = np.where(small, i1, i1_l)
    return i0 - i1, i1
