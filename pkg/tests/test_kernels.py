import os
import subprocess
import sys

import numpy as np
import pytest
from scipy.integrate import quad

from wavecascade import _kernels
from wavecascade.collision import CollisionKernel
from wavecascade.ionization import EnergyGrid
from wavecascade.oracle import cascade_system, icosahedron_directions, mode_grid, propagate
from wavecascade.cascade import DEFAULT_CASCADE

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


@pytest.fixture
def restore_backend():
    prev = _kernels.backend()
    yield
    _kernels.set_backend(prev)


def both_backends(fn):
    out = {}
    for name in ("numba", "numpy"):
        _kernels.set_backend(name)
        out[name] = fn()
    return out["numba"], out["numpy"]


@needs_numba
def test_transfer_backends_agree(restore_backend):
    grid = EnergyGrid(np.array([15.70, 15.78]))
    a, b = both_backends(lambda: CollisionKernel(grid, n_theta=12, n_phi=24, brute=True).transfer)
    assert np.abs(a - b).max() <= 1e-12 * np.abs(b).max()


@needs_numba
def test_dyson_backends_agree(restore_backend):
    dirs = icosahedron_directions()
    modes = mode_grid(dirs, (DEFAULT_CASCADE.energy1,)) + mode_grid(dirs, (DEFAULT_CASCADE.energy2,))
    rho = np.zeros((5, 5), complex)
    rho[1, 1] = rho[3, 3] = 0.5
    rho[1, 3] = rho[3, 1] = 0.5
    system = cascade_system(rho, modes, coupling_scale=1e-3)
    a, b = both_backends(lambda: propagate(system, 4, 1.0, save_every=50))
    # entries that cancel by interference carry backend-dependent rounding noise, so compare per sector scale
    for n in range(3):
        sel = system.photon_number == n
        for x, y in ((a.final[0][1], b.final[0][1]), (a.saved[0], b.saved[0])):
            x, y = x[..., sel], y[..., sel]
            assert np.abs(x - y).max() <= 1e-12 * np.abs(y).max()
    assert np.allclose(a.sector_population, b.sector_population, rtol=1e-12, atol=0)


def test_cubic_interpolation_exact_for_cubics():
    x0, dx = -1.0, 0.1
    xs = x0 + dx * np.arange(40)
    poly = lambda x: 0.3 * x**3 - x**2 + 2.0 * x - 0.5  # noqa: E731
    table = poly(xs).astype(complex)
    pts = np.linspace(-0.95, 2.7, 37)
    vec = _kernels.cubic_table_eval_numpy(pts, x0, dx, table)
    scal = np.array([_kernels._cubic_scalar(p, x0, dx, table) for p in pts])
    assert np.allclose(vec, poly(pts), atol=1e-13)
    assert np.allclose(scal, vec, atol=1e-14)


@pytest.mark.parametrize("theta", [0.0, 1e-6, 0.3, 0.4999, 0.5, 0.5001, 2.0, -3.7, 40.0])
def test_filon_weights_match_quadrature(theta):
    alpha, beta = _kernels.filon_weights(np.array([theta]))

    def integral(f):
        re = quad(lambda u: np.cos(theta * u) * f(u), 0, 1, epsabs=1e-15, limit=200)[0]
        im = quad(lambda u: np.sin(theta * u) * f(u), 0, 1, epsabs=1e-15, limit=200)[0]
        return re + 1j * im

    assert alpha[0] == pytest.approx(integral(lambda u: 1 - u), abs=1e-13)
    assert beta[0] == pytest.approx(integral(lambda u: u), abs=1e-13)


def test_backend_selection(restore_backend):
    with pytest.raises(ValueError):
        _kernels.set_backend("fortran")
    prev = _kernels.set_backend("numpy")
    assert _kernels.backend() == "numpy"
    _kernels.set_backend(prev)


def test_env_flag_disables_numba():
    env = dict(os.environ, WAVECASCADE_DISABLE_NUMBA="1")
    code = "from wavecascade import _kernels; print(_kernels.backend())"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
