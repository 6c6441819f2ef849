import numpy as np


def random_density_matrix(rng, dim=5, rank=None):
    rank = rank or dim
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_rotation(rng):
    from wavecascade.angular import rotation_matrix

    alpha, gamma = rng.uniform(0, 2 * np.pi, size=2)
    beta = np.arccos(rng.uniform(-1, 1))
    return rotation_matrix(alpha, beta, gamma)
