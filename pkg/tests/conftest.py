import numpy as np
import pytest

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_hermitian(rng, d):
    a = random_complex(rng, (d, d))
    return 0.5 * (a + a.conj().T)


def random_density(rng, d):
    a = random_complex(rng, (d, d))
    rho = a @ a.conj().T + 0.05 * np.eye(d)
    return rho / np.trace(rho).real


def random_unitary(rng, d):
    q, r = np.linalg.qr(random_complex(rng, (d, d)))
    phases = np.diagonal(r).copy()
    phases /= np.abs(phases)
    return q * phases


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
