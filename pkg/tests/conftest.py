import numpy as np
import pytest

from majoflow.lindblad import make_generator
from majoflow.operator_core import density


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)


def random_density(N, rng):
    X = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    R = X @ X.conj().T
    return density(R / np.trace(R))


def random_hermitian(N, rng):
    X = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    return (X + X.conj().T) / 2


def random_unitary(N, rng):
    X = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    Q, R = np.linalg.qr(X)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_unital_generator(N, rng, with_h=True, norm=1.0):
    """Real symmetric PSD GKS matrix: unital for the Hermitian basis."""
    m = N * N - 1
    B = rng.standard_normal((m, m))
    S = B.T @ B
    S *= norm / np.linalg.norm(S, 2)
    H = random_hermitian(N, rng) if with_h else None
    return make_generator(N, S, H)


def random_nonunital_generator(N, rng, with_h=True, norm=1.0, min_residual=0.05):
    """Hermitian PSD GKS with a guaranteed unitality residual."""
    from majoflow.lindblad import check_unital
    m = N * N - 1
    while True:
        B = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        A = B.conj().T @ B
        A *= norm / np.linalg.norm(A, 2)
        H = random_hermitian(N, rng) if with_h else None
        gen = make_generator(N, A, H)
        if check_unital(gen).residual >= min_residual:
            return gen


def random_doubly_stochastic(n, rng, terms=6):
    D = np.zeros((n, n))
    w = rng.dirichlet(np.ones(terms))
    for wi in w:
        p = rng.permutation(n)
        P = np.zeros((n, n))
        P[np.arange(n), p] = 1.0
        D += wi * P
    return D
