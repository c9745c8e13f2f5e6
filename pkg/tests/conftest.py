import numpy as np
import pytest

from mdiscord import MeasParams, QState, random_state, tree_from_params


def dm(ket):
    ket = np.asarray(ket, dtype=complex)
    ket = ket / np.linalg.norm(ket)
    return np.outer(ket, ket.conj())


KET0 = np.array([1.0, 0.0])
KET1 = np.array([0.0, 1.0])
PLUS = np.array([1.0, 1.0]) / np.sqrt(2)


@pytest.fixture
def bell():
    return QState((2, 2), dm([1, 0, 0, 1]))


@pytest.fixture
def ghz():
    return QState((2, 2, 2), dm([1, 0, 0, 0, 0, 0, 0, 1]))


@pytest.fixture
def z_tree_2q():
    return tree_from_params((2, 2), (0,), MeasParams(((0.0, 0.0),)))


@pytest.fixture
def z_tree_3q():
    return tree_from_params((2, 2, 2), (0, 1), MeasParams(((0.0, 0.0),) * 3))


def random_tree(seed, depth, dims=None):
    """Seeded measurement tree with uniform random node angles."""
    rng = np.random.default_rng(seed)
    count = 2 ** depth - 1
    flat = np.stack(
        [rng.uniform(0.0, np.pi / 2, count), rng.uniform(0.0, 2 * np.pi, count)], axis=1
    ).ravel()
    dims = dims or (2,) * (depth + 1)
    return tree_from_params(dims, tuple(range(depth)), MeasParams.from_flat(flat))


def random_qubits(seed, n, rank=None):
    side = 2 ** n
    return random_state((2,) * n, rank if rank is not None else side, seed)
