import numpy as np
import pytest


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR with phase fixing."""
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_spectrum(rng: np.random.Generator, d: int) -> np.ndarray:
    """Sorted probability vector drawn from the flat Dirichlet."""
    return np.sort(rng.dirichlet(np.ones(d)))[::-1]


def mixed_toward_uniform(rng: np.random.Generator, values: np.ndarray, steps: int = 3) -> np.ndarray:
    """A vector majorized by `values`: average over random permutations."""
    out = np.zeros_like(values)
    weights = rng.dirichlet(np.ones(steps))
    for w in weights:
        out += w * rng.permutation(values)
    return out


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
