import numpy as np
import pytest

from polarosd import gf2


def random_full_rank_generator(rng, k, n):
    """Random k x n GF(2) matrix with full row rank."""
    while True:
        bits = rng.integers(0, 2, size=(k, n), dtype=np.uint8)
        g = gf2.BitMatrix.from_array(bits)
        if gf2.rank(g) == k:
            return g


@pytest.fixture
def rng():
    return np.random.default_rng(20240813)
