import numpy as np
import pytest

from filtdim import DiscreteMeasure, make_cantor, make_random

BASE_SEED = 20250809


def random_measure_suite(count: int = 20, max_atoms: int = 50) -> list[DiscreteMeasure]:
    """Seeded random measures alternating dim 1 and 2, <= max_atoms atoms each."""
    out = []
    for i in range(count):
        rng = np.random.default_rng(BASE_SEED + i)
        dim = 1 + (i % 2)
        n = int(rng.integers(5, max_atoms + 1))
        out.append(make_random(dim, n, seed=BASE_SEED + 1000 + i))
    return out


@pytest.fixture(scope="session")
def random_measures():
    return random_measure_suite()


@pytest.fixture(scope="session")
def cantor10():
    return make_cantor(10)


@pytest.fixture(scope="session")
def cantor8():
    return make_cantor(8)
