from __future__ import annotations

import numpy as np
import pytest

from qwplanes.coins import CoinParams, random_coin


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def hadamard():
    return CoinParams.hadamard()


@pytest.fixture
def random_coins():
    g = np.random.default_rng(777)
    return [random_coin(g) for _ in range(5)]
