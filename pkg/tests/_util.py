from __future__ import annotations

import numpy as np


def random_unit(rng, k):
    v = rng.normal(size=k) + 1j * rng.normal(size=k)
    return v / np.linalg.norm(v)
