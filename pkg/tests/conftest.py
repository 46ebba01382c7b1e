import numpy as np
import pytest

from distclust.gaussian import GaussianModel
from distclust.matrixcore import SymMatrix


def random_spd(d: int, rng, ridge: float = 0.5) -> np.ndarray:
    a = rng.standard_normal((d, d))
    return a @ a.T + ridge * np.eye(d)


def random_model(d: int, rng, spread: float = 1.0, ridge: float = 0.5) -> GaussianModel:
    return GaussianModel(
        spread * rng.standard_normal(d), SymMatrix(random_spd(d, rng, ridge))
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20260815)
