import numpy as np
import pytest

from love.model import FactorModel, benchmark_model, population_covariance


def three_factor_model(tau: float = 1.0) -> FactorModel:
    """Small overlap fixture: 6 pure rows (2 per factor) plus 2 mixed rows."""
    a = np.array(
        [
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, -1.0],
            [0.0, 0.0, -1.0],
            [0.4, 0.6, 0.0],
            [-0.5, 0.0, 0.4],
        ]
    )
    return FactorModel(A=a, C=tau * np.eye(3), Gamma=np.ones(8))


@pytest.fixture
def toy_model() -> FactorModel:
    return three_factor_model()


@pytest.fixture
def toy_sigma(toy_model):
    return population_covariance(toy_model)


@pytest.fixture(scope="session")
def design_model() -> FactorModel:
    return benchmark_model(200, seed=42)


@pytest.fixture(scope="session")
def design_sigma(design_model):
    return population_covariance(design_model)
