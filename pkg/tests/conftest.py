from typing import Callable

import numpy as np
import pytest

from credit_explainer.dataset import SplitSpec, fit_encoder, generate_synthetic, run_preprocessing, train_test_split


class FunctionModel:
    """Wraps a plain function of the feature matrix so explainers can query it like a trained model."""

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray]) -> None:
        self.fn = fn

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.asarray(self.fn(X), dtype=float)


@pytest.fixture(scope="session")
def synthetic():
    dataset, truth = generate_synthetic(3000, seed=7)
    return dataset, truth


@pytest.fixture(scope="session")
def encoded_split(synthetic):
    dataset, _ = synthetic
    processed = run_preprocessing(dataset)
    encoded = fit_encoder(processed).transform(processed)
    return train_test_split(encoded, SplitSpec(test_fraction=0.2, seed=7))


@pytest.fixture
def rng():
    return np.random.default_rng(0)
