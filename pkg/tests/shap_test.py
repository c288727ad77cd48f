import numpy as np
import pytest
from conftest import FunctionModel
from scipy.special import expit

from credit_explainer.classifiers import LogisticModel, Standardizer, train_boosted
from credit_explainer.errors import DomainError, TooManyFeaturesError
from credit_explainer.explainers import (
    Background,
    ShapConfig,
    ShapMatrix,
    class0_result,
    coalition_weight,
    exact_shapley,
    full_background,
    kernel_shap,
    masked_prediction,
    sample_background,
    shap_matrix,
    summarize_background,
)
from credit_explainer.explainers.shapley import default_coalitions


def interacting(X: np.ndarray) -> np.ndarray:
    return expit(0.8 * X[:, 0] - 0.5 * X[:, 1] + 0.6 * X[:, 2] * X[:, 3] + 0.3 * X[:, 4] ** 2 - 0.2 * X[:, 5])


@pytest.fixture(scope="module")
def six_feature_case():
    rng = np.random.default_rng(21)
    bg = sample_background(rng.normal(size=(200, 6)), 12, seed=1)
    return FunctionModel(interacting), rng.normal(size=6), bg


# --- weights and value function ---
def test_coalition_weight_closed_form():
    assert coalition_weight(4, 1) == pytest.approx(0.25)
    assert coalition_weight(4, 2) == pytest.approx(0.125)


@pytest.mark.parametrize("s", [0, 4])
def test_coalition_weight_outside_domain(s):
    with pytest.raises(DomainError):
        coalition_weight(4, s)


def test_masked_prediction_extremes(six_feature_case):
    model, x, bg = six_feature_case
    assert masked_prediction(model, x, np.ones(6, dtype=bool), bg) == pytest.approx(model.predict_proba(x)[0])
    expected_base = model.predict_proba(bg.rows) @ bg.weights
    assert masked_prediction(model, x, np.zeros(6, dtype=bool), bg) == pytest.approx(expected_base)


def test_masked_prediction_additive():
    rng = np.random.default_rng(3)
    model = FunctionModel(lambda X: np.sin(X[:, 0]) + X[:, 1] ** 2 + 0.5 * X[:, 2])
    bg = sample_background(rng.normal(size=(50, 3)), 20, seed=0)
    x = np.array([0.4, -1.2, 2.0])
    mask = np.array([True, False, True])
    expected = np.sin(0.4) + 0.5 * 2.0 + (bg.rows[:, 1] ** 2) @ bg.weights
    assert masked_prediction(model, x, mask, bg) == pytest.approx(expected)


# --- exact oracle ---
def test_exact_linear():
    model = FunctionModel(lambda X: X[:, 0] + 2 * X[:, 1])
    result = exact_shapley(model, np.array([1.0, 1.0]), full_background(np.zeros((1, 2))))
    np.testing.assert_allclose(result.phi, [1.0, 2.0])
    assert result.base_value == 0.0


def test_exact_interaction_split_equally():
    model = FunctionModel(lambda X: X[:, 0] * X[:, 1])
    result = exact_shapley(model, np.array([1.0, 1.0]), full_background(np.zeros((1, 2))))
    np.testing.assert_allclose(result.phi, [0.5, 0.5])


def test_exact_dummy_feature():
    model = FunctionModel(lambda X: X[:, 0] * X[:, 1] + X[:, 1])
    bg = full_background(np.random.default_rng(0).normal(size=(5, 3)))
    result = exact_shapley(model, np.array([0.3, 1.5, -2.0]), bg)
    assert result.phi[2] == 0.0
    assert abs(result.residual) < 1e-12


def test_exact_refuses_wide_inputs():
    model = FunctionModel(lambda X: X.sum(axis=1))
    with pytest.raises(TooManyFeaturesError):
        exact_shapley(model, np.zeros(16), full_background(np.zeros((1, 16))))


# --- kernel shap ---
def test_exhaustive_matches_exact(six_feature_case):
    model, x, bg = six_feature_case
    exact = exact_shapley(model, x, bg)
    kernel = kernel_shap(model, x, bg, n_coalitions="exhaustive")
    assert np.max(np.abs(kernel.phi - exact.phi)) < 1e-6
    assert abs(kernel.residual) < 1e-9


def test_symmetric_features_share_credit():
    model = FunctionModel(lambda X: expit(X[:, 0] + X[:, 1] + 0.5 * X[:, 2]))
    rng = np.random.default_rng(4)
    shared = rng.normal(size=20)
    bg = full_background(np.column_stack([shared, shared, rng.normal(size=20)]))
    result = kernel_shap(model, np.array([1.0, 1.0, 0.3]), bg, n_coalitions="exhaustive")
    assert abs(result.phi[0] - result.phi[1]) < 1e-6


def test_sampled_mode_keeps_local_accuracy():
    rng = np.random.default_rng(8)
    D = 16
    coefficients = rng.normal(size=D)
    model = FunctionModel(lambda X: expit(X @ coefficients / 4))
    bg = sample_background(rng.normal(size=(100, D)), 10, seed=2)
    x = rng.normal(size=D)
    result = kernel_shap(model, x, bg, n_coalitions=600, seed=5)
    assert abs(result.residual) < 1e-6
    again = kernel_shap(model, x, bg, n_coalitions=600, seed=5)
    np.testing.assert_array_equal(result.phi, again.phi)


def test_sampled_mode_close_to_exact():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(200, 12))
    bg12 = sample_background(X, 8, seed=0)
    wide = FunctionModel(lambda Z: interacting(Z[:, :6]) + 0.1 * Z[:, 6:].sum(axis=1))
    x12 = rng.normal(size=12)
    exact = exact_shapley(wide, x12, bg12)
    sampled = kernel_shap(wide, x12, bg12, n_coalitions=2000, seed=1)
    assert np.max(np.abs(sampled.phi - exact.phi)) < 0.03


def test_default_coalition_count():
    assert default_coalitions(5) == 32
    assert default_coalitions(35) == 2118


def test_single_feature():
    model = FunctionModel(lambda X: 2 * X[:, 0])
    result = kernel_shap(model, np.array([3.0]), full_background(np.array([[1.0], [2.0]])))
    assert result.phi.tolist() == [3.0]
    assert result.base_value == 3.0


def test_class0_attributions_negate():
    model = FunctionModel(lambda X: expit(X[:, 0] - X[:, 1]))
    result = exact_shapley(model, np.array([1.0, -1.0]), full_background(np.zeros((1, 2))))
    flipped = class0_result(result)
    np.testing.assert_array_equal(flipped.phi, -result.phi)
    assert flipped.base_value + flipped.phi.sum() == pytest.approx(1.0 - result.fx)


# --- matrices ---
def test_shap_matrix_local_accuracy(encoded_split):
    train, test = encoded_split
    model = train_boosted(train.X, train.y, n_rounds=20, max_depth=3, feature_names=train.names)
    bg = summarize_background(train.X, k=10, source_n=500, seed=0)
    sm = shap_matrix(model, test.X[:100], bg, ShapConfig(seed=3), train.names)
    assert sm.n_rows == 100
    assert sm.phi.shape == (100, len(train.names))
    residuals = sm.base_values + sm.phi.sum(axis=1) - sm.fx
    assert np.max(np.abs(residuals)) < 1e-6
    assert len(sm.timings) == 100


def test_shap_matrix_empty():
    sm = shap_matrix(FunctionModel(lambda X: X[:, 0]), np.zeros((0, 3)), full_background(np.zeros((1, 3))), ShapConfig())
    assert sm.n_rows == 0
    assert sm.phi.shape == (0, 3)
    assert sm.mean_abs().tolist() == [0.0, 0.0, 0.0]


def test_shap_matrix_frames_reload(six_feature_case):
    model, _, bg = six_feature_case
    X = np.random.default_rng(5).normal(size=(4, 6))
    sm = shap_matrix(model, X, bg, ShapConfig(n_coalitions="exhaustive"))
    reloaded = ShapMatrix.from_frames(sm.to_frame(), sm.values_frame())
    np.testing.assert_array_equal(reloaded.phi, sm.phi)
    np.testing.assert_array_equal(reloaded.fx, sm.fx)
    assert reloaded.feature_names == sm.feature_names


def test_shap_matrix_same_rows_whatever_the_workers(six_feature_case):
    _, _, bg = six_feature_case
    model = LogisticModel([f"x{j}" for j in range(6)], np.linspace(-1.0, 1.0, 6), 0.2, Standardizer.identity(6))
    X = np.random.default_rng(6).normal(size=(3, 6))
    cfg = ShapConfig(n_coalitions=40, seed=9)
    serial = shap_matrix(model, X, bg, cfg, jobs=1)
    parallel = shap_matrix(model, X, bg, cfg, jobs=2)
    np.testing.assert_array_equal(serial.phi, parallel.phi)


# --- background ---
def test_single_cluster_is_the_mean():
    X = np.random.default_rng(1).normal(size=(300, 4))
    bg = summarize_background(X, k=1, source_n=300, seed=0)
    np.testing.assert_allclose(bg.rows[0], X.mean(axis=0))
    assert bg.weights.tolist() == [1.0]
    assert bg.provenance.kind == "kmeans"


def test_two_blobs_recovered():
    rng = np.random.default_rng(2)
    blobs = np.vstack([rng.normal(0.0, 1.0, size=(500, 2)), rng.normal(10.0, 1.0, size=(500, 2))])
    bg = summarize_background(blobs, k=2, source_n=1000, seed=0)
    centroids = bg.rows[np.argsort(bg.rows[:, 0])]
    np.testing.assert_allclose(centroids[0], blobs[:500].mean(axis=0), atol=0.1)
    np.testing.assert_allclose(centroids[1], blobs[500:].mean(axis=0), atol=0.1)
    np.testing.assert_allclose(bg.weights, [0.5, 0.5])


def test_rounded_centroids_use_observed_values():
    X = np.column_stack([np.tile([0.0, 1.0], 50), np.arange(100.0)])
    bg = summarize_background(X, k=3, source_n=100, seed=0, round_values=True)
    assert set(bg.rows[:, 0]) <= {0.0, 1.0}


def test_background_weights_must_sum_to_one():
    with pytest.raises(ValueError):
        Background(np.zeros((2, 1)), np.array([0.5, 0.6]), full_background(np.zeros((1, 1))).provenance)


def test_background_dict_reload():
    bg = summarize_background(np.random.default_rng(0).normal(size=(50, 3)), k=4, source_n=50)
    again = Background.from_dict(bg.to_dict())
    np.testing.assert_array_equal(again.rows, bg.rows)
    assert again.provenance == bg.provenance
