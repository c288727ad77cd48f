import numpy as np
import pytest
from conftest import FunctionModel
from scipy.special import expit

from credit_explainer.classifiers import train_logistic
from credit_explainer.errors import ConstantFeatureError
from credit_explainer.explainers import ale_curve, ale_curves, interval_edges, refinement_check


@pytest.fixture(scope="module")
def uniform_pair():
    rng = np.random.default_rng(11)
    return rng.uniform(-1.0, 1.0, size=(2000, 2))


def test_equal_count_intervals():
    x = np.arange(1.0, 101.0)
    edges = interval_edges(x, 20)
    assert len(edges) == 21
    counts = np.bincount(np.clip(np.searchsorted(edges, x, side="left") - 1, 0, 19), minlength=20)
    assert counts.tolist() == [5] * 20


def test_constant_feature():
    X = np.column_stack([np.full(50, 2.0), np.linspace(0, 1, 50)])
    with pytest.raises(ConstantFeatureError):
        interval_edges(X[:, 0])
    curve = ale_curve(FunctionModel(lambda Z: Z[:, 0] + Z[:, 1]), X, 0, feature_name="flat")
    assert curve.constant
    assert curve.effects == [0.0]
    assert curve.counts == [50]


def test_tied_values_collapse_without_empty_intervals():
    x = np.concatenate([np.zeros(90), np.arange(1.0, 11.0)])
    edges = interval_edges(x, 20)
    assert len(edges) - 1 < 20
    assert np.all(np.diff(edges) > 0)
    idx = np.clip(np.searchsorted(edges, x, side="left") - 1, 0, len(edges) - 2)
    assert np.bincount(idx, minlength=len(edges) - 1).min() > 0


def test_interval_count_must_be_at_least_two():
    with pytest.raises(ValueError):
        interval_edges(np.arange(10.0), 1)


def test_logit_link_recovers_slope(uniform_pair):
    model = FunctionModel(lambda Z: expit(3.0 * Z[:, 0]))
    curve = ale_curve(model, uniform_pair, 0, n_intervals=20, link="logit")
    slopes = np.diff(curve.edge_values) / np.diff(curve.edges)
    np.testing.assert_allclose(slopes, 3.0, atol=1e-6)


def test_constant_model_has_no_effect(uniform_pair):
    curve = ale_curve(FunctionModel(lambda Z: np.full(len(Z), 0.3)), uniform_pair, 1)
    assert np.allclose(curve.edge_values, 0.0)
    assert np.allclose(curve.effects, 0.0)


def test_additive_terms_separate(uniform_pair):
    model = FunctionModel(lambda Z: np.sin(4.0 * Z[:, 0]) + Z[:, 1])
    curve = ale_curve(model, uniform_pair, 1, n_intervals=10)
    x1 = uniform_pair[:, 1]
    np.testing.assert_allclose(curve.edge_values, np.asarray(curve.edges) - x1.mean(), atol=1e-9)


def test_curve_is_centred(uniform_pair):
    model = FunctionModel(lambda Z: Z[:, 0] ** 2 + 0.5 * Z[:, 1])
    curve = ale_curve(model, uniform_pair, 0)
    assert abs(curve.value_at(uniform_pair[:, 0]).mean()) < 1e-9
    assert sum(curve.counts) == len(uniform_pair)


def test_curves_keep_requested_order(uniform_pair):
    model = FunctionModel(lambda Z: Z[:, 0] - Z[:, 1])
    curves = ale_curves(model, uniform_pair, [1, 0], n_intervals=5, feature_names=["a", "b"])
    assert [c.feature for c in curves] == ["b", "a"]
    assert curves[0].edge_values[-1] < curves[0].edge_values[0]


def test_refinement_of_linear_effect_is_stable(uniform_pair):
    report = refinement_check(FunctionModel(lambda Z: 2.0 * Z[:, 0]), uniform_pair, 0, n_intervals=10)
    assert report.n_intervals == 10
    assert report.relative_change < 1e-6
    assert report.curve_range == pytest.approx(2.0 * np.ptp(uniform_pair[:, 0]), rel=1e-6)


@pytest.fixture(scope="module")
def logistic_on_loans(encoded_split):
    train, _ = encoded_split
    return train_logistic(train.X, train.y, feature_names=train.names), train


@pytest.mark.parametrize("feature", ["total_pymnt", "int_rate", "recoveries"])
def test_logistic_model_gives_monotone_curve(logistic_on_loans, feature):
    model, train = logistic_on_loans
    j = train.names.index(feature)
    direction = np.sign(model.weights[j])
    curve = ale_curve(model, train.X, j, n_intervals=20)
    assert np.all(direction * np.diff(curve.edge_values) >= -1e-12)
    assert np.all(direction * np.diff(curve.effects) >= -1e-12)


def test_refinement_of_logistic_curve_is_stable(logistic_on_loans):
    model, train = logistic_on_loans
    j = train.names.index("total_pymnt")
    report = refinement_check(model, train.X, j, n_intervals=20, feature_name="total_pymnt")
    assert report.curve_range > 0
    assert report.relative_change < 0.05
