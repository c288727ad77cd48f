import numpy as np
import pytest
from conftest import FunctionModel

from credit_explainer.classifiers.schemas import FeatureScore
from credit_explainer.errors import ShapeMismatchError
from credit_explainer.explainers import ShapConfig, ShapMatrix, sample_background, shap_matrix
from credit_explainer.reports import (
    ByFeature,
    ByOutput,
    ForceData,
    SummaryData,
    dependence_data,
    force_data,
    importance_compare,
    summary_data,
    write_view,
)


def matrix(phi: np.ndarray, X: np.ndarray, base: float = 0.1) -> ShapMatrix:
    n, D = phi.shape
    base_values = np.full(n, base)
    return ShapMatrix([f"f{j}" for j in range(D)], phi, base_values, base_values + phi.sum(axis=1), X)


@pytest.fixture(scope="module")
def product_matrix():
    rng = np.random.default_rng(12)
    X = rng.uniform(-1.0, 1.0, size=(400, 3))
    model = FunctionModel(lambda Z: Z[:, 0] * Z[:, 1] + 0.2 * Z[:, 2])
    bg = sample_background(X, 20, seed=0)
    return shap_matrix(model, X, bg, ShapConfig(n_coalitions="exhaustive"), ["a", "b", "c"])


# --- summary ---
def test_summary_keeps_top_twenty():
    rng = np.random.default_rng(0)
    phi = 0.2 * rng.choice([-1.0, 1.0], size=(10, 35))
    phi[:, 3] *= 2.0
    data = summary_data(matrix(phi, rng.normal(size=(10, 35))), top_n=20)
    assert len(data.features) == 20
    assert len(data.points) == 200
    assert data.features[0].feature == "f3"
    assert data.features[0].mean_abs_phi == pytest.approx(0.4)
    assert data.features[1].mean_abs_phi == pytest.approx(0.2)
    assert data.features[1].feature == "f0"
    assert data.max_residual < 1e-12


def test_summary_normalises_constant_columns():
    phi = np.array([[0.1, 0.0], [0.3, 0.0]])
    X = np.array([[1.0, 5.0], [3.0, 5.0]])
    data = summary_data(matrix(phi, X), top_n=2)
    values = {(p.instance, p.feature): p.normalized_value for p in data.points}
    assert values[(0, "f0")] == 0.0 and values[(1, "f0")] == 1.0
    assert values[(0, "f1")] == 0.5


def test_misaligned_values_rejected():
    phi = np.zeros((4, 3))
    with pytest.raises(ShapeMismatchError):
        summary_data(matrix(phi, np.zeros((4, 3))), X_explain=np.zeros((4, 2)))


# --- dependence ---
def test_product_partner_found(product_matrix):
    data = dependence_data(product_matrix, None, 0)
    assert data.partner == "b"
    assert data.partner_scores["b"] > data.partner_scores["c"]
    assert len(data.points) == 400


def test_partner_ties_go_to_lowest_index():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(60, 4))
    X[:, 1] = np.repeat([0.0, 1.0, 2.0], 20)
    phi = np.zeros((60, 4))
    phi[:, 1] = 0.5 * X[:, 1]
    data = dependence_data(matrix(phi, X), None, 1)
    assert all(score == 0.0 for score in data.partner_scores.values())
    assert data.partner_index == 0


# --- force ---
def test_force_single_instance():
    phi = np.array([[0.05, -0.3, 0.1]])
    data = force_data(matrix(phi, np.ones((1, 3))))
    assert data.order == [0]
    assert [c.feature for c in data.instances[0].contributions] == ["f1", "f2", "f0"]


def test_force_stacks_by_output(product_matrix):
    data = force_data(product_matrix, ByOutput())
    stacked = [product_matrix.fx[i] for i in data.order]
    assert all(a <= b for a, b in zip(stacked, stacked[1:]))
    assert data.trace is None


def test_force_trace_by_feature(product_matrix):
    data = force_data(product_matrix, ByFeature(2))
    assert data.sort == "feature:c"
    xs = [x for x, _ in data.trace]
    assert xs == sorted(xs)
    # phi_c is linear in x_c, so the trace is monotone
    assert data.trace_rank_correlation == pytest.approx(1.0)


def test_force_needs_instances():
    with pytest.raises(ValueError):
        force_data(matrix(np.zeros((0, 2)), np.zeros((0, 2))))


# --- compare ---
def test_single_split_comparison():
    rng = np.random.default_rng(4)
    phi = np.column_stack([rng.normal(0, 0.3, 50), rng.normal(0, 0.01, 50), np.zeros(50)])
    gain = [FeatureScore(feature="f0", score=1.0), FeatureScore(feature="f1", score=0.0), FeatureScore(feature="f2", score=0.0)]
    comparison = importance_compare(gain, matrix(phi, rng.normal(size=(50, 3))), top_n=1)
    assert comparison.jaccard == 1.0
    assert comparison.gain_top_share == 1.0
    assert [r.feature for r in comparison.rows] == ["f0"]
    assert comparison.spearman is None


def test_disjoint_top_sets():
    phi = np.array([[0.0, 0.5], [0.0, -0.5]])
    gain = [FeatureScore(feature="f0", score=1.0), FeatureScore(feature="f1", score=0.0)]
    comparison = importance_compare(gain, matrix(phi, np.zeros((2, 2))), top_n=1)
    assert comparison.jaccard == 0.0
    assert {r.feature for r in comparison.rows} == {"f0", "f1"}
    assert comparison.shap_top_share == 1.0


# --- files ---
def test_views_written_as_json_and_csv(tmp_path, product_matrix):
    paths = write_view(summary_data(product_matrix, top_n=2), tmp_path, "boosted", "kernel", "summary")
    assert paths["json"].name == "boosted_kernel_summary.json"
    assert paths["csv"].exists()
    reloaded = SummaryData.model_validate_json(paths["json"].read_text())
    assert len(reloaded.points) == 800

    force_paths = write_view(force_data(product_matrix), tmp_path, "boosted", "kernel", "force")
    assert ForceData.model_validate_json(force_paths["json"].read_text()).order[0] == int(np.argmin(product_matrix.fx))
