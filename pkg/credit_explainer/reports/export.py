import logging
from dataclasses import dataclass

import numpy as np
from scipy.stats import spearmanr

from credit_explainer.classifiers.schemas import FeatureScore
from credit_explainer.errors import ShapeMismatchError
from credit_explainer.explainers.shapley import ShapMatrix
from credit_explainer.reports.schemas import (
    ComparisonRow,
    Contribution,
    DependenceData,
    DependencePoint,
    ForceData,
    ForceInstance,
    ImportanceComparison,
    SummaryData,
    SummaryFeature,
    SummaryPoint,
)

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

LOCAL_ACCURACY_TOL = 1e-6


@dataclass(frozen=True)
class ByOutput:
    pass


@dataclass(frozen=True)
class ByFeature:
    feature: int


ForceSort = ByOutput | ByFeature


def _checked_values(sm: ShapMatrix, X_explain: np.ndarray | None) -> np.ndarray:
    X = sm.X if X_explain is None else np.asarray(X_explain, dtype=float)
    if X.shape != sm.phi.shape:
        raise ShapeMismatchError(f"explained values {X.shape} do not align with attributions {sm.phi.shape}")
    return X


def _max_residual(sm: ShapMatrix) -> float:
    if not sm.n_rows:
        return 0.0
    residual = float(np.abs(sm.base_values + sm.phi.sum(axis=1) - sm.fx).max())
    if residual > LOCAL_ACCURACY_TOL:
        logger.warning(f"⚠️ Local accuracy off by {residual:.3g} in exported attributions")
    return residual


def _ranking(scores: np.ndarray) -> list[int]:
    return sorted(range(len(scores)), key=lambda j: (-scores[j], j))


def summary_data(sm: ShapMatrix, X_explain: np.ndarray | None = None, top_n: int = 20) -> SummaryData:
    X = _checked_values(sm, X_explain)
    mean_abs = sm.mean_abs()
    top = _ranking(mean_abs)[:top_n]

    lo, hi = (X.min(axis=0), X.max(axis=0)) if sm.n_rows else (np.zeros(X.shape[1]), np.zeros(X.shape[1]))
    span = hi - lo
    normalized = np.where(span > 0, (X - lo) / np.where(span > 0, span, 1.0), 0.5)

    features = [
        SummaryFeature(feature=sm.feature_names[j], feature_index=j, rank=r, mean_abs_phi=float(mean_abs[j]))
        for r, j in enumerate(top)
    ]
    points = [
        SummaryPoint(
            instance=i,
            rank=r,
            feature=sm.feature_names[j],
            phi=float(sm.phi[i, j]),
            normalized_value=float(normalized[i, j]),
        )
        for r, j in enumerate(top)
        for i in range(sm.n_rows)
    ]
    return SummaryData(top_n=top_n, features=features, points=points, max_residual=_max_residual(sm))


def _bins(x: np.ndarray, n_bins: int = 10) -> np.ndarray:
    distinct, inverse = np.unique(x, return_inverse=True)
    if len(distinct) <= n_bins:
        # a discrete feature gets one bin per value
        return inverse.ravel()
    edges = np.unique(np.quantile(x, np.linspace(0.0, 1.0, n_bins + 1)))
    if len(edges) < 2:
        return np.zeros(len(x), dtype=int)
    return np.clip(np.searchsorted(edges, x, side="left") - 1, 0, len(edges) - 2)


def _abs_corr(a: np.ndarray, b: np.ndarray) -> float:
    if len(a) < 2 or a.std() == 0 or b.std() == 0:
        return 0.0
    return float(abs(np.corrcoef(a, b)[0, 1]))


def interaction_scores(sm: ShapMatrix, X: np.ndarray, j: int) -> np.ndarray:
    """Count-weighted mean over deciles of x_j of |corr(x_k, phi_j)|; undefined correlations count as 0."""
    bins = _bins(X[:, j])
    scores = np.zeros(X.shape[1])
    if not sm.n_rows:
        return scores
    for k in range(X.shape[1]):
        if k == j:
            continue
        total = 0.0
        for b in np.unique(bins):
            rows = bins == b
            total += rows.sum() * _abs_corr(X[rows, k], sm.phi[rows, j])
        scores[k] = total / sm.n_rows
    return scores


def dependence_data(sm: ShapMatrix, X_explain: np.ndarray | None, j: int) -> DependenceData:
    X = _checked_values(sm, X_explain)
    scores = interaction_scores(sm, X, j)
    candidates = [k for k in range(X.shape[1]) if k != j]
    partner = min(candidates, key=lambda k: (-scores[k], k)) if candidates else j
    return DependenceData(
        feature=sm.feature_names[j],
        feature_index=j,
        partner=sm.feature_names[partner],
        partner_index=partner,
        partner_scores={sm.feature_names[k]: float(scores[k]) for k in candidates},
        points=[
            DependencePoint(instance=i, x_j=float(X[i, j]), phi_j=float(sm.phi[i, j]), x_k=float(X[i, partner]))
            for i in range(sm.n_rows)
        ],
    )


def force_data(sm: ShapMatrix, sort: ForceSort = ByOutput()) -> ForceData:
    if not sm.n_rows:
        raise ValueError("force layout needs at least one explained instance")
    _max_residual(sm)
    instances = []
    for i in range(sm.n_rows):
        order = sorted(range(len(sm.feature_names)), key=lambda j: (-abs(sm.phi[i, j]), j))
        instances.append(
            ForceInstance(
                instance=i,
                base_value=float(sm.base_values[i]),
                fx=float(sm.fx[i]),
                contributions=[
                    Contribution(feature=sm.feature_names[j], feature_index=j, phi=float(sm.phi[i, j])) for j in order
                ],
            )
        )

    if isinstance(sort, ByFeature):
        j = sort.feature
        stacking = sorted(range(sm.n_rows), key=lambda i: (sm.X[i, j], i))
        trace = [(float(sm.X[i, j]), float(sm.phi[i, j])) for i in stacking]
        rho = spearmanr(sm.X[:, j], sm.phi[:, j])[0] if sm.n_rows > 1 else np.nan
        return ForceData(
            sort=f"feature:{sm.feature_names[j]}",
            order=stacking,
            instances=instances,
            trace=trace,
            trace_rank_correlation=None if np.isnan(rho) else float(rho),
        )
    stacking = sorted(range(sm.n_rows), key=lambda i: (sm.fx[i], i))
    return ForceData(sort="output", order=stacking, instances=instances)


def importance_compare(gain: list[FeatureScore], sm: ShapMatrix, top_n: int = 20) -> ImportanceComparison:
    names = sm.feature_names
    gain_by_name = {s.feature: s.score for s in gain}
    gain_values = np.array([gain_by_name.get(name, 0.0) for name in names])
    shap_values = sm.mean_abs()

    gain_order = _ranking(gain_values)
    shap_order = _ranking(shap_values)
    gain_top, shap_top = gain_order[:top_n], shap_order[:top_n]
    gain_rank = {j: r for r, j in enumerate(gain_order)}
    shap_rank = {j: r for r, j in enumerate(shap_order)}
    union = sorted(set(gain_top) | set(shap_top), key=lambda j: (gain_rank[j], j))

    rows = [
        ComparisonRow(
            feature=names[j],
            gain=float(gain_values[j]),
            gain_rank=gain_rank[j] if j in gain_top else None,
            mean_abs_phi=float(shap_values[j]),
            shap_rank=shap_rank[j] if j in shap_top else None,
        )
        for j in union
    ]
    jaccard = len(set(gain_top) & set(shap_top)) / len(union) if union else 1.0
    rho = spearmanr(gain_values[union], shap_values[union])[0] if len(union) > 1 else np.nan
    top_five = shap_values[shap_order[:5]]
    return ImportanceComparison(
        top_n=top_n,
        rows=rows,
        jaccard=jaccard,
        spearman=None if np.isnan(rho) else float(rho),
        gain_top_share=float(gain_values[gain_order[0]]) if len(names) else 0.0,
        shap_top_share=float(top_five[0] / top_five.sum()) if top_five.sum() > 0 else 0.0,
    )
