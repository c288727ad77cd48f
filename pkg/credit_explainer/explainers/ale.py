import logging
from typing import Literal

import numpy as np
from pydantic import BaseModel, Field
from scipy.special import logit

from credit_explainer.classifiers.base import Predictor
from credit_explainer.errors import ConstantFeatureError
from credit_explainer.workers.fanout import run_parallel

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

Link = Literal["identity", "logit"]
LOGIT_CLIP = 1e-12


class AleCurve(BaseModel):
    """First-order accumulated local effects of one feature, centred on the data."""

    feature: str
    feature_index: int
    edges: list[float] = Field(..., description="Interval boundaries, strictly increasing unless constant")
    effects: list[float] = Field(..., description="Per-interval mean of the centred curve over its points")
    counts: list[int] = Field(..., description="Data points per interval")
    edge_values: list[float] = Field(..., description="Centred accumulated effect at each edge")
    link: Link = "identity"
    constant: bool = False

    def value_at(self, x: np.ndarray | float) -> np.ndarray:
        return np.interp(np.asarray(x, dtype=float), self.edges, self.edge_values)


class RefinementReport(BaseModel):
    feature: str
    n_intervals: int
    max_change: float = Field(..., description="Largest |change| at the data deciles after doubling the intervals")
    curve_range: float
    relative_change: float = Field(..., description="max_change / curve_range (0 for a flat curve)")


def _assign(x: np.ndarray, edges: np.ndarray) -> np.ndarray:
    # interval b covers (e_b, e_b+1]; the minimum joins the first interval
    return np.clip(np.searchsorted(edges, x, side="left") - 1, 0, len(edges) - 2)


def interval_edges(x_col: np.ndarray, n_intervals: int = 20) -> np.ndarray:
    """
    Quantile edges with equal neighbours merged and empty intervals folded into
    their neighbour, so every surviving interval holds at least one point.

    Raises:
        ConstantFeatureError: the column takes a single value
    """
    if n_intervals < 2:
        raise ValueError(f"n_intervals must be >= 2, got {n_intervals}")
    x_col = np.asarray(x_col, dtype=float)
    edges = np.unique(np.quantile(x_col, np.linspace(0.0, 1.0, n_intervals + 1)))
    if len(edges) < 2:
        raise ConstantFeatureError(f"feature is constant at {x_col[0] if x_col.size else 'n/a'}")

    while len(edges) > 2:
        counts = np.bincount(_assign(x_col, edges), minlength=len(edges) - 1)
        empty = np.flatnonzero(counts == 0)
        if not empty.size:
            break
        b = int(empty[0])
        # drop the upper edge of an empty interval, or the lower one for the last interval
        edges = np.delete(edges, b + 1 if b + 1 < len(edges) - 1 else b)
    return edges


def _scored(m: Predictor, X: np.ndarray, link: Link) -> np.ndarray:
    p = m.predict_proba(X)
    if link == "logit":
        return logit(np.clip(p, LOGIT_CLIP, 1.0 - LOGIT_CLIP))
    return p


def ale_curve(
    m: Predictor,
    X: np.ndarray,
    feature: int,
    n_intervals: int = 20,
    link: Link = "identity",
    feature_name: str | None = None,
) -> AleCurve:
    X = np.asarray(X, dtype=float)
    x = X[:, feature]
    name = feature_name or f"x{feature}"
    try:
        edges = interval_edges(x, n_intervals)
    except ConstantFeatureError as e:
        logger.warning(f"⚠️ {name}: {e.message}; ALE is identically zero")
        value = float(x[0]) if x.size else 0.0
        return AleCurve(
            feature=name,
            feature_index=feature,
            edges=[value, value],
            effects=[0.0],
            counts=[int(x.size)],
            edge_values=[0.0, 0.0],
            link=link,
            constant=True,
        )

    n_bins = len(edges) - 1
    idx = _assign(x, edges)
    X_lo, X_hi = X.copy(), X.copy()
    X_lo[:, feature] = edges[idx]
    X_hi[:, feature] = edges[idx + 1]
    diffs = _scored(m, X_hi, link) - _scored(m, X_lo, link)

    counts = np.bincount(idx, minlength=n_bins)
    local = np.bincount(idx, weights=diffs, minlength=n_bins) / counts
    accumulated = np.concatenate([[0.0], np.cumsum(local)])
    accumulated -= np.interp(x, edges, accumulated).mean()

    at_points = np.interp(x, edges, accumulated)
    effects = np.bincount(idx, weights=at_points, minlength=n_bins) / counts
    return AleCurve(
        feature=name,
        feature_index=feature,
        edges=edges.tolist(),
        effects=effects.tolist(),
        counts=counts.tolist(),
        edge_values=accumulated.tolist(),
        link=link,
    )


def ale_curves(
    m: Predictor,
    X: np.ndarray,
    features: list[int],
    n_intervals: int = 20,
    link: Link = "identity",
    feature_names: list[str] | None = None,
    jobs: int = 1,
) -> list[AleCurve]:
    names = feature_names or [f"x{j}" for j in range(np.shape(X)[1])]
    return run_parallel(
        ale_curve,
        [(m, X, j, n_intervals, link, names[j]) for j in features],
        jobs=jobs,
        progress="ale",
    )


def refinement_check(
    m: Predictor,
    X: np.ndarray,
    feature: int,
    n_intervals: int = 20,
    link: Link = "identity",
    feature_name: str | None = None,
) -> RefinementReport:
    """Compare the curve at n and 2n intervals on the data deciles."""
    X = np.asarray(X, dtype=float)
    coarse = ale_curve(m, X, feature, n_intervals, link, feature_name)
    fine = ale_curve(m, X, feature, 2 * n_intervals, link, feature_name)
    deciles = np.quantile(X[:, feature], np.linspace(0.1, 0.9, 9))
    change = float(np.abs(coarse.value_at(deciles) - fine.value_at(deciles)).max())
    curve_range = float(np.ptp(coarse.edge_values))
    return RefinementReport(
        feature=coarse.feature,
        n_intervals=n_intervals,
        max_change=change,
        curve_range=curve_range,
        relative_change=change / curve_range if curve_range > 0 else 0.0,
    )
