import logging
from typing import Any

import numpy as np

from credit_explainer.classifiers.base import ProbabilityModel, register
from credit_explainer.classifiers.schemas import ModelKind
from credit_explainer.classifiers.trees import DecisionTree, TreeBuilder, resolve_max_features
from credit_explainer.workers.fanout import child_seeds, run_parallel

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)


@register
class ForestModel(ProbabilityModel):
    kind = ModelKind.FOREST

    def __init__(self, feature_names: list[str], trees: list[DecisionTree]) -> None:
        super().__init__(feature_names)
        self.trees = list(trees)

    def _predict_proba(self, X: np.ndarray) -> np.ndarray:
        return np.mean([tree.predict(X) for tree in self.trees], axis=0)

    def parameters(self) -> dict[str, Any]:
        return {"trees": [tree.to_dict() for tree in self.trees]}

    @classmethod
    def from_parameters(cls, feature_names: list[str], parameters: dict[str, Any]) -> "ForestModel":
        return cls(feature_names, [DecisionTree.from_dict(t) for t in parameters["trees"]])


def _grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    max_depth: int,
    max_features: int | None,
    bootstrap: bool,
    seed: np.random.SeedSequence,
) -> DecisionTree:
    rng = np.random.default_rng(seed)
    rows = rng.integers(0, X.shape[0], X.shape[0]) if bootstrap else np.arange(X.shape[0])
    return TreeBuilder("gini", max_depth, max_features, rng).build(X[rows], y[rows])


def train_forest(
    X: np.ndarray,
    y: np.ndarray,
    n_trees: int = 500,
    max_depth: int = 20,
    seed: int = 0,
    max_features: int | str | None = "sqrt",
    bootstrap: bool = True,
    jobs: int = 1,
    feature_names: list[str] | None = None,
) -> ForestModel:
    """Bagged Gini CART trees; leaves hold class-1 fractions and the forest averages them."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    per_split = resolve_max_features(max_features, X.shape[1])
    logger.info(f"🌲 Growing {n_trees} trees (max_depth={max_depth}, features/split={per_split or X.shape[1]})")
    trees = run_parallel(
        _grow_tree,
        [(X, y, max_depth, per_split, bootstrap, s) for s in child_seeds(seed, n_trees)],
        jobs=jobs,
    )
    names = feature_names or [f"x{j}" for j in range(X.shape[1])]
    return ForestModel(names, trees)
