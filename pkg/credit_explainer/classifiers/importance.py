import numpy as np

from credit_explainer.classifiers.base import ProbabilityModel
from credit_explainer.classifiers.boosted import BoostedModel
from credit_explainer.classifiers.forest import ForestModel
from credit_explainer.classifiers.schemas import FeatureScore
from credit_explainer.errors import NotTreeBasedError


def information_gain_importance(m: ProbabilityModel) -> list[FeatureScore]:
    """Per-feature sum of split gains over every tree, normalised to sum 1, highest first (ties by column index)."""
    if not isinstance(m, (ForestModel, BoostedModel)):
        raise NotTreeBasedError(f"information gain needs a forest or boosted model, got {m.kind.value}")

    totals = np.zeros(m.n_features)
    for tree in m.trees:
        for node in tree.nodes():
            if not node.is_leaf:
                totals[node.split_feature] += node.gain
    if totals.sum() > 0:
        totals = totals / totals.sum()
    order = sorted(range(m.n_features), key=lambda j: (-totals[j], j))
    return [FeatureScore(feature=m.feature_names[j], score=float(totals[j])) for j in order]
