import logging
from typing import Any

import numpy as np
from scipy.special import expit, logit

from credit_explainer.classifiers.base import ProbabilityModel, register
from credit_explainer.classifiers.schemas import ModelKind
from credit_explainer.classifiers.trees import DecisionTree, TreeBuilder

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

MAX_HALVINGS = 20


def _log_loss(y: np.ndarray, score: np.ndarray) -> float:
    return float(np.mean(np.logaddexp(0.0, score) - y * score))


@register
class BoostedModel(ProbabilityModel):
    kind = ModelKind.BOOSTED

    def __init__(
        self,
        feature_names: list[str],
        base_score: float,
        trees: list[DecisionTree],
        train_loss: list[float] | None = None,
    ) -> None:
        super().__init__(feature_names)
        self.base_score = float(base_score)
        self.trees = list(trees)
        self.train_loss = list(train_loss or [])

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        score = np.full(X.shape[0], self.base_score)
        for tree in self.trees:
            score += tree.predict(X)
        return score

    def _predict_proba(self, X: np.ndarray) -> np.ndarray:
        return expit(self.decision_function(X))

    def parameters(self) -> dict[str, Any]:
        return {
            "base_score": self.base_score,
            "trees": [tree.to_dict() for tree in self.trees],
            "train_loss": self.train_loss,
        }

    @classmethod
    def from_parameters(cls, feature_names: list[str], parameters: dict[str, Any]) -> "BoostedModel":
        return cls(
            feature_names,
            base_score=parameters["base_score"],
            trees=[DecisionTree.from_dict(t) for t in parameters["trees"]],
            train_loss=parameters.get("train_loss"),
        )


def train_boosted(
    X: np.ndarray,
    y: np.ndarray,
    n_rounds: int = 100,
    max_depth: int = 4,
    learning_rate: float = 0.1,
    seed: int = 0,
    feature_names: list[str] | None = None,
) -> BoostedModel:
    """
    Gradient boosting on the log-odds with logistic loss. Each round fits a
    regression tree to the negative gradient y - sigmoid(F); stored leaf values
    already include the learning rate, so the score is base + sum of trees.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    base = float(logit(np.clip(y.mean(), 1e-12, 1 - 1e-12)))
    score = np.full(X.shape[0], base)
    losses = [_log_loss(y, score)]
    builder = TreeBuilder("mse", max_depth, None, np.random.default_rng(seed))
    trees: list[DecisionTree] = []

    for round_no in range(n_rounds):
        tree = builder.build(X, y - expit(score))
        step = tree.predict(X) * learning_rate
        scale = 1.0
        for _ in range(MAX_HALVINGS):
            if _log_loss(y, score + scale * step) <= losses[-1]:
                break
            scale *= 0.5
        else:
            logger.warning(f"⚠️ Round {round_no}: no loss-decreasing step; tree skipped")
            losses.append(losses[-1])
            continue
        tree = tree.scaled(learning_rate * scale)
        score = score + tree.predict(X)
        trees.append(tree)
        losses.append(_log_loss(y, score))

    logger.info(f"✅ Boosted {len(trees)} trees; training log-loss {losses[0]:.4f} -> {losses[-1]:.4f}")
    names = feature_names or [f"x{j}" for j in range(X.shape[1])]
    return BoostedModel(names, base_score=base, trees=trees, train_loss=losses)
