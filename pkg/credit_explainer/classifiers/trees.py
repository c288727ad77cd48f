import logging
from dataclasses import dataclass
from typing import Any, Literal

import numpy as np

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

Criterion = Literal["gini", "mse"]
LEAF = -1


@dataclass(frozen=True)
class TreeNode:
    """One node of a fitted tree. Leaves have split_feature == -1 and carry `value`."""

    split_feature: int
    split_value: float
    left: int
    right: int
    value: float
    gain: float
    n_samples: int

    @property
    def is_leaf(self) -> bool:
        return self.split_feature == LEAF


@dataclass(frozen=True)
class DecisionTree:
    """Flat array layout; node 0 is the root, children index into the same arrays."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    gain: np.ndarray
    n_samples: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=int)
        for i in range(self.n_nodes):
            if self.feature[i] != LEAF:
                depths[self.left[i]] = depths[self.right[i]] = depths[i] + 1
        return int(depths.max())

    def node(self, i: int) -> TreeNode:
        return TreeNode(
            split_feature=int(self.feature[i]),
            split_value=float(self.threshold[i]),
            left=int(self.left[i]),
            right=int(self.right[i]),
            value=float(self.value[i]),
            gain=float(self.gain[i]),
            n_samples=int(self.n_samples[i]),
        )

    def nodes(self) -> list[TreeNode]:
        return [self.node(i) for i in range(self.n_nodes)]

    def predict(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=int)
        active = np.flatnonzero(self.feature[node] != LEAF)
        while active.size:
            current = node[active]
            go_left = X[active, self.feature[current]] <= self.threshold[current]
            node[active] = np.where(go_left, self.left[current], self.right[current])
            active = active[self.feature[node[active]] != LEAF]
        return self.value[node]

    def scaled(self, factor: float) -> "DecisionTree":
        return DecisionTree(
            self.feature, self.threshold, self.left, self.right, self.value * factor, self.gain, self.n_samples
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "gain": self.gain.tolist(),
            "n_samples": self.n_samples.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "DecisionTree":
        return cls(
            feature=np.asarray(data["feature"], dtype=int),
            threshold=np.asarray(data["threshold"], dtype=float),
            left=np.asarray(data["left"], dtype=int),
            right=np.asarray(data["right"], dtype=int),
            value=np.asarray(data["value"], dtype=float),
            gain=np.asarray(data["gain"], dtype=float),
            n_samples=np.asarray(data["n_samples"], dtype=int),
        )


def _impurity_sum(count: np.ndarray, total: np.ndarray, total_sq: np.ndarray, criterion: Criterion) -> np.ndarray:
    # n * impurity: n * 2p(1-p) for gini on 0/1 targets, the sum of squared errors for mse
    with np.errstate(divide="ignore", invalid="ignore"):
        if criterion == "gini":
            p = total / count
            return np.nan_to_num(2.0 * count * p * (1.0 - p))
        return np.nan_to_num(total_sq - total**2 / count)


def _best_split(
    X: np.ndarray, target: np.ndarray, features: np.ndarray, criterion: Criterion
) -> tuple[int, float, float]:
    n = len(target)
    parent = float(_impurity_sum(np.array([n]), np.array([target.sum()]), np.array([(target**2).sum()]), criterion)[0])
    best = (LEAF, 0.0, 0.0)
    for f in features:
        order = np.argsort(X[:, f], kind="stable")
        xs, ts = X[order, f], target[order]
        valid = np.flatnonzero(xs[:-1] < xs[1:])
        if not valid.size:
            continue
        cum, cum_sq = np.cumsum(ts), np.cumsum(ts**2)
        n_left = valid + 1.0
        left = _impurity_sum(n_left, cum[valid], cum_sq[valid], criterion)
        right = _impurity_sum(n - n_left, cum[-1] - cum[valid], cum_sq[-1] - cum_sq[valid], criterion)
        gains = parent - left - right
        k = int(np.argmax(gains))
        if gains[k] > best[2] + 1e-12:
            lo, hi = xs[valid[k]], xs[valid[k] + 1]
            threshold = lo + (hi - lo) / 2.0
            best = (int(f), float(threshold if threshold < hi else lo), float(gains[k]))
    return best


class TreeBuilder:
    """Greedy CART growth with a fixed impurity criterion and optional per-split feature subsampling."""

    def __init__(
        self,
        criterion: Criterion,
        max_depth: int,
        max_features: int | None = None,
        rng: np.random.Generator | None = None,
    ) -> None:
        self.criterion = criterion
        self.max_depth = max_depth
        self.max_features = max_features
        self.rng = rng or np.random.default_rng(0)

    def build(self, X: np.ndarray, target: np.ndarray) -> DecisionTree:
        self._X, self._target = X, target
        self._nodes: list[list[float]] = []
        self._grow(np.arange(X.shape[0]), 0)
        cols = list(zip(*self._nodes))
        feature, threshold, left, right, value, gain, n_samples = (np.asarray(c) for c in cols)
        return DecisionTree(
            feature=feature.astype(int),
            threshold=threshold.astype(float),
            left=left.astype(int),
            right=right.astype(int),
            value=value.astype(float),
            gain=gain.astype(float),
            n_samples=n_samples.astype(int),
        )

    def _candidate_features(self) -> np.ndarray:
        n_features = self._X.shape[1]
        if self.max_features is None or self.max_features >= n_features:
            return np.arange(n_features)
        return self.rng.choice(n_features, size=self.max_features, replace=False)

    def _grow(self, idx: np.ndarray, depth: int) -> int:
        node_id = len(self._nodes)
        target = self._target[idx]
        value = float(target.mean()) if idx.size else 0.0
        self._nodes.append([LEAF, 0.0, LEAF, LEAF, value, 0.0, idx.size])

        pure = np.ptp(target) == 0 if idx.size else True
        if depth >= self.max_depth or idx.size < 2 or pure:
            return node_id
        feature, threshold, gain = _best_split(self._X[idx], target, self._candidate_features(), self.criterion)
        if feature == LEAF:
            return node_id

        goes_left = self._X[idx, feature] <= threshold
        left = self._grow(idx[goes_left], depth + 1)
        right = self._grow(idx[~goes_left], depth + 1)
        self._nodes[node_id] = [feature, threshold, left, right, value, gain, idx.size]
        return node_id


def resolve_max_features(max_features: int | str | None, n_features: int) -> int | None:
    if max_features is None:
        return None
    if max_features == "sqrt":
        return max(1, int(np.sqrt(n_features)))
    return int(max_features)
