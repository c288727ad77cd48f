import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np
from pydantic import BaseModel

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

MAX_ITER = 100
TOLERANCE = 1e-6


class Provenance(BaseModel):
    kind: Literal["kmeans", "sample", "full"]
    k: int | None = None
    source_n: int | None = None


@dataclass(frozen=True)
class Background:
    """Weighted reference rows standing in for "feature absent"."""

    rows: np.ndarray
    weights: np.ndarray
    provenance: Provenance

    def __post_init__(self) -> None:
        if self.rows.ndim != 2 or self.rows.shape[0] < 1:
            raise ValueError(f"background needs at least one row, got shape {self.rows.shape}")
        if len(self.weights) != self.rows.shape[0] or abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValueError("background weights must match the rows and sum to 1")

    @property
    def size(self) -> int:
        return self.rows.shape[0]

    def to_dict(self) -> dict:
        return {
            "rows": self.rows.tolist(),
            "weights": self.weights.tolist(),
            "provenance": self.provenance.model_dump(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Background":
        return cls(
            rows=np.asarray(data["rows"], dtype=float),
            weights=np.asarray(data["weights"], dtype=float),
            provenance=Provenance(**data["provenance"]),
        )


def _normalised(weights: np.ndarray) -> np.ndarray:
    weights = weights / weights.sum()
    # the last entry absorbs rounding so the sum is 1 to machine precision
    weights[-1] = 1.0 - weights[:-1].sum()
    return weights


def _sq_distances(X: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    return ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)


def _kmeans_plus_plus(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    centroids = [X[rng.integers(X.shape[0])]]
    closest = ((X - centroids[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = closest.sum()
        if total <= 0:
            pick = int(rng.integers(X.shape[0]))
        else:
            pick = int(rng.choice(X.shape[0], p=closest / total))
        centroids.append(X[pick])
        closest = np.minimum(closest, ((X - X[pick]) ** 2).sum(axis=1))
    return np.array(centroids, dtype=float)


def lloyd(X: np.ndarray, k: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """k-means++ seeding then Lloyd iterations; an empty cluster is re-seeded at the point farthest from its centroid."""
    centroids = _kmeans_plus_plus(X, k, rng)
    labels = np.zeros(X.shape[0], dtype=int)
    for iteration in range(MAX_ITER):
        distances = _sq_distances(X, centroids)
        labels = distances.argmin(axis=1)
        updated = centroids.copy()
        for c in range(k):
            members = labels == c
            if members.any():
                updated[c] = X[members].mean(axis=0)
                continue
            farthest = int(distances[np.arange(X.shape[0]), labels].argmax())
            logger.warning(f"⚠️ Cluster {c} emptied at iteration {iteration}; re-seeded at row {farthest}")
            updated[c] = X[farthest]
            labels[farthest] = c
            distances[farthest] = 0.0
        shift = np.abs(updated - centroids).max()
        centroids = updated
        if shift < TOLERANCE:
            break
    labels = _sq_distances(X, centroids).argmin(axis=1)
    return centroids, labels


def summarize_background(
    X_train: np.ndarray,
    k: int = 30,
    source_n: int = 20000,
    seed: int = 0,
    round_values: bool = False,
) -> Background:
    """
    Sub-sample `source_n` rows, cluster them into `k` centroids and weight each
    centroid by its cluster's share of the sub-sample. With `round_values`, every
    centroid coordinate snaps to the nearest value observed in that column.
    """
    X_train = np.asarray(X_train, dtype=float)
    rng = np.random.default_rng(seed)
    source_n = min(source_n, X_train.shape[0])
    source = X_train[np.sort(rng.choice(X_train.shape[0], size=source_n, replace=False))]
    k = min(k, source_n)

    centroids, labels = lloyd(source, k, rng)
    counts = np.bincount(labels, minlength=k).astype(float)
    keep = counts > 0
    centroids, counts = centroids[keep], counts[keep]

    if round_values:
        for j in range(source.shape[1]):
            observed = np.unique(source[:, j])
            nearest = np.abs(centroids[:, j][:, None] - observed[None, :]).argmin(axis=1)
            centroids[:, j] = observed[nearest]

    logger.info(f"📦 Summarised {source_n} rows into {len(counts)} weighted centroids")
    return Background(
        rows=centroids,
        weights=_normalised(counts),
        provenance=Provenance(kind="kmeans", k=k, source_n=source_n),
    )


def sample_background(X_train: np.ndarray, n: int, seed: int = 0) -> Background:
    X_train = np.asarray(X_train, dtype=float)
    rng = np.random.default_rng(seed)
    n = min(n, X_train.shape[0])
    rows = X_train[np.sort(rng.choice(X_train.shape[0], size=n, replace=False))]
    return Background(rows=rows, weights=_normalised(np.ones(n)), provenance=Provenance(kind="sample", source_n=n))


def full_background(X_train: np.ndarray) -> Background:
    X_train = np.asarray(X_train, dtype=float)
    n = X_train.shape[0]
    return Background(rows=X_train.copy(), weights=_normalised(np.ones(n)), provenance=Provenance(kind="full", source_n=n))
