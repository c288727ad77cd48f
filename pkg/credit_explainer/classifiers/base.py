import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, ClassVar, Protocol, TypeVar

import numpy as np

from credit_explainer.classifiers.schemas import MODEL_FORMAT_VERSION, ModelDocument, ModelKind
from credit_explainer.errors import ShapeMismatchError

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)


class Predictor(Protocol):
    """Anything an explainer can query: rows in, class-1 probabilities out."""

    def predict_proba(self, X: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "Standardizer":
        scale = X.std(axis=0)
        return cls(mean=X.mean(axis=0), scale=np.where(scale > 0, scale, 1.0))

    @classmethod
    def identity(cls, n_features: int) -> "Standardizer":
        return cls(mean=np.zeros(n_features), scale=np.ones(n_features))

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) / self.scale

    def to_dict(self) -> dict[str, list[float]]:
        return {"mean": self.mean.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_dict(cls, data: dict[str, list[float]]) -> "Standardizer":
        return cls(mean=np.asarray(data["mean"], dtype=float), scale=np.asarray(data["scale"], dtype=float))


class ProbabilityModel(ABC):
    """
    Uniform contract every explainer consumes: a trained, immutable binary
    classifier returning class-1 ("Default") probabilities.
    """

    kind: ClassVar[ModelKind]

    def __init__(self, feature_names: list[str]) -> None:
        self.feature_names = list(feature_names)

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ShapeMismatchError(
                f"{self.kind.value} model expects {self.n_features} columns, got shape {X.shape}"
            )
        return np.clip(self._predict_proba(X), 0.0, 1.0)

    @abstractmethod
    def _predict_proba(self, X: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def parameters(self) -> dict[str, Any]: ...

    @classmethod
    @abstractmethod
    def from_parameters(cls, feature_names: list[str], parameters: dict[str, Any]) -> "ProbabilityModel": ...

    def to_document(self) -> ModelDocument:
        return ModelDocument(kind=self.kind, feature_names=self.feature_names, parameters=self.parameters())


M = TypeVar("M", bound=type[ProbabilityModel])

MODEL_REGISTRY: dict[ModelKind, type[ProbabilityModel]] = {}


def register(cls: M) -> M:
    MODEL_REGISTRY[cls.kind] = cls
    return cls


def model_from_document(document: ModelDocument) -> ProbabilityModel:
    if document.format_version != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {document.format_version}")
    return MODEL_REGISTRY[document.kind].from_parameters(document.feature_names, document.parameters)
