import numpy as np

from credit_explainer.classifiers.base import (
    MODEL_REGISTRY,
    Predictor,
    ProbabilityModel,
    Standardizer,
    model_from_document,
)
from credit_explainer.classifiers.boosted import BoostedModel, train_boosted
from credit_explainer.classifiers.forest import ForestModel, train_forest
from credit_explainer.classifiers.importance import information_gain_importance
from credit_explainer.classifiers.logistic import LogisticModel, train_logistic
from credit_explainer.classifiers.metrics import evaluate, roc_auc
from credit_explainer.classifiers.mlp import MlpModel, train_mlp
from credit_explainer.classifiers.schemas import FeatureScore, Metrics, ModelDocument, ModelKind
from credit_explainer.classifiers.svm import SvmModel, svm_probability_map, train_svm_linear
from credit_explainer.classifiers.trees import DecisionTree, TreeNode


def predict_proba(m: Predictor, X: np.ndarray) -> np.ndarray:
    return m.predict_proba(X)


__all__ = [
    "MODEL_REGISTRY",
    "BoostedModel",
    "DecisionTree",
    "FeatureScore",
    "ForestModel",
    "LogisticModel",
    "Metrics",
    "MlpModel",
    "ModelDocument",
    "ModelKind",
    "Predictor",
    "ProbabilityModel",
    "Standardizer",
    "SvmModel",
    "TreeNode",
    "evaluate",
    "information_gain_importance",
    "model_from_document",
    "predict_proba",
    "roc_auc",
    "svm_probability_map",
    "train_boosted",
    "train_forest",
    "train_logistic",
    "train_mlp",
    "train_svm_linear",
]
