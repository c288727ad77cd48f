import logging
from typing import Any

import numpy as np
from scipy.special import expit, logit

from credit_explainer.classifiers.base import ProbabilityModel, Standardizer, register
from credit_explainer.classifiers.schemas import ModelKind
from credit_explainer.errors import NonFiniteLossError

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

GRADIENT_TOL = 1e-6
MAX_ITER = 5000


def logistic_loss_and_grad(params: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float) -> tuple[float, np.ndarray]:
    """
    Mean binary cross-entropy plus (l2 / 2n)·||w||² and its gradient.

    `params` is [w_1..w_D, b]; the intercept is not penalised. Targets may be soft (in [0, 1]).
    """
    n = X.shape[0]
    w, b = params[:-1], params[-1]
    z = X @ w + b
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z) + l2 / (2 * n) * w @ w)
    residual = expit(z) - y
    grad = np.empty_like(params)
    grad[:-1] = X.T @ residual / n + l2 / n * w
    grad[-1] = residual.mean()
    return loss, grad


def minimize_logistic(
    X: np.ndarray,
    y: np.ndarray,
    l2: float,
    tol: float = GRADIENT_TOL,
    max_iter: int = MAX_ITER,
) -> tuple[np.ndarray, int]:
    """Full-batch gradient descent with Armijo backtracking, started at the prior log-odds."""
    params = np.zeros(X.shape[1] + 1)
    params[-1] = logit(np.clip(np.mean(y), 1e-12, 1 - 1e-12)) if len(y) else 0.0
    step = 1.0
    iteration = 0
    for iteration in range(max_iter):
        loss, grad = logistic_loss_and_grad(params, X, y, l2)
        if not np.isfinite(loss):
            raise NonFiniteLossError(f"logistic loss became {loss} at iteration {iteration}")
        grad_sq = float(grad @ grad)
        if np.sqrt(grad_sq) < tol:
            break
        step *= 2.0
        while step > 1e-20:
            candidate = params - step * grad
            if logistic_loss_and_grad(candidate, X, y, l2)[0] <= loss - 0.5 * step * grad_sq:
                break
            step *= 0.5
        params = params - step * grad
    return params, iteration


@register
class LogisticModel(ProbabilityModel):
    kind = ModelKind.LOGISTIC

    def __init__(self, feature_names: list[str], weights: np.ndarray, intercept: float, standardizer: Standardizer) -> None:
        super().__init__(feature_names)
        self.weights = np.asarray(weights, dtype=float)
        self.intercept = float(intercept)
        self.standardizer = standardizer

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        return self.standardizer.transform(X) @ self.weights + self.intercept

    def _predict_proba(self, X: np.ndarray) -> np.ndarray:
        return expit(self.decision_function(X))

    def parameters(self) -> dict[str, Any]:
        return {
            "weights": self.weights.tolist(),
            "intercept": self.intercept,
            "standardizer": self.standardizer.to_dict(),
        }

    @classmethod
    def from_parameters(cls, feature_names: list[str], parameters: dict[str, Any]) -> "LogisticModel":
        return cls(
            feature_names,
            weights=np.asarray(parameters["weights"], dtype=float),
            intercept=parameters["intercept"],
            standardizer=Standardizer.from_dict(parameters["standardizer"]),
        )


def train_logistic(
    X: np.ndarray,
    y: np.ndarray,
    l2: float = 1.0,
    seed: int = 0,
    feature_names: list[str] | None = None,
) -> LogisticModel:
    # the solver is deterministic; seed is accepted for a uniform training signature
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    standardizer = Standardizer.fit(X)
    params, n_iter = minimize_logistic(standardizer.transform(X), y, l2)
    logger.info(f"✅ Logistic regression converged after {n_iter} iterations (l2={l2})")
    names = feature_names or [f"x{j}" for j in range(X.shape[1])]
    return LogisticModel(names, weights=params[:-1], intercept=params[-1], standardizer=standardizer)
