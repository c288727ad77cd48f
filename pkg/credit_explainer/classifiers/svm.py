import logging
from typing import Any, Literal

import numpy as np
from scipy.special import expit

from credit_explainer.classifiers.base import ProbabilityModel, Standardizer, register
from credit_explainer.classifiers.logistic import minimize_logistic
from credit_explainer.classifiers.schemas import ModelKind
from credit_explainer.errors import NotAnSvmError

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

ProbabilityMethod = Literal["platt", "sigmoid"]
ETA0 = 0.1


@register
class SvmModel(ProbabilityModel):
    """
    Linear soft-margin SVM storing the raw decision value d(x) = w·z + b on
    standardised inputs z. Probabilities come from either a Platt calibration
    sigmoid(a·d + b') fitted on a held-out fold ("platt") or sigmoid(d) ("sigmoid").
    """

    kind = ModelKind.SVM_LINEAR

    def __init__(
        self,
        feature_names: list[str],
        weights: np.ndarray,
        intercept: float,
        standardizer: Standardizer,
        platt_a: float = 1.0,
        platt_b: float = 0.0,
        probability_method: ProbabilityMethod = "platt",
    ) -> None:
        super().__init__(feature_names)
        self.weights = np.asarray(weights, dtype=float)
        self.intercept = float(intercept)
        self.standardizer = standardizer
        self.platt_a = float(platt_a)
        self.platt_b = float(platt_b)
        self.probability_method = probability_method

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        return self.standardizer.transform(np.asarray(X, dtype=float)) @ self.weights + self.intercept

    def _predict_proba(self, X: np.ndarray) -> np.ndarray:
        return svm_probability_map(self, X, self.probability_method)

    def with_probability_method(self, method: ProbabilityMethod) -> "SvmModel":
        return SvmModel(
            self.feature_names,
            self.weights,
            self.intercept,
            self.standardizer,
            self.platt_a,
            self.platt_b,
            probability_method=method,
        )

    def parameters(self) -> dict[str, Any]:
        return {
            "weights": self.weights.tolist(),
            "intercept": self.intercept,
            "standardizer": self.standardizer.to_dict(),
            "platt_a": self.platt_a,
            "platt_b": self.platt_b,
            "probability_method": self.probability_method,
        }

    @classmethod
    def from_parameters(cls, feature_names: list[str], parameters: dict[str, Any]) -> "SvmModel":
        return cls(
            feature_names,
            weights=np.asarray(parameters["weights"], dtype=float),
            intercept=parameters["intercept"],
            standardizer=Standardizer.from_dict(parameters["standardizer"]),
            platt_a=parameters["platt_a"],
            platt_b=parameters["platt_b"],
            probability_method=parameters.get("probability_method", "platt"),
        )


def svm_probability_map(m: ProbabilityModel, X: np.ndarray, method: ProbabilityMethod = "platt") -> np.ndarray:
    if not isinstance(m, SvmModel):
        raise NotAnSvmError(f"probability mapping needs an svm_linear model, got {m.kind.value}", detail=m.kind.value)
    d = m.decision_function(np.atleast_2d(X))
    if method == "sigmoid":
        return expit(d)
    return expit(m.platt_a * d + m.platt_b)


def _hinge_sgd(Z: np.ndarray, y_pm: np.ndarray, lam: float, epochs: int, rng: np.random.Generator) -> tuple[np.ndarray, float]:
    # Averaged stochastic subgradient on lam/2·||w||² + mean hinge; the bias is unpenalised.
    n, dim = Z.shape
    w, b = np.zeros(dim), 0.0
    w_avg, b_avg = np.zeros(dim), 0.0
    t = 0
    for _ in range(epochs):
        for i in rng.permutation(n):
            eta = ETA0 / (1.0 + ETA0 * lam * t)
            margin = y_pm[i] * (Z[i] @ w + b)
            w *= 1.0 - eta * lam
            if margin < 1.0:
                w += eta * y_pm[i] * Z[i]
                b += eta * y_pm[i]
            t += 1
            w_avg += (w - w_avg) / t
            b_avg += (b - b_avg) / t
    return w_avg, b_avg


def _platt(d: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    # Platt's smoothed targets keep the fit finite on separable folds
    n_pos, n_neg = float(y.sum()), float(len(y) - y.sum())
    targets = np.where(y == 1, (n_pos + 1.0) / (n_pos + 2.0), 1.0 / (n_neg + 2.0))
    params, _ = minimize_logistic(d[:, None], targets, l2=0.0)
    return float(params[0]), float(params[1])


def train_svm_linear(
    X: np.ndarray,
    y: np.ndarray,
    c: float = 1.0,
    seed: int = 0,
    epochs: int = 20,
    calibration_fraction: float = 0.2,
    probability_method: ProbabilityMethod = "platt",
    feature_names: list[str] | None = None,
) -> SvmModel:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    rng = np.random.default_rng(seed)

    # the hold-out ignores labels so relabelling the data leaves the fold unchanged
    order = rng.permutation(n)
    n_cal = int(round(n * calibration_fraction)) if n >= 10 else 0
    cal_idx, fit_idx = np.sort(order[:n_cal]), np.sort(order[n_cal:])

    standardizer = Standardizer.fit(X[fit_idx])
    Z = standardizer.transform(X)
    lam = 1.0 / (c * len(fit_idx))
    w, b = _hinge_sgd(Z[fit_idx], 2.0 * y[fit_idx] - 1.0, lam, epochs, rng)

    if n_cal and 0 < y[cal_idx].sum() < n_cal:
        a, b_platt = _platt(Z[cal_idx] @ w + b, y[cal_idx])
    else:
        logger.warning("⚠️ Calibration fold lacks a class; Platt mapping falls back to sigmoid(d)")
        a, b_platt = 1.0, 0.0

    logger.info(f"✅ Linear SVM trained on {len(fit_idx)} rows, calibrated on {n_cal} (a={a:.3f}, b={b_platt:.3f})")
    names = feature_names or [f"x{j}" for j in range(X.shape[1])]
    return SvmModel(names, w, b, standardizer, a, b_platt, probability_method)
