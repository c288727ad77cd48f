import logging
from typing import Any, Literal

import numpy as np
from scipy.special import expit

from credit_explainer.classifiers.base import ProbabilityModel, Standardizer, register
from credit_explainer.classifiers.schemas import ModelKind
from credit_explainer.errors import NonFiniteLossError

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

Layers = list[tuple[np.ndarray, np.ndarray]]
Init = Literal["he", "zeros"]


def _forward(layers: Layers, Z: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
    activations = [Z]
    h = Z
    for W, b in layers[:-1]:
        h = np.maximum(h @ W + b, 0.0)
        activations.append(h)
    W, b = layers[-1]
    return activations, (h @ W + b)[:, 0]


def mlp_loss_and_grad(layers: Layers, Z: np.ndarray, y: np.ndarray) -> tuple[float, Layers]:
    """Mean binary cross-entropy of a relu network with a sigmoid output unit, and its backpropagated gradient."""
    activations, logits = _forward(layers, Z)
    loss = float(np.mean(np.logaddexp(0.0, logits) - y * logits))
    delta = ((expit(logits) - y) / len(y))[:, None]
    grads: Layers = []
    for k in range(len(layers) - 1, -1, -1):
        W, _ = layers[k]
        h = activations[k]
        grads.append((h.T @ delta, delta.sum(axis=0)))
        if k:
            delta = (delta @ W.T) * (h > 0)
    return loss, grads[::-1]


def flatten_layers(layers: Layers) -> np.ndarray:
    return np.concatenate([np.concatenate([W.ravel(), b.ravel()]) for W, b in layers])


def unflatten_layers(vector: np.ndarray, widths: list[int]) -> Layers:
    layers: Layers = []
    offset = 0
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        W = vector[offset : offset + fan_in * fan_out].reshape(fan_in, fan_out)
        offset += fan_in * fan_out
        b = vector[offset : offset + fan_out]
        offset += fan_out
        layers.append((W.copy(), b.copy()))
    return layers


def init_layers(widths: list[int], rng: np.random.Generator, init: Init = "he") -> Layers:
    layers: Layers = []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        if init == "zeros":
            W = np.zeros((fan_in, fan_out))
        else:
            W = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out))
        layers.append((W, np.zeros(fan_out)))
    return layers


@register
class MlpModel(ProbabilityModel):
    kind = ModelKind.MLP

    def __init__(self, feature_names: list[str], layers: Layers, standardizer: Standardizer) -> None:
        super().__init__(feature_names)
        self.layers = [(np.asarray(W, dtype=float), np.asarray(b, dtype=float)) for W, b in layers]
        self.standardizer = standardizer

    @property
    def widths(self) -> list[int]:
        return [self.layers[0][0].shape[0]] + [W.shape[1] for W, _ in self.layers]

    def _predict_proba(self, X: np.ndarray) -> np.ndarray:
        return expit(_forward(self.layers, self.standardizer.transform(X))[1])

    def parameters(self) -> dict[str, Any]:
        return {
            "layers": [{"W": W.tolist(), "b": b.tolist()} for W, b in self.layers],
            "standardizer": self.standardizer.to_dict(),
        }

    @classmethod
    def from_parameters(cls, feature_names: list[str], parameters: dict[str, Any]) -> "MlpModel":
        layers = [(np.asarray(l["W"], dtype=float), np.asarray(l["b"], dtype=float)) for l in parameters["layers"]]
        return cls(feature_names, layers, Standardizer.from_dict(parameters["standardizer"]))


def train_mlp(
    X: np.ndarray,
    y: np.ndarray,
    layers: list[int] | None = None,
    seed: int = 0,
    epochs: int = 20,
    batch_size: int = 128,
    learning_rate: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
    init: Init = "he",
    standardize: bool = True,
    feature_names: list[str] | None = None,
) -> MlpModel:
    """
    Relu hidden layers, sigmoid output, binary cross-entropy, trained with Adam
    on shuffled mini-batches.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    hidden = [35, 35] if layers is None else list(layers)
    widths = [X.shape[1], *hidden, 1]
    rng = np.random.default_rng(seed)

    standardizer = Standardizer.fit(X) if standardize else Standardizer.identity(X.shape[1])
    Z = standardizer.transform(X)
    params = flatten_layers(init_layers(widths, rng, init))
    m1, m2 = np.zeros_like(params), np.zeros_like(params)
    step = 0

    for epoch in range(epochs):
        order = rng.permutation(len(y))
        for start in range(0, len(y), batch_size):
            batch = order[start : start + batch_size]
            loss, grads = mlp_loss_and_grad(unflatten_layers(params, widths), Z[batch], y[batch])
            if not np.isfinite(loss):
                raise NonFiniteLossError(f"mlp loss became {loss} in epoch {epoch}")
            g = flatten_layers(grads)
            step += 1
            m1 = beta1 * m1 + (1 - beta1) * g
            m2 = beta2 * m2 + (1 - beta2) * g**2
            m_hat = m1 / (1 - beta1**step)
            v_hat = m2 / (1 - beta2**step)
            params = params - learning_rate * m_hat / (np.sqrt(v_hat) + eps)
        logger.debug(f"epoch {epoch}: last batch loss {loss:.5f}")

    logger.info(f"✅ MLP {hidden} trained for {epochs} epochs ({step} Adam steps)")
    names = feature_names or [f"x{j}" for j in range(X.shape[1])]
    return MlpModel(names, unflatten_layers(params, widths), standardizer)
