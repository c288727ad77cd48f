import logging
import time
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import comb

from credit_explainer.classifiers.base import Predictor
from credit_explainer.errors import DomainError, SingularSystemError, TooManyFeaturesError
from credit_explainer.explainers.background import Background
from credit_explainer.workers.fanout import child_seeds, run_parallel

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

EXACT_MAX_FEATURES = 15
EXHAUSTIVE_MAX_FEATURES = 13
BATCH_ROWS = 100_000
JITTER = 1e-10

Coalitions = int | Literal["exhaustive"] | None


class ShapConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_coalitions: int | Literal["exhaustive"] | None = Field(
        None, description="Sampled coalitions per row; None means min(2^D, 2D + 2048)"
    )
    background: Literal["kmeans", "sample", "full"] = "kmeans"
    background_k: int = Field(30, ge=1)
    source_n: int = Field(20000, ge=1)
    n_explain: int = Field(100, ge=0, description="Test rows explained for the global views")
    seed: int = Field(0, ge=0)


@dataclass(frozen=True)
class ShapResult:
    phi: np.ndarray
    base_value: float
    fx: float

    @property
    def residual(self) -> float:
        """base + Σphi - f(x); zero up to solver tolerance."""
        return float(self.base_value + self.phi.sum() - self.fx)


@dataclass(frozen=True)
class ShapMatrix:
    feature_names: list[str]
    phi: np.ndarray
    base_values: np.ndarray
    fx: np.ndarray
    X: np.ndarray
    timings: np.ndarray = field(default_factory=lambda: np.zeros(0), compare=False)

    @property
    def n_rows(self) -> int:
        return self.phi.shape[0]

    def row(self, i: int) -> ShapResult:
        return ShapResult(phi=self.phi[i], base_value=float(self.base_values[i]), fx=float(self.fx[i]))

    def mean_abs(self) -> np.ndarray:
        if not self.n_rows:
            return np.zeros(len(self.feature_names))
        return np.abs(self.phi).mean(axis=0)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.phi, columns=self.feature_names)
        frame["base_value"] = self.base_values
        frame["fx"] = self.fx
        return frame

    def values_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.X, columns=self.feature_names)

    @classmethod
    def from_frames(cls, phi_frame: pd.DataFrame, values_frame: pd.DataFrame) -> "ShapMatrix":
        names = [c for c in phi_frame.columns if c not in ("base_value", "fx")]
        return cls(
            feature_names=names,
            phi=phi_frame[names].to_numpy(dtype=float).reshape(len(phi_frame), len(names)),
            base_values=phi_frame["base_value"].to_numpy(dtype=float),
            fx=phi_frame["fx"].to_numpy(dtype=float),
            X=values_frame[names].to_numpy(dtype=float).reshape(len(values_frame), len(names)),
        )


def coalition_weight(M: int, s: int) -> float:
    """Kernel SHAP weight (M-1) / (C(M,s)·s·(M-s)) for a coalition of size s out of M features."""
    if not 0 < s < M:
        raise DomainError(f"coalition size must satisfy 0 < s < M, got s={s}, M={M}")
    return (M - 1) / (comb(M, s, exact=True) * s * (M - s))


def coalition_values(m: Predictor, x: np.ndarray, masks: np.ndarray, bg: Background) -> np.ndarray:
    """Weighted mean model output with masked-in features taken from x and the rest from each background row."""
    masks = np.atleast_2d(np.asarray(masks, dtype=bool))
    values = np.empty(masks.shape[0])
    per_batch = max(1, BATCH_ROWS // bg.size)
    for start in range(0, masks.shape[0], per_batch):
        chunk = masks[start : start + per_batch]
        rows = np.where(chunk[:, None, :], x[None, None, :], bg.rows[None, :, :])
        preds = m.predict_proba(rows.reshape(-1, x.shape[0])).reshape(chunk.shape[0], bg.size)
        values[start : start + chunk.shape[0]] = preds @ bg.weights
    return values


def masked_prediction(m: Predictor, x: np.ndarray, mask: np.ndarray, bg: Background) -> float:
    x = np.asarray(x, dtype=float).ravel()
    return float(coalition_values(m, x, np.asarray(mask, dtype=bool)[None, :], bg)[0])


def _all_masks(D: int) -> np.ndarray:
    return ((np.arange(2**D)[:, None] >> np.arange(D)) & 1).astype(bool)


def exact_shapley(m: Predictor, x: np.ndarray, bg: Background) -> ShapResult:
    """Shapley values by enumerating all 2^D coalitions of the interventional value function."""
    x = np.asarray(x, dtype=float).ravel()
    D = x.shape[0]
    if D > EXACT_MAX_FEATURES:
        raise TooManyFeaturesError(f"exact enumeration supports at most {EXACT_MAX_FEATURES} features, got {D}")

    masks = _all_masks(D)
    v = coalition_values(m, x, masks, bg)
    sizes = masks.sum(axis=1)
    index = np.arange(2**D)
    phi = np.zeros(D)
    for j in range(D):
        without = index[~masks[:, j]]
        s = sizes[without]
        weights = 1.0 / (D * comb(D - 1, s))
        phi[j] = weights @ (v[without | (1 << j)] - v[without])
    return ShapResult(phi=phi, base_value=float(v[0]), fx=float(v[-1]))


def _exhaustive_masks(D: int) -> tuple[np.ndarray, np.ndarray]:
    masks = _all_masks(D)[1:-1]
    sizes = masks.sum(axis=1)
    weights = np.array([coalition_weight(D, int(s)) for s in sizes])
    return masks, weights


def _sampled_masks(D: int, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    sizes = np.arange(1, D)
    size_p = (D - 1) / (sizes * (D - sizes))
    size_p = size_p / size_p.sum()
    n_pairs = max(1, n // 2)
    masks = np.zeros((2 * n_pairs, D), dtype=bool)
    drawn = rng.choice(sizes, size=n_pairs, p=size_p)
    for i, s in enumerate(drawn):
        masks[2 * i, rng.choice(D, size=s, replace=False)] = True
        masks[2 * i + 1] = ~masks[2 * i]
    # sampling already follows the kernel, so the regression weights are uniform
    return masks, np.full(masks.shape[0], 1.0 / masks.shape[0])


def _solve_constrained(masks: np.ndarray, weights: np.ndarray, y: np.ndarray, delta: float) -> np.ndarray:
    # substitute phi_last = delta - Σ phi_rest so both constraints hold exactly
    D = masks.shape[1]
    Z = masks.astype(float)
    E = Z[:, :-1] - Z[:, -1:]
    target = y - Z[:, -1] * delta
    A = (E * weights[:, None]).T @ E
    b = (E * weights[:, None]).T @ target
    try:
        rest = np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        logger.warning(f"⚠️ Kernel SHAP system singular; retrying with {JITTER:g} jitter")
        try:
            rest = np.linalg.solve(A + JITTER * np.eye(D - 1), b)
        except np.linalg.LinAlgError as e:
            raise SingularSystemError("kernel SHAP system stays singular after jitter") from e
    return np.append(rest, delta - rest.sum())


def default_coalitions(D: int) -> int:
    return int(min(2**D, 2 * D + 2048))


def kernel_shap(
    m: Predictor,
    x: np.ndarray,
    bg: Background,
    n_coalitions: Coalitions = None,
    seed: int = 0,
) -> ShapResult:
    """
    Kernel SHAP on the interventional value function with the empty-coalition and
    full-coalition constraints eliminated by substitution.

    "exhaustive" enumerates every proper coalition (D <= 13) with the exact kernel
    weights; a count samples that many coalitions in complementary pairs. When the
    requested count covers all proper coalitions, enumeration is used.
    """
    x = np.asarray(x, dtype=float).ravel()
    D = x.shape[0]
    base = masked_prediction(m, x, np.zeros(D, dtype=bool), bg)
    fx = float(m.predict_proba(x)[0])
    if D == 1:
        return ShapResult(phi=np.array([fx - base]), base_value=base, fx=fx)

    if n_coalitions == "exhaustive":
        if D > EXHAUSTIVE_MAX_FEATURES:
            raise TooManyFeaturesError(f"exhaustive mode supports at most {EXHAUSTIVE_MAX_FEATURES} features, got {D}")
        exhaustive = True
    else:
        n = default_coalitions(D) if n_coalitions is None else int(n_coalitions)
        exhaustive = D <= EXHAUSTIVE_MAX_FEATURES and n >= 2**D - 2

    if exhaustive:
        masks, weights = _exhaustive_masks(D)
    else:
        masks, weights = _sampled_masks(D, n, np.random.default_rng(seed))

    y = coalition_values(m, x, masks, bg) - base
    phi = _solve_constrained(masks, weights, y, fx - base)
    return ShapResult(phi=phi, base_value=base, fx=fx)


def class0_result(result: ShapResult) -> ShapResult:
    """Attributions for P(Fully Paid) = 1 - P(Default): negated phi around the complementary base value."""
    return ShapResult(phi=-result.phi, base_value=1.0 - result.base_value, fx=1.0 - result.fx)


def _timed_kernel_shap(
    m: Predictor, x: np.ndarray, bg: Background, n_coalitions: Coalitions, seed: int
) -> tuple[ShapResult, float]:
    started = time.perf_counter()
    result = kernel_shap(m, x, bg, n_coalitions, seed)
    return result, time.perf_counter() - started


def shap_matrix(
    m: Predictor,
    X_explain: np.ndarray,
    bg: Background,
    cfg: ShapConfig,
    feature_names: list[str] | None = None,
    jobs: int = 1,
) -> ShapMatrix:
    X_explain = np.asarray(X_explain, dtype=float)
    if X_explain.ndim == 1:
        X_explain = X_explain.reshape(0 if X_explain.size == 0 else 1, -1)
    n_rows, D = X_explain.shape
    names = feature_names or [f"x{j}" for j in range(D)]
    if n_rows == 0:
        empty = np.zeros(0)
        return ShapMatrix(names, np.zeros((0, D)), empty, empty, np.zeros((0, D)), empty)

    seeds = [int(s.generate_state(1)[0]) for s in child_seeds(cfg.seed, n_rows)]
    logger.info(f"🔍 Kernel SHAP over {n_rows} rows against a {bg.size}-row background")
    outputs = run_parallel(
        _timed_kernel_shap,
        [(m, X_explain[i], bg, cfg.n_coalitions, seeds[i]) for i in range(n_rows)],
        jobs=jobs,
        progress="shap",
    )
    results = [r for r, _ in outputs]
    return ShapMatrix(
        feature_names=names,
        phi=np.vstack([r.phi for r in results]),
        base_values=np.array([r.base_value for r in results]),
        fx=np.array([r.fx for r in results]),
        X=X_explain.copy(),
        timings=np.array([t for _, t in outputs]),
    )
