import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.stats import truncnorm

from credit_explainer.classifiers.base import Predictor
from credit_explainer.errors import SingularSystemError
from credit_explainer.workers.fanout import child_seeds, run_parallel

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

MIN_QUARTILE_VALUES = 4
MAX_ESCALATIONS = 3
CONDITION_LIMIT = 1e12


class LimeConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_samples: int = Field(5000, ge=1, description="Perturbations per explained instance (row 0 is the instance)")
    top_k: int = Field(10, ge=1, description="Features kept in the explanation")
    kernel_width: float | None = Field(None, gt=0, description="Exponential kernel width; None means 0.75·sqrt(D)")
    discretizer: Literal["quartile", "none"] = Field("quartile")
    ridge_alpha: float = Field(1.0, ge=0, description="Ridge penalty of both surrogate fits")
    seed: int = Field(0, ge=0)


class ExplanationEntry(BaseModel):
    condition: str
    feature: str
    feature_index: int
    weight: float = Field(..., description="Positive pushes toward Default, negative toward Fully Paid")


class LocalExplanation(BaseModel):
    instance_id: int | str = 0
    predicted_class: int
    class_probabilities: list[float] = Field(..., description="[P(Fully Paid), P(Default)]")
    intercept: float
    r2: float = Field(..., description="Proximity-weighted R² of the top-k surrogate")
    entries: list[ExplanationEntry]
    topk_sum: float = Field(..., description="Sum of the top-k surrogate weights")
    full_sum: float = Field(..., description="Sum of the all-feature ridge weights")
    ridge_alpha: float = Field(..., description="Penalty actually used after any escalation")


@dataclass(frozen=True)
class Discretizer:
    """
    Per-feature binning learnt from training data.

    Features with at least four distinct values get quartile edges; the rest are
    treated as categorical-like, with their distinct values as bins sampled by
    training frequency.
    """

    names: list[str]
    edges: list[np.ndarray]
    categorical: np.ndarray
    levels: list[np.ndarray]
    frequencies: list[np.ndarray]
    bin_lower: list[np.ndarray]
    bin_upper: list[np.ndarray]
    bin_mean: list[np.ndarray]
    bin_sd: list[np.ndarray]
    mean: np.ndarray
    scale: np.ndarray

    @property
    def n_features(self) -> int:
        return len(self.names)

    def n_bins(self, j: int) -> int:
        return len(self.levels[j]) if self.categorical[j] else len(self.edges[j]) + 1

    def bin_of(self, j: int, values: np.ndarray) -> np.ndarray:
        """Bin index per value; a value on an edge belongs to the lower bin. Unknown levels map to -1."""
        values = np.asarray(values, dtype=float)
        if self.categorical[j]:
            hits = values[:, None] == self.levels[j][None, :]
            return np.where(hits.any(axis=1), hits.argmax(axis=1), -1)
        return np.searchsorted(self.edges[j], values, side="left")

    def condition(self, j: int, value: float) -> str:
        name = self.names[j]
        if self.categorical[j]:
            if "=" in name and set(self.levels[j].tolist()) <= {0.0, 1.0}:
                # one-hot indicator: the column name already reads as the condition
                return name if value == 1.0 else name.replace("=", " != ", 1)
            return f"{name} = {value:.2f}"
        edges = self.edges[j]
        b = int(self.bin_of(j, np.array([value]))[0])
        if b == 0:
            return f"{name} <= {edges[0]:.2f}"
        if b == len(edges):
            return f"{name} > {edges[-1]:.2f}"
        return f"{edges[b - 1]:.2f} < {name} <= {edges[b]:.2f}"


def fit_discretizer(X_train: np.ndarray, feature_names: list[str] | None = None) -> Discretizer:
    X_train = np.asarray(X_train, dtype=float)
    n_features = X_train.shape[1]
    names = feature_names or [f"x{j}" for j in range(n_features)]
    parts: dict[str, list] = {k: [] for k in ("edges", "levels", "freq", "lower", "upper", "mean", "sd")}
    categorical = np.zeros(n_features, dtype=bool)

    for j in range(n_features):
        column = X_train[:, j]
        distinct, counts = np.unique(column, return_counts=True)
        if len(distinct) < MIN_QUARTILE_VALUES:
            categorical[j] = True
            parts["edges"].append(np.array([]))
            parts["levels"].append(distinct)
            parts["freq"].append(counts / counts.sum())
            for key in ("lower", "upper", "mean"):
                parts[key].append(distinct.copy())
            parts["sd"].append(np.zeros(len(distinct)))
            continue

        edges = np.unique(np.quantile(column, [0.25, 0.5, 0.75]))
        bins = np.searchsorted(edges, column, side="left")
        bounds = np.concatenate([[column.min()], edges, [column.max()]])
        means, sds = [], []
        for b in range(len(edges) + 1):
            members = column[bins == b]
            if members.size:
                means.append(members.mean())
                sds.append(members.std())
            else:
                means.append((bounds[b] + bounds[b + 1]) / 2.0)
                sds.append(0.0)
        parts["edges"].append(edges)
        parts["levels"].append(np.array([]))
        parts["freq"].append(np.array([]))
        parts["lower"].append(bounds[:-1])
        parts["upper"].append(bounds[1:])
        parts["mean"].append(np.asarray(means))
        parts["sd"].append(np.asarray(sds))

    scale = X_train.std(axis=0)
    return Discretizer(
        names=list(names),
        edges=parts["edges"],
        categorical=categorical,
        levels=parts["levels"],
        frequencies=parts["freq"],
        bin_lower=parts["lower"],
        bin_upper=parts["upper"],
        bin_mean=parts["mean"],
        bin_sd=parts["sd"],
        mean=X_train.mean(axis=0),
        scale=np.where(scale > 0, scale, 1.0),
    )


def _draw_in_bins(disc: Discretizer, j: int, bins: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    values = np.empty(len(bins))
    for b in np.unique(bins):
        rows = np.flatnonzero(bins == b)
        lo, hi = disc.bin_lower[j][b], disc.bin_upper[j][b]
        mean, sd = disc.bin_mean[j][b], disc.bin_sd[j][b]
        if sd <= 0 or hi <= lo:
            values[rows] = mean
            continue
        values[rows] = truncnorm.rvs((lo - mean) / sd, (hi - mean) / sd, loc=mean, scale=sd, size=rows.size, random_state=rng)
    return values


def sample_perturbations(x: np.ndarray, disc: Discretizer, cfg: LimeConfig) -> tuple[np.ndarray, np.ndarray]:
    """
    Draw `cfg.n_samples` perturbations around `x`.

    Returns (Z_interpretable, Z_raw). With the quartile discretizer the
    interpretable representation is binary (1 where the drawn bin or level equals
    the instance's own). With discretizer "none", non-categorical features are
    sampled as x + N(0, sd²) and represented by their standardised value.
    Row 0 is always the instance itself.
    """
    x = np.asarray(x, dtype=float).ravel()
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n_samples
    Z_raw = np.empty((n, disc.n_features))
    Z_int = np.empty((n, disc.n_features))

    for j in range(disc.n_features):
        own = int(disc.bin_of(j, x[j : j + 1])[0])
        if disc.categorical[j]:
            drawn = rng.choice(len(disc.levels[j]), size=n, p=disc.frequencies[j])
            Z_raw[:, j] = disc.levels[j][drawn]
            Z_int[:, j] = drawn == own
        elif cfg.discretizer == "none":
            Z_raw[:, j] = x[j] + rng.standard_normal(n) * disc.scale[j]
            Z_int[:, j] = (Z_raw[:, j] - disc.mean[j]) / disc.scale[j]
        else:
            drawn = rng.integers(0, disc.n_bins(j), size=n)
            Z_raw[:, j] = _draw_in_bins(disc, j, drawn, rng)
            Z_int[:, j] = drawn == own

    Z_raw[0] = x
    if cfg.discretizer == "none":
        Z_int[0] = np.where(disc.categorical, 1.0, (x - disc.mean) / disc.scale)
    else:
        Z_int[0] = 1.0
    return Z_int, Z_raw


def resolve_kernel_width(cfg: LimeConfig, n_features: int) -> float:
    return cfg.kernel_width if cfg.kernel_width is not None else 0.75 * np.sqrt(n_features)


def proximity_weights(Z_interpretable: np.ndarray, cfg: LimeConfig) -> np.ndarray:
    """Exponential kernel exp(-d²/width²) on the Euclidean distance to row 0 (the instance)."""
    width = resolve_kernel_width(cfg, Z_interpretable.shape[1])
    distance_sq = ((Z_interpretable - Z_interpretable[0]) ** 2).sum(axis=1)
    return np.exp(-distance_sq / width**2)


def _weighted_ridge(Z: np.ndarray, y: np.ndarray, w: np.ndarray, alpha: float) -> tuple[np.ndarray, float, float]:
    # intercept left unpenalised by centring on the weighted means
    total = w.sum()
    z_bar = w @ Z / total
    y_bar = w @ y / total
    Zc, yc = Z - z_bar, y - y_bar
    for attempt in range(MAX_ESCALATIONS + 1):
        A = (Zc * w[:, None]).T @ Zc + alpha * np.eye(Z.shape[1])
        if Z.shape[1] == 0 or np.linalg.cond(A) < CONDITION_LIMIT:
            coef = np.linalg.solve(A, (Zc * w[:, None]).T @ yc) if Z.shape[1] else np.zeros(0)
            return coef, float(y_bar - z_bar @ coef), alpha
        if attempt == MAX_ESCALATIONS:
            break
        escalated = max(alpha * 10.0, 1e-8)
        logger.warning(f"⚠️ Surrogate system is singular at ridge {alpha:g}; retrying with {escalated:g}")
        alpha = escalated
    raise SingularSystemError(f"surrogate system stays singular after {MAX_ESCALATIONS} escalations", detail=str(alpha))


def _weighted_r2(y: np.ndarray, fitted: np.ndarray, w: np.ndarray) -> float:
    y_bar = w @ y / w.sum()
    ss_tot = float(w @ (y - y_bar) ** 2)
    ss_res = float(w @ (y - fitted) ** 2)
    if ss_tot <= 1e-300:
        return 1.0 if ss_res <= 1e-300 else 0.0
    return 1.0 - ss_res / ss_tot


def fit_surrogate(
    Z_interpretable: np.ndarray,
    f_probs: np.ndarray,
    w: np.ndarray,
    cfg: LimeConfig,
    feature_names: list[str] | None = None,
    conditions: list[str] | None = None,
) -> LocalExplanation:
    """
    Two-stage weighted ridge: rank features by |coefficient| of a fit on all of
    them, keep the top k, refit on those alone. Entries come out sorted by
    |weight| descending, ties broken by feature index.
    """
    n_features = Z_interpretable.shape[1]
    if cfg.top_k > n_features:
        raise ValueError(f"top_k={cfg.top_k} exceeds the {n_features} available features")
    names = feature_names or [f"x{j}" for j in range(n_features)]
    labels = conditions or names

    full_coef, _, alpha = _weighted_ridge(Z_interpretable, f_probs, w, cfg.ridge_alpha)
    support = sorted(range(n_features), key=lambda j: (-abs(full_coef[j]), j))[: cfg.top_k]
    coef, intercept, alpha = _weighted_ridge(Z_interpretable[:, support], f_probs, w, alpha)
    r2 = _weighted_r2(f_probs, Z_interpretable[:, support] @ coef + intercept, w)

    order = sorted(range(len(support)), key=lambda i: (-abs(coef[i]), support[i]))
    entries = [
        ExplanationEntry(
            condition=labels[support[i]],
            feature=names[support[i]],
            feature_index=support[i],
            weight=float(coef[i]),
        )
        for i in order
    ]
    p1 = float(f_probs[0])
    return LocalExplanation(
        predicted_class=int(p1 >= 0.5),
        class_probabilities=[1.0 - p1, p1],
        intercept=intercept,
        r2=r2,
        entries=entries,
        topk_sum=float(coef.sum()),
        full_sum=float(full_coef.sum()),
        ridge_alpha=alpha,
    )


def explain_instance(
    m: Predictor,
    x: np.ndarray,
    disc: Discretizer,
    cfg: LimeConfig,
    instance_id: int | str = 0,
) -> LocalExplanation:
    x = np.asarray(x, dtype=float).ravel()
    Z_int, Z_raw = sample_perturbations(x, disc, cfg)
    f_probs = m.predict_proba(Z_raw)
    weights = proximity_weights(Z_int, cfg)
    if cfg.discretizer == "none":
        conditions = list(disc.names)
    else:
        conditions = [disc.condition(j, x[j]) for j in range(disc.n_features)]
    explanation = fit_surrogate(Z_int, f_probs, weights, cfg, disc.names, conditions)
    return explanation.model_copy(update={"instance_id": instance_id})


def explain_batch(
    m: Predictor,
    X: np.ndarray,
    disc: Discretizer,
    cfg: LimeConfig,
    instance_ids: list[int | str] | None = None,
    jobs: int = 1,
) -> list[LocalExplanation]:
    """Explain every row of X; row i runs with its own seed spawned from cfg.seed."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    ids = instance_ids if instance_ids is not None else list(range(X.shape[0]))
    seeds = [int(s.generate_state(1)[0]) for s in child_seeds(cfg.seed, X.shape[0])]
    arguments = [
        (m, X[i], disc, cfg.model_copy(update={"seed": seeds[i]}), ids[i]) for i in range(X.shape[0])
    ]
    logger.info(f"🔍 LIME over {X.shape[0]} instances ({cfg.n_samples} samples each)")
    return run_parallel(explain_instance, arguments, jobs=jobs, progress="lime")


def render_table(explanation: LocalExplanation) -> str:
    """Two aligned columns per side: conditions pushing toward Default, then toward Fully Paid."""
    p0, p1 = explanation.class_probabilities
    lines = [
        f"instance {explanation.instance_id}: P(Default)={p1:.4f}  P(Fully Paid)={p0:.4f}  R²={explanation.r2:.4f}",
    ]
    width = max((len(e.condition) for e in explanation.entries), default=9)
    for title, side in (
        ("Default", [e for e in explanation.entries if e.weight > 0]),
        ("Fully Paid", [e for e in explanation.entries if e.weight <= 0]),
    ):
        lines.append(f"-- {title} --")
        lines.extend(f"{e.condition:<{width}} | {e.weight:+.4f}" for e in side)
    return "\n".join(lines)
