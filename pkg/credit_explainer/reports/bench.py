import logging
import time

import numpy as np

from credit_explainer.classifiers.base import Predictor
from credit_explainer.explainers.background import Background, sample_background, summarize_background
from credit_explainer.explainers.shapley import ShapConfig, ShapMatrix, shap_matrix
from credit_explainer.reports.schemas import BackgroundBenchReport, ConsistencyReport

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)


def top_features(sm: ShapMatrix, top_n: int) -> list[str]:
    mean_abs = sm.mean_abs()
    order = sorted(range(len(mean_abs)), key=lambda j: (-mean_abs[j], j))
    return [sm.feature_names[j] for j in order[:top_n]]


def jaccard(a: list[str], b: list[str]) -> float:
    union = set(a) | set(b)
    return len(set(a) & set(b)) / len(union) if union else 1.0


def consistency_experiment(
    m: Predictor,
    X_explain: np.ndarray,
    bg: Background,
    cfg: ShapConfig,
    small: int = 100,
    large: int = 2000,
    top_n: int = 20,
    feature_names: list[str] | None = None,
    jobs: int = 1,
) -> ConsistencyReport:
    """Do the top-n features from `small` explained rows agree with those from `large` rows?"""
    if large > X_explain.shape[0]:
        logger.warning(f"⚠️ Only {X_explain.shape[0]} rows available; large batch capped")
        large = X_explain.shape[0]
    small = min(small, large)
    sm_large = shap_matrix(m, X_explain[:large], bg, cfg, feature_names, jobs)
    # per-row seeds are spawned from the same master, so the first rows match the small batch exactly
    sm_small = ShapMatrix(
        sm_large.feature_names,
        sm_large.phi[:small],
        sm_large.base_values[:small],
        sm_large.fx[:small],
        sm_large.X[:small],
    )
    top_small, top_large = top_features(sm_small, top_n), top_features(sm_large, top_n)
    report = ConsistencyReport(
        small=small,
        large=large,
        top_n=top_n,
        jaccard=jaccard(top_small, top_large),
        top_small=top_small,
        top_large=top_large,
    )
    logger.info(f"📊 Top-{top_n} Jaccard between {small} and {large} rows: {report.jaccard:.3f}")
    return report


def background_experiment(
    m: Predictor,
    X_train: np.ndarray,
    X_explain: np.ndarray,
    cfg: ShapConfig,
    k: int = 30,
    raw: int = 1000,
    top_n: int = 10,
    feature_names: list[str] | None = None,
) -> BackgroundBenchReport:
    """Time kernel SHAP with a k-means background against a raw sample and compare their top-n sets."""
    summarised = summarize_background(X_train, k=k, source_n=cfg.source_n, seed=cfg.seed)
    raw_bg = sample_background(X_train, raw, seed=cfg.seed)

    started = time.perf_counter()
    sm_summarised = shap_matrix(m, X_explain, summarised, cfg, feature_names)
    seconds_summarised = time.perf_counter() - started
    started = time.perf_counter()
    sm_raw = shap_matrix(m, X_explain, raw_bg, cfg, feature_names)
    seconds_raw = time.perf_counter() - started

    report = BackgroundBenchReport(
        instances=X_explain.shape[0],
        k=summarised.size,
        raw=raw_bg.size,
        seconds_summarised=seconds_summarised,
        seconds_raw=seconds_raw,
        speedup=seconds_raw / seconds_summarised if seconds_summarised > 0 else float("inf"),
        top_n=top_n,
        jaccard=jaccard(top_features(sm_summarised, top_n), top_features(sm_raw, top_n)),
    )
    logger.info(f"📊 Background K={report.k} is {report.speedup:.1f}x faster than K={report.raw}")
    return report
