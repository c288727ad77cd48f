import logging

import numpy as np
from scipy.stats import rankdata

from credit_explainer.classifiers.base import Predictor
from credit_explainer.classifiers.schemas import Metrics

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)


def roc_auc(y: np.ndarray, scores: np.ndarray) -> float | None:
    """Mann-Whitney estimate of P(score_pos > score_neg), ties counting one half. None with a single class."""
    y = np.asarray(y).astype(int)
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = rankdata(scores)
    return float((ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def _ratio(num: float, den: float, name: str, undefined: list[str]) -> float:
    if den == 0:
        undefined.append(name)
        return 0.0
    return num / den


def evaluate(m: Predictor, X: np.ndarray, y: np.ndarray, threshold: float = 0.5) -> Metrics:
    y = np.asarray(y).astype(int)
    scores = m.predict_proba(X)
    predicted = (scores >= threshold).astype(int)
    tp = int(((predicted == 1) & (y == 1)).sum())
    fp = int(((predicted == 1) & (y == 0)).sum())
    tn = int(((predicted == 0) & (y == 0)).sum())
    fn = int(((predicted == 0) & (y == 1)).sum())

    undefined: list[str] = []
    accuracy = _ratio(tp + tn, len(y), "accuracy", undefined)
    precision = _ratio(tp, tp + fp, "precision", undefined)
    recall = _ratio(tp, tp + fn, "recall", undefined)
    f1 = _ratio(2 * precision * recall, precision + recall, "f1", undefined)
    auc = roc_auc(y, scores)
    if auc is None:
        undefined.append("roc_auc")
        auc = 0.0
    for name in undefined:
        logger.warning(f"⚠️ {name} is undefined on this sample; reported as 0")

    return Metrics(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        roc_auc=auc,
        threshold=threshold,
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
        undefined=undefined,
    )
