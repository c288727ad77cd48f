import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.special import gammaincc

from credit_explainer.dataset.schemas import ColumnKind, Dataset, PreprocessStep
from credit_explainer.errors import (
    AllColumnsDroppedError,
    DegenerateTableError,
    EmptyAfterFilterError,
    MissingColumnError,
    UnknownLevelError,
    UnknownTargetLabelError,
)

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

# The nine Lending Club statuses; None marks statuses that are removed.
LOAN_STATUS_LABELS: dict[str, int | None] = {
    "Fully Paid": 0,
    "Charged Off": 1,
    "Default": 1,
    "Current": None,
    "In Grace Period": None,
    "Late (16-30 days)": None,
    "Late (31-120 days)": None,
    "Does not meet the credit policy. Status:Fully Paid": 0,
    "Does not meet the credit policy. Status:Charged Off": 1,
}

GRADE_LEVELS = ("A", "B", "C", "D", "E", "F", "G")
GRADE_CLUBBING = {"A": "A", "B": "B", "C": "C", "D": "D", "E": "D", "F": "D", "G": "D"}


def _feature_columns(d: Dataset) -> list[str]:
    return [name for name in d.column_names if d.kinds[name] != ColumnKind.TARGET]


def binarize_target(d: Dataset) -> Dataset:
    """Map loan statuses to 0/1 and remove rows whose status is not kept."""
    status = d.target
    unknown = sorted({s for s in status.dropna().unique() if s not in LOAN_STATUS_LABELS})
    if unknown:
        raise UnknownTargetLabelError(f"unknown loan status labels: {unknown}", detail=",".join(unknown))

    mapped = status.map(lambda s: LOAN_STATUS_LABELS.get(s) if s is not None else None)
    keep = mapped.notna()
    removed = int((~keep).sum())
    if not keep.any():
        raise EmptyAfterFilterError("no rows left after keeping 'Fully Paid' and 'Default' statuses")

    frame = d.frame.loc[keep].copy()
    frame[d.target_column] = mapped[keep].astype(int)
    if removed:
        logger.info(f"Removed {removed} rows with statuses outside the kept categories")
    return d.evolve(frame, PreprocessStep(operation="binarize_target", removed_rows=removed))


def _mode(series: pd.Series):
    counts = series.dropna().value_counts()
    return sorted(counts[counts == counts.max()].index)[0]


def drop_sparse_columns(d: Dataset, threshold: float = 0.9) -> Dataset:
    """
    Remove feature columns whose missing fraction is strictly above `threshold`,
    then fill the remaining gaps (median for numeric, mode for categorical).
    """
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must lie in (0, 1], got {threshold}")

    frame = d.frame.copy()
    step = PreprocessStep(operation="drop_sparse_columns")
    features = _feature_columns(d)
    fractions = frame[features].isna().mean() if d.n_rows else pd.Series(0.0, index=features)

    for name in features:
        fraction = float(fractions[name])
        if fraction > threshold:
            step.dropped_columns[name] = f"missing fraction {fraction:.4f} > {threshold}"
        elif d.n_rows and fraction == 1.0:
            step.dropped_columns[name] = "no observed values to impute from"
    frame = frame.drop(columns=list(step.dropped_columns))

    survivors = [name for name in features if name not in step.dropped_columns]
    if not survivors:
        raise AllColumnsDroppedError(f"every feature column exceeds the missing threshold {threshold}")

    for name in survivors:
        n_missing = int(frame[name].isna().sum())
        if not n_missing:
            continue
        if d.kinds[name] == ColumnKind.NUMERIC:
            frame[name] = frame[name].fillna(float(frame[name].median()))
        else:
            fill = _mode(frame[name])
            frame[name] = frame[name].where(frame[name].notna(), fill)
        step.imputed[name] = n_missing

    if step.dropped_columns:
        logger.info(f"Dropped sparse columns: {sorted(step.dropped_columns)}")
    return d.evolve(frame, step)


def filter_correlated(d: Dataset, r_max: float = 0.9) -> Dataset:
    """Greedy pass over numeric pairs in declaration order; the later column of a pair with |r| > r_max goes."""
    numeric = d.columns_of(ColumnKind.NUMERIC)
    step = PreprocessStep(operation="filter_correlated")
    if len(numeric) < 2 or d.n_rows < 2:
        return d.evolve(d.frame.copy(), step)

    corr = d.frame[numeric].astype(float).corr(method="pearson").to_numpy()
    dropped: set[int] = set()
    for i in range(len(numeric)):
        if i in dropped:
            continue
        for j in range(i + 1, len(numeric)):
            if j in dropped or np.isnan(corr[i, j]):
                continue
            if abs(corr[i, j]) > r_max:
                dropped.add(j)
                step.dropped_pairs.append((numeric[i], numeric[j], float(corr[i, j])))
                step.dropped_columns[numeric[j]] = f"|r|={abs(corr[i, j]):.4f} with {numeric[i]} > {r_max}"

    for kept, gone, r in step.dropped_pairs:
        logger.info(f"Dropping {gone}: r={r:.4f} with {kept}")
    return d.evolve(d.frame.drop(columns=list(step.dropped_columns)), step)


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    df: int
    p_value: float


def chi_square_test(table: np.ndarray) -> ChiSquareResult:
    """
    Pearson chi-square independence test on a levels x classes contingency table.

    The p-value is the regularized upper incomplete gamma Q(df/2, stat/2).

    Raises:
        DegenerateTableError: fewer than two observed feature levels
    """
    table = np.asarray(table, dtype=float)
    table = table[table.sum(axis=1) > 0]
    if table.shape[0] < 2:
        raise DegenerateTableError("contingency table has a single level")
    table = table[:, table.sum(axis=0) > 0]
    df = (table.shape[0] - 1) * (table.shape[1] - 1)
    if df == 0:
        return ChiSquareResult(statistic=0.0, df=0, p_value=1.0)

    expected = np.outer(table.sum(axis=1), table.sum(axis=0)) / table.sum()
    statistic = float(((table - expected) ** 2 / expected).sum())
    return ChiSquareResult(statistic=statistic, df=df, p_value=float(gammaincc(df / 2.0, statistic / 2.0)))


def filter_chi_square(d: Dataset, alpha: float = 0.05) -> Dataset:
    """Drop categorical features whose chi-square test against the target has p >= alpha."""
    step = PreprocessStep(operation="filter_chi_square")
    for name in d.columns_of(ColumnKind.CATEGORICAL):
        table = pd.crosstab(d.frame[name], d.target).to_numpy()
        try:
            result = chi_square_test(table)
        except DegenerateTableError as e:
            logger.warning(f"⚠️ {name}: {e.message}; feature dropped")
            step.warnings.append(f"{name}: {e.message}")
            step.dropped_columns[name] = "degenerate contingency table"
            continue
        step.chi_square[name] = {"statistic": result.statistic, "df": float(result.df), "p_value": result.p_value}
        if result.p_value >= alpha:
            step.dropped_columns[name] = f"p={result.p_value:.4g} >= {alpha}"

    if step.dropped_columns:
        logger.info(f"Chi-square filter dropped: {sorted(step.dropped_columns)}")
    return d.evolve(d.frame.drop(columns=list(step.dropped_columns)), step)


def club_grades(d: Dataset) -> Dataset:
    """Remap grades E, F and G to D."""
    name = d.grade_column
    if name is None or name not in d.kinds:
        raise MissingColumnError("no grade column configured or present", detail=str(name))

    levels = set(d.frame[name].dropna().unique())
    unknown = sorted(levels - set(GRADE_LEVELS))
    if unknown:
        raise UnknownLevelError(f"grade levels outside A-G: {unknown}", detail=",".join(map(str, unknown)))

    frame = d.frame.copy()
    frame[name] = frame[name].map(lambda g: None if pd.isna(g) else GRADE_CLUBBING[g])
    return d.evolve(frame, PreprocessStep(operation="club_grades"))


def run_preprocessing(
    d: Dataset,
    sparse_threshold: float = 0.9,
    r_max: float = 0.9,
    alpha: float = 0.05,
) -> Dataset:
    """binarize -> sparse drop -> correlation filter -> grade clubbing -> chi-square"""
    logger.info(f"🔍 Preprocessing {d.n_rows} rows")
    d = binarize_target(d)
    d = drop_sparse_columns(d, sparse_threshold)
    d = filter_correlated(d, r_max)
    if d.grade_column is not None:
        d = club_grades(d)
    else:
        logger.warning("⚠️ Grade column absent after filtering; clubbing skipped")
    d = filter_chi_square(d, alpha)
    if not _feature_columns(d):
        raise AllColumnsDroppedError("no feature columns survived preprocessing")
    logger.info(f"✅ Preprocessing kept {len(_feature_columns(d))} features over {d.n_rows} rows")
    return d
