import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field
from scipy.special import expit

from credit_explainer.dataset.schemas import ColumnKind, Dataset, DatasetSchema

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

DEFAULT_INTERCEPT = -2.2
DEFAULT_COEFFICIENTS: dict[str, float] = {
    "recoveries_positive": 3.0,
    "payment_shortfall": 4.0,
    "int_rate_z": 0.6,
    "not_verified": 0.3,
    "late_fee_positive": 0.8,
}

SYNTHETIC_COLUMNS: dict[str, ColumnKind] = {
    "loan_amnt": ColumnKind.NUMERIC,
    "funded_amnt": ColumnKind.NUMERIC,
    "term": ColumnKind.CATEGORICAL,
    "int_rate": ColumnKind.NUMERIC,
    "grade": ColumnKind.CATEGORICAL,
    "annual_inc": ColumnKind.NUMERIC,
    "home_ownership": ColumnKind.CATEGORICAL,
    "verification_status": ColumnKind.CATEGORICAL,
    "purpose": ColumnKind.CATEGORICAL,
    "inq_last_6mths": ColumnKind.CATEGORICAL,
    "total_pymnt": ColumnKind.NUMERIC,
    "total_rec_int": ColumnKind.NUMERIC,
    "total_rec_late_fee": ColumnKind.NUMERIC,
    "last_pymnt_amnt": ColumnKind.NUMERIC,
    "recoveries": ColumnKind.NUMERIC,
    "mths_since_last_record": ColumnKind.NUMERIC,
    "loan_status": ColumnKind.TARGET,
}

GRADE_RATES = {"A": 7.0, "B": 10.5, "C": 14.0, "D": 18.0, "E": 21.5, "F": 25.0, "G": 28.5}
GRADE_SHARES = [0.20, 0.30, 0.25, 0.13, 0.07, 0.04, 0.01]


class SyntheticTruth(BaseModel):
    """Generating coefficients of the default log-odds"""

    seed: int
    n_rows: int
    intercept: float
    coefficients: dict[str, float] = Field(..., description="Driver -> log-odds coefficient")
    drivers: dict[str, str] = Field(default_factory=dict, description="Driver -> definition in terms of columns")
    default_rate: float = Field(..., description="Realised share of defaulted loans among kept statuses")


def synthetic_schema() -> DatasetSchema:
    return DatasetSchema(columns=dict(SYNTHETIC_COLUMNS), grade_column="grade")


def generate_synthetic(
    n: int,
    seed: int,
    coefficients: dict[str, float] | None = None,
    intercept: float = DEFAULT_INTERCEPT,
) -> tuple[Dataset, SyntheticTruth]:
    """
    Lending-Club-shaped loan table whose default log-odds is a known linear function of
    recoveries > 0, the payment shortfall (1 - min(total_pymnt / loan_amnt, 1)), the
    standardised interest rate, unverified income and late fees.
    """
    if n < 100:
        raise ValueError(f"generator needs n >= 100, got {n}")
    beta = {**DEFAULT_COEFFICIENTS, **(coefficients or {})}
    rng = np.random.default_rng(seed)

    loan_amnt = np.clip(np.round(rng.lognormal(9.4, 0.55, n) / 25) * 25, 1000, 40000)
    funded_amnt = loan_amnt - 25 * rng.binomial(1, 0.1, n)
    term_months = np.where(rng.random(n) < 0.7, 36, 60)
    grade = rng.choice(list(GRADE_RATES), size=n, p=GRADE_SHARES)
    int_rate = np.round(np.array([GRADE_RATES[g] for g in grade]) + rng.normal(0, 1.0, n), 2)
    annual_inc = np.round(rng.lognormal(11.1, 0.45, n), -2)
    home_ownership = rng.choice(["MORTGAGE", "RENT", "OWN"], size=n, p=[0.5, 0.4, 0.1])
    verification_status = rng.choice(["Not Verified", "Source Verified", "Verified"], size=n, p=[0.3, 0.4, 0.3])
    purpose = rng.choice(
        ["debt_consolidation", "credit_card", "home_improvement", "major_purchase", "other"],
        size=n,
        p=[0.55, 0.2, 0.1, 0.05, 0.1],
    )
    inq_last_6mths = rng.choice(["0", "1", "2", "3+"], size=n, p=[0.5, 0.3, 0.12, 0.08])

    has_recovery = rng.random(n) < 0.12
    has_late_fee = rng.random(n) < 0.08
    pay_ratio = rng.uniform(0.3, 1.35, n)
    shortfall = 1.0 - np.minimum(pay_ratio, 1.0)
    rate_z = (int_rate - int_rate.mean()) / int_rate.std()
    not_verified = verification_status == "Not Verified"

    log_odds = (
        intercept
        + beta["recoveries_positive"] * has_recovery
        + beta["payment_shortfall"] * shortfall
        + beta["int_rate_z"] * rate_z
        + beta["not_verified"] * not_verified
        + beta["late_fee_positive"] * has_late_fee
    )
    defaulted = rng.random(n) < expit(log_odds)
    if defaulted.all() or not defaulted.any():
        defaulted[0], defaulted[1] = False, True

    total_pymnt = np.round(loan_amnt * pay_ratio, 2)
    interest_share = int_rate / 100 * (term_months / 12) * 0.55 * rng.uniform(0.6, 1.4, n)
    total_rec_int = np.round(total_pymnt * interest_share / (1 + interest_share), 2)
    installment = loan_amnt * (1 + int_rate / 100) / term_months
    last_pymnt_amnt = np.round(
        np.where(pay_ratio >= 1.0, loan_amnt * rng.uniform(0.05, 0.4, n), installment * rng.uniform(0.8, 1.2, n)),
        2,
    )
    total_rec_late_fee = np.round(np.where(has_late_fee, rng.uniform(15, 100, n), 0.0), 2)
    recoveries = np.round(np.where(has_recovery, loan_amnt * rng.uniform(0.01, 0.15, n), 0.0), 2)
    mths_since_last_record = np.where(rng.random(n) < 0.05, rng.integers(0, 121, n), np.nan)

    status = np.where(defaulted, np.where(rng.random(n) < 0.85, "Charged Off", "Default"), "Fully Paid")
    status = np.where(rng.random(n) < 0.03, "Current", status).astype(object)
    annual_inc = np.where(rng.random(n) < 0.02, np.nan, annual_inc)

    frame = pd.DataFrame(
        {
            "loan_amnt": loan_amnt,
            "funded_amnt": funded_amnt,
            "term": [f"{m} months" for m in term_months],
            "int_rate": int_rate,
            "grade": grade.astype(object),
            "annual_inc": annual_inc,
            "home_ownership": home_ownership.astype(object),
            "verification_status": verification_status.astype(object),
            "purpose": purpose.astype(object),
            "inq_last_6mths": inq_last_6mths.astype(object),
            "total_pymnt": total_pymnt,
            "total_rec_int": total_rec_int,
            "total_rec_late_fee": total_rec_late_fee,
            "last_pymnt_amnt": last_pymnt_amnt,
            "recoveries": recoveries,
            "mths_since_last_record": mths_since_last_record,
            "loan_status": status,
        }
    )
    kept = frame["loan_status"] != "Current"
    truth = SyntheticTruth(
        seed=seed,
        n_rows=n,
        intercept=intercept,
        coefficients=beta,
        drivers={
            "recoveries_positive": "recoveries > 0",
            "payment_shortfall": "1 - min(total_pymnt / loan_amnt, 1)",
            "int_rate_z": "(int_rate - mean) / sd",
            "not_verified": "verification_status == 'Not Verified'",
            "late_fee_positive": "total_rec_late_fee > 0",
        },
        default_rate=float(defaulted[kept.to_numpy()].mean()),
    )
    logger.info(f"Generated {n} synthetic loans (seed={seed}, default rate {truth.default_rate:.3f})")
    dataset = Dataset(
        frame=frame,
        kinds=dict(SYNTHETIC_COLUMNS),
        target_column="loan_status",
        grade_column="grade",
    )
    return dataset, truth


def write_synthetic(dataset: Dataset, truth: SyntheticTruth, path: str | Path) -> dict[str, Path]:
    """Write the CSV plus `<stem>.truth.json` and `<stem>.schema.json` beside it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    dataset.frame.to_csv(path, index=False, lineterminator="\n")

    truth_path = path.with_name(f"{path.stem}.truth.json")
    truth_path.write_text(truth.model_dump_json(indent=2), encoding="utf-8")

    schema_path = path.with_name(f"{path.stem}.schema.json")
    schema_path.write_text(json.dumps(synthetic_schema().model_dump(mode="json"), indent=2), encoding="utf-8")
    return {"data": path, "truth": truth_path, "schema": schema_path}
