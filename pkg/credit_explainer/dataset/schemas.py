import enum
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, field_validator


class ColumnKind(str, enum.Enum):
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"
    TARGET = "target"


class DatasetSchema(BaseModel):
    """Column kind declarations for a loan CSV"""

    columns: dict[str, ColumnKind] = Field(..., description="Column name to declared kind, in declaration order")
    grade_column: str | None = Field("grade", description="Categorical column whose E/F/G levels are clubbed into D")

    @field_validator("columns")
    @classmethod
    def exactly_one_target(cls, columns: dict[str, ColumnKind]) -> dict[str, ColumnKind]:
        targets = [name for name, kind in columns.items() if kind == ColumnKind.TARGET]
        if len(targets) != 1:
            raise ValueError(f"schema must declare exactly one target column, found {targets}")
        return columns

    @property
    def target_column(self) -> str:
        return next(name for name, kind in self.columns.items() if kind == ColumnKind.TARGET)


class PreprocessStep(BaseModel):
    """One preprocessing operation and what it did"""

    operation: str = Field(..., description="Name of the preprocessing operation")
    dropped_columns: dict[str, str] = Field(default_factory=dict, description="Dropped column -> reason")
    dropped_pairs: list[tuple[str, str, float]] = Field(default_factory=list, description="(kept, dropped, r)")
    chi_square: dict[str, dict[str, float]] = Field(default_factory=dict, description="Feature -> statistic, df, p")
    imputed: dict[str, int] = Field(default_factory=dict, description="Column -> number of filled cells")
    removed_rows: int = Field(0, description="Rows removed by this step")
    warnings: list[str] = Field(default_factory=list)


class PreprocessReport(BaseModel):
    """Preprocessing report written next to the encoded matrices"""

    steps: list[PreprocessStep] = Field(default_factory=list)
    encoder_map: dict[str, Any] = Field(default_factory=dict)
    n_rows: int = 0
    n_features: int = 0


@dataclass(frozen=True)
class Dataset:
    """Column-typed loan table. Missing cells are NaN (numeric) or None (categorical)."""

    frame: pd.DataFrame
    kinds: dict[str, ColumnKind]
    target_column: str
    grade_column: str | None = None
    history: tuple[PreprocessStep, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if list(self.frame.columns) != list(self.kinds):
            raise ValueError("frame columns and column kinds must align")

    @property
    def column_names(self) -> list[str]:
        return list(self.frame.columns)

    @property
    def column_kinds(self) -> list[ColumnKind]:
        return [self.kinds[name] for name in self.frame.columns]

    @property
    def n_rows(self) -> int:
        return len(self.frame)

    @property
    def missing_mask(self) -> pd.DataFrame:
        return self.frame.isna()

    @property
    def target(self) -> pd.Series:
        return self.frame[self.target_column]

    def columns_of(self, kind: ColumnKind) -> list[str]:
        return [name for name in self.frame.columns if self.kinds[name] == kind]

    def evolve(self, frame: pd.DataFrame, step: PreprocessStep) -> "Dataset":
        kinds = {name: self.kinds[name] for name in frame.columns}
        grade = self.grade_column if self.grade_column in kinds else None
        return replace(
            self,
            frame=frame.reset_index(drop=True),
            kinds=kinds,
            grade_column=grade,
            history=self.history + (step,),
        )


@dataclass(frozen=True)
class EncodedMatrix:
    names: list[str]
    X: np.ndarray
    y: np.ndarray
    encoder_map: dict[str, Any] = field(default_factory=dict)

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    def take(self, rows: np.ndarray) -> "EncodedMatrix":
        return EncodedMatrix(self.names, self.X[rows], self.y[rows], self.encoder_map)

    def to_frame(self, target_column: str = "target") -> pd.DataFrame:
        frame = pd.DataFrame(self.X, columns=self.names)
        frame[target_column] = self.y.astype(int)
        return frame

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, target_column: str = "target", encoder_map: dict | None = None) -> "EncodedMatrix":
        names = [c for c in frame.columns if c != target_column]
        return cls(
            names=names,
            X=frame[names].to_numpy(dtype=float),
            y=frame[target_column].to_numpy(dtype=int),
            encoder_map=encoder_map or {},
        )


class SplitSpec(BaseModel):
    test_fraction: float = Field(0.2, gt=0.0, lt=1.0)
    seed: int = Field(0, ge=0)
