import logging

import numpy as np
from pydantic import BaseModel, Field

from credit_explainer.dataset.preprocess import GRADE_CLUBBING
from credit_explainer.dataset.schemas import ColumnKind, Dataset, EncodedMatrix, SplitSpec
from credit_explainer.errors import ClassAbsentError, MissingColumnError, UnseenLevelError

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)


class Encoder(BaseModel):
    """Replayable one-hot layout fitted on the training table"""

    columns: list[str] = Field(..., description="Feature columns in declaration order")
    kinds: dict[str, ColumnKind] = Field(..., description="Feature column -> kind")
    levels: dict[str, list[str]] = Field(default_factory=dict, description="Categorical column -> sorted levels")
    grade_column: str | None = Field(None, description="Column clubbed E/F/G -> D at fit time")
    grade_clubbing: dict[str, str] = Field(default_factory=dict)

    @property
    def names(self) -> list[str]:
        names = []
        for column in self.columns:
            if self.kinds[column] == ColumnKind.CATEGORICAL:
                names.extend(f"{column}={level}" for level in self.levels[column])
            else:
                names.append(column)
        return names

    @property
    def index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.names)}

    def to_map(self) -> dict:
        return {**self.model_dump(mode="json"), "index": self.index}

    def transform(self, d: Dataset) -> EncodedMatrix:
        """
        Apply the fitted layout to a (preprocessed) table.

        A categorical level absent at fit time encodes as an all-zero block and is
        logged as a warning rather than raised.
        """
        missing = [c for c in self.columns if c not in d.kinds]
        if missing:
            raise MissingColumnError(f"columns missing for encoding: {missing}", detail=",".join(missing))

        blocks = []
        for column in self.columns:
            values = d.frame[column]
            if self.kinds[column] != ColumnKind.CATEGORICAL:
                blocks.append(values.to_numpy(dtype=float)[:, None])
                continue
            if column == self.grade_column and self.grade_clubbing:
                values = values.map(lambda g: self.grade_clubbing.get(g, g))
            levels = self.levels[column]
            block = np.zeros((d.n_rows, len(levels)))
            position = {level: i for i, level in enumerate(levels)}
            codes = values.map(lambda v: position.get(str(v), -1)).to_numpy(dtype=int)
            seen = codes >= 0
            block[np.flatnonzero(seen), codes[seen]] = 1.0
            if not seen.all():
                unseen = sorted({str(v) for v in values[~seen]})
                warning = UnseenLevelError(f"{column}: unseen levels {unseen} encoded as all-zero")
                logger.warning(f"⚠️ {warning.message}")
            blocks.append(block)

        X = np.hstack(blocks) if blocks else np.zeros((d.n_rows, 0))
        return EncodedMatrix(
            names=self.names,
            X=X,
            y=d.target.to_numpy(dtype=int),
            encoder_map=self.to_map(),
        )


def fit_encoder(d: Dataset) -> Encoder:
    columns = [c for c in d.column_names if d.kinds[c] != ColumnKind.TARGET]
    levels = {
        c: sorted({str(v) for v in d.frame[c].dropna().unique()})
        for c in columns
        if d.kinds[c] == ColumnKind.CATEGORICAL
    }
    clubbed = any(step.operation == "club_grades" for step in d.history)
    return Encoder(
        columns=columns,
        kinds={c: d.kinds[c] for c in columns},
        levels=levels,
        grade_column=d.grade_column if clubbed else None,
        grade_clubbing=dict(GRADE_CLUBBING) if clubbed else {},
    )


def one_hot_encode(d: Dataset) -> EncodedMatrix:
    """Expand each categorical feature into one indicator column per level; numeric columns pass through."""
    encoder = fit_encoder(d)
    encoded = encoder.transform(d)
    logger.info(f"One-hot encoded {len(encoder.columns)} columns into {len(encoded.names)} features")
    return encoded


def _allocate(counts: dict[int, int], n_test: int, total: int) -> dict[int, int]:
    # largest remainder so the per-class test counts add up to n_test exactly
    quotas = {label: count * n_test / total for label, count in counts.items()}
    allocation = {label: int(np.floor(q)) for label, q in quotas.items()}
    short = n_test - sum(allocation.values())
    by_remainder = sorted(quotas, key=lambda label: (-(quotas[label] - allocation[label]), label))
    for label in by_remainder[:short]:
        allocation[label] += 1
    return allocation


def train_test_split(m: EncodedMatrix, s: SplitSpec) -> tuple[EncodedMatrix, EncodedMatrix]:
    """Stratified, seeded row partition with |test| = round(R * test_fraction)."""
    if m.n_rows < 2:
        raise ValueError(f"need at least 2 rows to split, got {m.n_rows}")

    rng = np.random.default_rng(s.seed)
    n_test = int(np.floor(m.n_rows * s.test_fraction + 0.5))
    labels, counts = np.unique(m.y, return_counts=True)
    allocation = _allocate(dict(zip(labels.tolist(), counts.tolist())), n_test, m.n_rows)

    test_rows = []
    for label in labels.tolist():
        members = np.flatnonzero(m.y == label)
        test_rows.append(rng.permutation(members)[: allocation[label]])
    test_idx = np.sort(np.concatenate(test_rows))
    train_idx = np.setdiff1d(np.arange(m.n_rows), test_idx)

    train, test = m.take(train_idx), m.take(test_idx)
    for split_name, part in (("train", train), ("test", test)):
        if set(np.unique(part.y).tolist()) != {0, 1}:
            raise ClassAbsentError(f"{split_name} split lacks a class", detail=split_name)
    logger.info(f"Split {m.n_rows} rows into {train.n_rows} train / {test.n_rows} test")
    return train, test
