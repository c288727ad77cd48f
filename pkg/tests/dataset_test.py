import numpy as np
import pandas as pd
import pytest
from scipy.integrate import quad
from scipy.stats import chi2

from credit_explainer.dataset import (
    ColumnKind,
    Dataset,
    DatasetSchema,
    EncodedMatrix,
    SplitSpec,
    binarize_target,
    chi_square_test,
    club_grades,
    drop_sparse_columns,
    filter_chi_square,
    filter_correlated,
    fit_encoder,
    generate_synthetic,
    load_csv,
    one_hot_encode,
    run_preprocessing,
    train_test_split,
    write_synthetic,
)
from credit_explainer.errors import (
    ClassAbsentError,
    DegenerateTableError,
    MissingColumnError,
    RowWidthMismatchError,
    UnknownLevelError,
    UnknownTargetLabelError,
)

NUMERIC, CATEGORICAL, TARGET = ColumnKind.NUMERIC, ColumnKind.CATEGORICAL, ColumnKind.TARGET


def make_dataset(columns: dict, kinds: dict, grade_column: str | None = None) -> Dataset:
    return Dataset(frame=pd.DataFrame(columns), kinds=kinds, target_column="loan_status", grade_column=grade_column)


@pytest.fixture(scope="module")
def small_schema():
    return DatasetSchema(
        columns={"loan_amnt": NUMERIC, "grade": CATEGORICAL, "loan_status": TARGET},
        grade_column="grade",
    )


# --- loading ---
def test_load_csv_flags_empty_numeric_cell(tmp_path, small_schema):
    path = tmp_path / "loans.csv"
    path.write_text("loan_amnt,grade,loan_status\n1000,A,Fully Paid\n,B,Charged Off\n2500,C,Fully Paid\n")
    dataset = load_csv(path, small_schema)
    assert dataset.n_rows == 3
    assert int(dataset.missing_mask.to_numpy().sum()) == 1
    assert np.isnan(dataset.frame.loc[1, "loan_amnt"])
    assert dataset.target_column == "loan_status"


def test_load_csv_missing_declared_column(tmp_path, small_schema):
    path = tmp_path / "loans.csv"
    path.write_text("loan_amnt,loan_status\n1000,Fully Paid\n")
    with pytest.raises(MissingColumnError):
        load_csv(path, small_schema)


def test_load_csv_header_only(tmp_path, small_schema):
    path = tmp_path / "loans.csv"
    path.write_text("loan_amnt,grade,loan_status\n")
    dataset = load_csv(path, small_schema)
    assert dataset.n_rows == 0
    assert dataset.column_names == ["loan_amnt", "grade", "loan_status"]


@pytest.mark.parametrize(
    "body",
    ["1000,A,Fully Paid\n2000,B\n", "1000,A,Fully Paid\n2000,B,Charged Off,extra\n"],
    ids=["short", "long"],
)
def test_load_csv_row_width_mismatch(tmp_path, small_schema, body):
    path = tmp_path / "loans.csv"
    path.write_text("loan_amnt,grade,loan_status\n" + body)
    with pytest.raises(RowWidthMismatchError) as e:
        load_csv(path, small_schema)
    assert e.value.detail == "3"


def test_schema_needs_exactly_one_target():
    with pytest.raises(ValueError):
        DatasetSchema(columns={"a": NUMERIC, "b": NUMERIC})


# --- sparse columns ---
def test_drop_sparse_columns_strict_threshold():
    n = 20
    dataset = make_dataset(
        {
            "sparse": [np.nan] * 19 + [1.0],
            "edge": [np.nan] * 18 + [1.0, 2.0],
            "dense": np.arange(n, dtype=float),
            "loan_status": [0, 1] * 10,
        },
        {"sparse": NUMERIC, "edge": NUMERIC, "dense": NUMERIC, "loan_status": TARGET},
    )
    result = drop_sparse_columns(dataset, 0.9)
    assert "sparse" not in result.column_names
    assert "edge" in result.column_names
    assert result.frame["dense"].tolist() == list(np.arange(n, dtype=float))
    assert result.history[-1].imputed == {"edge": 18}
    assert result.frame["edge"].isna().sum() == 0
    assert result.frame["edge"].iloc[0] == 1.5


def test_drop_sparse_columns_fills_categorical_mode():
    dataset = make_dataset(
        {"home": ["RENT", None, "OWN", "RENT"], "loan_status": [0, 1, 0, 1]},
        {"home": CATEGORICAL, "loan_status": TARGET},
    )
    result = drop_sparse_columns(dataset, 0.9)
    assert result.frame["home"].tolist() == ["RENT", "RENT", "OWN", "RENT"]



def test_drop_sparse_columns_monotone_in_threshold(rng):
    n = 100
    columns = {f"c{i}": np.where(rng.random(n) < i / 10, np.nan, rng.normal(size=n)) for i in range(1, 10)}
    columns["keep"] = rng.normal(size=n)
    kinds = {name: NUMERIC for name in columns}
    dataset = make_dataset({**columns, "loan_status": [0, 1] * 50}, {**kinds, "loan_status": TARGET})
    survivors = [set(drop_sparse_columns(dataset, t).column_names) for t in (0.1, 0.3, 0.5, 0.7, 0.9, 1.0)]
    for looser, stricter in zip(survivors[1:], survivors):
        assert stricter <= looser


# --- correlation ---
def test_filter_correlated_drops_duplicate(rng):
    a = rng.normal(size=200)
    dataset = make_dataset(
        {"a": a, "a_copy": a.copy(), "loan_status": rng.integers(0, 2, 200)},
        {"a": NUMERIC, "a_copy": NUMERIC, "loan_status": TARGET},
    )
    result = filter_correlated(dataset, 0.9)
    assert result.column_names == ["a", "loan_status"]
    kept, dropped, r = result.history[-1].dropped_pairs[0]
    assert (kept, dropped) == ("a", "a_copy")
    assert r == pytest.approx(1.0)


def test_filter_correlated_keeps_independent_columns(rng):
    dataset = make_dataset(
        {"a": rng.normal(size=1000), "b": rng.normal(size=1000), "loan_status": rng.integers(0, 2, 1000)},
        {"a": NUMERIC, "b": NUMERIC, "loan_status": TARGET},
    )
    assert filter_correlated(dataset, 0.9).column_names == ["a", "b", "loan_status"]


def test_filter_correlated_keeps_first_of_three(rng):
    base = rng.normal(size=500)
    dataset = make_dataset(
        {
            "a": base,
            "b": base + rng.normal(scale=0.05, size=500),
            "c": base + rng.normal(scale=0.05, size=500),
            "loan_status": rng.integers(0, 2, 500),
        },
        {"a": NUMERIC, "b": NUMERIC, "c": NUMERIC, "loan_status": TARGET},
    )
    assert filter_correlated(dataset, 0.9).column_names == ["a", "loan_status"]


# --- chi-square ---
def test_chi_square_independent_table():
    result = chi_square_test(np.array([[10, 10], [10, 10]]))
    assert result.statistic == 0.0
    assert result.p_value == pytest.approx(1.0)


def test_chi_square_perfect_association():
    result = chi_square_test(np.array([[20, 0], [0, 20]]))
    assert result.statistic == pytest.approx(40.0)
    assert result.df == 1
    assert result.p_value == pytest.approx(chi2.sf(40.0, 1), rel=1e-9)


def test_chi_square_p_value_matches_tail_integral():
    result = chi_square_test(np.array([[30, 15], [20, 25], [10, 20]]))
    assert result.df == 2
    tail, _ = quad(chi2(result.df).pdf, result.statistic, np.inf)
    assert result.p_value == pytest.approx(tail, rel=1e-6)


def test_chi_square_single_level():
    with pytest.raises(DegenerateTableError):
        chi_square_test(np.array([[12, 8]]))


def test_filter_chi_square_drops_uninformative_and_degenerate():
    y = [0, 1] * 20
    dataset = make_dataset(
        {
            "signal": ["lo" if t == 0 else "hi" for t in y],
            "noise": ["x", "x", "y", "y"] * 10,
            "single": ["only"] * 40,
            "loan_status": y,
        },
        {"signal": CATEGORICAL, "noise": CATEGORICAL, "single": CATEGORICAL, "loan_status": TARGET},
    )
    result = filter_chi_square(dataset, 0.05)
    assert result.column_names == ["signal", "loan_status"]
    step = result.history[-1]
    assert step.dropped_columns["single"] == "degenerate contingency table"
    assert step.warnings and step.warnings[0].startswith("single")


# --- grades and target ---
def test_club_grades():
    dataset = make_dataset(
        {"grade": ["A", "E", "B", "G"], "loan_status": [0, 1, 0, 1]},
        {"grade": CATEGORICAL, "loan_status": TARGET},
        grade_column="grade",
    )
    assert club_grades(dataset).frame["grade"].tolist() == ["A", "D", "B", "D"]


def test_club_grades_unknown_level():
    dataset = make_dataset(
        {"grade": ["A", "H"], "loan_status": [0, 1]},
        {"grade": CATEGORICAL, "loan_status": TARGET},
        grade_column="grade",
    )
    with pytest.raises(UnknownLevelError):
        club_grades(dataset)


def test_binarize_target():
    dataset = make_dataset(
        {"a": [1.0, 2.0, 3.0, 4.0], "loan_status": ["Charged Off", "Fully Paid", "Current", "Default"]},
        {"a": NUMERIC, "loan_status": TARGET},
    )
    result = binarize_target(dataset)
    assert result.frame["loan_status"].tolist() == [1, 0, 1]
    assert result.frame["a"].tolist() == [1.0, 2.0, 4.0]
    assert result.history[-1].removed_rows == 1


def test_binarize_target_unknown_label():
    dataset = make_dataset({"loan_status": ["Fully Paid", "Written Off"]}, {"loan_status": TARGET})
    with pytest.raises(UnknownTargetLabelError):
        binarize_target(dataset)


# --- encoding ---
def test_one_hot_grade_block():
    dataset = make_dataset(
        {"grade": ["A", "B", "C", "D"], "loan_status": [0, 1, 0, 1]},
        {"grade": CATEGORICAL, "loan_status": TARGET},
    )
    encoded = one_hot_encode(dataset)
    assert encoded.names == ["grade=A", "grade=B", "grade=C", "grade=D"]
    assert encoded.X[1].tolist() == [0.0, 1.0, 0.0, 0.0]
    assert encoded.encoder_map["index"]["grade=C"] == 2


def test_one_hot_numeric_passthrough():
    dataset = make_dataset(
        {"a": [1.5, 2.5], "b": [3.0, 4.0], "loan_status": [0, 1]},
        {"a": NUMERIC, "b": NUMERIC, "loan_status": TARGET},
    )
    encoded = one_hot_encode(dataset)
    assert encoded.names == ["a", "b"]
    np.testing.assert_array_equal(encoded.X, [[1.5, 3.0], [2.5, 4.0]])


def test_encoder_replay_unseen_level_is_all_zero():
    train = make_dataset(
        {"grade": ["A", "B"], "loan_status": [0, 1]},
        {"grade": CATEGORICAL, "loan_status": TARGET},
    )
    replay = make_dataset(
        {"grade": ["Z", "B"], "loan_status": [0, 1]},
        {"grade": CATEGORICAL, "loan_status": TARGET},
    )
    encoded = fit_encoder(train).transform(replay)
    assert encoded.X[0].tolist() == [0.0, 0.0]
    assert encoded.X[1].tolist() == [0.0, 1.0]


def test_encoder_replays_grade_clubbing():
    train = club_grades(
        make_dataset(
            {"grade": ["A", "E", "B"], "loan_status": [0, 1, 0]},
            {"grade": CATEGORICAL, "loan_status": TARGET},
            grade_column="grade",
        )
    )
    raw = make_dataset(
        {"grade": ["F"], "loan_status": [1]},
        {"grade": CATEGORICAL, "loan_status": TARGET},
        grade_column="grade",
    )
    encoder = fit_encoder(train)
    assert encoder.levels["grade"] == ["A", "B", "D"]
    assert encoder.transform(raw).X[0].tolist() == [0.0, 0.0, 1.0]


# --- split ---
def _matrix(y: list[int]) -> EncodedMatrix:
    return EncodedMatrix(names=["row"], X=np.arange(len(y), dtype=float)[:, None], y=np.asarray(y))


def test_split_stratified_small():
    train, test = train_test_split(_matrix([0] * 5 + [1] * 5), SplitSpec(test_fraction=0.2, seed=3))
    assert test.n_rows == 2
    assert sorted(test.y.tolist()) == [0, 1]
    assert train.n_rows == 8


def test_split_deterministic_and_sized():
    m = _matrix([0] * 70 + [1] * 30)
    first = train_test_split(m, SplitSpec(test_fraction=0.2, seed=11))
    second = train_test_split(m, SplitSpec(test_fraction=0.2, seed=11))
    assert first[1].X.ravel().tolist() == second[1].X.ravel().tolist()
    assert (first[0].n_rows, first[1].n_rows) == (80, 20)
    assert int(first[1].y.sum()) == 6
    assert set(first[0].X.ravel()) | set(first[1].X.ravel()) == set(range(100))


def test_split_class_absent():
    with pytest.raises(ClassAbsentError):
        train_test_split(_matrix([0] * 9 + [1]), SplitSpec(test_fraction=0.2, seed=0))


# --- synthetic ---
def test_synthetic_rows_and_classes():
    dataset, truth = generate_synthetic(1000, seed=7)
    assert dataset.n_rows == 1000
    labels = binarize_target(dataset).target
    assert set(labels.unique()) == {0, 1}
    assert 0.0 < truth.default_rate < 1.0


def test_synthetic_byte_identical(tmp_path):
    for name in ("first", "second"):
        dataset, truth = generate_synthetic(500, seed=7)
        write_synthetic(dataset, truth, tmp_path / name / "loans.csv")
    assert (tmp_path / "first" / "loans.csv").read_bytes() == (tmp_path / "second" / "loans.csv").read_bytes()
    assert (tmp_path / "first" / "loans.truth.json").exists()
    assert (tmp_path / "first" / "loans.schema.json").exists()


def test_synthetic_recoveries_raise_default_rate(synthetic):
    dataset, _ = synthetic
    kept = binarize_target(dataset).frame
    with_recovery = kept.loc[kept["recoveries"] > 0, "loan_status"].mean()
    assert with_recovery > kept["loan_status"].mean()


def test_run_preprocessing_on_synthetic(synthetic):
    dataset, _ = synthetic
    processed = run_preprocessing(dataset)
    operations = [step.operation for step in processed.history]
    assert operations == ["binarize_target", "drop_sparse_columns", "filter_correlated", "club_grades", "filter_chi_square"]
    assert "mths_since_last_record" not in processed.column_names
    assert "funded_amnt" not in processed.column_names
    assert set(processed.frame["grade"].unique()) <= {"A", "B", "C", "D"}


def test_one_hot_blocks_partition_rows(encoded_split):
    train, test = encoded_split
    levels = train.encoder_map["levels"]
    assert levels
    for matrix in (train, test):
        for column, column_levels in levels.items():
            block = matrix.X[:, [matrix.names.index(f"{column}={level}") for level in column_levels]]
            assert set(np.unique(block)) <= {0.0, 1.0}
            assert (block.sum(axis=1) == 1.0).all()
    covered = {f"{c}={level}" for c, ls in levels.items() for level in ls} | set(train.encoder_map["columns"])
    assert set(train.names) <= covered
