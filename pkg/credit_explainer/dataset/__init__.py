from credit_explainer.dataset.encoding import Encoder, fit_encoder, one_hot_encode, train_test_split
from credit_explainer.dataset.loader import load_csv, load_schema
from credit_explainer.dataset.preprocess import (
    binarize_target,
    chi_square_test,
    club_grades,
    drop_sparse_columns,
    filter_chi_square,
    filter_correlated,
    run_preprocessing,
)
from credit_explainer.dataset.schemas import (
    ColumnKind,
    Dataset,
    DatasetSchema,
    EncodedMatrix,
    PreprocessReport,
    PreprocessStep,
    SplitSpec,
)
from credit_explainer.dataset.synthetic import SyntheticTruth, generate_synthetic, synthetic_schema, write_synthetic

__all__ = [
    "ColumnKind",
    "Dataset",
    "DatasetSchema",
    "EncodedMatrix",
    "Encoder",
    "PreprocessReport",
    "PreprocessStep",
    "SplitSpec",
    "SyntheticTruth",
    "binarize_target",
    "chi_square_test",
    "club_grades",
    "drop_sparse_columns",
    "filter_chi_square",
    "filter_correlated",
    "fit_encoder",
    "generate_synthetic",
    "load_csv",
    "load_schema",
    "one_hot_encode",
    "run_preprocessing",
    "synthetic_schema",
    "train_test_split",
    "write_synthetic",
]
