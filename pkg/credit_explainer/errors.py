class CreditExplainerError(Exception):
    """Base error; `code` is the machine-readable tag written to error records."""

    code = "ERROR"

    def __init__(self, message: str, detail: str | None = None) -> None:
        super().__init__(message)
        self.message = message
        self.detail = detail

    def to_record(self) -> dict:
        return {"error": self.message, "code": self.code, "detail": self.detail}


# --- dataset ---
class MissingColumnError(CreditExplainerError):
    code = "MISSING_COLUMN"


class RowWidthMismatchError(CreditExplainerError):
    code = "ROW_WIDTH_MISMATCH"


class UnknownTargetLabelError(CreditExplainerError):
    code = "UNKNOWN_TARGET_LABEL"


class AllColumnsDroppedError(CreditExplainerError):
    code = "ALL_COLUMNS_DROPPED"


class DegenerateTableError(CreditExplainerError):
    code = "DEGENERATE_TABLE"


class UnknownLevelError(CreditExplainerError):
    code = "UNKNOWN_LEVEL"


class EmptyAfterFilterError(CreditExplainerError):
    code = "EMPTY_AFTER_FILTER"


class UnseenLevelError(CreditExplainerError):
    code = "UNSEEN_LEVEL"


class ClassAbsentError(CreditExplainerError):
    code = "CLASS_ABSENT"


# --- classifiers ---
class NonFiniteLossError(CreditExplainerError):
    code = "NON_FINITE_LOSS"


class NotAnSvmError(CreditExplainerError):
    code = "NOT_AN_SVM"


class ShapeMismatchError(CreditExplainerError):
    code = "SHAPE_MISMATCH"


class NotTreeBasedError(CreditExplainerError):
    code = "NOT_TREE_BASED"


# --- explainers ---
class SingularSystemError(CreditExplainerError):
    code = "SINGULAR_SYSTEM"


class DomainError(CreditExplainerError):
    code = "DOMAIN_ERROR"


class TooManyFeaturesError(CreditExplainerError):
    code = "TOO_MANY_FEATURES"


class ConstantFeatureError(CreditExplainerError):
    code = "CONSTANT_FEATURE"


# --- cli ---
class MissingArtifactError(CreditExplainerError):
    code = "MISSING_ARTIFACT"


class UsageError(CreditExplainerError):
    code = "USAGE"
