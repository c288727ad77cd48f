import enum
from typing import Any

from pydantic import BaseModel, Field

MODEL_FORMAT_VERSION = 1


class ModelKind(str, enum.Enum):
    LOGISTIC = "logistic"
    FOREST = "forest"
    BOOSTED = "boosted"
    SVM_LINEAR = "svm_linear"
    MLP = "mlp"


class ModelDocument(BaseModel):
    """Versioned JSON document of a trained model"""

    format_version: int = Field(MODEL_FORMAT_VERSION, description="Document layout version")
    kind: ModelKind = Field(..., description="Model family tag")
    feature_names: list[str] = Field(..., description="Encoded feature names, in column order")
    parameters: dict[str, Any] = Field(..., description="Kind-specific learned values")


class Metrics(BaseModel):
    """Classification metrics at a fixed threshold plus threshold-free ROC-AUC"""

    accuracy: float = Field(..., ge=0.0, le=1.0)
    precision: float = Field(..., ge=0.0, le=1.0)
    recall: float = Field(..., ge=0.0, le=1.0)
    f1: float = Field(..., ge=0.0, le=1.0)
    roc_auc: float = Field(..., ge=0.0, le=1.0)
    threshold: float = 0.5
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0
    undefined: list[str] = Field(default_factory=list, description="Metrics reported as 0 because they are undefined")


class FeatureScore(BaseModel):
    feature: str
    score: float
