from dataclasses import dataclass
from pathlib import Path

from pydantic import BaseModel, Field

from credit_explainer.classifiers.schemas import Metrics, ModelDocument
from credit_explainer.dataset.encoding import Encoder
from credit_explainer.dataset.schemas import PreprocessReport
from credit_explainer.explainers.ale import AleCurve, RefinementReport
from credit_explainer.explainers.lime_tabular import LocalExplanation
from credit_explainer.store import ArtifactCRUD, TableCRUD


class ExplanationBatch(BaseModel):
    model: str
    explainer: str = "lime"
    explanations: list[LocalExplanation]


class ShapDocument(BaseModel):
    """JSON twin of a SHAP matrix CSV; rows follow the explained test rows"""

    model: str
    explainer: str = "shap"
    feature_names: list[str]
    phi: list[list[float]]
    base_values: list[float]
    fx: list[float]
    values: list[list[float]]


class AleReport(BaseModel):
    model: str
    link: str = "identity"
    curves: list[AleCurve]
    refinement: list[RefinementReport] = Field(default_factory=list)


class ModelCRUD(ArtifactCRUD[ModelDocument]):
    resource_model = ModelDocument


class MetricsCRUD(ArtifactCRUD[Metrics]):
    resource_model = Metrics


class ExplanationCRUD(ArtifactCRUD[ExplanationBatch]):
    resource_model = ExplanationBatch


class AleCRUD(ArtifactCRUD[AleReport]):
    resource_model = AleReport


class ShapDocumentCRUD(ArtifactCRUD[ShapDocument]):
    resource_model = ShapDocument


class PreprocessCRUD(ArtifactCRUD[PreprocessReport]):
    resource_model = PreprocessReport


class EncoderCRUD(ArtifactCRUD[Encoder]):
    resource_model = Encoder


@dataclass(frozen=True)
class ArtifactStores:
    """Every store rooted under one artifact directory."""

    root: Path
    encoded: TableCRUD
    encoders: EncoderCRUD
    preprocess: PreprocessCRUD
    models: ModelCRUD
    metrics: MetricsCRUD
    explanations: ExplanationCRUD
    shap_tables: TableCRUD
    shap_documents: ShapDocumentCRUD
    ale: AleCRUD
    ale_tables: TableCRUD
    reports: Path


def artifact_stores(root: str | Path) -> ArtifactStores:
    root = Path(root)
    return ArtifactStores(
        root=root,
        encoded=TableCRUD(root / "encoded"),
        encoders=EncoderCRUD(Encoder, root / "encoded"),
        preprocess=PreprocessCRUD(PreprocessReport, root / "encoded"),
        models=ModelCRUD(ModelDocument, root / "models"),
        metrics=MetricsCRUD(Metrics, root / "models"),
        explanations=ExplanationCRUD(ExplanationBatch, root / "explanations"),
        shap_tables=TableCRUD(root / "explanations"),
        shap_documents=ShapDocumentCRUD(ShapDocument, root / "explanations"),
        ale=AleCRUD(AleReport, root / "explanations"),
        ale_tables=TableCRUD(root / "explanations"),
        reports=root / "reports",
    )
